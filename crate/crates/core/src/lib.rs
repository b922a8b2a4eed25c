//! Stress-test audits for classification systems.
//!
//! Stakeholders curate *stress tests* (example sets with a metric, a
//! threshold and a privacy level); providers submit signed prediction
//! scores; the toolkit scores them, releases only what each test's privacy
//! level allows, and keeps an append-only model card per model version.
//!
//! Module map:
//!
//! * [`types`] and [`canonical`]: domain values and their canonical bytes.
//! * [`metrics`]: accuracy and the independence / separation / sufficiency gaps.
//! * [`evaluate`]: scoring, privacy filtering, the ladder rule, overlap audit.
//! * [`crypto`]: hashing, scrypt key derivation, Ed25519 signatures.
//! * [`registry`]: the multi-stakeholder store and its HTTP API.
//! * [`simlab`]: synthetic experiments (domain shift, adaptive attacks).

pub mod canonical;
pub mod crypto;
pub mod error;
pub mod evaluate;
mod hexser;
pub mod metrics;
pub mod registry;
pub mod simlab;
pub mod types;

pub use canonical::canonical_encode;
pub use crypto::{
    derive_keys, hash_dataset, hash_example, hash_model, hash_score, sign_prediction,
    sign_stress_results, sign_stress_test, verify_prediction, verify_stress_test, Digest, KeyPair,
    ModelSnapshot, PublicKey, Salt, Signature, SignatureRecord,
};
pub use error::{Error, Result};
pub use evaluate::{
    audit_overlap, evaluate_stress_test, filter_report, ladder_update, FilteredReport, LadderState,
    OverlapReport,
};
pub use registry::{ModelCard, Reader, Registry, StressTestDoc};
pub use types::{
    fair_wrt, Dataset, Direction, Example, FeatureValue, Label, MetricKind, MetricSpec,
    PredictionEntry, PredictionSet, PrivacyLevel, Provenance, ProvenanceKind, StressManifest,
    StressOutcome, StressTest,
};
