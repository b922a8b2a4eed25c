//! Multi-stakeholder registry: curators publish stress tests, providers
//! register model snapshots and submit signed evaluations, and anyone reads
//! model cards filtered by each test's privacy level.
//!
//! Everything lives in a [`Store`] under these keys:
//!
//! ```text
//! model/{model_id}                 redacted ModelSnapshot
//! test/{test_id}                   StressTestDoc
//! manifest/{digest}                signature records, addressed by manifest_digest
//! card/{model_id}/{seq:020}        CardRecord (append-only)
//! ladder/{test_id}/{lineage}       LadderState
//! audit/{model_id}/{seq:020}       AuditRecord (append-only)
//! ```

pub mod http;
pub mod store;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::crypto::{
    manifest_digest, signature_records, verify_stress_test, Digest, ModelSnapshot, PublicKey,
    Signature, SignatureRecord,
};
use crate::error::{Error, Result};
use crate::evaluate::{
    audit_overlap, evaluate_stress_test, filter_report, FilteredReport, LadderState, OverlapReport,
};
use crate::types::{
    Example, PredictionSet, PrivacyLevel, StressManifest, StressOutcome, StressTest,
};

pub use store::{Store, Txn};

/// Wire and storage form of a stress test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StressTestDoc {
    pub manifest: StressManifest,
    pub examples: Vec<Example>,
}

impl StressTestDoc {
    pub fn into_test(self) -> Result<StressTest> {
        StressTest::new(self.manifest, self.examples)
    }
}

impl From<&StressTest> for StressTestDoc {
    fn from(test: &StressTest) -> Self {
        StressTestDoc {
            manifest: test.manifest().clone(),
            examples: test.examples().examples().to_vec(),
        }
    }
}

/// What a reader gets back for a stress test. Raw examples only for Full
/// privacy tests or the test's own curator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressTestView {
    pub manifest: StressManifest,
    pub example_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub examples: Option<Vec<Example>>,
}

/// Who is asking. Stakeholder ids come from API tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reader {
    Public,
    Stakeholder(String),
}

impl Reader {
    pub fn is(&self, stakeholder: &str) -> bool {
        matches!(self, Reader::Stakeholder(s) if s == stakeholder)
    }
}

/// Stored card entry. The full outcome stays server-side; readers see
/// `report` unless they curate the test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardRecord {
    pub stress_test_id: String,
    pub curator: String,
    pub privacy: PrivacyLevel,
    pub outcome: StressOutcome,
    pub report: FilteredReport,
    pub manifest_digest: Digest,
    pub evaluated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardEntry {
    pub stress_test_id: String,
    pub curator: String,
    pub report: FilteredReport,
    pub manifest_digest: Digest,
    pub evaluated_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub lineage: String,
    pub model_hash: Digest,
    pub training_data_hash: Digest,
    pub public_key: PublicKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub model_id: String,
    pub audited_at: DateTime<Utc>,
    pub reports: Vec<OverlapReport>,
}

/// Per-test results listed one by one. There is deliberately no field
/// combining results across tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelCard {
    pub model_id: String,
    pub snapshot: SnapshotSummary,
    pub entries: Vec<CardEntry>,
    pub overlap_audits: Vec<AuditRecord>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReverifyReport {
    pub entries_checked: usize,
    pub signatures_checked: usize,
    pub failures: Vec<String>,
}

impl ReverifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct Registry {
    store: Store,
    clock: Clock,
    tokens: BTreeMap<String, String>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry")
            .field("store", &self.store.path())
            .field("tokens", &self.tokens.len())
            .finish()
    }
}

fn model_key(id: &str) -> String {
    format!("model/{id}")
}

fn test_key(id: &str) -> String {
    format!("test/{id}")
}

fn card_prefix(model_id: &str) -> String {
    format!("card/{model_id}/")
}

fn audit_prefix(model_id: &str) -> String {
    format!("audit/{model_id}/")
}

fn check_id(kind: &str, id: &str) -> Result<()> {
    if id.is_empty() || id.contains('/') || id.chars().any(char::is_control) {
        return Err(Error::SchemaViolation(format!(
            "{kind} id {id:?} must be non-empty without '/'"
        )));
    }
    Ok(())
}

impl Registry {
    pub fn new(store: Store) -> Self {
        Registry {
            store,
            clock: Arc::new(Utc::now),
            tokens: BTreeMap::new(),
        }
    }

    pub fn in_memory() -> Self {
        Registry::new(Store::in_memory())
    }

    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    /// Maps an API token to a stakeholder id.
    pub fn with_token(mut self, token: impl Into<String>, stakeholder: impl Into<String>) -> Self {
        self.tokens.insert(token.into(), stakeholder.into());
        self
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    /// `None` for an unknown token.
    pub fn reader_for_token(&self, token: Option<&str>) -> Option<Reader> {
        match token {
            None => Some(Reader::Public),
            Some(t) => self.tokens.get(t).map(|s| Reader::Stakeholder(s.clone())),
        }
    }

    /// Stores the snapshot without its salts. Re-registering identical
    /// content returns the same id. A snapshot carrying its key salt must
    /// re-derive to its public key.
    pub fn register_model(&self, snapshot: &ModelSnapshot) -> Result<String> {
        check_id("model", &snapshot.model_id)?;
        if snapshot.verify_derivation() == Some(false) {
            return Err(Error::SchemaViolation(format!(
                "public key of {:?} does not derive from its model hash and key salt",
                snapshot.model_id
            )));
        }
        let stored = snapshot.redacted();
        let value = serde_json::to_value(&stored)?;
        let key = model_key(&stored.model_id);
        self.store.update(|txn| match txn.get(&key) {
            Some(existing) if *existing == value => Ok(()),
            Some(_) => Err(Error::DuplicateModelId(stored.model_id.clone())),
            None => {
                txn.put(key.clone(), value.clone());
                Ok(())
            }
        })?;
        Ok(stored.model_id)
    }

    pub fn get_model(&self, model_id: &str) -> Result<ModelSnapshot> {
        self.store
            .get_as(&model_key(model_id))?
            .ok_or_else(|| Error::UnknownModel(model_id.to_owned()))
    }

    pub fn submit_stress_test(&self, test: &StressTest) -> Result<String> {
        check_id("stress test", test.id())?;
        if test.curator_signature().is_some() && !verify_stress_test(test) {
            return Err(Error::InvalidSignature(None));
        }
        let value = serde_json::to_value(StressTestDoc::from(test))?;
        let key = test_key(test.id());
        self.store.update(|txn| match txn.get(&key) {
            Some(existing) if *existing == value => Ok(()),
            Some(_) => Err(Error::DuplicateStressTestId(test.id().to_owned())),
            None => {
                txn.put(key.clone(), value.clone());
                Ok(())
            }
        })?;
        Ok(test.id().to_owned())
    }

    fn load_test(&self, test_id: &str) -> Result<StressTest> {
        let doc: StressTestDoc = self
            .store
            .get_as(&test_key(test_id))?
            .ok_or_else(|| Error::UnknownTest(test_id.to_owned()))?;
        doc.into_test()
    }

    pub fn get_stress_test(&self, test_id: &str, reader: &Reader) -> Result<StressTestView> {
        let test = self.load_test(test_id)?;
        let reveal = test.privacy() == PrivacyLevel::Full || reader.is(test.curator());
        Ok(StressTestView {
            manifest: test.manifest().clone(),
            example_count: test.len(),
            examples: reveal.then(|| test.examples().examples().to_vec()),
        })
    }

    pub fn stress_test_ids(&self) -> Result<Vec<String>> {
        Ok(self
            .store
            .scan_prefix("test/")?
            .into_iter()
            .map(|(k, _)| k["test/".len()..].to_owned())
            .collect())
    }

    /// Verifies every signature, scores the predictions, releases what the
    /// test's privacy level allows, and appends the result to the model
    /// card. Nothing is written unless every step succeeds.
    pub fn submit_evaluation(
        &self,
        model_id: &str,
        test_id: &str,
        preds: &PredictionSet,
        signatures: &[Signature],
    ) -> Result<FilteredReport> {
        let model = self.get_model(model_id)?;
        let test = self.load_test(test_id)?;
        if preds.model_id() != model_id || preds.stress_test_id() != test_id {
            return Err(Error::SchemaViolation(format!(
                "predictions are for ({:?}, {:?}), not ({model_id:?}, {test_id:?})",
                preds.model_id(),
                preds.stress_test_id()
            )));
        }
        let now = self.now();
        if let Some(until) = test.valid_until().filter(|_| test.is_expired(now)) {
            return Err(Error::Expired {
                test_id: test_id.to_owned(),
                valid_until: until.to_rfc3339(),
            });
        }
        preds.check_coverage(&test)?;
        if signatures.len() != preds.entries().len() {
            return Err(Error::InvalidSignature(Some(format!(
                "{} signatures for {} entries",
                signatures.len(),
                preds.entries().len()
            ))));
        }
        let records = signature_records(&test, preds, signatures)?;
        if let Some((entry, _)) = preds
            .entries()
            .iter()
            .zip(&records)
            .find(|(_, r)| !r.verify_with(&model.public_key))
        {
            return Err(Error::InvalidSignature(Some(entry.example_id.clone())));
        }
        let outcome = evaluate_stress_test(&test, preds, now)?;
        let digest = manifest_digest(&records);
        let ladder_key = format!("ladder/{test_id}/{}", model.lineage());

        self.store.update(|txn| {
            let ladder = match test.privacy() {
                PrivacyLevel::Ladder { step } => {
                    Some(match txn.get_as::<LadderState>(&ladder_key)? {
                        Some(state) => state,
                        None => LadderState::new(
                            test_id,
                            model.lineage(),
                            step,
                            test.metric().direction,
                        )?,
                    })
                }
                _ => None,
            };
            let (report, next) = filter_report(&outcome, test.privacy(), ladder.as_ref(), now)?;
            if let Some(next) = next {
                txn.put_as(ladder_key.clone(), &next)?;
            }
            txn.put_as(format!("manifest/{digest}"), &records)?;
            let prefix = card_prefix(model_id);
            let seq = txn.count_prefix(&prefix);
            txn.put_as(
                format!("{prefix}{seq:020}"),
                &CardRecord {
                    stress_test_id: test_id.to_owned(),
                    curator: test.curator().to_owned(),
                    privacy: test.privacy(),
                    outcome: outcome.clone(),
                    report: report.clone(),
                    manifest_digest: digest,
                    evaluated_at: now,
                },
            )?;
            Ok(report)
        })
    }

    fn card_records(&self, model_id: &str) -> Result<Vec<CardRecord>> {
        self.store
            .scan_prefix(&card_prefix(model_id))?
            .into_iter()
            .map(|(_, v)| serde_json::from_value(v).map_err(Error::from))
            .collect()
    }

    pub fn get_model_card(&self, model_id: &str, reader: &Reader) -> Result<ModelCard> {
        let model = self.get_model(model_id)?;
        let now = self.now();
        let entries = self
            .card_records(model_id)?
            .into_iter()
            .map(|rec| {
                let report = if reader.is(&rec.curator) {
                    filter_report(&rec.outcome, PrivacyLevel::Full, None, now)?.0
                } else {
                    rec.report
                };
                Ok(CardEntry {
                    stress_test_id: rec.stress_test_id,
                    curator: rec.curator,
                    report,
                    manifest_digest: rec.manifest_digest,
                    evaluated_at: rec.evaluated_at,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let overlap_audits = self
            .store
            .scan_prefix(&audit_prefix(model_id))?
            .into_iter()
            .map(|(_, v)| serde_json::from_value(v).map_err(Error::from))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelCard {
            model_id: model.model_id.clone(),
            snapshot: SnapshotSummary {
                lineage: model.lineage().to_owned(),
                model_hash: model.model_hash,
                training_data_hash: model.training_data_hash,
                public_key: model.public_key,
            },
            entries,
            overlap_audits,
        })
    }

    pub fn get_manifest(&self, digest: &Digest) -> Result<Option<Vec<SignatureRecord>>> {
        self.store.get_as(&format!("manifest/{digest}"))
    }

    /// Checks every stored stress test against the model's training-example
    /// hashes and records the result on the model card.
    pub fn post_overlap_audit(
        &self,
        model_id: &str,
        training_example_hashes: &HashSet<Digest>,
    ) -> Result<AuditRecord> {
        self.get_model(model_id)?;
        let reports = self
            .stress_test_ids()?
            .iter()
            .map(|id| Ok(audit_overlap(training_example_hashes, &self.load_test(id)?)))
            .collect::<Result<Vec<_>>>()?;
        let record = AuditRecord {
            model_id: model_id.to_owned(),
            audited_at: self.now(),
            reports,
        };
        self.store.update(|txn| {
            let prefix = audit_prefix(model_id);
            let seq = txn.count_prefix(&prefix);
            txn.put_as(format!("{prefix}{seq:020}"), &record)
        })?;
        Ok(record)
    }

    /// Re-checks every card entry: its manifest exists, hashes to its
    /// address, covers the test, and verifies under the model's key.
    pub fn reverify_all(&self) -> Result<ReverifyReport> {
        let mut report = ReverifyReport::default();
        for (key, value) in self.store.scan_prefix("card/")? {
            report.entries_checked += 1;
            let rec: CardRecord = serde_json::from_value(value)?;
            let model_id = key["card/".len()..].rsplit_once('/').map_or("", |(m, _)| m);
            let mut fail = |why: String| report.failures.push(format!("{key}: {why}"));
            let model = match self.get_model(model_id) {
                Ok(m) => m,
                Err(e) => {
                    fail(e.to_string());
                    continue;
                }
            };
            let Some(records) = self.get_manifest(&rec.manifest_digest)? else {
                fail(format!("manifest {} missing", rec.manifest_digest));
                continue;
            };
            if manifest_digest(&records) != rec.manifest_digest {
                fail("manifest content does not match its digest".into());
                continue;
            }
            match self.load_test(&rec.stress_test_id) {
                Ok(test) if test.len() != records.len() => fail(format!(
                    "{} signatures for {} examples",
                    records.len(),
                    test.len()
                )),
                Ok(_) => {}
                Err(e) => fail(e.to_string()),
            }
            let bad = records
                .iter()
                .filter(|r| !r.verify_with(&model.public_key))
                .count();
            if bad > 0 {
                fail(format!("{bad} signatures do not verify"));
            }
            report.signatures_checked += records.len();
        }
        Ok(report)
    }
}
