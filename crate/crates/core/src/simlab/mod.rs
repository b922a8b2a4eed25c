//! Desk-scale experiments on synthetic data.
//!
//! * [`two_county`]: a classifier trained where a proxy feature predicts the
//!   label aces an in-domain stress test and fails an out-domain one where
//!   the proxy's correlation reverses.
//! * [`attack`]: a hill-climbing provider overfits a stress test when it
//!   sees exact metric values, much less so behind the ladder.
//!
//! All randomness comes from one seeded generator per run (see
//! [`RNG_ALGORITHM`]), so every result is bit-reproducible from its
//! configuration.

pub mod attack;
pub mod scorer;
pub mod two_county;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use attack::{run_adaptive_attack, AttackConfig, AttackReport};
pub use scorer::{logistic_gradient, logistic_loss, train_linear_scorer, LinearScorer};
pub use two_county::{
    gen_two_county, run_two_county_experiment, ExperimentReport, TwoCounty, TwoCountyConfig,
};

/// Recorded in every report.
pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha 0.9, seed_from_u64); normals via rand_distr 0.5 StandardNormal (ziggurat)";

pub(crate) type SimRng = ChaCha8Rng;

pub(crate) fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}
