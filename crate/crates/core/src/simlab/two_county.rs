//! Two-county generator: a stable feature and a proxy whose correlation
//! with the label may reverse between domains.
//!
//! Labels are ±1 with equal probability. Given `y`,
//!
//! ```text
//! x1 = 0.6·y + 0.8·z1                      (corr(x1, y) = 0.6 in both domains)
//! x2 = s·ρ·y + sqrt(1 − ρ²)·z2             (corr(x2, y) = s·ρ)
//! ```
//!
//! with `z1, z2 ~ N(0, 1)`, `s = +1` in domain A and `s = −1` in domain B
//! when `flip` is set. Group labels `g0` / `g1` are drawn independently of
//! everything else with `P(g0) = (1 + group_skew) / 2`.

use chrono::Utc;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scorer::{train_linear_scorer, LinearScorer};
use super::{rng, SimRng, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::evaluate::evaluate_stress_test;
use crate::types::{
    Dataset, Example, FeatureValue, Label, MetricKind, MetricSpec, PredictionEntry, PredictionSet,
    PrivacyLevel, Provenance, ProvenanceKind, StressManifest, StressTest,
};

pub const STABLE_CORRELATION: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TwoCountyConfig {
    pub n_per_domain: usize,
    pub rho: f64,
    pub flip: bool,
    pub group_skew: f64,
    pub seed: u64,
    /// Accuracy both stress tests must reach.
    pub threshold: f64,
    pub lr: f64,
    pub epochs: usize,
}

impl Default for TwoCountyConfig {
    fn default() -> Self {
        TwoCountyConfig {
            n_per_domain: 2000,
            rho: 0.9,
            flip: true,
            group_skew: 0.0,
            seed: 0,
            threshold: 0.75,
            lr: 0.5,
            epochs: 200,
        }
    }
}

impl TwoCountyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_per_domain < 10 {
            return bad(format!(
                "n_per_domain must be >= 10, got {}",
                self.n_per_domain
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1], got {}", self.rho));
        }
        if !(0.0..=1.0).contains(&self.group_skew) {
            return bad(format!(
                "group_skew must lie in [0, 1], got {}",
                self.group_skew
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            ));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return bad(format!("lr must be non-negative, got {}", self.lr));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    A,
    B,
}

/// Coefficients of `y` in `x1` and `x2`, and the noise scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainParams {
    pub x1_signal: f64,
    pub x1_noise: f64,
    pub x2_signal: f64,
    pub x2_noise: f64,
}

pub fn domain_params(cfg: &TwoCountyConfig, domain: Domain) -> DomainParams {
    let sign = if domain == Domain::B && cfg.flip {
        -1.0
    } else {
        1.0
    };
    DomainParams {
        x1_signal: STABLE_CORRELATION,
        x1_noise: (1.0 - STABLE_CORRELATION * STABLE_CORRELATION).sqrt(),
        x2_signal: sign * cfg.rho,
        x2_noise: (1.0 - cfg.rho * cfg.rho).sqrt(),
    }
}

fn sample_domain(
    cfg: &TwoCountyConfig,
    domain: Domain,
    prefix: &str,
    rng: &mut SimRng,
) -> Vec<Example> {
    let p = domain_params(cfg, domain);
    let p_g0 = 0.5 * (1.0 + cfg.group_skew);
    (0..cfg.n_per_domain)
        .map(|i| {
            let label = Label::from_decision(rng.random_bool(0.5));
            let y = label.as_f64();
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let group = if rng.random_bool(p_g0) { "g0" } else { "g1" };
            Example::new(format!("{prefix}-{i:05}"))
                .with_feature(
                    "x1",
                    FeatureValue::Number(p.x1_signal * y + p.x1_noise * z1),
                )
                .with_feature(
                    "x2",
                    FeatureValue::Number(p.x2_signal * y + p.x2_noise * z2),
                )
                .with_sensitive_attr(group)
                .with_label(label)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoCounty {
    pub train: Dataset,
    pub stress_in: StressTest,
    pub stress_out: StressTest,
}

fn accuracy_test(
    id: &str,
    datasheet: &str,
    threshold: f64,
    examples: Vec<Example>,
) -> Result<StressTest> {
    let mut manifest = StressManifest::new(
        id,
        "simlab",
        MetricSpec::new(MetricKind::Accuracy, threshold)?,
        PrivacyLevel::Full,
    );
    manifest.datasheet = datasheet.to_owned();
    StressTest::new(manifest, examples)
}

/// Training set and in-domain stress test from domain A, out-domain
/// stress test from domain B, drawn in that order from one seeded stream.
pub fn gen_two_county(cfg: &TwoCountyConfig) -> Result<TwoCounty> {
    cfg.validate()?;
    let mut rng = rng(cfg.seed);
    let train = sample_domain(cfg, Domain::A, "train", &mut rng);
    let inside = sample_domain(cfg, Domain::A, "in", &mut rng);
    let outside = sample_domain(cfg, Domain::B, "out", &mut rng);
    Ok(TwoCounty {
        train: Dataset::new(
            "two-county-train",
            Provenance::new(ProvenanceKind::Training, "domain A"),
            train,
        )?,
        stress_in: accuracy_test(
            "two-county-in",
            "held-out sample from the training county (domain A)",
            cfg.threshold,
            inside,
        )?,
        stress_out: accuracy_test(
            "two-county-out",
            "sample from the second county (domain B), proxy correlation reversed when flip is set",
            cfg.threshold,
            outside,
        )?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: TwoCountyConfig,
    pub rng_algorithm: String,
    pub acc_in: f64,
    pub acc_out: f64,
    pub pass_in: bool,
    pub pass_out: bool,
    pub final_train_loss: f64,
    pub weights: Vec<f64>,
    pub bias: f64,
}

pub(crate) fn predictions(
    scorer: &LinearScorer,
    test: &StressTest,
    model_id: &str,
) -> Result<PredictionSet> {
    let entries = test
        .examples()
        .examples()
        .iter()
        .map(|e| Ok(PredictionEntry::new(e.id.clone(), scorer.score(e)?)))
        .collect::<Result<Vec<_>>>()?;
    PredictionSet::new(model_id, test.id(), entries, Utc::now())
}

/// Trains on domain A and runs both stress tests through the evaluator.
pub fn run_two_county_experiment(cfg: &TwoCountyConfig) -> Result<ExperimentReport> {
    let data = gen_two_county(cfg)?;
    let scorer = train_linear_scorer(&data.train, cfg.lr, cfg.epochs)?;
    let now = Utc::now();
    let model_id = format!("simlab-logreg-seed{}", cfg.seed);
    let inside = evaluate_stress_test(
        &data.stress_in,
        &predictions(&scorer, &data.stress_in, &model_id)?,
        now,
    )?;
    let outside = evaluate_stress_test(
        &data.stress_out,
        &predictions(&scorer, &data.stress_out, &model_id)?,
        now,
    )?;
    Ok(ExperimentReport {
        config: cfg.clone(),
        rng_algorithm: RNG_ALGORITHM.to_owned(),
        acc_in: inside.metric_value,
        acc_out: outside.metric_value,
        pass_in: inside.passed,
        pass_out: outside.passed,
        final_train_loss: *scorer.trace.last().expect("trace holds the initial loss"),
        weights: scorer.weights.clone(),
        bias: scorer.bias,
    })
}
