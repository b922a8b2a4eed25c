//! Adaptive overfitting of a stress test by a hill-climbing provider.
//!
//! The provider starts from a logistic scorer fit on its own training
//! sample, then repeatedly perturbs the weights with Gaussian noise and
//! submits the candidate to the stress test. A candidate is kept iff the
//! released feedback beats the feedback of the currently kept model. The
//! overfit gap is the distance between the last feedback for the kept model
//! and its accuracy on a large fresh sample from the same distribution.

use chrono::{DateTime, Duration, Utc};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::scorer::{sigmoid, train_linear_scorer, LinearScorer};
use super::two_county::predictions;
use super::{rng, SimRng, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate_stress_test, filter_report, FilteredReport, LadderState};
use crate::types::{
    Dataset, Example, FeatureValue, Label, MetricKind, MetricSpec, PrivacyLevel, Provenance,
    ProvenanceKind, StressManifest, StressTest,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub rounds: usize,
    pub feedback: PrivacyLevel,
    pub seed: u64,
    /// Size of the stress test the attacker probes.
    pub holdout_n: usize,
    /// Size of the fresh sample measuring true accuracy.
    pub fresh_n: usize,
    /// Size of the provider's own training sample.
    pub train_n: usize,
    pub dims: usize,
    /// Logit coefficient of the single informative feature.
    pub signal: f64,
    /// Standard deviation of each weight perturbation.
    pub step_scale: f64,
    /// Accuracy threshold of the probed stress test.
    pub threshold: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            rounds: 200,
            feedback: PrivacyLevel::Full,
            seed: 0,
            holdout_n: 500,
            fresh_n: 5000,
            train_n: 2000,
            dims: 100,
            signal: 1.0,
            step_scale: 0.01,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub config: AttackConfig,
    pub rng_algorithm: String,
    /// Feedback for the finally kept model, as the attacker last saw it.
    pub reported_metric: f64,
    /// Accuracy of the kept model on the fresh sample.
    pub fresh_metric: f64,
    pub overfit_gap: f64,
    pub accepted: usize,
    /// Feedback value of every submission, the initial one included.
    pub feedback_history: Vec<f64>,
}

fn sample_examples(cfg: &AttackConfig, n: usize, prefix: &str, rng: &mut SimRng) -> Vec<Example> {
    (0..n)
        .map(|i| {
            let xs: Vec<f64> = (0..cfg.dims).map(|_| rng.sample(StandardNormal)).collect();
            let p = sigmoid(cfg.signal * xs[0]);
            let mut ex = Example::new(format!("{prefix}-{i:05}"))
                .with_label(Label::from_decision(rng.random_bool(p)));
            for (j, x) in xs.into_iter().enumerate() {
                ex = ex.with_feature(format!("f{j:02}"), FeatureValue::Number(x));
            }
            ex
        })
        .collect()
}

/// Numeric view of a submission's feedback: the metric when one is
/// released, otherwise 1 for pass and 0 for fail.
fn feedback_value(report: &FilteredReport) -> f64 {
    report
        .released_value
        .or(report.metric_value)
        .unwrap_or(if report.passed { 1.0 } else { 0.0 })
}

fn validate(cfg: &AttackConfig) -> Result<()> {
    if cfg.rounds > 1_000_000 {
        return Err(Error::InvalidRounds(format!(
            "{} rounds is too many",
            cfg.rounds
        )));
    }
    if cfg.holdout_n == 0 || cfg.fresh_n == 0 || cfg.train_n == 0 || cfg.dims == 0 {
        return Err(Error::InvalidConfig(
            "sample sizes and dims must be positive".into(),
        ));
    }
    if !(cfg.step_scale.is_finite() && cfg.step_scale >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "step_scale {}",
            cfg.step_scale
        )));
    }
    Ok(())
}

pub fn run_adaptive_attack(cfg: &AttackConfig) -> Result<AttackReport> {
    validate(cfg)?;
    // Data and attack noise use separate streams so paired runs with
    // different feedback see identical data and identical perturbations.
    let mut data_rng = rng(cfg.seed);
    let mut noise_rng = rng(cfg.seed ^ 0x5EED_A77A_C4ED_0001);

    let train = Dataset::new(
        "attack-train",
        Provenance::new(ProvenanceKind::Training, "provider's own sample"),
        sample_examples(cfg, cfg.train_n, "train", &mut data_rng),
    )?;
    let holdout = sample_examples(cfg, cfg.holdout_n, "holdout", &mut data_rng);
    let fresh = sample_examples(cfg, cfg.fresh_n, "fresh", &mut data_rng);

    let manifest = StressManifest::new(
        "attack-holdout",
        "simlab",
        MetricSpec::new(MetricKind::Accuracy, cfg.threshold)?,
        cfg.feedback,
    );
    let test = StressTest::new(manifest, holdout)?;
    let spec = test.metric().clone();

    let mut kept = train_linear_scorer(&train, 0.5, 100)?;
    kept.trace.clear();
    let fresh_rows = fresh
        .iter()
        .map(|e| kept.row(e))
        .collect::<Result<Vec<_>>>()?;

    let mut ladder = match cfg.feedback {
        PrivacyLevel::Ladder { step } => Some(LadderState::new(
            test.id(),
            "attacker",
            step,
            spec.direction,
        )?),
        _ => None,
    };
    // a fixed clock keeps runs bit-reproducible
    let t0: DateTime<Utc> = "2026-01-01T00:00:00Z".parse().expect("valid timestamp");

    let mut submit = |scorer: &LinearScorer, round: usize| -> Result<f64> {
        let at = t0 + Duration::seconds(round as i64);
        let preds = predictions(scorer, &test, "attacker")?;
        let outcome = evaluate_stress_test(&test, &preds, at)?;
        let (report, next) = filter_report(&outcome, cfg.feedback, ladder.as_ref(), at)?;
        if next.is_some() {
            ladder = next;
        }
        Ok(feedback_value(&report))
    };

    let mut best = submit(&kept, 0)?;
    let mut history = vec![best];
    let mut accepted = 0;
    for round in 1..=cfg.rounds {
        let mut candidate = kept.clone();
        let params: Vec<f64> = kept
            .params()
            .iter()
            .map(|p| p + cfg.step_scale * noise_rng.sample::<f64, _>(StandardNormal))
            .collect();
        candidate.set_params(&params);
        let value = submit(&candidate, round)?;
        history.push(value);
        let improves = match spec.direction {
            crate::types::Direction::AtLeast => value > best,
            crate::types::Direction::AtMost => value < best,
        };
        if improves {
            kept = candidate;
            best = value;
            accepted += 1;
        }
    }

    let labels: Vec<bool> = fresh
        .iter()
        .map(|e| e.label.expect("generated").is_positive())
        .collect();
    let correct = fresh_rows
        .iter()
        .zip(&labels)
        .filter(|(row, &y)| (kept.score_row(row) >= spec.decision_threshold) == y)
        .count();
    let fresh_metric = correct as f64 / fresh_rows.len() as f64;

    Ok(AttackReport {
        config: cfg.clone(),
        rng_algorithm: RNG_ALGORITHM.to_owned(),
        reported_metric: best,
        fresh_metric,
        overfit_gap: (best - fresh_metric).abs(),
        accepted,
        feedback_history: history,
    })
}
