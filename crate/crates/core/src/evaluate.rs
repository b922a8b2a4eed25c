//! Scoring prediction sets against stress tests, privacy filtering of the
//! result, the ladder release rule, and the training-overlap audit.

use std::collections::{BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::crypto::{hash_example, Digest};
use crate::error::{Error, Result};
use crate::metrics::{self, GroupedSample};
use crate::types::{
    Direction, ExampleResult, PredictionSet, PrivacyLevel, StressOutcome, StressTest,
};

/// Scores `preds` against `test` as of `now`.
///
/// `per_example` is always filled in, with correctness judged at the
/// metric's decision threshold; privacy filtering happens afterwards.
pub fn evaluate_stress_test(
    test: &StressTest,
    preds: &PredictionSet,
    now: DateTime<Utc>,
) -> Result<StressOutcome> {
    if test.is_expired(now) {
        return Err(Error::Expired {
            test_id: test.id().to_owned(),
            valid_until: test
                .valid_until()
                .map(|t| t.to_rfc3339())
                .unwrap_or_default(),
        });
    }
    if preds.stress_test_id() != test.id() {
        return Err(Error::SchemaViolation(format!(
            "predictions target stress test {:?}, not {:?}",
            preds.stress_test_id(),
            test.id()
        )));
    }
    preds.check_coverage(test)?;

    let examples = test.examples().examples();
    let unlabeled: Vec<String> = examples
        .iter()
        .filter(|e| e.label.is_none())
        .map(|e| e.id.clone())
        .collect();
    if !unlabeled.is_empty() {
        return Err(Error::MissingLabels(unlabeled));
    }

    let by_id: HashMap<&str, f64> = preds
        .entries()
        .iter()
        .map(|e| (e.example_id.as_str(), e.score))
        .collect();
    let scores: Vec<f64> = examples.iter().map(|e| by_id[e.id.as_str()]).collect();
    let labels: Vec<_> = examples
        .iter()
        .map(|e| e.label.expect("checked above"))
        .collect();

    let spec = test.metric();
    let mut sample = GroupedSample::new(scores.clone())?.with_labels(labels.clone())?;
    if spec.kind.needs_groups() {
        sample = sample.with_groups(examples.iter().map(|e| {
            e.sensitive_attr
                .clone()
                .expect("gap tests require sensitive_attr")
        }))?;
    }
    let metric_value = metrics::compute(spec, &sample)?;

    let per_example = examples
        .iter()
        .zip(scores.iter().zip(&labels))
        .map(|(e, (&score, label))| ExampleResult {
            example_id: e.id.clone(),
            score,
            correct: (score >= spec.decision_threshold) == label.is_positive(),
        })
        .collect();

    Ok(StressOutcome {
        model_id: preds.model_id().to_owned(),
        stress_test_id: test.id().to_owned(),
        metric_value,
        passed: spec.passes(metric_value),
        per_example: Some(per_example),
        released_value: None,
    })
}

/// What a reader is allowed to see of an outcome. Absent fields are
/// omitted from the JSON, never `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress_test_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_value: Option<f64>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_example: Option<Vec<ExampleResult>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub released_value: Option<f64>,
}

impl FilteredReport {
    /// Names of the fields present.
    pub fn field_names(&self) -> BTreeSet<&'static str> {
        let mut out = BTreeSet::from(["passed"]);
        let optional = [
            ("model_id", self.model_id.is_some()),
            ("stress_test_id", self.stress_test_id.is_some()),
            ("metric_value", self.metric_value.is_some()),
            ("per_example", self.per_example.is_some()),
            ("released_value", self.released_value.is_some()),
        ];
        out.extend(
            optional
                .into_iter()
                .filter(|(_, present)| *present)
                .map(|(n, _)| n),
        );
        out
    }

    fn full(outcome: &StressOutcome) -> Self {
        FilteredReport {
            model_id: Some(outcome.model_id.clone()),
            stress_test_id: Some(outcome.stress_test_id.clone()),
            metric_value: Some(outcome.metric_value),
            passed: outcome.passed,
            per_example: outcome.per_example.clone(),
            released_value: outcome.released_value,
        }
    }
}

/// Field set a report at `level` carries for an outcome with per-example
/// data and no prior release.
pub fn permitted_fields(level: PrivacyLevel) -> BTreeSet<&'static str> {
    match level {
        PrivacyLevel::Full => BTreeSet::from([
            "model_id",
            "stress_test_id",
            "metric_value",
            "passed",
            "per_example",
        ]),
        PrivacyLevel::MetricOnly => BTreeSet::from(["metric_value", "passed"]),
        PrivacyLevel::PassFail => BTreeSet::from(["passed"]),
        PrivacyLevel::Ladder { .. } => BTreeSet::from(["passed", "released_value"]),
    }
}

/// Projects an outcome down to what `privacy` allows. Ladder level runs the
/// release rule and returns the updated state.
pub fn filter_report(
    outcome: &StressOutcome,
    privacy: PrivacyLevel,
    ladder: Option<&LadderState>,
    now: DateTime<Utc>,
) -> Result<(FilteredReport, Option<LadderState>)> {
    let report = match privacy {
        PrivacyLevel::Full => FilteredReport::full(outcome),
        PrivacyLevel::MetricOnly => FilteredReport {
            metric_value: Some(outcome.metric_value),
            ..FilteredReport::pass_fail(outcome.passed)
        },
        PrivacyLevel::PassFail => FilteredReport::pass_fail(outcome.passed),
        PrivacyLevel::Ladder { step } => {
            let state = ladder.ok_or(Error::MissingLadderState)?;
            if state.step != step {
                return Err(Error::InvalidConfig(format!(
                    "ladder state step {} differs from privacy step {step}",
                    state.step
                )));
            }
            let (released, next) =
                ladder_update(state, outcome.metric_value, state.direction, now)?;
            let report = FilteredReport {
                released_value: Some(released),
                ..FilteredReport::pass_fail(outcome.passed)
            };
            return Ok((report, Some(next)));
        }
    };
    Ok((report, None))
}

impl FilteredReport {
    fn pass_fail(passed: bool) -> Self {
        FilteredReport {
            model_id: None,
            stress_test_id: None,
            metric_value: None,
            passed,
            per_example: None,
            released_value: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRelease {
    pub at: DateTime<Utc>,
    pub released_value: f64,
}

/// Best-so-far state of a leaderboard-style release for one
/// (stress test, model lineage) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderState {
    pub stress_test_id: String,
    pub model_lineage: String,
    pub best_value: Option<f64>,
    pub step: f64,
    pub direction: Direction,
    #[serde(default)]
    pub history: Vec<LadderRelease>,
}

impl LadderState {
    pub fn new(
        stress_test_id: impl Into<String>,
        model_lineage: impl Into<String>,
        step: f64,
        direction: Direction,
    ) -> Result<Self> {
        check_step(step)?;
        Ok(LadderState {
            stress_test_id: stress_test_id.into(),
            model_lineage: model_lineage.into(),
            best_value: None,
            step,
            direction,
            history: Vec::new(),
        })
    }
}

fn check_step(step: f64) -> Result<()> {
    if step.is_finite() && step > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositiveStep(step))
    }
}

/// Number of decimals in the shortest rendering of `step`.
fn step_decimals(step: f64) -> usize {
    let text = format!("{step}");
    text.split_once('.').map_or(0, |(_, frac)| frac.len())
}

/// Nearest multiple of `step`, snapped to the step's decimal precision so
/// that e.g. 42 × 0.01 prints as `0.42`.
pub fn round_to_step(value: f64, step: f64) -> f64 {
    let k = (value / step).round();
    let decimals = step_decimals(step).min(17);
    format!("{:.*}", decimals, k * step)
        .parse()
        .expect("formatted float parses")
}

/// Whether `value` is a multiple of `step` up to float noise.
pub fn is_multiple_of_step(value: f64, step: f64) -> bool {
    let q = value / step;
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

/// One ladder round.
///
/// The new value is released (rounded to a multiple of the step) only if it
/// beats the best-so-far by at least one step in the metric's direction; the
/// first submission always counts. Otherwise the previous release repeats
/// and the state is unchanged.
pub fn ladder_update(
    state: &LadderState,
    new_value: f64,
    direction: Direction,
    now: DateTime<Utc>,
) -> Result<(f64, LadderState)> {
    check_step(state.step)?;
    if !new_value.is_finite() {
        return Err(Error::NonFiniteValue(format!("ladder value {new_value}")));
    }
    let improves = match state.best_value {
        None => true,
        Some(best) => {
            let gain = match direction {
                Direction::AtMost => best - new_value,
                Direction::AtLeast => new_value - best,
            };
            // tolerance absorbs decimal representation error, e.g. 0.42 - 0.41
            gain >= state.step * (1.0 - 1e-9)
        }
    };
    if !improves {
        let best = state
            .best_value
            .expect("no improvement implies a prior release");
        return Ok((best, state.clone()));
    }
    let released = round_to_step(new_value, state.step);
    let mut next = state.clone();
    next.best_value = Some(released);
    next.history.push(LadderRelease {
        at: now,
        released_value: released,
    });
    Ok((released, next))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub stress_test_id: String,
    pub count: usize,
    pub offending_example_ids: Vec<String>,
}

/// Stress examples whose unsalted hash appears among the training hashes.
pub fn audit_overlap(
    training_example_hashes: &HashSet<Digest>,
    test: &StressTest,
) -> OverlapReport {
    let offending: Vec<String> = test
        .examples()
        .examples()
        .iter()
        .filter(|e| {
            let digest = hash_example(e).expect("stress test examples are validated encodable");
            training_example_hashes.contains(&digest)
        })
        .map(|e| e.id.clone())
        .collect();
    OverlapReport {
        stress_test_id: test.id().to_owned(),
        count: offending.len(),
        offending_example_ids: offending,
    }
}
