//! Finite-sample estimators for accuracy and the three group-fairness
//! criteria (independence, separation, sufficiency).
//!
//! Decisions are `score >= decision_threshold`; a score exactly at the
//! threshold counts as a positive decision. Every gap metric reports the
//! largest pairwise difference between groups, which equals max − min over
//! the per-group statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result, Support};
use crate::types::{check_score, Label, MetricKind, MetricSpec};

/// Scores with optional labels and optional group labels, all aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSample {
    scores: Vec<f64>,
    labels: Option<Vec<Label>>,
    groups: Option<Vec<String>>,
}

impl GroupedSample {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptySample);
        }
        for &s in &scores {
            check_score(s)?;
        }
        Ok(GroupedSample {
            scores,
            labels: None,
            groups: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.scores.len() {
            return Err(Error::LengthMismatch(format!(
                "{} scores, {} labels",
                self.scores.len(),
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_groups<S: Into<String>>(
        mut self,
        groups: impl IntoIterator<Item = S>,
    ) -> Result<Self> {
        let groups: Vec<String> = groups.into_iter().map(Into::into).collect();
        if groups.len() != self.scores.len() {
            return Err(Error::LengthMismatch(format!(
                "{} scores, {} groups",
                self.scores.len(),
                groups.len()
            )));
        }
        self.groups = Some(groups);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn groups(&self) -> Option<&[String]> {
        self.groups.as_deref()
    }

    fn require_labels(&self) -> Result<&[Label]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::MissingLabels(vec!["<sample>".into()]))
    }

    /// Entry indices per group, requiring at least two groups.
    fn partition(&self) -> Result<BTreeMap<&str, Vec<usize>>> {
        let groups = self.groups.as_deref().ok_or(Error::SingleGroup(0))?;
        let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            out.entry(g.as_str()).or_default().push(i);
        }
        if out.len() < 2 {
            return Err(Error::SingleGroup(out.len()));
        }
        Ok(out)
    }
}

/// Largest pairwise absolute difference, i.e. max − min.
fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let (lo, hi) = values
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    num as f64 / den as f64
}

/// Fraction of entries whose decision at `t` matches the label.
pub fn accuracy(sample: &GroupedSample, decision_threshold: f64) -> Result<f64> {
    let labels = sample.require_labels()?;
    let correct = sample
        .scores
        .iter()
        .zip(labels)
        .filter(|(&s, &y)| (s >= decision_threshold) == y.is_positive())
        .count();
    Ok(ratio(correct, sample.len()))
}

/// Largest gap between groups' positive-decision rates. Labels unused.
pub fn independence_gap(sample: &GroupedSample, decision_threshold: f64) -> Result<f64> {
    let parts = sample.partition()?;
    Ok(spread(parts.values().map(|idx| {
        let positives = idx
            .iter()
            .filter(|&&i| sample.scores[i] >= decision_threshold)
            .count();
        ratio(positives, idx.len())
    })))
}

/// Largest gap between groups' false positive or false negative rates.
pub fn separation_gap(sample: &GroupedSample, decision_threshold: f64) -> Result<f64> {
    let labels = sample.require_labels()?;
    let parts = sample.partition()?;
    let mut fpr = Vec::with_capacity(parts.len());
    let mut fnr = Vec::with_capacity(parts.len());
    for (group, idx) in &parts {
        let (mut neg, mut false_pos, mut pos, mut false_neg) = (0, 0, 0, 0);
        for &i in idx {
            let decided_positive = sample.scores[i] >= decision_threshold;
            match labels[i] {
                Label::Negative => {
                    neg += 1;
                    false_pos += usize::from(decided_positive);
                }
                Label::Positive => {
                    pos += 1;
                    false_neg += usize::from(!decided_positive);
                }
            }
        }
        for (count, label) in [(neg, Label::Negative), (pos, Label::Positive)] {
            if count == 0 {
                return Err(Error::InsufficientSupport(Support::GroupLabel {
                    group: (*group).to_owned(),
                    label,
                }));
            }
        }
        fpr.push(ratio(false_pos, neg));
        fnr.push(ratio(false_neg, pos));
    }
    Ok(spread(fpr).max(spread(fnr)))
}

/// Index of the equal-width bin holding `score`; the last bin is closed.
///
/// Bin `b` is `[b/bins, (b+1)/bins)`. The arithmetic guess is corrected
/// against the exact boundaries so that rounding in `score * bins` cannot
/// place a score on the wrong side of an edge.
pub fn bin_index(score: f64, bins: usize) -> usize {
    let mut b = ((score * bins as f64).floor() as usize).min(bins - 1);
    while b > 0 && score < b as f64 / bins as f64 {
        b -= 1;
    }
    while b + 1 < bins && score >= (b + 1) as f64 / bins as f64 {
        b += 1;
    }
    b
}

/// Largest gap between groups' positive-label rates within a score bin,
/// over bins where at least two groups have `min_bin_support` entries.
pub fn sufficiency_gap(sample: &GroupedSample, bins: usize, min_bin_support: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidMetricSpec(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let labels = sample.require_labels()?;
    let parts = sample.partition()?;
    // per bin: (count, positives) for each group
    let mut table = vec![vec![(0usize, 0usize); parts.len()]; bins];
    for (g, idx) in parts.values().enumerate() {
        for &i in idx {
            let cell = &mut table[bin_index(sample.scores[i], bins)][g];
            cell.0 += 1;
            cell.1 += usize::from(labels[i].is_positive());
        }
    }
    let mut best: Option<f64> = None;
    for row in &table {
        let rates: Vec<f64> = row
            .iter()
            .filter(|(n, _)| *n >= min_bin_support)
            .map(|&(n, pos)| ratio(pos, n))
            .collect();
        if rates.len() >= 2 {
            let gap = spread(rates);
            best = Some(best.map_or(gap, |b| b.max(gap)));
        }
    }
    best.ok_or(Error::InsufficientSupport(Support::NoQualifyingBin {
        min_bin_support,
    }))
}

/// Evaluates the metric a spec names.
pub fn compute(spec: &MetricSpec, sample: &GroupedSample) -> Result<f64> {
    match spec.kind {
        MetricKind::Accuracy => accuracy(sample, spec.decision_threshold),
        MetricKind::IndependenceGap => independence_gap(sample, spec.decision_threshold),
        MetricKind::SeparationGap => separation_gap(sample, spec.decision_threshold),
        MetricKind::SufficiencyGap => sufficiency_gap(sample, spec.bins, spec.min_bin_support),
    }
}
