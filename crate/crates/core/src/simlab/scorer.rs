//! Logistic-regression scorer trained by full-batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Dataset, Example};

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean logistic loss `mean ln(1 + exp(-y·⟨params, row⟩))`.
///
/// `rows` carry a trailing constant 1 so the last parameter is the bias;
/// `labels` are ±1.
pub fn logistic_loss(params: &[f64], rows: &[Vec<f64>], labels: &[f64]) -> f64 {
    let total: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| softplus(-y * dot(params, x)))
        .sum();
    total / rows.len() as f64
}

/// Analytic gradient of [`logistic_loss`].
pub fn logistic_gradient(params: &[f64], rows: &[Vec<f64>], labels: &[f64]) -> Vec<f64> {
    let mut grad = vec![0.0; params.len()];
    for (x, &y) in rows.iter().zip(labels) {
        // d/dz softplus(-y z) = -y σ(-y z)
        let coef = -y * sigmoid(-y * dot(params, x));
        for (g, xi) in grad.iter_mut().zip(x) {
            *g += coef * xi;
        }
    }
    let n = rows.len() as f64;
    grad.iter_mut().for_each(|g| *g /= n);
    grad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearScorer {
    pub feature_names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Training loss before the first epoch and after each epoch.
    pub trace: Vec<f64>,
}

impl LinearScorer {
    pub fn zeros(feature_names: Vec<String>) -> Self {
        let d = feature_names.len();
        LinearScorer {
            feature_names,
            weights: vec![0.0; d],
            bias: 0.0,
            trace: Vec::new(),
        }
    }

    /// Weights followed by the bias.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.push(self.bias);
        p
    }

    pub fn set_params(&mut self, params: &[f64]) {
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias = b[0];
    }

    /// Feature row with the trailing bias constant.
    pub fn row(&self, example: &Example) -> Result<Vec<f64>> {
        let mut row = Vec::with_capacity(self.feature_names.len() + 1);
        for name in &self.feature_names {
            let v = example
                .features
                .get(name)
                .and_then(|v| v.as_number())
                .ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "example {:?} lacks numeric feature {name:?}",
                        example.id
                    ))
                })?;
            row.push(v);
        }
        row.push(1.0);
        Ok(row)
    }

    pub fn score_row(&self, row: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, &row[..self.weights.len()]) + self.bias)
    }

    pub fn score(&self, example: &Example) -> Result<f64> {
        Ok(self.score_row(&self.row(example)?))
    }
}

/// Numeric feature names of the first example, sorted.
fn numeric_feature_names(examples: &[&Example]) -> Vec<String> {
    examples
        .first()
        .map(|e| {
            e.features
                .iter()
                .filter(|(_, v)| v.as_number().is_some())
                .map(|(k, _)| k.clone())
                .collect()
        })
        .unwrap_or_default()
}

/// Full-batch gradient descent on the mean logistic loss, from zero
/// weights, over the labelled examples of `train`.
pub fn train_linear_scorer(train: &Dataset, lr: f64, epochs: usize) -> Result<LinearScorer> {
    if !(lr.is_finite() && lr >= 0.0) {
        return Err(Error::InvalidConfig(format!("learning rate {lr}")));
    }
    let labelled: Vec<&Example> = train
        .examples()
        .iter()
        .filter(|e| e.label.is_some())
        .collect();
    if labelled.is_empty() {
        return Err(Error::NoLabels);
    }
    let mut scorer = LinearScorer::zeros(numeric_feature_names(&labelled));
    let rows = labelled
        .iter()
        .map(|e| scorer.row(e))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<f64> = labelled
        .iter()
        .map(|e| e.label.expect("filtered").as_f64())
        .collect();

    let mut params = scorer.params();
    let mut trace = Vec::with_capacity(epochs + 1);
    trace.push(logistic_loss(&params, &rows, &labels));
    for _ in 0..epochs {
        let grad = logistic_gradient(&params, &rows, &labels);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= lr * g;
        }
        trace.push(logistic_loss(&params, &rows, &labels));
    }
    scorer.set_params(&params);
    scorer.trace = trace;
    Ok(scorer)
}
