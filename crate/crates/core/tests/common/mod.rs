//! Test-only helpers shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stressbench::metrics::GroupedSample;
use stressbench::Label;

/// A sample in plain vectors, the form the naive oracle consumes.
#[derive(Debug, Clone)]
pub struct Case {
    pub scores: Vec<f64>,
    pub labels: Vec<i8>,
    pub groups: Vec<String>,
    pub threshold: f64,
    pub bins: usize,
    pub support: usize,
}

impl Case {
    pub fn sample(&self) -> GroupedSample {
        GroupedSample::new(self.scores.clone())
            .unwrap()
            .with_labels(
                self.labels
                    .iter()
                    .map(|&y| {
                        if y > 0 {
                            Label::Positive
                        } else {
                            Label::Negative
                        }
                    })
                    .collect(),
            )
            .unwrap()
            .with_groups(self.groups.clone())
            .unwrap()
    }
}

/// Scores drawn partly from bin edges and the decision threshold so that
/// boundary handling is exercised.
pub fn random_case(rng: &mut impl Rng, max_n: usize) -> Case {
    let n = rng.random_range(1..=max_n);
    let bins = rng.random_range(2..=5);
    let threshold = [0.5, 0.25, 0.7, 0.0, 1.0][rng.random_range(0..5)];
    let scores = (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => rng.random_range(0..=bins) as f64 / bins as f64,
            1 => threshold,
            _ => rng.random::<f64>(),
        })
        .collect();
    let labels = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
        .collect();
    let n_groups = rng.random_range(1..=3);
    let groups = (0..n)
        .map(|_| ["a", "b", "c"][rng.random_range(0..n_groups)].to_owned())
        .collect();
    Case {
        scores,
        labels,
        groups,
        threshold,
        bins,
        support: rng.random_range(1..=2),
    }
}

pub fn cases(seed: u64, count: usize, max_n: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_case(&mut rng, max_n)).collect()
}

/// Direct enumeration of every metric, written without reference to the
/// library: distinct groups found by linear search, every group pair
/// compared explicitly, bins as half-open intervals. `None` where the
/// library must return an error.
pub mod naive {
    use super::Case;

    fn distinct(groups: &[String]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for g in groups {
            if !out.contains(g) {
                out.push(g.clone());
            }
        }
        out
    }

    fn positive(c: &Case, i: usize) -> bool {
        c.scores[i] >= c.threshold
    }

    pub fn accuracy(c: &Case) -> f64 {
        let mut right = 0.0;
        for i in 0..c.scores.len() {
            let ok = if positive(c, i) {
                c.labels[i] == 1
            } else {
                c.labels[i] == -1
            };
            if ok {
                right += 1.0;
            }
        }
        right / c.scores.len() as f64
    }

    fn rate(
        c: &Case,
        g: &str,
        cond: impl Fn(usize) -> bool,
        event: impl Fn(usize) -> bool,
    ) -> Option<f64> {
        let mut den = 0.0;
        let mut num = 0.0;
        for i in 0..c.scores.len() {
            if c.groups[i] == g && cond(i) {
                den += 1.0;
                if event(i) {
                    num += 1.0;
                }
            }
        }
        if den == 0.0 {
            None
        } else {
            Some(num / den)
        }
    }

    pub fn independence(c: &Case) -> Option<f64> {
        let gs = distinct(&c.groups);
        if gs.len() < 2 {
            return None;
        }
        let mut best = 0.0f64;
        for a in 0..gs.len() {
            for b in a + 1..gs.len() {
                let ra = rate(c, &gs[a], |_| true, |i| positive(c, i))?;
                let rb = rate(c, &gs[b], |_| true, |i| positive(c, i))?;
                best = best.max((ra - rb).abs());
            }
        }
        Some(best)
    }

    pub fn separation(c: &Case) -> Option<f64> {
        let gs = distinct(&c.groups);
        if gs.len() < 2 {
            return None;
        }
        let fpr = |g: &str| rate(c, g, |i| c.labels[i] == -1, |i| positive(c, i));
        let fnr = |g: &str| rate(c, g, |i| c.labels[i] == 1, |i| !positive(c, i));
        let mut best = 0.0f64;
        for a in 0..gs.len() {
            for b in a + 1..gs.len() {
                best = best.max((fpr(&gs[a])? - fpr(&gs[b])?).abs());
                best = best.max((fnr(&gs[a])? - fnr(&gs[b])?).abs());
            }
        }
        Some(best)
    }

    fn in_bin(score: f64, k: usize, bins: usize) -> bool {
        let lo = k as f64 / bins as f64;
        let hi = (k + 1) as f64 / bins as f64;
        if k + 1 == bins {
            score >= lo && score <= 1.0
        } else {
            score >= lo && score < hi
        }
    }

    pub fn sufficiency(c: &Case) -> Option<f64> {
        let gs = distinct(&c.groups);
        if gs.len() < 2 {
            return None;
        }
        let mut best: Option<f64> = None;
        for k in 0..c.bins {
            let stats: Vec<(usize, usize)> = gs
                .iter()
                .map(|g| {
                    let mut n = 0;
                    let mut pos = 0;
                    for i in 0..c.scores.len() {
                        if &c.groups[i] == g && in_bin(c.scores[i], k, c.bins) {
                            n += 1;
                            if c.labels[i] == 1 {
                                pos += 1;
                            }
                        }
                    }
                    (n, pos)
                })
                .collect();
            for a in 0..gs.len() {
                for b in a + 1..gs.len() {
                    let (na, pa) = stats[a];
                    let (nb, pb) = stats[b];
                    if na >= c.support && nb >= c.support {
                        let gap = (pa as f64 / na as f64 - pb as f64 / nb as f64).abs();
                        best = Some(best.map_or(gap, |x: f64| x.max(gap)));
                    }
                }
            }
        }
        best
    }
}

/// Central-difference gradient compared with the analytic one at a random
/// point: `|fd - analytic| / max(|fd|, |analytic|, 1e-8)` in the max norm.
pub fn gradient_relative_error(rng: &mut impl Rng) -> f64 {
    use rand_distr::StandardNormal;
    use stressbench::simlab::{logistic_gradient, logistic_loss};

    let dims = rng.random_range(1..=6);
    let n = rng.random_range(5..=40);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let mut r: Vec<f64> = (0..dims)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            r.push(1.0);
            r
        })
        .collect();
    let labels: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();
    let params: Vec<f64> = (0..=dims)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();

    let analytic = logistic_gradient(&params, &rows, &labels);
    let h = 1e-5;
    let fd: Vec<f64> = (0..params.len())
        .map(|j| {
            let (mut up, mut down) = (params.clone(), params.clone());
            up[j] += h;
            down[j] -= h;
            (logistic_loss(&up, &rows, &labels) - logistic_loss(&down, &rows, &labels)) / (2.0 * h)
        })
        .collect();
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff: Vec<f64> = fd.iter().zip(&analytic).map(|(a, b)| a - b).collect();
    max_abs(&diff) / max_abs(&fd).max(max_abs(&analytic)).max(1e-8)
}

/// Sample correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

pub struct ScryptVector {
    pub password: &'static [u8],
    pub salt: &'static [u8],
    pub log_n: u8,
    pub r: u32,
    pub p: u32,
    pub derived_hex: &'static str,
}

/// The scrypt test vectors of RFC 7914 section 12 that run in well under a
/// second (the 2^20 vector is omitted).
pub const SCRYPT_VECTORS: [ScryptVector; 3] = [
    ScryptVector {
        password: b"",
        salt: b"",
        log_n: 4,
        r: 1,
        p: 1,
        derived_hex: "77d6576238657b203b19ca42c18a0497f16b4844e3074ae8dfdffa3fede21442fcd0069ded0948f8326a753a0fc81f17e8d3e0fb2e0d3628cf35e20c38d18906",
    },
    ScryptVector {
        password: b"password",
        salt: b"NaCl",
        log_n: 10,
        r: 8,
        p: 16,
        derived_hex: "fdbabe1c9d3472007856e7190d01e9fe7c6ad7cbc8237830e77376634b3731622eaf30d92e22a3886ff109279d9830dac727afb94a83ee6d8360cbdfa2cc0640",
    },
    ScryptVector {
        password: b"pleaseletmein",
        salt: b"SodiumChloride",
        log_n: 14,
        r: 8,
        p: 1,
        derived_hex: "7023bdcb3afd7348461c06cd81fd38ebfda8fbba904f8e3ea9b543f6545da1f2d5432955613f0fcf62d49705242a9af9e61e85dc0d651e40dfcf017b45575887",
    },
];
