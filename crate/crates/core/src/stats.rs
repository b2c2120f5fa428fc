//! Small statistics helpers for the Monte-Carlo experiments.

use serde::{Deserialize, Serialize};

/// Two-sided 99% standard-normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// A binomial proportion with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub low: f64,
    pub high: f64,
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> Proportion {
    assert!(successes <= trials);
    if trials == 0 {
        return Proportion {
            successes,
            trials,
            estimate: 0.0,
            low: 0.0,
            high: 1.0,
        };
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Proportion {
        successes,
        trials,
        estimate: p,
        low: if successes == 0 { 0.0 } else { (centre - half).max(0.0) },
        high: if successes == trials {
            1.0
        } else {
            (centre + half).min(1.0)
        },
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let m = samples.len() as f64;
        if samples.is_empty() {
            return MeanEstimate {
                mean: 0.0,
                std_error: 0.0,
                samples: 0,
            };
        }
        let mean = samples.iter().sum::<f64>() / m;
        let var = if samples.len() > 1 {
            samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_error: (var / m).sqrt(),
            samples: samples.len() as u64,
        }
    }
}
