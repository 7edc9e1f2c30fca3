//! Training objective: a one-class loss over message embeddings.
//!
//! Normal messages (y=0) are pulled toward the origin — their squared norm
//! is the loss term — while auxiliary/anomalous messages (y=1) are pushed
//! away through `-log(1 - exp(-|z|^2))`. The anomaly score of a message is
//! simply `|z|^2`: distance from the learned center of normality.
//!
//! With `|z|^2 = softplus(t)` this loss is *exactly* binary cross-entropy on
//! the logit `t`, which is what [`bce_reference_loss`] checks against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::ClassLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    /// Class weight for y=0 (target) samples.
    pub weight_normal: f64,
    /// Class weight for y=1 (auxiliary / labeled anomaly) samples.
    pub weight_anomaly: f64,
    /// Lower clamp for the `1 - exp(-s)` log argument, guarding y=1 samples
    /// that sit exactly at the origin.
    pub log_arg_floor: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            weight_normal: 0.5,
            weight_anomaly: 1.0,
            log_arg_floor: 1e-12,
        }
    }
}

/// Squared distance of an embedding from the origin — the anomaly score.
pub fn anomaly_score(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

/// `exp(-|z|^2)`: the model's normality estimate in (0, 1], 1 exactly at the
/// center. The anomaly score is its negative log.
pub fn radial_score(z: &[f64]) -> f64 {
    (-anomaly_score(z)).exp()
}

/// Weighted loss term and its gradient with respect to `z` for one sample.
/// The batch mean is left to the caller.
pub fn sample_loss_and_grad(z: &[f64], y: ClassLabel, cfg: &LossConfig) -> (f64, Vec<f64>) {
    let s = anomaly_score(z);
    match y {
        0 => {
            let loss = cfg.weight_normal * s;
            let grad = z.iter().map(|&v| cfg.weight_normal * 2.0 * v).collect();
            (loss, grad)
        }
        _ => {
            // exp_m1 keeps 1 - e^-s accurate when s is tiny; the naive
            // 1.0 - exp(-s) form loses most of its digits there.
            let arg = -(-s).exp_m1();
            if arg < cfg.log_arg_floor {
                // Clamped region: constant loss, zero gradient.
                (cfg.weight_anomaly * -cfg.log_arg_floor.ln(), vec![0.0; z.len()])
            } else {
                let loss = -cfg.weight_anomaly * arg.ln();
                // d/ds of -ln(1 - e^-s) is -e^-s / (1 - e^-s) = -1/(e^s - 1);
                // exp_m1 again avoids cancellation for small s.
                let dls = -cfg.weight_anomaly / s.exp_m1();
                let grad = z.iter().map(|&v| dls * 2.0 * v).collect();
                (loss, grad)
            }
        }
    }
}

/// Mean weighted loss over a batch of embeddings with class labels.
pub fn hypersphere_loss(samples: &[(Vec<f64>, ClassLabel)], cfg: &LossConfig) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("loss over an empty batch".into()));
    }
    let total: f64 = samples
        .iter()
        .map(|(z, y)| sample_loss_and_grad(z, *y, cfg).0)
        .sum();
    Ok(total / samples.len() as f64)
}

/// Reference objective: mean weighted binary cross-entropy of sigmoid(logit)
/// against y, where the logit scores *anomalousness*. Used to sanity-check
/// the hyperspherical loss, which reduces to this under the substitution
/// `|z|^2 = ln(1 + e^logit)`.
pub fn bce_reference_loss(samples: &[(f64, ClassLabel)], cfg: &LossConfig) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("loss over an empty batch".into()));
    }
    let mut total = 0.0;
    for &(logit, y) in samples {
        // Numerically stable split: softplus(t) = ln(1 + e^t).
        let softplus = |t: f64| {
            if t > 0.0 {
                t + (-t).exp().ln_1p()
            } else {
                t.exp().ln_1p()
            }
        };
        // -ln(sigmoid(t)) = softplus(-t); -ln(1 - sigmoid(t)) = softplus(t).
        let term = match y {
            0 => cfg.weight_normal * softplus(logit),
            _ => cfg.weight_anomaly * softplus(-logit),
        };
        total += term;
    }
    Ok(total / samples.len() as f64)
}
