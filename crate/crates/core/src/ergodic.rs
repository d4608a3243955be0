//! Random inverse iteration and Lyapunov exponent estimates for the
//! balanced measure.

use crate::error::{Error, Result};
use crate::poly::{ComplexPoint, Polynomial};
use crate::tree::preimages;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const MIN_BURN: usize = 50;
pub const DEFAULT_BURN: usize = 200;
pub const MIN_LYAPUNOV_SAMPLES: usize = 10_000;
pub const BATCHES: usize = 32;

/// Backward orbit of `z0`, each step a uniformly chosen preimage counted with
/// multiplicity; the first `burn` points are dropped.
pub fn brolin_sample(poly: &Polynomial, z0: ComplexPoint, burn: usize, count: usize, seed: u64) -> Result<Vec<ComplexPoint>> {
    if burn < MIN_BURN {
        return Err(Error::Precondition(format!("burn-in must be at least {MIN_BURN}, got {burn}")));
    }
    let first = preimages(poly, z0)?;
    let tol = 1e-12 * (1.0 + z0.norm());
    if first.iter().all(|w| (w - z0).norm() <= tol) {
        return Err(Error::ExceptionalPoint(z0));
    }
    let d = poly.degree();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = z0;
    let mut out = Vec::with_capacity(count);
    for k in 0..burn + count {
        let pre = preimages(poly, z)?;
        z = pre[rng.gen_range(0..d)];
        if k >= burn {
            out.push(z);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErgodicEstimate {
    /// Mean of `ln|P'|` over the samples, nats per iteration.
    pub chi: f64,
    /// Batch-means standard error of `chi`.
    pub stderr: f64,
    /// `ln d`.
    pub h_ref: f64,
    /// `h_ref / chi`.
    pub hd_ratio: f64,
    pub samples: usize,
    /// Samples with `P'(z) = 0`, left out of the mean.
    pub excluded_critical: usize,
    pub batches: usize,
    pub seed: Option<u64>,
}

impl ErgodicEstimate {
    /// An estimate assembled from given `chi`, `stderr` and degree.
    pub fn from_parts(chi: f64, stderr: f64, degree: usize) -> Self {
        let h_ref = (degree as f64).ln();
        Self {
            chi,
            stderr,
            h_ref,
            hd_ratio: h_ref / chi,
            samples: 0,
            excluded_critical: 0,
            batches: 0,
            seed: None,
        }
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Lyapunov exponent over a fixed sample list.
pub fn lyapunov_estimate(poly: &Polynomial, samples: &[ComplexPoint], seed: Option<u64>) -> Result<ErgodicEstimate> {
    if samples.len() < MIN_LYAPUNOV_SAMPLES {
        return Err(Error::Precondition(format!(
            "Lyapunov estimate needs at least {MIN_LYAPUNOV_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let mut excluded = 0;
    let values: Vec<f64> = samples
        .iter()
        .filter_map(|z| {
            let a = poly.derivative_at(*z).norm();
            if a == 0.0 {
                excluded += 1;
                None
            } else {
                Some(a.ln())
            }
        })
        .collect();
    let size = values.len() / BATCHES;
    let means: Vec<f64> = values
        .chunks_exact(size)
        .take(BATCHES)
        .map(|c| compensated_sum(c) / size as f64)
        .collect();
    let chi = compensated_sum(&values) / values.len() as f64;
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    let batch_stderr = (var / BATCHES as f64).sqrt();
    // floor at the resolution of a double mean
    let rounding = 8.0 * f64::EPSILON * chi.abs().max(1.0);
    let stderr = batch_stderr.hypot(rounding);
    let mut e = ErgodicEstimate::from_parts(chi, stderr, poly.degree());
    e.samples = samples.len();
    e.excluded_critical = excluded;
    e.batches = BATCHES;
    e.seed = seed;
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuelleVerdict {
    pub pass: bool,
    /// `chi + 3 stderr - h_ref / 2`.
    pub margin: f64,
}

/// `chi + 3 stderr >= h_ref / 2`.
pub fn ruelle_check(estimate: &ErgodicEstimate) -> RuelleVerdict {
    let margin = estimate.chi + 3.0 * estimate.stderr - estimate.h_ref / 2.0;
    RuelleVerdict {
        pass: margin >= 0.0,
        margin,
    }
}
