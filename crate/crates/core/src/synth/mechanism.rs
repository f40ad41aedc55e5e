//! The two differential-privacy primitives PrivBayes needs.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::{Error, Result};

/// One draw from Laplace(0, scale), as the difference of two unit exponentials.
pub fn laplace<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    let a: f64 = Exp1.sample(rng);
    let b: f64 = Exp1.sample(rng);
    scale * (a - b)
}

/// Exponential mechanism: pick index `i` with probability proportional to
/// `exp(epsilon * scores[i] / (2 * sensitivity))`.
pub fn exponential_mechanism<R: Rng + ?Sized>(
    scores: &[f64],
    epsilon: f64,
    sensitivity: f64,
    rng: &mut R,
) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Internal("exponential mechanism over no candidates".into()));
    }
    let scale = epsilon / (2.0 * sensitivity);
    let logits: Vec<f64> = scores.iter().map(|s| s * scale).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::Internal(format!("exponential mechanism weights: {e}")))?;
    Ok(dist.sample(rng))
}

/// Sensitivity of plug-in mutual information (in bits) to one changed row of
/// an `n`-row table. This is the general bound; it dominates the tighter one
/// available when a variable is binary.
pub fn mi_sensitivity(n: usize) -> f64 {
    let n = n as f64;
    2.0 / n * ((n + 1.0) / 2.0).log2() + (n - 1.0) / n * ((n + 1.0) / (n - 1.0)).log2()
}
