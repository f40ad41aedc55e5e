//! Interventional Shapley values: exact enumeration over coalitions and the
//! permutation-sampling estimator.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use super::{ImportanceVector, Measure};
use crate::forest::Forest;
use crate::seed::{self, Rng};
use crate::tabular::Table;
use crate::{Error, Result};

/// Largest feature count accepted by exact enumeration (2^d coalitions).
pub const MAX_EXACT_FEATURES: usize = 12;

/// A scalar model output on a feature row.
pub trait ScoreModel: Sync {
    fn score(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Sync> ScoreModel for F {
    fn score(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Forest probability of its reference class.
pub struct ForestScore<'a> {
    forest: &'a Forest,
    class: usize,
}

impl<'a> ForestScore<'a> {
    pub fn new(forest: &'a Forest) -> Self {
        ForestScore {
            forest,
            class: forest.reference_class(),
        }
    }

    pub fn class(&self) -> usize {
        self.class
    }
}

impl ScoreModel for ForestScore<'_> {
    fn score(&self, x: &[f64]) -> f64 {
        self.forest.score_row(x, self.class)
    }
}

/// Largest joint level count memoised by [`CachedForestScore`].
const MAX_CACHED_CELLS: usize = 1 << 20;

/// [`ForestScore`] memoised over the joint level space of an all-categorical
/// forest. Permutation sampling re-evaluates the same few level combinations
/// over and over; the cache returns bit-identical values.
struct CachedForestScore<'a> {
    inner: ForestScore<'a>,
    radix: Vec<usize>,
    cells: Vec<AtomicU64>,
}

const EMPTY: u64 = u64::MAX; // a NaN pattern no probability can take

impl<'a> CachedForestScore<'a> {
    fn new(forest: &'a Forest) -> Option<Self> {
        let radix: Vec<usize> = forest
            .feature_kinds()
            .iter()
            .map(|k| k.levels())
            .collect::<Option<_>>()?;
        let size = radix
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l).filter(|&n| n <= MAX_CACHED_CELLS))?;
        Some(CachedForestScore {
            inner: ForestScore::new(forest),
            radix,
            cells: (0..size).map(|_| AtomicU64::new(EMPTY)).collect(),
        })
    }

    fn cell(&self, x: &[f64]) -> Option<usize> {
        let mut idx = 0;
        for (&v, &l) in x.iter().zip(&self.radix) {
            if !(v >= 0.0 && v < l as f64 && v.fract() == 0.0) {
                return None;
            }
            idx = idx * l + v as usize;
        }
        Some(idx)
    }
}

impl ScoreModel for CachedForestScore<'_> {
    fn score(&self, x: &[f64]) -> f64 {
        let Some(i) = self.cell(x) else {
            return self.inner.score(x);
        };
        let bits = self.cells[i].load(Ordering::Relaxed);
        if bits != EMPTY {
            return f64::from_bits(bits);
        }
        let v = self.inner.score(x);
        self.cells[i].store(v.to_bits(), Ordering::Relaxed);
        v
    }
}

fn check_background(instance: &[f64], background: &[Vec<f64>]) -> Result<()> {
    if background.is_empty() {
        return Err(Error::Size("Shapley values need a non-empty background set".into()));
    }
    if let Some(b) = background.iter().find(|b| b.len() != instance.len()) {
        return Err(Error::Size(format!(
            "background row has {} features, instance has {}",
            b.len(),
            instance.len()
        )));
    }
    Ok(())
}

/// Exact Shapley values of `instance` against `background` by enumerating
/// all `2^d` coalitions.
pub fn exact_shapley<M: ScoreModel + ?Sized>(
    model: &M,
    instance: &[f64],
    background: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let d = instance.len();
    if d > MAX_EXACT_FEATURES {
        return Err(Error::Tractability(format!(
            "exact Shapley enumeration is limited to {MAX_EXACT_FEATURES} features, got {d}; \
             use the permutation estimator (shapley_mc) instead"
        )));
    }
    check_background(instance, background)?;

    let n_masks = 1usize << d;
    let mut value = vec![0.0; n_masks];
    let mut hybrid = vec![0.0; d];
    for (mask, v) in value.iter_mut().enumerate() {
        let mut total = 0.0;
        for b in background {
            for j in 0..d {
                hybrid[j] = if mask >> j & 1 == 1 { instance[j] } else { b[j] };
            }
            total += model.score(&hybrid);
        }
        *v = total / background.len() as f64;
    }

    // weight(s) = s! (d - s - 1)! / d!
    let mut weight = vec![0.0; d.max(1)];
    for (s, w) in weight.iter_mut().enumerate().take(d) {
        let mut x = 1.0 / d as f64;
        // 1 / (d * C(d-1, s))
        for i in 0..s {
            x *= (i + 1) as f64 / (d - 1 - i) as f64;
        }
        *w = x;
    }

    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        let bit = 1usize << i;
        let mut acc = 0.0;
        for mask in 0..n_masks {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                acc += weight[s] * (value[mask | bit] - value[mask]);
            }
        }
        *p = acc;
    }
    Ok(phi)
}

/// Permutation-sampling estimate for one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyEstimate {
    pub phi: Vec<f64>,
    /// Standard error of `sum(phi)`, which per ordering equals
    /// `score(instance) - score(background row)`.
    pub total_std_err: f64,
}

/// Each ordering draws one background row `b`, switches features from `b`
/// to the instance in that order and credits each feature with the change
/// in score.
pub fn mc_shapley<M: ScoreModel + ?Sized>(
    model: &M,
    instance: &[f64],
    background: &[Vec<f64>],
    n_permutations: usize,
    rng: &mut Rng,
) -> Result<ShapleyEstimate> {
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be at least 1".into()));
    }
    check_background(instance, background)?;
    let d = instance.len();
    let full = model.score(instance);
    let mut phi = vec![0.0; d];
    let mut order: Vec<usize> = (0..d).collect();
    let mut z = vec![0.0; d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_permutations {
        order.shuffle(rng);
        let b = &background[rng.random_range(0..background.len())];
        z.copy_from_slice(b);
        let base = model.score(&z);
        let mut prev = base;
        for (pos, &f) in order.iter().enumerate() {
            z[f] = instance[f];
            // the last switch reproduces the instance itself
            let cur = if pos + 1 == d { full } else { model.score(&z) };
            phi[f] += cur - prev;
            prev = cur;
        }
        let t = full - base;
        sum += t;
        sum_sq += t * t;
    }
    let n = n_permutations as f64;
    phi.iter_mut().for_each(|p| *p /= n);
    let total_std_err = if n_permutations > 1 {
        let mean = sum / n;
        ((sum_sq - n * mean * mean).max(0.0) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(ShapleyEstimate { phi, total_std_err })
}

/// Exact Shapley values of one forest-feature row against a background table.
pub fn shapley_exact(forest: &Forest, instance: &[f64], background: &Table) -> Result<Vec<f64>> {
    if instance.len() != forest.n_features() {
        return Err(Error::Size(format!(
            "instance has {} values, forest expects {}",
            instance.len(),
            forest.n_features()
        )));
    }
    let bg = forest.feature_rows(background)?;
    exact_shapley(&ForestScore::new(forest), instance, &bg)
}

/// Global SHAP importance: mean `|phi|` over the rows of `validation`, with
/// `phi` estimated by permutation sampling. Instances use independent random
/// streams, so the result does not depend on the thread count.
pub fn shapley_mc(
    forest: &Forest,
    validation: &Table,
    background: &Table,
    n_permutations: usize,
    seed: u64,
) -> Result<ImportanceVector> {
    if n_permutations == 0 {
        return Err(Error::Config("n_permutations must be at least 1".into()));
    }
    let rows = forest.feature_rows(validation)?;
    if rows.is_empty() {
        return Err(Error::Size("Shapley importance needs validation rows".into()));
    }
    let bg = forest.feature_rows(background)?;
    let per_instance = match CachedForestScore::new(forest) {
        Some(cached) => mc_rows(&cached, &rows, &bg, n_permutations, seed)?,
        None => mc_rows(&ForestScore::new(forest), &rows, &bg, n_permutations, seed)?,
    };
    let d = forest.n_features();
    let mut scores = vec![0.0; d];
    for phi in &per_instance {
        for (s, p) in scores.iter_mut().zip(phi) {
            *s += p.abs();
        }
    }
    let n = per_instance.len() as f64;
    scores.iter_mut().for_each(|s| *s /= n);
    Ok(ImportanceVector {
        feature_names: forest.feature_names().to_vec(),
        scores,
        measure: Measure::Shap,
    })
}

fn mc_rows<M: ScoreModel>(
    model: &M,
    rows: &[Vec<f64>],
    bg: &[Vec<f64>],
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    rows.par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = seed::rng_stream(seed, i as u64);
            mc_shapley(model, x, bg, n_permutations, &mut rng).map(|e| e.phi)
        })
        .collect()
}
