//! Similarity between two feature-importance outputs.
//!
//! Rank-based measures work on [`RankedList`]s: the top-`d` agreement, the
//! rank-biased overlap (RBO) that averages agreements with geometric weights
//! `w_d = (1 - p) p^(d-1)`, and two correlation-aware variants that credit a
//! feature in one list for a correlated feature at a nearby rank in the other:
//!
//! * the permutation-corrected agreement maximises `sum_i |corr(S_i, T'_i)| / d`
//!   over every reordering `T'` of the prefix `T_{1:d}` (searched exhaustively),
//! * the correlation-corrected agreement maximises the same linear objective
//!   over doubly-stochastic matrices. A linear objective on the Birkhoff
//!   polytope peaks at a vertex, so it is solved exactly as a linear
//!   assignment problem ([`assignment`]).
//!
//! Score-based similarity is the cosine between importance vectors.

pub mod assignment;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::association::AssociationMatrix;
use crate::importance::{rank, ImportanceVector, RankedList};
use crate::seed;
use crate::{Error, Result};

/// Largest prefix the factorial search accepts.
pub const MAX_EXACT_DEPTH: usize = 8;
/// Largest prefix the subset dynamic program accepts.
pub const MAX_SUBSET_DEPTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RboParams {
    /// Geometric persistence, `0 < p < 1`.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Evaluation depth; `None` means the full list length.
    #[serde(default)]
    pub k: Option<usize>,
    /// Divide by the total weight `1 - p^k` so identical lists score 1.
    #[serde(default = "default_normalize")]
    pub normalize: bool,
}

fn default_p() -> f64 {
    0.8
}
fn default_normalize() -> bool {
    true
}

impl Default for RboParams {
    fn default() -> Self {
        RboParams {
            p: 0.8,
            k: None,
            normalize: true,
        }
    }
}

impl RboParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::Config(format!("rbo p = {} is not in (0, 1)", self.p)));
        }
        if self.k == Some(0) {
            return Err(Error::Config("rbo depth k must be at least 1".into()));
        }
        Ok(())
    }

    fn depth(&self, s: &RankedList, t: &RankedList) -> Result<usize> {
        self.validate()?;
        let max = s.len().min(t.len());
        let k = self.k.unwrap_or(max);
        if k == 0 || k > max {
            return Err(Error::Size(format!(
                "depth {k} out of range for lists of length {} and {}",
                s.len(),
                t.len()
            )));
        }
        Ok(k)
    }
}

fn check_depth(s: &RankedList, t: &RankedList, d: usize) -> Result<()> {
    if d == 0 || d > s.len().min(t.len()) {
        return Err(Error::Size(format!(
            "depth {d} out of range for lists of length {} and {}",
            s.len(),
            t.len()
        )));
    }
    Ok(())
}

/// `|S_{1:d} ∩ T_{1:d}| / d`.
pub fn agreement(s: &RankedList, t: &RankedList, d: usize) -> Result<f64> {
    check_depth(s, t, d)?;
    let top_t = &t.features()[..d];
    let common = s.features()[..d]
        .iter()
        .filter(|f| top_t.contains(f))
        .count();
    Ok(common as f64 / d as f64)
}

/// Geometric weighting over depths `1..=k`. Returns `(raw, total_weight)`;
/// the normalised value is `raw / total_weight`.
fn weighted<F>(p: f64, k: usize, mut per_depth: F) -> Result<(f64, f64)>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut raw = 0.0;
    let mut total = 0.0;
    let mut w = 1.0 - p;
    for d in 1..=k {
        raw += w * per_depth(d)?;
        total += w;
        w *= p;
    }
    Ok((raw, total))
}

/// An RBO evaluation: the plain truncated sum and its normalised form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RboValue {
    pub raw: f64,
    pub normalized: f64,
}

impl RboValue {
    fn from_parts((raw, total): (f64, f64)) -> Self {
        RboValue {
            raw,
            normalized: raw / total,
        }
    }

    fn select(self, params: &RboParams) -> f64 {
        if params.normalize {
            self.normalized
        } else {
            self.raw
        }
    }
}

pub fn rbo_value(s: &RankedList, t: &RankedList, params: &RboParams) -> Result<RboValue> {
    let k = params.depth(s, t)?;
    // running overlap, one pass over the prefixes
    let mut seen_s = std::collections::HashSet::with_capacity(k);
    let mut seen_t = std::collections::HashSet::with_capacity(k);
    let mut overlap = 0usize;
    let (fs, ft) = (s.features(), t.features());
    let parts = weighted(params.p, k, |d| {
        let (a, b) = (&fs[d - 1], &ft[d - 1]);
        if a == b {
            overlap += 1;
        } else {
            if seen_t.contains(a) {
                overlap += 1;
            }
            if seen_s.contains(b) {
                overlap += 1;
            }
        }
        seen_s.insert(a);
        seen_t.insert(b);
        Ok(overlap as f64 / d as f64)
    })?;
    Ok(RboValue::from_parts(parts))
}

/// Truncated rank-biased overlap, normalised when `params.normalize`.
pub fn rbo(s: &RankedList, t: &RankedList, params: &RboParams) -> Result<f64> {
    Ok(rbo_value(s, t, params)?.select(params))
}

/// `|corr|` between every pair of the two length-`d` prefixes, row-major.
fn prefix_weights(
    s: &RankedList,
    t: &RankedList,
    d: usize,
    corr: &AssociationMatrix,
) -> Result<Vec<f64>> {
    let lookup = |f: &String| {
        corr.index_of(f).ok_or_else(|| {
            Error::Schema(format!("association matrix does not cover feature `{f}`"))
        })
    };
    let si: Vec<usize> = s.features()[..d].iter().map(lookup).collect::<Result<_>>()?;
    let ti: Vec<usize> = t.features()[..d].iter().map(lookup).collect::<Result<_>>()?;
    let mut w = Vec::with_capacity(d * d);
    for &a in &si {
        for &b in &ti {
            w.push(corr.at(a, b).abs());
        }
    }
    Ok(w)
}

/// Permutation-corrected agreement by exhaustive search over all `d!`
/// reorderings of `T_{1:d}`.
pub fn corrected_agreement_exact(
    s: &RankedList,
    t: &RankedList,
    d: usize,
    corr: &AssociationMatrix,
) -> Result<f64> {
    check_depth(s, t, d)?;
    if d > MAX_EXACT_DEPTH {
        return Err(Error::Tractability(format!(
            "exhaustive permutation search is limited to depth {MAX_EXACT_DEPTH} (got {d}); \
             use corrected_agreement_assignment"
        )));
    }
    let w = prefix_weights(s, t, d, corr)?;
    let mut order = Vec::with_capacity(d);
    let mut best = f64::NEG_INFINITY;
    enumerate(&w, d, &mut order, 0, &mut best);
    Ok(best / d as f64)
}

fn enumerate(w: &[f64], d: usize, order: &mut Vec<usize>, used: u32, best: &mut f64) {
    if order.len() == d {
        let total: f64 = order.iter().enumerate().map(|(i, &j)| w[i * d + j]).sum();
        if total > *best {
            *best = total;
        }
        return;
    }
    for j in 0..d {
        if used & (1 << j) == 0 {
            order.push(j);
            enumerate(w, d, order, used | (1 << j), best);
            order.pop();
        }
    }
}

/// Permutation-corrected agreement by dynamic programming over subsets of
/// `T_{1:d}`: still an exact maximum over reorderings, in `O(d 2^d)`.
pub fn corrected_agreement_subsets(
    s: &RankedList,
    t: &RankedList,
    d: usize,
    corr: &AssociationMatrix,
) -> Result<f64> {
    check_depth(s, t, d)?;
    if d > MAX_SUBSET_DEPTH {
        return Err(Error::Tractability(format!(
            "subset search is limited to depth {MAX_SUBSET_DEPTH} (got {d}); \
             use corrected_agreement_assignment"
        )));
    }
    let w = prefix_weights(s, t, d, corr)?;
    // best[mask]: rows 0..popcount(mask) matched to the columns in mask
    let mut best = vec![f64::NEG_INFINITY; 1 << d];
    best[0] = 0.0;
    for mask in 0usize..(1 << d) {
        let cur = best[mask];
        if cur == f64::NEG_INFINITY {
            continue;
        }
        let row = mask.count_ones() as usize;
        if row == d {
            continue;
        }
        for j in 0..d {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                let v = cur + w[row * d + j];
                if v > best[next] {
                    best[next] = v;
                }
            }
        }
    }
    Ok(best[(1 << d) - 1] / d as f64)
}

/// Correlation-corrected agreement: maximum of `sum_ij P_ij |corr(S_i, T_j)| / d`
/// over doubly-stochastic `P`, solved as a linear assignment problem.
pub fn corrected_agreement_assignment(
    s: &RankedList,
    t: &RankedList,
    d: usize,
    corr: &AssociationMatrix,
) -> Result<f64> {
    check_depth(s, t, d)?;
    let w = prefix_weights(s, t, d, corr)?;
    Ok(assignment::solve_max(&w, d).value / d as f64)
}

/// Permutation-corrected RBO. Depths up to [`MAX_EXACT_DEPTH`] use the
/// factorial search, up to [`MAX_SUBSET_DEPTH`] the subset program. Beyond
/// that the best permutation is found by the assignment solver, which
/// maximises over exactly the same set of pairings.
pub fn rbo_per_value(
    s: &RankedList,
    t: &RankedList,
    params: &RboParams,
    corr: &AssociationMatrix,
) -> Result<RboValue> {
    let k = params.depth(s, t)?;
    let parts = weighted(params.p, k, |d| {
        if d <= MAX_EXACT_DEPTH {
            corrected_agreement_exact(s, t, d, corr)
        } else if d <= MAX_SUBSET_DEPTH {
            corrected_agreement_subsets(s, t, d, corr)
        } else {
            corrected_agreement_assignment(s, t, d, corr)
        }
    })?;
    Ok(RboValue::from_parts(parts))
}

pub fn rbo_per(
    s: &RankedList,
    t: &RankedList,
    params: &RboParams,
    corr: &AssociationMatrix,
) -> Result<f64> {
    Ok(rbo_per_value(s, t, params, corr)?.select(params))
}

pub fn rbo_cor_value(
    s: &RankedList,
    t: &RankedList,
    params: &RboParams,
    corr: &AssociationMatrix,
) -> Result<RboValue> {
    let k = params.depth(s, t)?;
    let parts = weighted(params.p, k, |d| corrected_agreement_assignment(s, t, d, corr))?;
    Ok(RboValue::from_parts(parts))
}

/// Correlation-corrected RBO.
pub fn rbo_cor(
    s: &RankedList,
    t: &RankedList,
    params: &RboParams,
    corr: &AssociationMatrix,
) -> Result<f64> {
    Ok(rbo_cor_value(s, t, params, corr)?.select(params))
}

/// Cosine of the angle between two importance vectors, aligned by feature name.
pub fn cosine(a: &ImportanceVector, b: &ImportanceVector) -> Result<f64> {
    if a.feature_names.len() != b.feature_names.len() {
        return Err(Error::Schema(format!(
            "importance vectors cover {} and {} features",
            a.feature_names.len(),
            b.feature_names.len()
        )));
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (name, &x) in a.feature_names.iter().zip(&a.scores) {
        let y = b
            .score_of(name)
            .ok_or_else(|| Error::Schema(format!("feature `{name}` missing from second vector")))?;
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::DegenerateVector(
            "cosine similarity needs two nonzero vectors".into(),
        ));
    }
    // sqrt(na * nb) rather than sqrt(na) * sqrt(nb): exactly 1 for a == b
    Ok((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Uniformly random reordering of a ranked list.
pub fn permute_rank_list(s: &RankedList, seed: u64) -> RankedList {
    let mut f = s.features().to_vec();
    f.shuffle(&mut seed::rng(seed));
    RankedList::from_ordered(f).expect("permutation of a valid list")
}

/// Reassign the scores of `iv` so that its ranking becomes a uniformly random
/// permutation: the i-th largest score goes to the i-th feature of the
/// permuted list.
pub fn permute_importance(iv: &ImportanceVector, seed: u64) -> ImportanceVector {
    let permuted = permute_rank_list(&rank(iv), seed);
    let mut sorted = iv.scores.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut scores = vec![0.0; iv.scores.len()];
    for (feature, score) in permuted.features().iter().zip(sorted) {
        let idx = iv
            .feature_names
            .iter()
            .position(|n| n == feature)
            .expect("same feature set");
        scores[idx] = score;
    }
    ImportanceVector {
        feature_names: iv.feature_names.clone(),
        scores,
        measure: iv.measure,
    }
}

/// Every similarity value for one (original, synthetic) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    /// RBO as configured (normalised by default).
    pub rbo: f64,
    /// Plain truncated RBO sum.
    pub rbo_raw: f64,
    pub rbo_per: f64,
    pub rbo_cor: f64,
    pub cosine: f64,
    pub params: RboParams,
}

impl SimilarityReport {
    pub const METRICS: [&'static str; 5] = ["rbo", "rbo_raw", "rbo_per", "rbo_cor", "cosine"];

    pub fn metrics(&self) -> [(&'static str, f64); 5] {
        [
            ("rbo", self.rbo),
            ("rbo_raw", self.rbo_raw),
            ("rbo_per", self.rbo_per),
            ("rbo_cor", self.rbo_cor),
            ("cosine", self.cosine),
        ]
    }
}

/// Compare two importance vectors over the same features. A zero vector on
/// either side gives a cosine of 0 rather than an error.
pub fn compare(
    a: &ImportanceVector,
    b: &ImportanceVector,
    corr: &AssociationMatrix,
    params: &RboParams,
) -> Result<SimilarityReport> {
    let (s, t) = (rank(a), rank(b));
    let plain = rbo_value(&s, &t, params)?;
    let per = rbo_per_value(&s, &t, params, corr)?;
    let cor = rbo_cor_value(&s, &t, params, corr)?;
    let cos = match cosine(a, b) {
        Ok(c) => c,
        Err(Error::DegenerateVector(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(SimilarityReport {
        rbo: plain.select(params),
        rbo_raw: plain.raw,
        rbo_per: per.select(params),
        rbo_cor: cor.select(params),
        cosine: cos,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::importance::Measure;
    use approx::assert_abs_diff_eq;
    use itertools::Itertools;
    use proptest::prelude::*;
    use rand::Rng;

    fn list(s: &str) -> RankedList {
        RankedList::from_ordered(s.chars().map(|c| c.to_string()).collect()).unwrap()
    }

    fn corr_from(names: &str, pairs: &[(&str, &str, f64)]) -> AssociationMatrix {
        let names: Vec<String> = names.chars().map(|c| c.to_string()).collect();
        let d = names.len();
        let mut v = vec![0.0; d * d];
        for i in 0..d {
            v[i * d + i] = 1.0;
        }
        for &(a, b, x) in pairs {
            let i = names.iter().position(|n| n == a).unwrap();
            let j = names.iter().position(|n| n == b).unwrap();
            v[i * d + j] = x;
            v[j * d + i] = x;
        }
        AssociationMatrix::new(names, v).unwrap()
    }

    fn iv(names: &[&str], scores: &[f64]) -> ImportanceVector {
        ImportanceVector {
            feature_names: names.iter().map(|s| s.to_string()).collect(),
            scores: scores.to_vec(),
            measure: Measure::Shap,
        }
    }

    #[test]
    fn agreement_examples() {
        let (s, t) = (list("abc"), list("bac"));
        assert_eq!(agreement(&s, &s, 2).unwrap(), 1.0);
        assert_eq!(agreement(&s, &t, 1).unwrap(), 0.0);
        assert_eq!(agreement(&s, &t, 2).unwrap(), 1.0);
        assert_eq!(agreement(&list("abcd"), &list("cdab"), 2).unwrap(), 0.0);
        assert!(matches!(agreement(&s, &t, 4), Err(Error::Size(_))));
        assert!(matches!(agreement(&s, &t, 0), Err(Error::Size(_))));
    }

    #[test]
    fn rbo_examples() {
        let s = list("abcde");
        let norm = RboParams::default();
        assert_eq!(rbo(&s, &s, &norm).unwrap(), 1.0);
        let raw = RboParams {
            p: 0.8,
            k: Some(5),
            normalize: false,
        };
        assert_abs_diff_eq!(rbo(&s, &s, &raw).unwrap(), 0.67232, epsilon = 1e-12);

        // A_1 = 0, A_2 = 1, A_3 = 1 with weights 0.5, 0.25, 0.125
        let half = RboParams {
            p: 0.5,
            k: Some(3),
            normalize: false,
        };
        let (a, b) = (list("abc"), list("bac"));
        assert_abs_diff_eq!(rbo(&a, &b, &half).unwrap(), 0.375, epsilon = 1e-12);
        let half_norm = RboParams {
            normalize: true,
            ..half
        };
        assert_abs_diff_eq!(rbo(&a, &b, &half_norm).unwrap(), 0.375 / 0.875, epsilon = 1e-12);

        assert_eq!(rbo(&list("abc"), &list("def"), &norm).unwrap(), 0.0);
        assert_eq!(rbo(&list("abc"), &list("def"), &half).unwrap(), 0.0);
    }

    #[test]
    fn rbo_parameter_errors() {
        let s = list("abc");
        let bad_p = RboParams {
            p: 1.0,
            ..RboParams::default()
        };
        assert!(matches!(rbo(&s, &s, &bad_p), Err(Error::Config(_))));
        let deep = RboParams {
            k: Some(4),
            ..RboParams::default()
        };
        assert!(matches!(rbo(&s, &s, &deep), Err(Error::Size(_))));
    }

    #[test]
    fn corrected_agreement_examples() {
        let c = corr_from("abc", &[]);
        let (s, t) = (list("abc"), list("bac"));
        for d in 1..=3 {
            let plain = agreement(&s, &t, d).unwrap();
            assert_eq!(corrected_agreement_exact(&s, &t, d, &c).unwrap(), plain);
            assert_eq!(corrected_agreement_assignment(&s, &t, d, &c).unwrap(), plain);
        }

        let xy = corr_from("xy", &[("x", "y", 1.0)]);
        let (s, t) = (list("xy"), list("yx"));
        assert_eq!(agreement(&s, &t, 1).unwrap(), 0.0);
        assert_eq!(corrected_agreement_exact(&s, &t, 1, &xy).unwrap(), 1.0);

        // S = [a, b], T = [c, b], |corr(a, c)| = 0.5: best pairing a-c, b-b
        let abc = corr_from("abc", &[("a", "c", 0.5)]);
        let (s, t) = (list("abc"), list("cba"));
        assert_eq!(agreement(&s, &t, 2).unwrap(), 0.5);
        assert_abs_diff_eq!(corrected_agreement_exact(&s, &t, 2, &abc).unwrap(), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(corrected_agreement_assignment(&s, &t, 2, &abc).unwrap(), 0.75, epsilon = 1e-15);

        let ones = AssociationMatrix::new(
            "abcd".chars().map(|c| c.to_string()).collect(),
            vec![1.0; 16],
        )
        .unwrap();
        for d in 1..=4 {
            assert_eq!(
                corrected_agreement_assignment(&list("abcd"), &list("dcba"), d, &ones).unwrap(),
                1.0
            );
        }
    }

    #[test]
    fn exact_search_depth_limit() {
        let s = list("abcdefghi");
        let c = corr_from("abcdefghi", &[]);
        assert!(matches!(
            corrected_agreement_exact(&s, &s, 9, &c),
            Err(Error::Tractability(_))
        ));
        assert_eq!(corrected_agreement_subsets(&s, &s, 9, &c).unwrap(), 1.0);
    }

    #[test]
    fn coverage_failure() {
        let c = corr_from("ab", &[]);
        assert!(matches!(
            corrected_agreement_assignment(&list("abz"), &list("zab"), 3, &c),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn rbo_cor_recovers_swapped_correlated_pair() {
        let c = corr_from("xyzw", &[("x", "y", 1.0)]);
        let (s, t) = (list("xyzw"), list("yxzw"));
        let p = RboParams::default();
        assert!(rbo(&s, &t, &p).unwrap() < 1.0);
        assert_abs_diff_eq!(rbo_cor(&s, &t, &p, &c).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rbo_per(&s, &t, &p, &c).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_examples() {
        let a = iv(&["a", "b"], &[3.0, 4.0]);
        let b = iv(&["a", "b"], &[4.0, 3.0]);
        assert_abs_diff_eq!(cosine(&a, &b).unwrap(), 0.96, epsilon = 1e-12);
        assert_abs_diff_eq!(cosine(&a, &a).unwrap(), 1.0, epsilon = 1e-12);
        let e1 = iv(&["a", "b"], &[1.0, 0.0]);
        let e2 = iv(&["a", "b"], &[0.0, 1.0]);
        assert_eq!(cosine(&e1, &e2).unwrap(), 0.0);
        // aligned by name, not position
        let swapped = iv(&["b", "a"], &[4.0, 3.0]);
        assert_abs_diff_eq!(cosine(&a, &swapped).unwrap(), 1.0, epsilon = 1e-12);
        let zero = iv(&["a", "b"], &[0.0, 0.0]);
        assert!(matches!(cosine(&a, &zero), Err(Error::DegenerateVector(_))));
    }

    #[test]
    fn permutation_baseline() {
        let one = list("a");
        assert_eq!(permute_rank_list(&one, 7), one);
        let s = list("abcdefghijklmno");
        for seed in 0..20 {
            let p = permute_rank_list(&s, seed);
            assert_eq!(p.features().iter().sorted().collect_vec(), s.features().iter().sorted().collect_vec());
        }
        let v = iv(&["a", "b", "c"], &[0.5, 0.3, 0.2]);
        for seed in 0..10 {
            let pv = permute_importance(&v, seed);
            assert_eq!(rank(&pv), permute_rank_list(&rank(&v), seed));
        }
    }

    #[test]
    fn permutation_null_mean_matches_simulation() {
        // Oracle: independent Monte Carlo over uniformly random permutations
        // drawn directly, with agreement computed by set intersection.
        let s = list("abcdefghijklmno");
        let p = RboParams::default();
        let baseline: f64 = (0..500)
            .map(|seed| rbo(&s, &permute_rank_list(&s, seed), &p).unwrap())
            .sum::<f64>()
            / 500.0;
        let mut rng = seed::rng(987_654);
        let names = s.features().to_vec();
        let mut total = 0.0;
        let trials = 20_000;
        for _ in 0..trials {
            let mut perm = names.clone();
            perm.shuffle(&mut rng);
            let (mut raw, mut wsum, mut w) = (0.0, 0.0, 1.0 - p.p);
            for d in 1..=names.len() {
                let a: std::collections::BTreeSet<_> = names[..d].iter().collect();
                let b: std::collections::BTreeSet<_> = perm[..d].iter().collect();
                raw += w * a.intersection(&b).count() as f64 / d as f64;
                wsum += w;
                w *= p.p;
            }
            total += raw / wsum;
        }
        let oracle = total / trials as f64;
        assert!((baseline - oracle).abs() < 0.02, "{baseline} vs {oracle}");
    }

    #[test]
    fn compare_identical() {
        let v = iv(&["a", "b", "c"], &[0.5, 0.3, 0.2]);
        let c = AssociationMatrix::identity(v.feature_names.clone());
        let r = compare(&v, &v, &c, &RboParams::default()).unwrap();
        assert_eq!(r.rbo, 1.0);
        assert_eq!(r.rbo_per, 1.0);
        assert_eq!(r.rbo_cor, 1.0);
        assert_abs_diff_eq!(r.cosine, 1.0, epsilon = 1e-12);
    }

    fn random_instance(seed: u64, n: usize) -> (RankedList, RankedList, AssociationMatrix) {
        let mut rng = seed::rng(seed);
        let names: Vec<String> = (0..n).map(|i| format!("f{i}")).collect();
        let mut a = names.clone();
        a.shuffle(&mut rng);
        let mut b = names.clone();
        b.shuffle(&mut rng);
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
            for j in i + 1..n {
                let x = rng.random_range(-1.0..1.0);
                v[i * n + j] = x;
                v[j * n + i] = x;
            }
        }
        (
            RankedList::from_ordered(a).unwrap(),
            RankedList::from_ordered(b).unwrap(),
            AssociationMatrix::new(names, v).unwrap(),
        )
    }

    proptest! {
        #[test]
        fn cosine_of_a_vector_with_itself_is_one(scores in prop::collection::vec(1e-6f64..10.0, 1..12)) {
            let iv = ImportanceVector {
                feature_names: (0..scores.len()).map(|i| format!("f{i}")).collect(),
                scores,
                measure: Measure::Shap,
            };
            prop_assert_eq!(cosine(&iv, &iv).unwrap(), 1.0);
        }

        #[test]
        fn chain_and_vertex_optimality(seed in any::<u64>(), n in 1usize..8) {
            let (s, t, c) = random_instance(seed, n);
            for d in 1..=n {
                let a = agreement(&s, &t, d).unwrap();
                let per = corrected_agreement_exact(&s, &t, d, &c).unwrap();
                let dp = corrected_agreement_subsets(&s, &t, d, &c).unwrap();
                let cor = corrected_agreement_assignment(&s, &t, d, &c).unwrap();
                prop_assert!(per >= a - 1e-9);
                prop_assert!(cor >= per - 1e-9);
                prop_assert!((cor - per).abs() < 1e-9);
                prop_assert!((dp - per).abs() < 1e-9);
                prop_assert!((0.0..=1.0 + 1e-12).contains(&cor));
            }
        }

        #[test]
        fn symmetry(seed in any::<u64>(), n in 1usize..9) {
            let (s, t, c) = random_instance(seed, n);
            let p = RboParams::default();
            prop_assert_eq!(rbo(&s, &t, &p).unwrap(), rbo(&t, &s, &p).unwrap());
            let st = rbo_cor(&s, &t, &p, &c).unwrap();
            let ts = rbo_cor(&t, &s, &p, &c).unwrap();
            prop_assert!((st - ts).abs() < 1e-12);
        }

        #[test]
        fn normalized_self_similarity_is_one(n in 1usize..30, p in 0.01f64..0.99, seed in any::<u64>()) {
            let names: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
            let s = permute_rank_list(&RankedList::from_ordered(names).unwrap(), seed);
            let k = (seed as usize % n) + 1;
            let params = RboParams { p, k: Some(k), normalize: true };
            prop_assert_eq!(rbo(&s, &s, &params).unwrap(), 1.0);
        }

        #[test]
        fn cosine_scale_invariant(xs in prop::collection::vec(0.01f64..10.0, 1..10), c in 0.1f64..100.0) {
            let names: Vec<String> = (0..xs.len()).map(|i| format!("h{i}")).collect();
            let a = ImportanceVector { feature_names: names.clone(), scores: xs.clone(), measure: Measure::Mdi };
            let b = ImportanceVector { feature_names: names, scores: xs.iter().map(|x| x * c).collect(), measure: Measure::Mdi };
            prop_assert!((cosine(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
