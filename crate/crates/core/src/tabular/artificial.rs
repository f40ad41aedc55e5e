//! Classification datasets with controlled feature roles, in the spirit of
//! the classic `make_classification` generator: Gaussian class clusters at
//! hypercube vertices, redundant features as random linear combinations of
//! the informative ones, and pure noise features.

use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ops::quantile_bins;
use super::{ColumnSchema, Schema, Table};
use crate::seed;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceProfile {
    /// Every informative feature carries the same centroid offset; clusters
    /// get a random covariance so realised importances still differ.
    Uniform,
    /// Informative feature `j` has its centroid offset scaled by `3^-j` and
    /// isotropic noise, giving well separated importances.
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtificialSpec {
    pub n_rows: usize,
    pub n_informative: usize,
    #[serde(default)]
    pub n_redundant: usize,
    #[serde(default)]
    pub n_noise: usize,
    pub categorical: bool,
    #[serde(default = "default_levels")]
    pub n_levels: usize,
    #[serde(default = "default_sep")]
    pub class_sep: f64,
    #[serde(default = "default_classes")]
    pub n_classes: usize,
    #[serde(default = "default_profile")]
    pub importance_profile: ImportanceProfile,
}

fn default_levels() -> usize {
    5
}
fn default_sep() -> f64 {
    1.0
}
fn default_classes() -> usize {
    2
}
fn default_profile() -> ImportanceProfile {
    ImportanceProfile::Uniform
}

impl ArtificialSpec {
    fn base(n_informative: usize, categorical: bool) -> Self {
        ArtificialSpec {
            n_rows: 10_000,
            n_informative,
            n_redundant: 0,
            n_noise: 0,
            categorical,
            n_levels: 5,
            class_sep: 1.0,
            n_classes: 2,
            importance_profile: ImportanceProfile::Uniform,
        }
    }

    /// Five informative categorical features, five levels each.
    pub fn artificial_1() -> Self {
        Self::base(5, true)
    }

    /// One informative categorical feature and four redundant copies.
    pub fn artificial_2() -> Self {
        ArtificialSpec {
            n_redundant: 4,
            ..Self::base(1, true)
        }
    }

    /// Fifteen informative categorical features.
    pub fn artificial_3() -> Self {
        Self::base(15, true)
    }

    /// Fifteen informative continuous features.
    pub fn artificial_4() -> Self {
        Self::base(15, false)
    }

    /// Three categorical features with clearly separated importances.
    pub fn artificial_5() -> Self {
        ArtificialSpec {
            importance_profile: ImportanceProfile::Distinct,
            class_sep: 1.5,
            ..Self::base(3, true)
        }
    }

    pub fn n_features(&self) -> usize {
        self.n_informative + self.n_redundant + self.n_noise
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("artificial spec: {m}")));
        if self.n_rows == 0 {
            return fail("n_rows must be positive");
        }
        if self.n_features() == 0 {
            return fail("n_informative + n_redundant + n_noise must be at least 1");
        }
        if self.n_redundant > 0 && self.n_informative == 0 {
            return fail("redundant features require n_informative >= 1");
        }
        if self.n_levels < 2 {
            return fail("n_levels must be at least 2");
        }
        if !(self.class_sep > 0.0 && self.class_sep.is_finite()) {
            return fail("class_sep must be positive");
        }
        if self.n_classes < 2 {
            return fail("n_classes must be at least 2");
        }
        if self.n_informative < 64 && (1u128 << self.n_informative) < self.n_classes as u128 {
            return fail("2^n_informative must be at least n_classes (one vertex per class)");
        }
        Ok(())
    }
}

impl FromStr for ArtificialSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "artificial-1" | "artificial1" => Ok(Self::artificial_1()),
            "artificial-2" | "artificial2" => Ok(Self::artificial_2()),
            "artificial-3" | "artificial3" => Ok(Self::artificial_3()),
            "artificial-4" | "artificial4" => Ok(Self::artificial_4()),
            "artificial-5" | "artificial5" => Ok(Self::artificial_5()),
            _ => Err(Error::Config(format!(
                "unknown artificial dataset `{s}` (expected artificial-1 .. artificial-5)"
            ))),
        }
    }
}

/// Generate a table with feature columns `x0..` (informative, then redundant,
/// then noise) followed by the target column `y`.
pub fn generate_artificial(spec: &ArtificialSpec, seed: u64) -> Result<Table> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let n = spec.n_rows;
    let n_inf = spec.n_informative;
    let k = spec.n_classes;

    // balanced labels, row order shuffled at the end
    let labels: Vec<usize> = (0..n).map(|i| i % k).collect();

    let weights: Vec<f64> = (0..n_inf)
        .map(|j| match spec.importance_profile {
            ImportanceProfile::Uniform => 1.0,
            ImportanceProfile::Distinct => 3f64.powi(-(j as i32)),
        })
        .collect();
    let vertices = class_vertices(n_inf, k, spec.importance_profile, &mut rng);
    let centroids: Vec<Vec<f64>> = vertices
        .iter()
        .map(|v| {
            v.iter()
                .zip(&weights)
                .map(|(&s, &w)| s * spec.class_sep * w)
                .collect()
        })
        .collect();
    // per-class random covariance: row-major n_inf x n_inf, entries uniform [-1, 1]
    let mixing: Option<Vec<Vec<f64>>> = match spec.importance_profile {
        ImportanceProfile::Uniform => Some(
            (0..k)
                .map(|_| (0..n_inf * n_inf).map(|_| rng.random_range(-1.0..=1.0)).collect())
                .collect(),
        ),
        ImportanceProfile::Distinct => None,
    };

    let mut informative = vec![vec![0.0; n]; n_inf];
    let mut z = vec![0.0; n_inf];
    for (row, &c) in labels.iter().enumerate() {
        for zj in z.iter_mut() {
            *zj = StandardNormal.sample(&mut rng);
        }
        for j in 0..n_inf {
            let noise = match &mixing {
                Some(m) => (0..n_inf).map(|i| z[i] * m[c][i * n_inf + j]).sum(),
                None => z[j],
            };
            informative[j][row] = centroids[c][j] + noise;
        }
    }

    let mut features = informative;
    for _ in 0..spec.n_redundant {
        let coef: Vec<f64> = (0..n_inf).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let col = (0..n)
            .map(|r| (0..n_inf).map(|i| coef[i] * features[i][r]).sum())
            .collect();
        features.push(col);
    }
    for _ in 0..spec.n_noise {
        features.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut schema_cols = Vec::with_capacity(features.len() + 1);
    let mut columns = Vec::with_capacity(features.len() + 1);
    for (j, f) in features.into_iter().enumerate() {
        let name = format!("x{j}");
        let f: Vec<f64> = order.iter().map(|&r| f[r]).collect();
        if spec.categorical {
            let bins = quantile_bins(&f, spec.n_levels);
            schema_cols.push(ColumnSchema::categorical(name, bins.n_bins()));
            columns.push(f.iter().map(|&v| bins.bin_of(v) as f64).collect());
        } else {
            schema_cols.push(ColumnSchema::continuous(name));
            columns.push(f);
        }
    }
    schema_cols.push(ColumnSchema::categorical("y", k).target());
    columns.push(order.iter().map(|&r| labels[r] as f64).collect());
    Table::new(Schema::new(schema_cols)?, columns)
}

/// One distinct ±1 vertex per class. Two-class `Distinct` data uses
/// antipodal vertices so every informative coordinate separates the classes.
fn class_vertices<R: Rng>(
    dims: usize,
    k: usize,
    profile: ImportanceProfile,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    if profile == ImportanceProfile::Distinct && k == 2 {
        return vec![vec![-1.0; dims], vec![1.0; dims]];
    }
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let v: Vec<f64> = (0..dims)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::pearson;
    use crate::tabular::ColumnKind;

    #[test]
    fn artificial_1_shape() {
        let t = generate_artificial(&ArtificialSpec::artificial_1(), 0).unwrap();
        assert_eq!(t.n_rows(), 10_000);
        assert_eq!(t.n_cols(), 6);
        for c in &t.schema().columns()[..5] {
            assert_eq!(c.kind, ColumnKind::Categorical { levels: 5 });
        }
        let y = t.target();
        let ones = y.iter().filter(|&&v| v == 1.0).count();
        assert_eq!(ones, 5000);
    }

    #[test]
    fn artificial_4_is_continuous() {
        let t = generate_artificial(
            &ArtificialSpec {
                n_rows: 500,
                ..ArtificialSpec::artificial_4()
            },
            1,
        )
        .unwrap();
        assert_eq!(t.feature_names().len(), 15);
        assert!(t.schema().columns()[..15]
            .iter()
            .all(|c| c.kind == ColumnKind::Continuous));
    }

    #[test]
    fn artificial_5_has_three_features() {
        let t = generate_artificial(&ArtificialSpec::artificial_5(), 2).unwrap();
        assert_eq!(t.feature_names(), vec!["x0", "x1", "x2"]);
        assert_eq!(t.n_rows(), 10_000);
    }

    #[test]
    fn redundant_columns_are_linear_in_informative() {
        let spec = ArtificialSpec {
            categorical: false,
            n_rows: 2000,
            ..ArtificialSpec::artificial_2()
        };
        let t = generate_artificial(&spec, 5).unwrap();
        // a single informative column: each redundant column is c * x0
        for j in 1..5 {
            let r = pearson(t.column(0), t.column(j)).unwrap();
            assert!(r.abs() > 0.99, "column {j}: r = {r}");
        }
    }

    #[test]
    fn redundant_match_generating_combination() {
        let spec = ArtificialSpec {
            n_rows: 1000,
            n_informative: 3,
            n_redundant: 2,
            n_noise: 1,
            categorical: false,
            ..ArtificialSpec::artificial_1()
        };
        let t = generate_artificial(&spec, 9).unwrap();
        // regress each redundant column on the informative ones: exact fit
        for j in 3..5 {
            let target = t.column(j);
            let fitted = least_squares_fit(&[t.column(0), t.column(1), t.column(2)], target);
            let r = pearson(&fitted, target).unwrap();
            assert!(r.abs() > 0.99, "redundant {j}: r = {r}");
        }
    }

    // Normal equations via Gaussian elimination; test-only oracle.
    fn least_squares_fit(xs: &[&[f64]], y: &[f64]) -> Vec<f64> {
        let p = xs.len();
        let mut a = vec![vec![0.0; p + 1]; p];
        for i in 0..p {
            for j in 0..p {
                a[i][j] = xs[i].iter().zip(xs[j]).map(|(u, v)| u * v).sum();
            }
            a[i][p] = xs[i].iter().zip(y).map(|(u, v)| u * v).sum();
        }
        for c in 0..p {
            let piv = a[c][c];
            for j in c..=p {
                a[c][j] /= piv;
            }
            for r in 0..p {
                if r != c {
                    let f = a[r][c];
                    for j in c..=p {
                        a[r][j] -= f * a[c][j];
                    }
                }
            }
        }
        (0..y.len())
            .map(|r| (0..p).map(|i| a[i][p] * xs[i][r]).sum())
            .collect()
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = ArtificialSpec {
            n_rows: 300,
            ..ArtificialSpec::artificial_1()
        };
        let a = generate_artificial(&spec, 4).unwrap();
        let b = generate_artificial(&spec, 4).unwrap();
        let c = generate_artificial(&spec, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_specs() {
        let none = ArtificialSpec {
            n_informative: 0,
            ..ArtificialSpec::artificial_1()
        };
        assert!(matches!(generate_artificial(&none, 0), Err(Error::Config(_))));
        let orphan = ArtificialSpec {
            n_informative: 0,
            n_redundant: 2,
            ..ArtificialSpec::artificial_1()
        };
        let err = generate_artificial(&orphan, 0).unwrap_err().to_string();
        assert!(err.contains("redundant"), "{err}");
        assert!("artificial-9".parse::<ArtificialSpec>().is_err());
        assert_eq!(
            "Artificial_5".parse::<ArtificialSpec>().unwrap(),
            ArtificialSpec::artificial_5()
        );
    }
}
