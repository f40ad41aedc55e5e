use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ColumnKind, ColumnSchema, Table};
use crate::seed;
use crate::{Error, Result};

/// Train/validation partition of one table.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Table,
    pub validation: Table,
    /// Source row indices of each part.
    pub train_rows: Vec<usize>,
    pub validation_rows: Vec<usize>,
}

/// Uniformly random partition; the train part holds `round(train_frac * n)`
/// rows (kept within `1..n`).
pub fn split(table: &Table, train_frac: f64, seed: u64) -> Result<SplitPair> {
    let n = table.n_rows();
    if n < 2 {
        return Err(Error::Size(format!("cannot split a table of {n} rows")));
    }
    if !(train_frac > 0.0 && train_frac < 1.0) {
        return Err(Error::Config(format!(
            "train fraction {train_frac} is not in (0, 1)"
        )));
    }
    let n_train = ((train_frac * n as f64).round() as usize).clamp(1, n - 1);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut seed::rng(seed));
    let validation_rows = rows.split_off(n_train);
    let train_rows = rows;
    Ok(SplitPair {
        train: table.select_rows(&train_rows),
        validation: table.select_rows(&validation_rows),
        train_rows,
        validation_rows,
    })
}

/// Equal-frequency bin edges of one continuous column.
///
/// A value `x` falls in bin `#{edges <= x}`. `min`/`max` bound the outer bins
/// so a bin can be turned back into an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binning {
    pub edges: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

impl Binning {
    pub fn n_bins(&self) -> usize {
        self.edges.len() + 1
    }

    pub fn bin_of(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e <= x)
    }

    /// Half-open interval covered by `bin`; the last bin is closed at `max`.
    pub fn interval(&self, bin: usize) -> (f64, f64) {
        let lo = if bin == 0 { self.min } else { self.edges[bin - 1] };
        let hi = if bin == self.edges.len() {
            self.max
        } else {
            self.edges[bin]
        };
        (lo, hi)
    }

    /// Uniform draw inside the interval of `bin`.
    pub fn sample_within<R: Rng + ?Sized>(&self, bin: usize, rng: &mut R) -> f64 {
        let (lo, hi) = self.interval(bin);
        if hi > lo {
            let u: f64 = rng.random();
            (lo + u * (hi - lo)).min(hi)
        } else {
            lo
        }
    }
}

/// Quantile edges at ranks `floor(i * n / n_bins)`, `i = 1..n_bins`.
/// Repeated quantiles merge, so the effective bin count may be smaller.
pub fn quantile_bins(values: &[f64], n_bins: usize) -> Binning {
    if values.is_empty() {
        return Binning {
            edges: Vec::new(),
            min: 0.0,
            max: 0.0,
        };
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let min = sorted[0];
    let max = sorted[n - 1];
    let mut edges: Vec<f64> = Vec::with_capacity(n_bins.saturating_sub(1));
    for i in 1..n_bins {
        let e = sorted[i * n / n_bins];
        if e > min && edges.last().is_none_or(|&last| e > last) {
            edges.push(e);
        }
    }
    Binning { edges, min, max }
}

/// Replace a continuous column by its equal-frequency bin index.
pub fn discretize(table: &Table, column: &str, n_bins: usize) -> Result<Table> {
    discretize_with_bins(table, column, n_bins).map(|(t, _)| t)
}

pub(crate) fn discretize_with_bins(
    table: &Table,
    column: &str,
    n_bins: usize,
) -> Result<(Table, Binning)> {
    let idx = table
        .schema()
        .index_of(column)
        .ok_or_else(|| Error::Schema(format!("unknown column `{column}`")))?;
    let col = &table.schema().columns()[idx];
    if col.kind != ColumnKind::Continuous {
        return Err(Error::Schema(format!("column `{column}` is not continuous")));
    }
    if n_bins == 0 {
        return Err(Error::Config("n_bins must be at least 1".into()));
    }
    let values = table.column(idx);
    let bins = quantile_bins(values, n_bins);
    let coded: Vec<f64> = values.iter().map(|&v| bins.bin_of(v) as f64).collect();
    let new_col = ColumnSchema {
        kind: ColumnKind::Categorical {
            levels: bins.n_bins(),
        },
        labels: Vec::new(),
        ..col.clone()
    };
    Ok((table.with_column(idx, new_col, coded)?, bins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Schema;
    use rand_distr::{Distribution, StandardNormal};

    fn numeric_table(values: Vec<f64>) -> Table {
        let n = values.len();
        let schema = Schema::new(vec![
            ColumnSchema::continuous("x"),
            ColumnSchema::categorical("y", 2).target(),
        ])
        .unwrap();
        Table::new(schema, vec![values, (0..n).map(|i| (i % 2) as f64).collect()]).unwrap()
    }

    fn bin_counts(t: &Table) -> Vec<usize> {
        let levels = t.schema().columns()[0].kind.levels().unwrap();
        let mut counts = vec![0; levels];
        for &v in t.column(0) {
            counts[v as usize] += 1;
        }
        counts
    }

    #[test]
    fn split_sizes_and_determinism() {
        let t = numeric_table((0..10_000).map(f64::from).collect());
        let a = split(&t, 0.7, 3).unwrap();
        assert_eq!((a.train.n_rows(), a.validation.n_rows()), (7000, 3000));
        let b = split(&t, 0.7, 3).unwrap();
        assert_eq!(a.train_rows, b.train_rows);
        let mut all: Vec<usize> = a.train_rows.iter().chain(&a.validation_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10_000).collect::<Vec<_>>());
    }

    #[test]
    fn split_needs_two_rows() {
        let t = numeric_table(vec![1.0]);
        assert!(matches!(split(&t, 0.7, 0), Err(Error::Size(_))));
    }

    #[test]
    fn split_is_uniform_over_seeds() {
        // Each of 10 rows should land in train in ~70% of seeds.
        let t = numeric_table((0..10).map(f64::from).collect());
        let mut hits = [0usize; 10];
        for s in 0..1000 {
            for r in split(&t, 0.7, s).unwrap().train_rows {
                hits[r] += 1;
            }
        }
        for h in hits {
            let frac = h as f64 / 1000.0;
            assert!((frac - 0.7).abs() <= 0.10, "frequency {frac}");
        }
    }

    #[test]
    fn constant_column_has_one_level() {
        let t = discretize(&numeric_table(vec![4.2; 50]), "x", 10).unwrap();
        assert_eq!(t.schema().columns()[0].kind, ColumnKind::Categorical { levels: 1 });
        assert!(t.column(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn exact_quartiles() {
        let t = discretize(&numeric_table((1..=100).map(f64::from).collect()), "x", 4).unwrap();
        assert_eq!(bin_counts(&t), vec![25, 25, 25, 25]);
    }

    #[test]
    fn normal_deciles() {
        let mut rng = seed::rng(11);
        let values: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let t = discretize(&numeric_table(values), "x", 10).unwrap();
        for c in bin_counts(&t) {
            assert!((999..=1001).contains(&c), "bin count {c}");
        }
    }

    #[test]
    fn discretize_errors() {
        let t = numeric_table(vec![1.0, 2.0]);
        assert!(matches!(discretize(&t, "nope", 3), Err(Error::Schema(_))));
        assert!(matches!(discretize(&t, "y", 3), Err(Error::Schema(_))));
    }

    #[test]
    fn discretize_keeps_other_columns() {
        let t = numeric_table((0..20).map(f64::from).collect());
        let d = discretize(&t, "x", 4).unwrap();
        assert_eq!(d.n_rows(), t.n_rows());
        assert_eq!(d.column(1), t.column(1));
    }

    #[test]
    fn binning_intervals_cover_values() {
        let values: Vec<f64> = (0..37).map(|i| (i * i) as f64).collect();
        let b = quantile_bins(&values, 5);
        let mut rng = seed::rng(1);
        for &v in &values {
            let bin = b.bin_of(v);
            let (lo, hi) = b.interval(bin);
            assert!(lo <= v && v <= hi);
            let s = b.sample_within(bin, &mut rng);
            assert!(lo <= s && s <= hi);
        }
    }
}
