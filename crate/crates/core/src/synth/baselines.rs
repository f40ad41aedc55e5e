use rand::seq::index;
use rand::Rng;

use crate::seed;
use crate::tabular::Table;
use crate::{Error, Result};

/// Bootstrap every column on its own, keeping marginals and destroying all
/// dependence between columns.
pub fn resample_columns(table: &Table, seed: u64) -> Result<Table> {
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::Size("cannot resample an empty table".into()));
    }
    let mut rng = seed::rng(seed);
    let columns = table
        .columns()
        .iter()
        .map(|col| (0..n).map(|_| col[rng.random_range(0..n)]).collect())
        .collect();
    Table::new(table.schema().clone(), columns)
}

/// `round(fraction * n)` rows drawn without replacement.
pub fn subsample(table: &Table, fraction: f64, seed: u64) -> Result<Table> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!("subsample fraction must lie in (0, 1], got {fraction}")));
    }
    let n = table.n_rows();
    let size = (fraction * n as f64).round() as usize;
    if size == 0 {
        return Err(Error::Size(format!("a {fraction} fraction of {n} rows is empty")));
    }
    let mut rng = seed::rng(seed);
    let rows = index::sample(&mut rng, n, size).into_vec();
    Ok(table.select_rows(&rows))
}
