//! Synthetic data: the PrivBayes differentially-private synthesizer and the
//! column-resampling and row-subsampling baselines.
//!
//! Every method is a [`Synthesizer`]: fitting reads the real table once and
//! returns a [`Fitted`] model that can be sampled any number of times. For
//! PrivBayes the privacy cost is paid at fit time only.

mod baselines;
pub mod mechanism;
mod privbayes;

pub use baselines::{resample_columns, subsample};
pub use privbayes::{fit_privbayes, sample_privbayes, BayesNet, NetNode, PrivBayesConfig, MIN_ROWS};

use crate::tabular::Table;
use crate::Result;

pub trait Synthesizer: Send + Sync {
    fn fit(&self, table: &Table, seed: u64) -> Result<Box<dyn Fitted>>;
}

pub trait Fitted: Send + Sync {
    /// A fresh synthetic table.
    fn sample(&self, seed: u64) -> Result<Table>;

    /// Privacy budget consumed by fitting; `None` for non-private baselines.
    fn spent_epsilon(&self) -> Option<f64>;
}

struct FittedNet {
    net: BayesNet,
    n_rows: usize,
}

impl Fitted for FittedNet {
    fn sample(&self, seed: u64) -> Result<Table> {
        sample_privbayes(&self.net, self.n_rows, seed)
    }

    fn spent_epsilon(&self) -> Option<f64> {
        Some(self.net.spent_epsilon())
    }
}

/// Samples as many rows as the training table had.
impl Synthesizer for PrivBayesConfig {
    fn fit(&self, table: &Table, seed: u64) -> Result<Box<dyn Fitted>> {
        Ok(Box::new(FittedNet {
            net: fit_privbayes(table, self, seed)?,
            n_rows: table.n_rows(),
        }))
    }
}

/// Independent bootstrap of each column.
#[derive(Debug, Clone, Copy, Default)]
pub struct ColumnResampler;

/// Rows drawn without replacement.
#[derive(Debug, Clone, Copy)]
pub struct Subsampler {
    pub fraction: f64,
}

struct Kept<F> {
    table: Table,
    draw: F,
}

impl<F: Fn(&Table, u64) -> Result<Table> + Send + Sync> Fitted for Kept<F> {
    fn sample(&self, seed: u64) -> Result<Table> {
        (self.draw)(&self.table, seed)
    }

    fn spent_epsilon(&self) -> Option<f64> {
        None
    }
}

impl Synthesizer for ColumnResampler {
    fn fit(&self, table: &Table, _seed: u64) -> Result<Box<dyn Fitted>> {
        resample_columns(table, 0)?;
        Ok(Box::new(Kept {
            table: table.clone(),
            draw: resample_columns,
        }))
    }
}

impl Synthesizer for Subsampler {
    fn fit(&self, table: &Table, _seed: u64) -> Result<Box<dyn Fitted>> {
        let fraction = self.fraction;
        subsample(table, fraction, 0)?;
        Ok(Box::new(Kept {
            table: table.clone(),
            draw: move |t: &Table, seed| subsample(t, fraction, seed),
        }))
    }
}
