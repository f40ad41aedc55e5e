//! Measure how well synthetic tabular data preserves the feature-importance
//! structure of the data it was derived from.
//!
//! The pipeline: fit a differentially-private synthesizer ([`synth`]) on a real
//! [`Table`], sample a synthetic copy, engineer features identically on both
//! ([`featgen`]), train a random forest on each ([`forest`]), compute feature
//! importances ([`importance`]) and compare them with rank-based and
//! score-based similarity measures ([`ranksim`]). [`bench`] runs the whole
//! thing over privacy budgets and seeds and writes CSV/JSON reports.

pub mod association;
pub mod bench;
pub mod cli;
mod error;
pub mod featgen;
pub mod forest;
pub mod importance;
pub mod ranksim;
pub mod seed;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};
pub use tabular::{ColumnKind, ColumnSchema, Schema, Table};
