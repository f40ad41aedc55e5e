//! Typed tabular data: schema, immutable column-major table, CSV ingestion,
//! splitting, quantile discretization and the artificial dataset generator.

mod artificial;
mod io;
mod ops;

pub use artificial::{generate_artificial, ArtificialSpec, ImportanceProfile};
pub use io::{load_csv, load_schema, parse_schema, read_csv, schema_to_toml, write_csv, write_csv_string};
pub use ops::{discretize, quantile_bins, split, Binning, SplitPair};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Column domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    /// Values are level indices `0..levels`.
    Categorical { levels: usize },
    Continuous,
}

impl ColumnKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, ColumnKind::Categorical { .. })
    }

    pub fn levels(&self) -> Option<usize> {
        match self {
            ColumnKind::Categorical { levels } => Some(*levels),
            ColumnKind::Continuous => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub is_target: bool,
    /// Original string labels of a categorical column, indexed by level.
    /// Empty when levels have no names (they are written as integers).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    /// Produced by feature engineering; never paired again.
    #[serde(default)]
    pub engineered: bool,
}

impl ColumnSchema {
    pub fn continuous(name: impl Into<String>) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Continuous,
            is_target: false,
            labels: Vec::new(),
            engineered: false,
        }
    }

    pub fn categorical(name: impl Into<String>, levels: usize) -> Self {
        ColumnSchema {
            name: name.into(),
            kind: ColumnKind::Categorical { levels },
            is_target: false,
            labels: Vec::new(),
            engineered: false,
        }
    }

    pub fn target(mut self) -> Self {
        self.is_target = true;
        self
    }

    pub(crate) fn engineered(mut self) -> Self {
        self.engineered = true;
        self
    }

    pub fn label_of(&self, level: usize) -> String {
        self.labels
            .get(level)
            .cloned()
            .unwrap_or_else(|| level.to_string())
    }
}

/// Ordered column list with unique names and exactly one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name `{}`", c.name)));
            }
            if let ColumnKind::Categorical { levels } = c.kind {
                // Derived columns (a constant column after discretization) may
                // legitimately carry a single level.
                if levels == 0 {
                    return Err(Error::Schema(format!(
                        "categorical column `{}` has no levels",
                        c.name
                    )));
                }
            }
        }
        let targets = columns.iter().filter(|c| c.is_target).count();
        if targets != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one target column, found {targets}"
            )));
        }
        Ok(Schema { columns })
    }

    pub fn columns(&self) -> &[ColumnSchema] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.is_target)
            .expect("schema invariant: one target")
    }

    /// Indices of every non-target column, in schema order.
    pub fn feature_indices(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&i| !self.columns[i].is_target)
            .collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.feature_indices()
            .into_iter()
            .map(|i| self.columns[i].name.clone())
            .collect()
    }
}

/// Immutable table stored column-major. Categorical cells hold their level
/// index as an integral `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    schema: Schema,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
}

impl Table {
    pub fn new(schema: Schema, columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(Error::Schema(format!(
                "{} columns supplied for a schema of {}",
                columns.len(),
                schema.len()
            )));
        }
        let n_rows = columns.first().map_or(0, Vec::len);
        for (c, values) in schema.columns().iter().zip(&columns) {
            if values.len() != n_rows {
                return Err(Error::Size(format!(
                    "column `{}` has {} rows, expected {n_rows}",
                    c.name,
                    values.len()
                )));
            }
            check_values(c, values)?;
        }
        Ok(Table {
            schema,
            columns,
            n_rows,
        })
    }

    /// Build without re-validating cell values. Callers guarantee the invariants.
    pub(crate) fn from_parts(schema: Schema, columns: Vec<Vec<f64>>) -> Self {
        let n_rows = columns.first().map_or(0, Vec::len);
        debug_assert!(columns.iter().all(|c| c.len() == n_rows));
        debug_assert_eq!(columns.len(), schema.len());
        Table {
            schema,
            columns,
            n_rows,
        }
    }

    pub fn empty(schema: Schema) -> Self {
        let columns = vec![Vec::new(); schema.len()];
        Table {
            schema,
            columns,
            n_rows: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, idx: usize) -> &[f64] {
        &self.columns[idx]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.schema.index_of(name).map(|i| self.column(i))
    }

    pub fn target(&self) -> &[f64] {
        self.column(self.schema.target_index())
    }

    pub fn feature_indices(&self) -> Vec<usize> {
        self.schema.feature_indices()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.schema.feature_names()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// New table holding the given rows (repeats allowed) in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Table {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Table::from_parts(self.schema.clone(), columns)
    }

    /// Replace column `idx` (schema entry and values).
    pub fn with_column(&self, idx: usize, col: ColumnSchema, values: Vec<f64>) -> Result<Table> {
        let mut cols = self.schema.columns().to_vec();
        cols[idx] = col;
        let schema = Schema::new(cols)?;
        let mut columns = self.columns.clone();
        columns[idx] = values;
        Table::new(schema, columns)
    }

    /// Append columns at the end.
    pub fn with_appended(&self, extra: Vec<(ColumnSchema, Vec<f64>)>) -> Result<Table> {
        let mut cols = self.schema.columns().to_vec();
        let mut columns = self.columns.clone();
        for (c, v) in extra {
            if v.len() != self.n_rows {
                return Err(Error::Size(format!(
                    "appended column `{}` has {} rows, expected {}",
                    c.name,
                    v.len(),
                    self.n_rows
                )));
            }
            check_values(&c, &v)?;
            cols.push(c);
            columns.push(v);
        }
        Ok(Table::from_parts(Schema::new(cols)?, columns))
    }
}

fn check_values(c: &ColumnSchema, values: &[f64]) -> Result<()> {
    for (row, &v) in values.iter().enumerate() {
        let ok = match c.kind {
            ColumnKind::Categorical { levels } => {
                v >= 0.0 && v.fract() == 0.0 && (v as usize) < levels
            }
            ColumnKind::Continuous => v.is_finite(),
        };
        if !ok {
            return Err(Error::Ingestion {
                row,
                column: c.name.clone(),
                message: format!("value {v} outside the column domain {:?}", c.kind),
            });
        }
    }
    Ok(())
}
