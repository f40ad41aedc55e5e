//! Pairwise association between mixed-type columns: Pearson for two numeric
//! columns, Cramér's V for two categorical ones and the correlation ratio for
//! a categorical/numeric pair.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::tabular::{ColumnKind, Table};
use crate::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Size(format!("length mismatch: {a} vs {b}")));
    }
    if a < 2 {
        return Err(Error::Size(format!("need at least 2 observations, got {a}")));
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample Pearson correlation, 0 when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(0.0);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Re-index arbitrary level codes to `0..r`.
fn compact_levels(x: &[f64]) -> (Vec<usize>, usize) {
    let mut map: HashMap<u64, usize> = HashMap::new();
    let codes = x
        .iter()
        .map(|v| {
            let next = map.len();
            *map.entry(v.to_bits()).or_insert(next)
        })
        .collect();
    (codes, map.len())
}

/// Cramér's V from the contingency table of observed level pairs (no bias
/// correction). 0 when either variable is constant.
pub fn cramers_v(x: &[f64], y: &[f64]) -> Result<f64> {
    check_lengths(x.len(), y.len())?;
    let (xc, r) = compact_levels(x);
    let (yc, c) = compact_levels(y);
    if r < 2 || c < 2 {
        return Ok(0.0);
    }
    let n = x.len() as f64;
    let mut table = vec![0.0; r * c];
    let mut row_tot = vec![0.0; r];
    let mut col_tot = vec![0.0; c];
    for (&a, &b) in xc.iter().zip(&yc) {
        table[a * c + b] += 1.0;
        row_tot[a] += 1.0;
        col_tot[b] += 1.0;
    }
    let mut chi2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let expected = row_tot[i] * col_tot[j] / n;
            let d = table[i * c + j] - expected;
            chi2 += d * d / expected;
        }
    }
    let v = (chi2 / (n * (r.min(c) - 1) as f64)).sqrt();
    Ok(v.clamp(0.0, 1.0))
}

/// Correlation ratio η = sqrt(SS_between / SS_total) of `num` grouped by `cat`.
pub fn correlation_ratio(cat: &[f64], num: &[f64]) -> Result<f64> {
    check_lengths(cat.len(), num.len())?;
    let (codes, groups) = compact_levels(cat);
    let overall = mean(num);
    let mut sums = vec![0.0; groups];
    let mut counts = vec![0.0; groups];
    for (&g, &v) in codes.iter().zip(num) {
        sums[g] += v;
        counts[g] += 1.0;
    }
    let total: f64 = num.iter().map(|v| (v - overall).powi(2)).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let between: f64 = sums
        .iter()
        .zip(&counts)
        .map(|(s, n)| n * (s / n - overall).powi(2))
        .sum();
    Ok((between / total).sqrt().clamp(0.0, 1.0))
}

/// Association between two columns of the given kinds.
pub fn associate(a: &[f64], a_kind: ColumnKind, b: &[f64], b_kind: ColumnKind) -> Result<f64> {
    match (a_kind.is_categorical(), b_kind.is_categorical()) {
        (false, false) => pearson(a, b),
        (true, true) => cramers_v(a, b),
        (true, false) => correlation_ratio(a, b),
        (false, true) => correlation_ratio(b, a),
    }
}

/// Symmetric feature-by-feature association matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMatrix {
    names: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<f64>,
}

impl AssociationMatrix {
    /// Build from a row-major square matrix; checks symmetry, unit diagonal
    /// and finiteness.
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let d = names.len();
        if values.len() != d * d {
            return Err(Error::Size(format!(
                "{} values for a {d}x{d} association matrix",
                values.len()
            )));
        }
        for i in 0..d {
            if values[i * d + i] != 1.0 {
                return Err(Error::Schema(format!("diagonal entry for `{}` is not 1", names[i])));
            }
            for j in 0..d {
                let v = values[i * d + j];
                if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                    return Err(Error::Schema(format!("entry ({i}, {j}) = {v} is not in [-1, 1]")));
                }
                if (v - values[j * d + i]).abs() > 1e-12 {
                    return Err(Error::Schema(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        let mut index = HashMap::with_capacity(d);
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate feature `{n}`")));
            }
        }
        Ok(AssociationMatrix {
            names,
            index,
            values,
        })
    }

    pub fn identity(names: Vec<String>) -> Self {
        let d = names.len();
        let mut values = vec![0.0; d * d];
        for i in 0..d {
            values[i * d + i] = 1.0;
        }
        AssociationMatrix::new(names, values).expect("identity is valid")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.names.len() + j]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.at(self.index_of(a)?, self.index_of(b)?))
    }

    /// CSV with a `feature` column followed by one column per feature.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| Error::Serde(e.to_string());
        let mut header = vec!["feature".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(err)?;
        for (i, n) in self.names.iter().enumerate() {
            let mut rec = vec![n.clone()];
            rec.extend((0..self.dim()).map(|j| format!("{}", self.at(i, j))));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r
            .headers()
            .map_err(|e| Error::Ingest(format!("association header: {e}")))?
            .clone();
        let names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let d = names.len();
        let mut values = vec![0.0; d * d];
        let mut seen = 0;
        for (row, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Ingest(e.to_string()))?;
            let name = rec.get(0).unwrap_or("");
            let i = names.iter().position(|n| n == name).ok_or_else(|| Error::Ingestion {
                row,
                column: "feature".into(),
                message: format!("`{name}` is not a header feature"),
            })?;
            for j in 0..d {
                let cell = rec.get(j + 1).unwrap_or("");
                values[i * d + j] = cell.trim().parse().map_err(|_| Error::Ingestion {
                    row,
                    column: names[j].clone(),
                    message: format!("cannot parse `{cell}`"),
                })?;
            }
            seen += 1;
        }
        if seen != d {
            return Err(Error::Ingest(format!("{seen} rows for {d} features")));
        }
        AssociationMatrix::new(names, values)
    }
}

/// Association matrix over the non-target columns of `table`. Numeric pairs
/// keep the sign of their Pearson correlation.
pub fn association_matrix(table: &Table) -> Result<AssociationMatrix> {
    let feats = table.feature_indices();
    if feats.is_empty() {
        return Err(Error::Schema("table has no feature columns".into()));
    }
    let cols = table.schema().columns();
    let d = feats.len();
    let mut values = vec![0.0; d * d];
    for a in 0..d {
        values[a * d + a] = 1.0;
        for b in a + 1..d {
            let (ia, ib) = (feats[a], feats[b]);
            let v = if table.n_rows() < 2 {
                0.0
            } else {
                associate(table.column(ia), cols[ia].kind, table.column(ib), cols[ib].kind)?
            };
            values[a * d + b] = v;
            values[b * d + a] = v;
        }
    }
    let names = feats.iter().map(|&i| cols[i].name.clone()).collect();
    AssociationMatrix::new(names, values)
}

/// Mean absolute off-diagonal entry.
pub fn mean_offdiag(m: &AssociationMatrix) -> Result<f64> {
    let d = m.dim();
    if d < 2 {
        return Err(Error::Size(format!("dimension {d} has no off-diagonal entries")));
    }
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m.at(i, j).abs();
            }
        }
    }
    Ok(s / (d * (d - 1)) as f64)
}
