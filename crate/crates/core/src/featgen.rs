//! Deterministic feature engineering applied identically to real and
//! synthetic tables: pairwise arithmetic and percentile transforms of the
//! continuous features, and per-group aggregations broadcast back to rows.
//!
//! Engineered columns are flagged in the schema and never used as inputs
//! again, so a recipe is a single (depth-1) pass.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tabular::{ColumnKind, ColumnSchema, Table};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Multiply,
    Add,
    Subtract,
    Divide,
    Percentile,
}

impl Transform {
    fn infix(self) -> Option<&'static str> {
        match self {
            Transform::Multiply => Some("MULT"),
            Transform::Add => Some("ADD"),
            Transform::Subtract => Some("SUB"),
            Transform::Divide => Some("DIV"),
            Transform::Percentile => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Min,
    Max,
    Count,
    Mode,
    NumUnique,
    Std,
    Sum,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Min => "MIN",
            Aggregate::Max => "MAX",
            Aggregate::Count => "COUNT",
            Aggregate::Mode => "MODE",
            Aggregate::NumUnique => "NUM_UNIQUE",
            Aggregate::Std => "STD",
            Aggregate::Sum => "SUM",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregation {
    pub group_key: String,
    pub primitives: Vec<Aggregate>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureRecipe {
    #[serde(default)]
    pub transforms: Vec<Transform>,
    #[serde(default)]
    pub aggregation: Option<Aggregation>,
}

impl FeatureRecipe {
    pub fn validate(&self) -> Result<()> {
        let n_agg = self.aggregation.as_ref().map_or(0, |a| a.primitives.len());
        if self.transforms.is_empty() && n_agg == 0 {
            return Err(Error::Recipe("a recipe needs at least one primitive".into()));
        }
        if self.aggregation.as_ref().is_some_and(|a| a.primitives.is_empty()) {
            return Err(Error::Recipe("aggregation lists no primitives".into()));
        }
        Ok(())
    }

    fn sorted_transforms(&self) -> Vec<Transform> {
        let mut t = self.transforms.clone();
        t.sort();
        t.dedup();
        t
    }
}

/// A table with engineered columns appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Engineered {
    pub table: Table,
    /// Cells of each `DIV` column where the divisor was 0 (and the value
    /// was set to 0).
    pub zero_hits: BTreeMap<String, usize>,
}

fn base_features(table: &Table) -> Vec<usize> {
    table
        .schema()
        .columns()
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_target && !c.engineered)
        .map(|(i, _)| i)
        .collect()
}

/// Empirical CDF: share of values `<= x`.
fn percentile_rank(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    values
        .iter()
        .map(|&x| sorted.partition_point(|&v| v <= x) as f64 / n)
        .collect()
}

fn append(table: &Table, extra: Vec<(ColumnSchema, Vec<f64>)>) -> Result<Table> {
    for (c, _) in &extra {
        if table.schema().index_of(&c.name).is_some() {
            return Err(Error::Recipe(format!(
                "engineered column `{}` already exists; the recipe was applied twice",
                c.name
            )));
        }
    }
    table.with_appended(extra)
}

/// Pairwise arithmetic over every unordered pair of continuous features
/// (in schema order) and the percentile rank of each continuous feature.
pub fn apply_transforms(table: &Table, recipe: &FeatureRecipe) -> Result<Engineered> {
    let transforms = recipe.sorted_transforms();
    let cols = table.schema().columns();
    let continuous: Vec<usize> = base_features(table)
        .into_iter()
        .filter(|&i| cols[i].kind == ColumnKind::Continuous)
        .collect();
    if continuous.is_empty() && transforms.iter().any(|t| t.infix().is_some()) {
        return Err(Error::Recipe(
            "pairwise primitives selected but the table has no continuous features".into(),
        ));
    }
    let mut extra = Vec::new();
    let mut zero_hits = BTreeMap::new();
    for &t in &transforms {
        match t.infix() {
            Some(op) => {
                for (a, &i) in continuous.iter().enumerate() {
                    for &j in &continuous[a + 1..] {
                        let (x, y) = (table.column(i), table.column(j));
                        let name = format!("{} {op} {}", cols[i].name, cols[j].name);
                        let mut hits = 0;
                        let values: Vec<f64> = x
                            .iter()
                            .zip(y)
                            .map(|(&a, &b)| match t {
                                Transform::Multiply => a * b,
                                Transform::Add => a + b,
                                Transform::Subtract => a - b,
                                _ if b == 0.0 => {
                                    hits += 1;
                                    0.0
                                }
                                _ => a / b,
                            })
                            .map(|v| if v.is_finite() { v } else { 0.0 })
                            .collect();
                        if t == Transform::Divide {
                            zero_hits.insert(name.clone(), hits);
                        }
                        extra.push((ColumnSchema::continuous(name).engineered(), values));
                    }
                }
            }
            None => {
                for &i in &continuous {
                    let name = format!("PERCENTILE({})", cols[i].name);
                    extra.push((
                        ColumnSchema::continuous(name).engineered(),
                        percentile_rank(table.column(i)),
                    ));
                }
            }
        }
    }
    Ok(Engineered {
        table: append(table, extra)?,
        zero_hits,
    })
}

/// Group rows by the exact value of the key column; groups in order of first
/// appearance.
fn groups(key: &[f64]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut of_row = Vec::with_capacity(key.len());
    for (r, v) in key.iter().enumerate() {
        let bits = if *v == 0.0 { 0 } else { v.to_bits() };
        let g = *index.entry(bits).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[g].push(r);
        of_row.push(g);
    }
    (of_row, members)
}

fn group_stat(agg: Aggregate, values: &[f64]) -> f64 {
    match agg {
        Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
        Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Aggregate::Sum => values.iter().sum(),
        Aggregate::Count => values.len() as f64,
        Aggregate::Std => {
            let n = values.len() as f64;
            if values.len() < 2 {
                return 0.0;
            }
            let mean = values.iter().sum::<f64>() / n;
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        }
        Aggregate::NumUnique => {
            let mut v = values.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.len() as f64
        }
        Aggregate::Mode => {
            let mut v = values.to_vec();
            v.sort_by(f64::total_cmp);
            let (mut best, mut best_n) = (v[0], 0);
            let mut i = 0;
            while i < v.len() {
                let j = v[i..].iter().take_while(|&&x| x == v[i]).count();
                // strictly greater keeps the smallest level on ties
                if j > best_n {
                    best = v[i];
                    best_n = j;
                }
                i += j;
            }
            best
        }
    }
}

/// Group statistics of every base feature, broadcast to each row of the
/// group. Numeric primitives (min, max, std, sum) apply to continuous
/// features, mode to categorical ones, num_unique to all; count adds one
/// column of group sizes.
pub fn apply_aggregations(table: &Table, recipe: &FeatureRecipe) -> Result<Table> {
    let Some(agg) = &recipe.aggregation else {
        return Err(Error::Recipe("recipe has no aggregation".into()));
    };
    let schema = table.schema();
    let key_idx = schema
        .index_of(&agg.group_key)
        .ok_or_else(|| Error::Schema(format!("group key `{}` is not a column", agg.group_key)))?;
    if schema.columns()[key_idx].is_target {
        return Err(Error::Recipe("the target cannot be a group key".into()));
    }
    let (of_row, members) = groups(table.column(key_idx));
    let broadcast = |values: &[f64], a: Aggregate| -> Vec<f64> {
        let per_group: Vec<f64> = members
            .iter()
            .map(|rows| group_stat(a, &rows.iter().map(|&r| values[r]).collect::<Vec<_>>()))
            .collect();
        of_row.iter().map(|&g| per_group[g]).collect()
    };

    let mut prims = agg.primitives.clone();
    prims.sort();
    prims.dedup();
    let cols = schema.columns();
    let features: Vec<usize> = base_features(table).into_iter().filter(|&i| i != key_idx).collect();
    let mut extra = Vec::new();
    for &a in &prims {
        if a == Aggregate::Count {
            let name = format!("COUNT({})", agg.group_key);
            extra.push((
                ColumnSchema::continuous(name).engineered(),
                broadcast(table.column(key_idx), a),
            ));
            continue;
        }
        for &i in &features {
            let col = &cols[i];
            let applies = match a {
                Aggregate::NumUnique => true,
                Aggregate::Mode => col.kind.is_categorical(),
                _ => !col.kind.is_categorical(),
            };
            if !applies {
                continue;
            }
            let name = format!("{a}({} BY {})", col.name, agg.group_key);
            let schema_col = if a == Aggregate::Mode {
                ColumnSchema {
                    name,
                    kind: col.kind,
                    is_target: false,
                    labels: col.labels.clone(),
                    engineered: false,
                }
                .engineered()
            } else {
                ColumnSchema::continuous(name).engineered()
            };
            extra.push((schema_col, broadcast(table.column(i), a)));
        }
    }
    append(table, extra)
}

/// Transforms, then aggregations, both on the original columns only.
pub fn apply_recipe(table: &Table, recipe: &FeatureRecipe) -> Result<Engineered> {
    recipe.validate()?;
    let mut out = if recipe.transforms.is_empty() {
        Engineered {
            table: table.clone(),
            zero_hits: BTreeMap::new(),
        }
    } else {
        apply_transforms(table, recipe)?
    };
    if recipe.aggregation.is_some() {
        out.table = apply_aggregations(&out.table, recipe)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::Schema;

    fn table(cols: Vec<(ColumnSchema, Vec<f64>)>) -> Table {
        let n = cols[0].1.len();
        let mut schema: Vec<ColumnSchema> = cols.iter().map(|c| c.0.clone()).collect();
        schema.push(ColumnSchema::categorical("label", 2).target());
        let mut values: Vec<Vec<f64>> = cols.into_iter().map(|c| c.1).collect();
        values.push((0..n).map(|i| (i % 2) as f64).collect());
        Table::new(Schema::new(schema).unwrap(), values).unwrap()
    }

    fn recipe(transforms: &[Transform]) -> FeatureRecipe {
        FeatureRecipe {
            transforms: transforms.to_vec(),
            aggregation: None,
        }
    }

    #[test]
    fn one_pair_one_column() {
        let t = table(vec![
            (ColumnSchema::continuous("age"), vec![1.0, 2.0, 3.0]),
            (ColumnSchema::continuous("bmi"), vec![4.0, 5.0, 6.0]),
        ]);
        let e = apply_transforms(&t, &recipe(&[Transform::Multiply])).unwrap();
        assert_eq!(e.table.n_cols(), t.n_cols() + 1);
        assert_eq!(e.table.column_by_name("age MULT bmi").unwrap(), [4.0, 10.0, 18.0]);
        assert!(e.table.schema().columns().last().unwrap().engineered);
    }

    #[test]
    fn every_pair_and_primitive() {
        let t = table(vec![
            (ColumnSchema::continuous("a"), vec![1.0, 2.0]),
            (ColumnSchema::continuous("b"), vec![3.0, 4.0]),
            (ColumnSchema::categorical("c", 2), vec![0.0, 1.0]),
            (ColumnSchema::continuous("d"), vec![5.0, 0.5]),
        ]);
        let all = [Transform::Divide, Transform::Add, Transform::Multiply, Transform::Subtract];
        let e = apply_transforms(&t, &recipe(&all)).unwrap();
        // 3 continuous features -> 3 pairs, 4 primitives
        assert_eq!(e.table.n_cols(), t.n_cols() + 12);
        assert_eq!(e.table.column_by_name("a SUB d").unwrap(), [-4.0, 1.5]);
        assert_eq!(e.table.column_by_name("b DIV d").unwrap(), [0.6, 8.0]);
        assert!(e.table.column_by_name("a ADD c").is_none());
    }

    #[test]
    fn percentile_is_empirical_cdf() {
        assert_eq!(percentile_rank(&[10.0, 20.0, 30.0]), [1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(percentile_rank(&[30.0, 10.0, 30.0, 20.0]), [1.0, 0.25, 1.0, 0.5]);
        let t = table(vec![(ColumnSchema::continuous("x"), vec![20.0, 10.0, 30.0])]);
        let e = apply_transforms(&t, &recipe(&[Transform::Percentile])).unwrap();
        assert_eq!(e.table.column_by_name("PERCENTILE(x)").unwrap(), [2.0 / 3.0, 1.0 / 3.0, 1.0]);
    }

    #[test]
    fn division_by_zero_counts() {
        let t = table(vec![
            (ColumnSchema::continuous("x"), vec![1.0, 2.0, 3.0]),
            (ColumnSchema::continuous("y"), vec![2.0, 0.0, 4.0]),
        ]);
        let e = apply_transforms(&t, &recipe(&[Transform::Divide])).unwrap();
        assert_eq!(e.table.column_by_name("x DIV y").unwrap(), [0.5, 0.0, 0.75]);
        assert_eq!(e.zero_hits["x DIV y"], 1);
    }

    #[test]
    fn reapplying_is_rejected() {
        let t = table(vec![
            (ColumnSchema::continuous("x"), vec![1.0, 2.0]),
            (ColumnSchema::continuous("y"), vec![3.0, 4.0]),
        ]);
        let r = recipe(&[Transform::Add, Transform::Percentile]);
        let once = apply_transforms(&t, &r).unwrap().table;
        assert!(matches!(apply_transforms(&once, &r), Err(Error::Recipe(_))));
    }

    #[test]
    fn no_continuous_features() {
        let t = table(vec![(ColumnSchema::categorical("c", 3), vec![0.0, 1.0, 2.0])]);
        assert!(matches!(apply_transforms(&t, &recipe(&[Transform::Add])), Err(Error::Recipe(_))));
        assert!(matches!(FeatureRecipe::default().validate(), Err(Error::Recipe(_))));
    }

    fn households() -> Table {
        table(vec![
            (ColumnSchema::categorical("hh", 2), vec![0.0, 0.0, 1.0]),
            (ColumnSchema::continuous("v"), vec![1.0, 3.0, 5.0]),
            (ColumnSchema::categorical("c", 3), vec![2.0, 1.0, 0.0]),
        ])
    }

    fn aggregate(prims: &[Aggregate]) -> FeatureRecipe {
        FeatureRecipe {
            transforms: Vec::new(),
            aggregation: Some(Aggregation {
                group_key: "hh".into(),
                primitives: prims.to_vec(),
            }),
        }
    }

    #[test]
    fn group_statistics() {
        let t = households();
        let out = apply_aggregations(&t, &aggregate(&[Aggregate::Sum, Aggregate::Count, Aggregate::Std])).unwrap();
        assert_eq!(out.column_by_name("SUM(v BY hh)").unwrap(), [4.0, 4.0, 5.0]);
        assert_eq!(out.column_by_name("COUNT(hh)").unwrap(), [2.0, 2.0, 1.0]);
        let sd = out.column_by_name("STD(v BY hh)").unwrap();
        assert!((sd[0] - 2f64.sqrt()).abs() < 1e-12 && sd[2] == 0.0);
        // numeric primitives skip categorical features
        assert!(out.column_by_name("SUM(c BY hh)").is_none());
        assert_eq!(out.n_rows(), 3);
    }

    #[test]
    fn mode_and_unique() {
        let t = households();
        let out = apply_aggregations(&t, &aggregate(&[Aggregate::Mode, Aggregate::NumUnique])).unwrap();
        // tie between levels 2 and 1 in group hh=0 -> smallest level
        assert_eq!(out.column_by_name("MODE(c BY hh)").unwrap(), [1.0, 1.0, 0.0]);
        let idx = out.schema().index_of("MODE(c BY hh)").unwrap();
        assert_eq!(out.schema().columns()[idx].kind, ColumnKind::Categorical { levels: 3 });
        assert_eq!(out.column_by_name("NUM_UNIQUE(v BY hh)").unwrap(), [2.0, 2.0, 1.0]);
        assert_eq!(out.column_by_name("NUM_UNIQUE(c BY hh)").unwrap(), [2.0, 2.0, 1.0]);
        let mm = apply_aggregations(&t, &aggregate(&[Aggregate::Min, Aggregate::Max])).unwrap();
        assert_eq!(mm.column_by_name("MIN(v BY hh)").unwrap(), [1.0, 1.0, 5.0]);
        assert_eq!(mm.column_by_name("MAX(v BY hh)").unwrap(), [3.0, 3.0, 5.0]);
    }

    #[test]
    fn missing_group_key() {
        let mut r = aggregate(&[Aggregate::Sum]);
        r.aggregation.as_mut().unwrap().group_key = "nope".into();
        assert!(matches!(apply_aggregations(&households(), &r), Err(Error::Schema(_))));
    }

    #[test]
    fn same_columns_for_real_and_synthetic() {
        let recipe = FeatureRecipe {
            transforms: vec![Transform::Multiply, Transform::Percentile],
            aggregation: Some(Aggregation {
                group_key: "hh".into(),
                primitives: vec![Aggregate::Count, Aggregate::Max],
            }),
        };
        let real = apply_recipe(&households(), &recipe).unwrap().table;
        let synth_src = table(vec![
            (ColumnSchema::categorical("hh", 2), vec![1.0, 1.0, 1.0, 0.0]),
            (ColumnSchema::continuous("v"), vec![0.0, 3.0, 3.0, 9.0]),
            (ColumnSchema::categorical("c", 3), vec![0.0, 0.0, 1.0, 2.0]),
        ]);
        let synth = apply_recipe(&synth_src, &recipe).unwrap().table;
        assert_eq!(real.schema().feature_names(), synth.schema().feature_names());
        // engineered columns are not aggregated again
        assert!(real.column_by_name("MAX(PERCENTILE(v) BY hh)").is_none());
    }
}
