//! Depth-1 feature engineering: pairwise arithmetic, percentile ranks and
//! group aggregates, applied identically to any table with the same schema.
//!
//! ```bash
//! cargo run --example feature_engineering
//! ```

use fisim::featgen::{apply_recipe, Aggregate, Aggregation, FeatureRecipe, Transform};
use fisim::tabular::{ColumnSchema, Schema};
use fisim::{Result, Table};

pub fn run_example() -> Result<Vec<String>> {
    let schema = Schema::new(vec![
        ColumnSchema::categorical("household", 3),
        ColumnSchema::continuous("age"),
        ColumnSchema::continuous("income"),
        ColumnSchema::categorical("insured", 2).target(),
    ])?;
    let table = Table::new(
        schema,
        vec![
            vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0],
            vec![34.0, 36.0, 70.0, 68.0, 25.0, 0.0],
            vec![3.1, 2.8, 1.2, 0.0, 2.5, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ],
    )?;
    let recipe = FeatureRecipe {
        transforms: vec![Transform::Multiply, Transform::Divide, Transform::Percentile],
        aggregation: Some(Aggregation {
            group_key: "household".into(),
            primitives: vec![Aggregate::Mode, Aggregate::Max, Aggregate::Count, Aggregate::Sum],
        }),
    };
    let out = apply_recipe(&table, &recipe)?;
    for name in out.table.feature_names() {
        let col = out.table.column_by_name(&name).expect("column");
        println!("{name:<24} {col:?}");
    }
    println!("divisions by zero mapped to 0: {:?}", out.zero_hits);
    // engineered columns are marked, so the recipe cannot stack on itself
    assert!(apply_recipe(&out.table, &recipe).is_err());
    Ok(out.table.feature_names())
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
