//! Train the random forest and score it with ROC AUC, binary and one-vs-one.
//!
//! ```bash
//! cargo run --example forest_auc
//! ```

use fisim::forest::{evaluate_auc, train_forest, ForestConfig};
use fisim::tabular::{generate_artificial, split, ArtificialSpec};
use fisim::Result;

/// Validation AUC for a binary and a three-class problem.
pub fn run_example() -> Result<(f64, f64)> {
    let cfg = ForestConfig {
        n_trees: 60,
        ..ForestConfig::default()
    };
    let binary = generate_artificial(&ArtificialSpec { n_rows: 2000, ..ArtificialSpec::artificial_1() }, 1)?;
    let parts = split(&binary, 0.7, 2)?;
    let forest = train_forest(&parts.train, &cfg, 3)?;
    let auc2 = evaluate_auc(&forest, &parts.validation)?;
    println!("binary: {} trees, validation AUC {auc2:.3}", forest.trees().len());

    let three = ArtificialSpec {
        n_rows: 2000,
        n_classes: 3,
        ..ArtificialSpec::artificial_4()
    };
    let t = generate_artificial(&three, 4)?;
    let parts = split(&t, 0.7, 5)?;
    let forest = train_forest(&parts.train, &cfg, 6)?;
    let auc3 = evaluate_auc(&forest, &parts.validation)?;
    println!("three classes: one-vs-one AUC {auc3:.3}");
    Ok((auc2, auc3))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
