//! Three importance measures on the same forest: impurity decrease (MDI),
//! permutation importance (AUC drop) and global SHAP (mean |phi|).
//!
//! ```bash
//! cargo run --example importance
//! ```

use fisim::forest::{train_forest, ForestConfig};
use fisim::importance::{global_shap, mdi, pfi, rank, ImportanceVector, ShapSettings};
use fisim::tabular::{generate_artificial, split, ArtificialSpec};
use fisim::Result;

pub fn run_example() -> Result<Vec<ImportanceVector>> {
    // geometric signal weights: x0 matters most, x2 least
    let t = generate_artificial(&ArtificialSpec { n_rows: 3000, ..ArtificialSpec::artificial_5() }, 8)?;
    let parts = split(&t, 0.7, 1)?;
    let forest = train_forest(&parts.train, &ForestConfig { n_trees: 80, ..Default::default() }, 2)?;
    let shap = ShapSettings {
        n_permutations: 50,
        max_instances: 100,
        max_background: 50,
    };
    let all = vec![
        mdi(&forest),
        pfi(&forest, &parts.validation, 5, 3)?,
        global_shap(&forest, &parts.train, &parts.validation, &shap, 4)?,
    ];
    for iv in &all {
        let scores: Vec<String> = iv
            .feature_names
            .iter()
            .zip(&iv.scores)
            .map(|(f, s)| format!("{f}={s:.4}"))
            .collect();
        println!("{:<5} {}  ranking {:?}", iv.measure.to_string(), scores.join(" "), rank(iv).features());
    }
    Ok(all)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
