//! Rank-biased overlap and its corrected variants. Swapping two interchangeable
//! (highly associated) features costs plain RBO, less with the permutation
//! correction, and nothing with the correlation correction.
//!
//! ```bash
//! cargo run --example similarity
//! ```

use fisim::association::AssociationMatrix;
use fisim::importance::{ImportanceVector, Measure};
use fisim::ranksim::{compare, RboParams, SimilarityReport};
use fisim::Result;

fn vector(names: &[&str], scores: &[f64]) -> ImportanceVector {
    ImportanceVector {
        feature_names: names.iter().map(|s| s.to_string()).collect(),
        scores: scores.to_vec(),
        measure: Measure::Shap,
    }
}

pub fn run_example() -> Result<SimilarityReport> {
    let names = ["age", "age_sq", "income", "region"];
    let original = vector(&names, &[0.40, 0.30, 0.20, 0.10]);
    // the synthetic model prefers age_sq over age and income over both
    let synthetic = vector(&names, &[0.25, 0.30, 0.35, 0.10]);

    #[rustfmt::skip]
    let assoc = AssociationMatrix::new(
        names.iter().map(|s| s.to_string()).collect(),
        vec![
            1.00, 0.97, 0.30, 0.05,
            0.97, 1.00, 0.28, 0.05,
            0.30, 0.28, 1.00, 0.10,
            0.05, 0.05, 0.10, 1.00,
        ],
    )?;
    let report = compare(&original, &synthetic, &assoc, &RboParams::default())?;
    for (metric, value) in report.metrics() {
        println!("{metric:<8} {value:.4}");
    }
    let same = compare(&original, &original, &assoc, &RboParams::default())?;
    println!("identical lists: rbo={} cosine={}", same.rbo, same.cosine);
    Ok(report)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
