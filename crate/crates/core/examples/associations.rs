//! Mixed-type association matrices: Pearson, Cramér's V and the correlation
//! ratio, combined into one symmetric |association| matrix.
//!
//! ```bash
//! cargo run --example associations
//! ```

use fisim::association::{association_matrix, mean_offdiag};
use fisim::tabular::{generate_artificial, ArtificialSpec};
use fisim::Result;

/// Mean off-diagonal association of Artificial 1 (independent features) and
/// Artificial 2 (one feature plus four redundant copies).
pub fn run_example() -> Result<(f64, f64)> {
    let mut means = Vec::new();
    for spec in [ArtificialSpec::artificial_1(), ArtificialSpec::artificial_2()] {
        let t = generate_artificial(&ArtificialSpec { n_rows: 3000, ..spec }, 7)?;
        let m = association_matrix(&t)?;
        println!("{:>4}{}", "", m.names().iter().map(|n| format!("{n:>7}")).collect::<String>());
        for i in 0..m.dim() {
            let row: String = (0..m.dim()).map(|j| format!("{:>7.3}", m.at(i, j))).collect();
            println!("{:>4}{row}", m.names()[i]);
        }
        let mean = mean_offdiag(&m)?;
        println!("mean off-diagonal: {mean:.3}\n");
        means.push(mean);
    }
    Ok((means[0], means[1]))
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
