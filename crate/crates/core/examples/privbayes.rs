//! Fit the differentially-private Bayesian network, look at the learned
//! structure, and watch dependence between columns fade as the budget shrinks.
//!
//! ```bash
//! cargo run --example privbayes
//! ```

use fisim::association::cramers_v;
use fisim::synth::{fit_privbayes, sample_privbayes, BayesNet, PrivBayesConfig};
use fisim::tabular::{generate_artificial, ArtificialSpec};
use fisim::Result;

/// Cramér's V between the strongest feature and the target, per epsilon.
pub fn run_example() -> Result<Vec<(f64, f64)>> {
    let real = generate_artificial(&ArtificialSpec { n_rows: 5000, ..ArtificialSpec::artificial_5() }, 3)?;
    let x0 = real.column_by_name("x0").expect("x0");
    println!("real V(x0, y) = {:.3}", cramers_v(x0, real.target())?);

    let mut out = Vec::new();
    for eps in [0.01, 0.1, 1.0, 10.0] {
        let cfg = PrivBayesConfig::new(eps);
        let (structure, params) = cfg.budget_split();
        let net = fit_privbayes(&real, &cfg, 11)?;
        let synth = sample_privbayes(&net, real.n_rows(), 12)?;
        let v = cramers_v(synth.column_by_name("x0").expect("x0"), synth.target())?;
        println!(
            "eps={eps:<5} structure={structure:.3} cpts={params:.3} order={:?} V(x0, y)={v:.3}",
            net.ordering()
        );
        out.push((eps, v));
    }

    // the fitted network is a plain JSON document
    let net = fit_privbayes(&real, &PrivBayesConfig::new(1.0), 5)?;
    for node in net.nodes() {
        println!("{} <- {:?} ({} parent configurations)", node.column, node.parents, node.cpt.len());
    }
    let json = net.to_json()?;
    assert_eq!(BayesNet::from_json(&json)?, net);
    println!("network JSON: {} bytes, spent epsilon {}", json.len(), net.spent_epsilon());
    Ok(out)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
