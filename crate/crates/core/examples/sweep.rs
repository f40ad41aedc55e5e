//! A small end-to-end sweep: PrivBayes at two budgets plus the column
//! resampling baseline, summarised and written as CSV/JSON reports.
//!
//! ```bash
//! cargo run --release --example sweep -- /tmp/fisim-sweep
//! ```

use fisim::bench::{emit_report, run_experiment, summarize, DatasetConfig, ExperimentConfig, Format, Summary};
use fisim::Result;

pub fn config() -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml(
        r#"
        master_seed = 3
        repeats_outer = 3
        epsilon_grid = [0.01, 10.0]

        [dataset]
        artificial = "artificial-5"
        n_rows = 2000

        [[synthesizer]]
        kind = "privbayes"

        [[synthesizer]]
        kind = "resample"

        [forest]
        n_trees = 40

        [shap]
        n_permutations = 40
        max_instances = 60
        max_background = 30
        "#,
    )
}

pub fn run_example(out: Option<&std::path::Path>) -> Result<Vec<Summary>> {
    let cfg = config()?;
    assert_eq!(cfg.dataset, DatasetConfig { n_rows: Some(2000), ..DatasetConfig::artificial("artificial-5") });
    let exp = run_experiment(&cfg)?;
    let summaries = summarize(&exp.results)?;
    for s in summaries.iter().filter(|s| ["rbo", "rbo_cor", "cosine", "auc_synthetic"].contains(&s.metric.as_str())) {
        let eps = s.epsilon.map_or("-".to_string(), |e| e.to_string());
        println!("{:<9} eps={eps:<5} {:<14} {:.3} ± {:.3} (n={})", s.method, s.metric, s.mean, s.sd, s.n);
    }
    if let Some(dir) = out {
        let manifest = emit_report(&summaries, &exp.results, dir, &[Format::Csv, Format::Json])?;
        for f in manifest.files {
            println!("{} {}", f.sha256, f.path);
        }
    }
    Ok(summaries)
}

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    run_example(out.as_deref()).map(|_| ())
}
