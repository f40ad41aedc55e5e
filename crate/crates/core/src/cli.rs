//! The `fisim` command line: a thin layer over [`crate::bench`] and friends.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::association::AssociationMatrix;
use crate::bench::{emit_report, read_runs_json, run_experiment_with_jobs, summarize, ExperimentConfig, Format};
use crate::importance::read_importance_csv;
use crate::ranksim::{compare, RboParams};
use crate::tabular::{generate_artificial, schema_to_toml, write_csv, ArtificialSpec, Table};
use crate::{Error, Result};

/// Environment variable overriding `master_seed` of a config.
pub const SEED_ENV: &str = "FISIM_SEED";

#[derive(Parser, Debug)]
#[command(name = "fisim", version, about = "Feature-importance similarity of synthetic tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment sweep and write the report.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (results do not depend on it).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Master seed; beats FISIM_SEED and the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',', default_value = "csv,json")]
        format: Vec<FormatArg>,
    },
    /// Re-aggregate a runs.json into a fresh report.
    Summarize {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write an artificial dataset as CSV plus a `.schema.toml` sidecar.
    Generate {
        /// A preset name (artificial-1 .. artificial-5) or a TOML file holding
        /// either a dataset spec or a full experiment config.
        #[arg(long)]
        spec: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Override the row count.
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Compare two importance files.
    Similarity {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Association matrix CSV; the identity when omitted.
        #[arg(long)]
        assoc: Option<PathBuf>,
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fisim: {}", one_line(&e.to_string()));
            ExitCode::FAILURE
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            out,
            jobs,
            seed,
            format,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = resolve_seed(seed, std::env::var(SEED_ENV).ok().as_deref())? {
                cfg.master_seed = s;
            }
            let formats: Vec<Format> = format.into_iter().map(Format::from).collect();
            run(&cfg, &out, jobs, &formats)
        }
        Command::Summarize { runs, out } => {
            let results = read_runs_json(&runs)?;
            let summaries = summarize(&results)?;
            emit_report(&summaries, &results, &out, &[Format::Csv, Format::Json])?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Generate { spec, out, seed, rows } => {
            let table = generate(&spec, seed, rows)?;
            write_dataset(&table, &out)
        }
        Command::Similarity { a, b, assoc, p, k } => {
            let params = RboParams { p, k, normalize: true };
            let stdout = std::io::stdout();
            similarity(&a, &b, assoc.as_deref(), &params, stdout.lock())
        }
    }
}

/// `--seed` wins over the environment, which wins over the config file.
fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s} is not an unsigned integer"))),
        None => Ok(None),
    }
}

fn run(cfg: &ExperimentConfig, out: &Path, jobs: usize, formats: &[Format]) -> Result<()> {
    eprintln!(
        "running {} runs on {} ({} thread{})",
        cfg.n_runs(),
        cfg.dataset.tag(),
        jobs,
        if jobs == 1 { "" } else { "s" }
    );
    let exp = run_experiment_with_jobs(cfg, jobs)?;
    let failed = exp.results.iter().filter(|r| !r.is_ok()).count();
    let summaries = summarize(&exp.results)?;
    let manifest = emit_report(&summaries, &exp.results, out, formats)?;
    eprintln!(
        "{} runs ({failed} failed); wrote {} files to {}",
        exp.results.len(),
        manifest.files.len() + 1,
        out.display()
    );
    Ok(())
}

fn generate(spec: &str, seed: u64, rows: Option<usize>) -> Result<Table> {
    let path = Path::new(spec);
    let mut parsed: ArtificialSpec = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        match toml::from_str::<ArtificialSpec>(&text) {
            Ok(s) => s,
            Err(spec_err) => {
                let cfg = ExperimentConfig::load(path).map_err(|_| {
                    Error::Config(format!(
                        "{}: neither a dataset spec nor an experiment config ({})",
                        path.display(),
                        spec_err.message()
                    ))
                })?;
                let name = cfg.dataset.artificial.clone().ok_or_else(|| {
                    Error::Config(format!("{}: dataset is not artificial", path.display()))
                })?;
                let mut s: ArtificialSpec = name.parse()?;
                if let Some(n) = cfg.dataset.n_rows {
                    s.n_rows = n;
                }
                s
            }
        }
    } else {
        spec.parse()?
    };
    if let Some(n) = rows {
        parsed.n_rows = n;
    }
    generate_artificial(&parsed, seed)
}

/// `data.csv` gets its schema in `data.schema.toml`.
pub fn schema_sidecar(csv: &Path) -> PathBuf {
    csv.with_extension("schema.toml")
}

fn write_dataset(table: &Table, out: &Path) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    write_csv(table, &mut w)?;
    w.flush().map_err(|e| Error::io(out, e))?;
    let sidecar = schema_sidecar(out);
    std::fs::write(&sidecar, schema_to_toml(table.schema())).map_err(|e| Error::io(&sidecar, e))?;
    eprintln!(
        "wrote {} rows x {} columns to {} (schema: {})",
        table.n_rows(),
        table.n_cols(),
        out.display(),
        sidecar.display()
    );
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn similarity<W: Write>(a: &Path, b: &Path, assoc: Option<&Path>, params: &RboParams, mut out: W) -> Result<()> {
    let ia = read_importance_csv(open(a)?)?;
    let ib = read_importance_csv(open(b)?)?;
    let matrix = match assoc {
        Some(p) => AssociationMatrix::read_csv(open(p)?)?,
        None => AssociationMatrix::identity(ia.feature_names.clone()),
    };
    let report = compare(&ia, &ib, &matrix, params)?;
    let io = |e| Error::io("<stdout>", e);
    writeln!(out, "metric,value").map_err(io)?;
    for (name, v) in report.metrics() {
        writeln!(out, "{name},{v}").map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(3), Some("9")).unwrap(), Some(3));
        assert_eq!(resolve_seed(None, Some("9")).unwrap(), Some(9));
        assert_eq!(resolve_seed(None, Some(" ")).unwrap(), None);
        assert_eq!(resolve_seed(None, None).unwrap(), None);
        assert!(resolve_seed(None, Some("x")).is_err());
    }

    #[test]
    fn parses_subcommands() {
        let c = Cli::try_parse_from(["fisim", "run", "--config", "c.toml", "--out", "o", "--jobs", "8"]).unwrap();
        assert!(matches!(c.command, Command::Run { jobs: 8, .. }));
        let c = Cli::try_parse_from(["fisim", "similarity", "--a", "a", "--b", "b", "--p", "0.9"]).unwrap();
        assert!(matches!(c.command, Command::Similarity { .. }));
        assert!(Cli::try_parse_from(["fisim", "run", "--config", "c", "--out", "o", "--bogus"]).is_err());
    }

    #[test]
    fn generate_presets() {
        let t = generate("artificial-5", 0, None).unwrap();
        assert_eq!((t.n_rows(), t.n_cols()), (10_000, 4));
        let t = generate("artificial-1", 0, Some(50)).unwrap();
        assert_eq!(t.n_rows(), 50);
        assert!(generate("artificial-9", 0, None).is_err());
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(schema_sidecar(Path::new("d/a5.csv")), PathBuf::from("d/a5.schema.toml"));
    }
}
