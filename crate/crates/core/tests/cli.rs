//! The `fisim` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

fn fisim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fisim"))
        .args(args)
        .env_remove("FISIM_SEED")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// One full run of the bundled Artificial 1 config, shared by the tests below.
fn artificial_1_report() -> &'static Path {
    static DIR: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    &DIR.get_or_init(|| {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("report");
        let o = fisim(&["run", "--config", &config("artificial-1.toml"), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        (tmp, out)
    })
    .1
}

#[test]
fn run_produces_full_manifest() {
    let out = artificial_1_report();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        ["runs.csv", "summary.csv", "runs.json", "summary.json", "importance_profiles.csv"]
    );
    for f in files {
        let bytes = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    // 8 epsilons x 25 repeats + 25 resampling runs
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 225);
}

#[test]
fn summarize_reproduces_the_summary() {
    let out = artificial_1_report();
    let tmp = tempfile::tempdir().unwrap();
    let again = tmp.path().join("again");
    let o = fisim(&[
        "summarize",
        "--runs",
        out.join("runs.json").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["summary.csv", "runs.csv", "importance_profiles.csv"] {
        assert_eq!(std::fs::read(out.join(f)).unwrap(), std::fs::read(again.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn generate_artificial_5() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("a5.csv");
    let o = fisim(&["generate", "--spec", "artificial-5", "--out", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x0,x1,x2,y");
    assert_eq!(lines.count(), 10_000);
    let schema = fisim::tabular::load_schema(tmp.path().join("a5.schema.toml")).unwrap();
    let table = fisim::tabular::load_csv(&csv, &schema).unwrap();
    assert_eq!(table.feature_names().len(), 3);
}

#[test]
fn similarity_of_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.csv");
    std::fs::write(&a, "measure,feature,score\nshap,x0,0.5\nshap,x1,0.3\nshap,x2,0.2\n").unwrap();
    let o = fisim(&["similarity", "--a", a.to_str().unwrap(), "--b", a.to_str().unwrap(), "--p", "0.8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "rbo,1"), "{text}");
    assert!(text.lines().any(|l| l == "cosine,1"), "{text}");
}

#[test]
fn failures_are_one_line_and_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "repeats_outr = 3\n[dataset]\nartificial = \"artificial-1\"\n[[synthesizer]]\nkind = \"resample\"\n").unwrap();
    let o = fisim(&["run", "--config", bad.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("repeats_outr") && err.contains("repeats_outer"), "{err}");

    let o = fisim(&["similarity", "--a", "/nonexistent.csv", "--b", "/nonexistent.csv"]);
    assert!(!o.status.success());
    assert_eq!(stderr(&o).trim_end().lines().count(), 1);

    let o = fisim(&["run", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
}

#[test]
fn seed_environment_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    std::fs::write(
        &cfg,
        "master_seed = 1\nrepeats_outer = 1\n[dataset]\nartificial = \"artificial-5\"\nn_rows = 300\n\
         [[synthesizer]]\nkind = \"resample\"\n[forest]\nn_trees = 5\n[shap]\nn_permutations = 5\nmax_instances = 10\n",
    )
    .unwrap();
    let run = |dir: &str, env: Option<&str>, flag: Option<&str>| {
        let out = tmp.path().join(dir);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_fisim"));
        cmd.args(["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        cmd.env_remove("FISIM_SEED");
        if let Some(e) = env {
            cmd.env("FISIM_SEED", e);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(out.join("runs.csv")).unwrap()
    };
    let base = run("a", None, None);
    let env = run("b", Some("99"), None);
    let flag = run("c", Some("1"), Some("99"));
    assert_ne!(base, env);
    assert_eq!(env, flag);
}
