use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::run::RunResult;
use crate::ranksim::SimilarityReport;
use crate::{Error, Result};

/// Mean and sample SD of one metric over the successful runs of a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub dataset: String,
    pub method: String,
    pub epsilon: Option<f64>,
    pub metric: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

const PERMUTATION_METRICS: [&str; 5] = [
    "permutation_rbo",
    "permutation_rbo_raw",
    "permutation_rbo_per",
    "permutation_rbo_cor",
    "permutation_cosine",
];

/// Metric values of a successful run, in report order.
fn run_metrics(r: &RunResult) -> Vec<(&'static str, f64)> {
    let mut out = Vec::with_capacity(12);
    if let Some(s) = &r.similarity {
        out.extend(s.metrics());
    }
    if let Some(s) = &r.permutation_baseline {
        out.extend(PERMUTATION_METRICS.iter().zip(s.metrics()).map(|(name, (_, v))| (*name, v)));
    }
    if let Some(a) = r.auc_original {
        out.push(("auc_original", a));
    }
    if let Some(a) = r.auc_synthetic {
        out.push(("auc_synthetic", a));
    }
    out
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Groups keep their first-appearance order so output follows the sweep.
struct Grouped<K, V> {
    groups: Vec<(K, Vec<V>)>,
}

impl<K: PartialEq, V> Grouped<K, V> {
    fn new() -> Self {
        Grouped { groups: Vec::new() }
    }

    fn push(&mut self, key: K, value: V) {
        match self.groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => vs.push(value),
            None => self.groups.push((key, vec![value])),
        }
    }
}

#[derive(PartialEq)]
struct Key {
    dataset: String,
    method: String,
    epsilon: Option<u64>,
    metric: String,
}

/// Aggregate successful runs per (dataset, method, epsilon, metric).
/// Failed runs contribute nothing; `n` counts contributing runs.
pub fn summarize(results: &[RunResult]) -> Result<Vec<Summary>> {
    if results.is_empty() {
        return Err(Error::Size("nothing to summarize: no run results".into()));
    }
    let mut g = Grouped::new();
    for r in results.iter().filter(|r| r.is_ok()) {
        for (metric, v) in run_metrics(r) {
            let key = Key {
                dataset: r.dataset.clone(),
                method: r.method.clone(),
                epsilon: r.epsilon.map(f64::to_bits),
                metric: metric.to_string(),
            };
            g.push(key, v);
        }
    }
    Ok(g.groups
        .into_iter()
        .map(|(k, vs)| {
            let (mean, sd) = mean_sd(&vs);
            Summary {
                dataset: k.dataset,
                method: k.method,
                epsilon: k.epsilon.map(f64::from_bits),
                metric: k.metric,
                mean,
                sd,
                n: vs.len(),
            }
        })
        .collect())
}

/// Per-feature importance mean/SD, for original and synthetic forests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub dataset: String,
    pub method: String,
    pub epsilon: Option<f64>,
    pub source: &'static str,
    pub feature: String,
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

pub fn importance_profiles(results: &[RunResult]) -> Vec<ProfileRow> {
    let mut g = Grouped::new();
    for r in results.iter().filter(|r| r.is_ok()) {
        let sources = [("original", &r.importance_original), ("synthetic", &r.importance_synthetic)];
        for (source, iv) in sources {
            let Some(iv) = iv else { continue };
            for (f, s) in iv.feature_names.iter().zip(&iv.scores) {
                let key = (r.dataset.clone(), r.method.clone(), r.epsilon.map(f64::to_bits), source, f.clone());
                g.push(key, *s);
            }
        }
    }
    g.groups
        .into_iter()
        .map(|((dataset, method, eps, source, feature), vs)| {
            let (mean, sd) = mean_sd(&vs);
            ProfileRow {
                dataset,
                method,
                epsilon: eps.map(f64::from_bits),
                source,
                feature,
                mean,
                sd,
                n: vs.len(),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serde(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Serde(e.to_string()))
}

pub const RUNS_COLUMNS: [&str; 22] = [
    "run_id",
    "dataset",
    "method",
    "epsilon",
    "outer",
    "inner",
    "seed",
    "spent_epsilon",
    "status",
    "error",
    "auc_original",
    "auc_synthetic",
    "rbo",
    "rbo_raw",
    "rbo_per",
    "rbo_cor",
    "cosine",
    "permutation_rbo",
    "permutation_rbo_raw",
    "permutation_rbo_per",
    "permutation_rbo_cor",
    "permutation_cosine",
];

fn similarity_cells(s: &Option<SimilarityReport>) -> Vec<String> {
    match s {
        Some(s) => s.metrics().iter().map(|(_, v)| v.to_string()).collect(),
        None => vec![String::new(); SimilarityReport::METRICS.len()],
    }
}

/// One wide row per run, in `run_id` order.
pub fn runs_csv(results: &[RunResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RUNS_COLUMNS).map_err(csv_err)?;
    let mut sorted: Vec<&RunResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.run_id);
    for r in sorted {
        let mut row = vec![
            r.run_id.to_string(),
            r.dataset.clone(),
            r.method.clone(),
            opt(r.epsilon),
            r.outer.to_string(),
            r.inner.to_string(),
            r.seed.to_string(),
            opt(r.spent_epsilon),
            if r.is_ok() { "ok" } else { "failed" }.to_string(),
            r.error.clone().unwrap_or_default(),
            opt(r.auc_original),
            opt(r.auc_synthetic),
        ];
        row.extend(similarity_cells(&r.similarity));
        row.extend(similarity_cells(&r.permutation_baseline));
        w.write_record(&row).map_err(csv_err)?;
    }
    finish(w)
}

pub fn summary_csv(summaries: &[Summary]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dataset", "method", "epsilon", "metric", "mean", "sd", "n"])
        .map_err(csv_err)?;
    for s in summaries {
        w.write_record([
            s.dataset.clone(),
            s.method.clone(),
            opt(s.epsilon),
            s.metric.clone(),
            s.mean.to_string(),
            s.sd.to_string(),
            s.n.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn profiles_csv(rows: &[ProfileRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dataset", "method", "epsilon", "source", "feature", "mean", "sd", "n"])
        .map_err(csv_err)?;
    for p in rows {
        w.write_record([
            p.dataset.clone(),
            p.method.clone(),
            opt(p.epsilon),
            p.source.to_string(),
            p.feature.clone(),
            p.mean.to_string(),
            p.sd.to_string(),
            p.n.to_string(),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

fn json<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(v).map_err(|e| Error::Serde(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn write(dir: &Path, name: &str, bytes: &[u8], manifest: &mut Manifest) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    manifest.files.push(ManifestEntry {
        path: name.to_string(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len(),
    });
    Ok(())
}

/// Write the report files and `manifest.json` into `out_dir` (created if
/// missing). `importance_profiles.csv` and the manifest are always written.
/// Output bytes depend only on the inputs.
pub fn emit_report(
    summaries: &[Summary],
    results: &[RunResult],
    out_dir: impl AsRef<Path>,
    formats: &[Format],
) -> Result<Manifest> {
    if summaries.is_empty() {
        return Err(Error::Size(
            "no summaries to report (every run failed or no runs were given)".into(),
        ));
    }
    if formats.is_empty() {
        return Err(Error::Config("at least one output format is required".into()));
    }
    // render everything first so a serialization failure leaves no files behind
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut sorted = results.to_vec();
    sorted.sort_by_key(|r| r.run_id);
    if formats.contains(&Format::Csv) {
        files.push(("runs.csv", runs_csv(&sorted)?));
        files.push(("summary.csv", summary_csv(summaries)?));
    }
    if formats.contains(&Format::Json) {
        files.push(("runs.json", json(&sorted)?));
        files.push(("summary.json", json(summaries)?));
    }
    files.push(("importance_profiles.csv", profiles_csv(&importance_profiles(&sorted))?));

    let dir: PathBuf = out_dir.as_ref().to_path_buf();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut manifest = Manifest { files: Vec::new() };
    for (name, bytes) in &files {
        write(&dir, name, bytes, &mut manifest)?;
    }
    let bytes = json(&manifest)?;
    let path = dir.join("manifest.json");
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// Read back a `runs.json` written by [`emit_report`].
pub fn read_runs_json(path: impl AsRef<Path>) -> Result<Vec<RunResult>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serde(format!("{}: {e}", path.display())))
}
