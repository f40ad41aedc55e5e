//! Feature importance: impurity-based (MDI), permutation-based (PFI) and
//! interventional Shapley values, plus the ranking that turns scores into an
//! ordered feature list.

mod shapley;

pub use shapley::{
    exact_shapley, mc_shapley, shapley_exact, shapley_mc, ForestScore, ScoreModel, ShapleyEstimate,
    MAX_EXACT_FEATURES,
};

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::forest::{auc_for, labels_of, Forest, Node, ProbMatrix};
use crate::seed;
use crate::tabular::Table;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Mdi,
    Pfi,
    Shap,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Mdi => "mdi",
            Measure::Pfi => "pfi",
            Measure::Shap => "shap",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdi" => Ok(Measure::Mdi),
            "pfi" => Ok(Measure::Pfi),
            "shap" => Ok(Measure::Shap),
            _ => Err(Error::Config(format!("unknown importance measure `{s}` (mdi, pfi, shap)"))),
        }
    }
}

/// Per-feature scores from one measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
    pub measure: Measure,
}

impl ImportanceVector {
    pub fn score_of(&self, feature: &str) -> Option<f64> {
        self.feature_names
            .iter()
            .position(|n| n == feature)
            .map(|i| self.scores[i])
    }
}

/// Features ordered by decreasing importance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedList(Vec<String>);

impl RankedList {
    /// Wrap an already ordered list; names must be distinct.
    pub fn from_ordered(features: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(features.len());
        for f in &features {
            if !seen.insert(f.as_str()) {
                return Err(Error::Schema(format!("feature `{f}` appears twice in a ranked list")));
            }
        }
        Ok(RankedList(features))
    }

    pub fn features(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Sort by descending score; exact ties go to the smaller feature name.
pub fn rank(iv: &ImportanceVector) -> RankedList {
    let mut idx: Vec<usize> = (0..iv.scores.len()).collect();
    idx.sort_by(|&a, &b| match iv.scores[b].total_cmp(&iv.scores[a]) {
        Ordering::Equal => iv.feature_names[a].cmp(&iv.feature_names[b]),
        o => o,
    });
    RankedList(idx.into_iter().map(|i| iv.feature_names[i].clone()).collect())
}

/// Mean decrease in impurity, summed over all trees and normalised to 1.
/// A forest without a single split gets uniform scores.
pub fn mdi(forest: &Forest) -> ImportanceVector {
    let d = forest.n_features();
    let mut scores = vec![0.0; d];
    for tree in forest.trees() {
        for node in tree.nodes() {
            if let Node::Split {
                feature,
                weighted_decrease,
                ..
            } = node
            {
                scores[*feature] += weighted_decrease;
            }
        }
    }
    let total: f64 = scores.iter().sum();
    if total > 0.0 {
        scores.iter_mut().for_each(|s| *s /= total);
    } else {
        scores.iter_mut().for_each(|s| *s = 1.0 / d as f64);
    }
    ImportanceVector {
        feature_names: forest.feature_names().to_vec(),
        scores,
        measure: Measure::Mdi,
    }
}

fn predict_rows(forest: &Forest, rows: &[Vec<f64>]) -> ProbMatrix {
    let k = forest.n_classes();
    let mut data = vec![0.0; rows.len() * k];
    for (out, row) in data.chunks_mut(k).zip(rows) {
        forest.predict_row(row, out);
    }
    ProbMatrix {
        n_rows: rows.len(),
        n_classes: k,
        data,
    }
}

/// Permutation importance: mean drop in validation AUC when one feature
/// column is shuffled, over `n_repeats` shuffles. Can be negative.
pub fn pfi(forest: &Forest, validation: &Table, n_repeats: usize, seed: u64) -> Result<ImportanceVector> {
    if n_repeats == 0 {
        return Err(Error::Config("n_repeats must be at least 1".into()));
    }
    if validation.n_rows() == 0 {
        return Err(Error::Size("permutation importance needs validation rows".into()));
    }
    let labels = labels_of(forest, validation)?;
    let rows = forest.feature_rows(validation)?;
    let baseline = auc_for(&predict_rows(forest, &rows), &labels)?;
    let mut rng = seed::rng(seed);
    let d = forest.n_features();
    let mut scores = vec![0.0; d];
    let mut shuffled = rows.clone();
    for (f, score) in scores.iter_mut().enumerate() {
        let original: Vec<f64> = rows.iter().map(|r| r[f]).collect();
        let mut drop = 0.0;
        for _ in 0..n_repeats {
            let mut column = original.clone();
            column.shuffle(&mut rng);
            for (row, v) in shuffled.iter_mut().zip(&column) {
                row[f] = *v;
            }
            drop += baseline - auc_for(&predict_rows(forest, &shuffled), &labels)?;
        }
        for (row, v) in shuffled.iter_mut().zip(&original) {
            row[f] = *v;
        }
        *score = drop / n_repeats as f64;
    }
    Ok(ImportanceVector {
        feature_names: forest.feature_names().to_vec(),
        scores,
        measure: Measure::Pfi,
    })
}

/// Write `measure,feature,score` rows.
pub fn write_importance_csv<W: Write>(iv: &ImportanceVector, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let measure = iv.measure.to_string();
    w.write_record(["measure", "feature", "score"])
        .map_err(|e| Error::Serde(e.to_string()))?;
    for (f, s) in iv.feature_names.iter().zip(&iv.scores) {
        w.write_record([measure.as_str(), f.as_str(), &s.to_string()])
            .map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serde(e.to_string()))
}

/// Read one importance vector from a CSV with `feature` and `score` columns
/// (an optional `measure` column defaults to shap; other columns are
/// ignored). Each feature must appear once.
pub fn read_importance_csv<R: Read>(reader: R) -> Result<ImportanceVector> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers().map_err(|e| Error::Ingest(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(fi), Some(si)) = (col("feature"), col("score")) else {
        return Err(Error::Ingest("importance CSV needs `feature` and `score` columns".into()));
    };
    let mi = col("measure");
    let mut measure = None;
    let mut names: Vec<String> = Vec::new();
    let mut scores = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Ingest(e.to_string()))?;
        let row = i + 1;
        let bad = |column: &str, message: String| Error::Ingestion {
            row,
            column: column.into(),
            message,
        };
        let name = rec.get(fi).unwrap_or("").trim().to_string();
        if names.contains(&name) {
            return Err(bad("feature", format!("feature `{name}` appears twice")));
        }
        let raw = rec.get(si).unwrap_or("").trim();
        let score: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| bad("score", format!("`{raw}` is not a finite number")))?;
        if let Some(m) = mi.and_then(|m| rec.get(m)) {
            let m: Measure = m.trim().parse()?;
            if measure.is_some_and(|prev| prev != m) {
                return Err(bad("measure", "rows mix importance measures".into()));
            }
            measure = Some(m);
        }
        names.push(name);
        scores.push(score);
    }
    if names.is_empty() {
        return Err(Error::Ingest("importance CSV has no rows".into()));
    }
    Ok(ImportanceVector {
        feature_names: names,
        scores,
        measure: measure.unwrap_or(Measure::Shap),
    })
}

/// Permutation-sampling settings for global SHAP importance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapSettings {
    #[serde(default = "default_permutations")]
    pub n_permutations: usize,
    /// Validation rows explained, subsampled by seed.
    #[serde(default = "default_instances")]
    pub max_instances: usize,
    /// Training rows forming the background set, subsampled by seed.
    #[serde(default = "default_background")]
    pub max_background: usize,
}

fn default_permutations() -> usize {
    100
}
fn default_instances() -> usize {
    200
}
fn default_background() -> usize {
    100
}

impl Default for ShapSettings {
    fn default() -> Self {
        ShapSettings {
            n_permutations: default_permutations(),
            max_instances: default_instances(),
            max_background: default_background(),
        }
    }
}

impl ShapSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_permutations == 0 || self.max_instances == 0 || self.max_background == 0 {
            return Err(Error::Config(
                "shap n_permutations, max_instances and max_background must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfiSettings {
    #[serde(default = "default_repeats")]
    pub n_repeats: usize,
}

fn default_repeats() -> usize {
    5
}

impl Default for PfiSettings {
    fn default() -> Self {
        PfiSettings {
            n_repeats: default_repeats(),
        }
    }
}

impl PfiSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_repeats == 0 {
            return Err(Error::Config("pfi n_repeats must be positive".into()));
        }
        Ok(())
    }
}

/// Up to `max` rows of `table`, chosen without replacement.
fn subsample_rows(table: &Table, max: usize, rng: &mut seed::Rng) -> Table {
    if table.n_rows() <= max {
        return table.clone();
    }
    let mut rows = rand::seq::index::sample(rng, table.n_rows(), max).into_vec();
    rows.sort_unstable();
    table.select_rows(&rows)
}

/// Global SHAP importance with the instance and background sets subsampled
/// from `validation` and `train`.
pub fn global_shap(
    forest: &Forest,
    train: &Table,
    validation: &Table,
    settings: &ShapSettings,
    seed: u64,
) -> Result<ImportanceVector> {
    settings.validate()?;
    let mut rng = seed::rng(seed);
    let instances = subsample_rows(validation, settings.max_instances, &mut rng);
    let background = subsample_rows(train, settings.max_background, &mut rng);
    shapley_mc(forest, &instances, &background, settings.n_permutations, rng.random())
}

/// The configured measure for a forest trained on `train`, evaluated on
/// `validation` where the measure needs held-out data.
pub fn compute_importance(
    measure: Measure,
    forest: &Forest,
    train: &Table,
    validation: &Table,
    shap: &ShapSettings,
    pfi_settings: &PfiSettings,
    seed: u64,
) -> Result<ImportanceVector> {
    match measure {
        Measure::Mdi => Ok(mdi(forest)),
        Measure::Pfi => pfi(forest, validation, pfi_settings.n_repeats, seed),
        Measure::Shap => global_shap(forest, train, validation, shap, seed),
    }
}
