//! Random-forest classifier built from Gini decision trees, plus ROC AUC.

mod auc;
mod tree;

pub use auc::{auc_binary, auc_ovo};
pub use tree::{Node, SplitRule, Tree};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::tabular::{ColumnKind, Table};
use crate::{Error, Result};
use tree::{Flat, TrainingData, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeaturesPerSplit {
    /// `ceil(sqrt(d))` candidate features per node.
    Sqrt,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestConfig {
    #[serde(default = "default_trees")]
    pub n_trees: usize,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default = "default_min_leaf")]
    pub min_leaf: usize,
    #[serde(default = "default_features")]
    pub features_per_split: FeaturesPerSplit,
}

fn default_trees() -> usize {
    150
}
fn default_min_leaf() -> usize {
    1
}
fn default_features() -> FeaturesPerSplit {
    FeaturesPerSplit::Sqrt
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 150,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeaturesPerSplit::Sqrt,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if self.min_leaf == 0 {
            return Err(Error::Config("min_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        Ok(())
    }
}

/// Trained ensemble. Class `c` is level `c` of the training target column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forest {
    trees: Vec<Tree>,
    feature_names: Vec<String>,
    feature_kinds: Vec<ColumnKind>,
    /// Levels of each categorical feature observed during training.
    seen_levels: Vec<Vec<bool>>,
    /// Training frequency of each class.
    class_counts: Vec<usize>,
    #[serde(skip)]
    flat: Flat,
}

/// Row-major `rows x classes` probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMatrix {
    pub n_rows: usize,
    pub n_classes: usize,
    pub data: Vec<f64>,
}

impl ProbMatrix {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_classes..(i + 1) * self.n_classes]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.data[i * self.n_classes + c]).collect()
    }
}

/// Train on every non-target column of `train`; the target must be categorical.
pub fn train_forest(train: &Table, cfg: &ForestConfig, seed: u64) -> Result<Forest> {
    cfg.validate()?;
    let schema = train.schema();
    let target = &schema.columns()[schema.target_index()];
    let n_classes = target.kind.levels().ok_or_else(|| {
        Error::Schema(format!("target column `{}` is not categorical", target.name))
    })?;
    let n = train.n_rows();
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 training rows, got {n}")));
    }
    let features = schema.feature_indices();
    if features.is_empty() {
        return Err(Error::Schema("no feature columns to train on".into()));
    }
    let labels: Vec<usize> = train.target().iter().map(|&v| v as usize).collect();
    let mut class_counts = vec![0usize; n_classes];
    for &l in &labels {
        class_counts[l] += 1;
    }
    if class_counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateTarget(format!(
            "target `{}` has a single observed class",
            target.name
        )));
    }

    let cols = schema.columns();
    let data = TrainingData {
        columns: features.iter().map(|&i| train.column(i)).collect(),
        levels: features.iter().map(|&i| cols[i].kind.levels()).collect(),
        labels,
        n_classes,
    };
    let seen_levels = features
        .iter()
        .map(|&i| match cols[i].kind {
            ColumnKind::Categorical { levels } => {
                let mut seen = vec![false; levels];
                for &v in train.column(i) {
                    seen[v as usize] = true;
                }
                seen
            }
            ColumnKind::Continuous => Vec::new(),
        })
        .collect();
    let d = features.len();
    let params = TreeParams {
        max_depth: cfg.max_depth,
        min_leaf: cfg.min_leaf as f64,
        mtry: match cfg.features_per_split {
            FeaturesPerSplit::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d),
            FeaturesPerSplit::All => d,
        },
    };

    // one independent stream per tree: identical output for any thread count
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_stream(seed, t as u64);
            let mut weights = vec![0.0; n];
            for _ in 0..n {
                weights[rand::Rng::random_range(&mut rng, 0..n)] += 1.0;
            }
            tree::grow(&data, weights, &params, &mut rng)
        })
        .collect();

    Ok(Forest::assemble(
        trees,
        features.iter().map(|&i| cols[i].name.clone()).collect(),
        features.iter().map(|&i| cols[i].kind).collect(),
        seen_levels,
        class_counts,
    ))
}

impl Forest {
    fn assemble(
        trees: Vec<Tree>,
        feature_names: Vec<String>,
        feature_kinds: Vec<ColumnKind>,
        seen_levels: Vec<Vec<bool>>,
        class_counts: Vec<usize>,
    ) -> Forest {
        let flat = Flat::new(&trees, class_counts.len());
        Forest {
            trees,
            feature_names,
            feature_kinds,
            seen_levels,
            class_counts,
            flat,
        }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_kinds(&self) -> &[ColumnKind] {
        &self.feature_kinds
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    /// Class whose probability serves as the scalar model score: the
    /// positive class for binary targets, otherwise the most frequent
    /// training class (lowest index on ties).
    pub fn reference_class(&self) -> usize {
        if self.n_classes() == 2 {
            return 1;
        }
        let mut best = 0;
        for (c, &n) in self.class_counts.iter().enumerate() {
            if n > self.class_counts[best] {
                best = c;
            }
        }
        best
    }

    /// Probabilities for one row given in training-feature order.
    pub fn predict_row(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.flat.accumulate(x, &self.seen_levels, out);
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
    }

    /// Probability of `class` for one row given in training-feature order.
    pub fn score_row(&self, x: &[f64], class: usize) -> f64 {
        self.flat.sum_class(x, &self.seen_levels, class) / self.trees.len() as f64
    }

    /// Column indices of `table` holding each training feature.
    pub fn feature_columns(&self, table: &Table) -> Result<Vec<usize>> {
        let schema = table.schema();
        self.feature_names
            .iter()
            .zip(&self.feature_kinds)
            .map(|(name, kind)| {
                let idx = schema
                    .index_of(name)
                    .ok_or_else(|| Error::Schema(format!("feature `{name}` missing from rows")))?;
                let have = schema.columns()[idx].kind;
                if have.is_categorical() != kind.is_categorical() {
                    return Err(Error::Schema(format!(
                        "feature `{name}` is {have:?} but the forest was trained on {kind:?}"
                    )));
                }
                Ok(idx)
            })
            .collect()
    }

    /// Rows of `table` as feature vectors in training order.
    pub fn feature_rows(&self, table: &Table) -> Result<Vec<Vec<f64>>> {
        let cols = self.feature_columns(table)?;
        Ok((0..table.n_rows())
            .map(|r| cols.iter().map(|&c| table.column(c)[r]).collect())
            .collect())
    }
}

/// Average of per-tree leaf class frequencies for every row of `rows`.
pub fn predict_proba(forest: &Forest, rows: &Table) -> Result<ProbMatrix> {
    let x = forest.feature_rows(rows)?;
    let k = forest.n_classes();
    let mut data = vec![0.0; x.len() * k];
    data.par_chunks_mut(k.max(1))
        .zip(x.par_iter())
        .for_each(|(out, row)| forest.predict_row(row, out));
    Ok(ProbMatrix {
        n_rows: x.len(),
        n_classes: k,
        data,
    })
}

/// Class labels of `table` as indices into the forest's classes.
pub fn labels_of(forest: &Forest, table: &Table) -> Result<Vec<usize>> {
    let k = forest.n_classes();
    table
        .target()
        .iter()
        .map(|&v| {
            let c = v as usize;
            if c < k {
                Ok(c)
            } else {
                Err(Error::Schema(format!("label {c} outside the forest's {k} classes")))
            }
        })
        .collect()
}

/// AUC of `probs` against `labels`: binary AUC on the positive class for two
/// classes, one-vs-one AUC otherwise.
pub fn auc_for(probs: &ProbMatrix, labels: &[usize]) -> Result<f64> {
    if probs.n_classes == 2 {
        let pos: Vec<bool> = labels.iter().map(|&l| l == 1).collect();
        auc_binary(&probs.column(1), &pos)
    } else {
        auc_ovo(probs, labels)
    }
}

/// AUC of `forest` on the labelled rows of `table`.
pub fn evaluate_auc(forest: &Forest, table: &Table) -> Result<f64> {
    let probs = predict_proba(forest, table)?;
    auc_for(&probs, &labels_of(forest, table)?)
}
