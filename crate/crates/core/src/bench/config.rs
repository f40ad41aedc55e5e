use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::featgen::FeatureRecipe;
use crate::forest::ForestConfig;
use crate::importance::{Measure, PfiSettings, ShapSettings};
use crate::ranksim::RboParams;
use crate::synth::{ColumnResampler, PrivBayesConfig, Subsampler, Synthesizer};
use crate::tabular::{generate_artificial, load_csv, load_schema, ArtificialSpec, Table};
use crate::{Error, Result};

/// Default privacy grid.
pub const DEFAULT_EPSILON_GRID: [f64; 8] = [1e-4, 1e-3, 1e-2, 0.1, 0.4, 1.0, 4.0, 10.0];

/// Where the real table comes from: a named artificial preset (optionally
/// resized) or a CSV file with its schema sidecar.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    /// Tag used in every output row; defaults to the preset name or file stem.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub artificial: Option<String>,
    #[serde(default)]
    pub n_rows: Option<usize>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
    #[serde(default)]
    pub schema: Option<PathBuf>,
}

impl DatasetConfig {
    pub fn artificial(name: &str) -> Self {
        DatasetConfig {
            artificial: Some(name.into()),
            ..Default::default()
        }
    }

    pub fn tag(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        if let Some(a) = &self.artificial {
            return a.clone();
        }
        self.csv
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    }

    fn validate(&self) -> Result<()> {
        match (&self.artificial, &self.csv) {
            (Some(a), None) => {
                a.parse::<ArtificialSpec>()?;
                if self.schema.is_some() {
                    return Err(Error::Config("dataset.schema only applies to csv datasets".into()));
                }
                if self.n_rows == Some(0) {
                    return Err(Error::Config("dataset.n_rows must be positive".into()));
                }
                Ok(())
            }
            (None, Some(_)) => {
                if self.schema.is_none() {
                    return Err(Error::Config("a csv dataset needs dataset.schema".into()));
                }
                if self.n_rows.is_some() {
                    return Err(Error::Config("dataset.n_rows only applies to artificial datasets".into()));
                }
                Ok(())
            }
            _ => Err(Error::Config(
                "dataset needs exactly one of `artificial` or `csv`".into(),
            )),
        }
    }

    /// Build the real table. Artificial data is generated from `seed`.
    pub fn load(&self, seed: u64) -> Result<Table> {
        self.validate()?;
        if let Some(a) = &self.artificial {
            let mut spec: ArtificialSpec = a.parse()?;
            if let Some(n) = self.n_rows {
                spec.n_rows = n;
            }
            return generate_artificial(&spec, seed);
        }
        let schema = load_schema(self.schema.as_ref().expect("validated"))?;
        load_csv(self.csv.as_ref().expect("validated"), &schema)
    }

    fn resolve(&mut self, base: &Path) {
        for p in [&mut self.csv, &mut self.schema].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

/// One synthesizer entry of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SynthesizerConfig {
    /// Swept over the epsilon grid.
    Privbayes {
        #[serde(default = "default_k")]
        k_parents: usize,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_bins")]
        n_bins: usize,
    },
    Resample,
    Subsample { fraction: f64 },
}

fn default_k() -> usize {
    PrivBayesConfig::new(1.0).k_parents
}
fn default_beta() -> f64 {
    PrivBayesConfig::new(1.0).beta
}
fn default_bins() -> usize {
    PrivBayesConfig::new(1.0).n_bins
}

impl SynthesizerConfig {
    pub fn privbayes() -> Self {
        SynthesizerConfig::Privbayes {
            k_parents: default_k(),
            beta: default_beta(),
            n_bins: default_bins(),
        }
    }

    /// Method tag in outputs.
    pub fn tag(&self) -> String {
        match self {
            SynthesizerConfig::Privbayes { .. } => "privbayes".into(),
            SynthesizerConfig::Resample => "resample".into(),
            SynthesizerConfig::Subsample { fraction } => format!("subsample:{fraction}"),
        }
    }

    pub fn is_private(&self) -> bool {
        matches!(self, SynthesizerConfig::Privbayes { .. })
    }

    /// The synthesizer for one grid point; `epsilon` is ignored by baselines.
    pub fn build(&self, epsilon: Option<f64>) -> Result<Box<dyn Synthesizer>> {
        Ok(match *self {
            SynthesizerConfig::Privbayes {
                k_parents,
                beta,
                n_bins,
            } => {
                let eps = epsilon
                    .ok_or_else(|| Error::Config("privbayes needs an epsilon".into()))?;
                let cfg = PrivBayesConfig {
                    epsilon: eps,
                    k_parents,
                    beta,
                    n_bins,
                };
                cfg.validate()?;
                Box::new(cfg)
            }
            SynthesizerConfig::Resample => Box::new(ColumnResampler),
            SynthesizerConfig::Subsample { fraction } => Box::new(Subsampler { fraction }),
        })
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SynthesizerConfig::Privbayes { .. } => self.build(Some(1.0)).map(|_| ()),
            SynthesizerConfig::Resample => Ok(()),
            SynthesizerConfig::Subsample { fraction } => {
                if fraction > 0.0 && fraction <= 1.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!("subsample fraction {fraction} is not in (0, 1]")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    #[serde(rename = "synthesizer")]
    pub synthesizers: Vec<SynthesizerConfig>,
    #[serde(default = "default_grid")]
    pub epsilon_grid: Vec<f64>,
    /// Outer repetitions `m`.
    #[serde(default = "default_outer")]
    pub repeats_outer: usize,
    /// Synthetic samples per fitted model, `l`.
    #[serde(default = "default_inner")]
    pub repeats_inner: usize,
    #[serde(default = "default_train_frac")]
    pub train_frac: f64,
    #[serde(default)]
    pub forest: ForestConfig,
    #[serde(default)]
    pub rbo: RboParams,
    #[serde(default = "default_measure")]
    pub importance: Measure,
    #[serde(default)]
    pub shap: ShapSettings,
    #[serde(default)]
    pub pfi: PfiSettings,
    /// Feature engineering applied to real and synthetic tables alike.
    #[serde(default)]
    pub recipe: Option<FeatureRecipe>,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_grid() -> Vec<f64> {
    DEFAULT_EPSILON_GRID.to_vec()
}
fn default_outer() -> usize {
    25
}
fn default_inner() -> usize {
    1
}
fn default_train_frac() -> f64 {
    0.7
}
fn default_measure() -> Measure {
    Measure::Shap
}

impl ExperimentConfig {
    /// Default settings for one dataset and one synthesizer.
    pub fn new(dataset: DatasetConfig, synthesizers: Vec<SynthesizerConfig>) -> Self {
        ExperimentConfig {
            dataset,
            synthesizers,
            epsilon_grid: default_grid(),
            repeats_outer: default_outer(),
            repeats_inner: default_inner(),
            train_frac: default_train_frac(),
            forest: ForestConfig::default(),
            rbo: RboParams::default(),
            importance: default_measure(),
            shap: ShapSettings::default(),
            pfi: PfiSettings::default(),
            recipe: None,
            master_seed: 0,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parse a config file; relative dataset paths are taken relative to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.dataset.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        if self.synthesizers.is_empty() {
            return Err(Error::Config("at least one [[synthesizer]] is required".into()));
        }
        for s in &self.synthesizers {
            s.validate()?;
        }
        if self.synthesizers.iter().any(|s| s.is_private()) {
            if self.epsilon_grid.is_empty() {
                return Err(Error::Config("epsilon_grid is empty".into()));
            }
            if let Some(e) = self.epsilon_grid.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
                return Err(Error::Config(format!("epsilon {e} is not positive")));
            }
        }
        if self.repeats_outer == 0 || self.repeats_inner == 0 {
            return Err(Error::Config("repeats_outer and repeats_inner must be positive".into()));
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(Error::Config(format!("train_frac {} is not in (0, 1)", self.train_frac)));
        }
        self.forest.validate()?;
        self.rbo.validate()?;
        self.shap.validate()?;
        self.pfi.validate()?;
        if let Some(r) = &self.recipe {
            r.validate()?;
        }
        Ok(())
    }

    /// Grid points of one synthesizer: the epsilon grid for private methods,
    /// a single `None` otherwise.
    pub fn epsilons_for(&self, s: &SynthesizerConfig) -> Vec<Option<f64>> {
        if s.is_private() {
            self.epsilon_grid.iter().map(|&e| Some(e)).collect()
        } else {
            vec![None]
        }
    }

    /// Total number of runs the sweep will produce.
    pub fn n_runs(&self) -> usize {
        let points: usize = self.synthesizers.iter().map(|s| self.epsilons_for(s).len()).sum();
        points * self.repeats_outer * self.repeats_inner
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
master_seed = 7
repeats_outer = 3
epsilon_grid = [0.1, 1.0]
importance = "mdi"

[dataset]
artificial = "artificial-1"
n_rows = 500

[[synthesizer]]
kind = "privbayes"
k_parents = 2

[[synthesizer]]
kind = "resample"

[[synthesizer]]
kind = "subsample"
fraction = 0.1

[forest]
n_trees = 20

[rbo]
p = 0.9

[shap]
n_permutations = 10

[recipe]
transforms = ["multiply", "percentile"]
"#;

    #[test]
    fn parses_every_section() {
        let c = ExperimentConfig::from_toml(FULL).unwrap();
        assert_eq!(c.master_seed, 7);
        assert_eq!(c.repeats_inner, 1);
        assert_eq!(c.train_frac, 0.7);
        assert_eq!(c.forest.n_trees, 20);
        assert_eq!(c.rbo.p, 0.9);
        assert_eq!(c.importance, Measure::Mdi);
        assert_eq!(c.shap.n_permutations, 10);
        assert_eq!(c.synthesizers[0], SynthesizerConfig::Privbayes { k_parents: 2, beta: 0.5, n_bins: 10 });
        assert_eq!(c.synthesizers[2].tag(), "subsample:0.1");
        // 2 epsilons + 2 baselines, 3 repeats
        assert_eq!(c.n_runs(), 12);
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn default_settings() {
        let c = ExperimentConfig::from_toml(
            "[dataset]\nartificial = \"artificial-2\"\n[[synthesizer]]\nkind = \"privbayes\"\n",
        )
        .unwrap();
        assert_eq!(c.epsilon_grid, DEFAULT_EPSILON_GRID);
        assert_eq!(c.repeats_outer, 25);
        assert_eq!(c.forest.n_trees, 150);
        assert_eq!(c.importance, Measure::Shap);
        assert_eq!(c.n_runs(), 200);
    }

    #[test]
    fn unknown_keys_list_valid_ones() {
        let err = ExperimentConfig::from_toml(
            "bogus = 1\n[dataset]\nartificial = \"artificial-1\"\n[[synthesizer]]\nkind = \"resample\"\n",
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus") && msg.contains("master_seed"), "{msg}");
        let err = ExperimentConfig::from_toml(
            "[dataset]\nartificial = \"artificial-1\"\n[[synthesizer]]\nkind = \"privbayes\"\nk = 3\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("k_parents"), "{err}");
    }

    #[test]
    fn invalid_values() {
        let base = "[dataset]\nartificial = \"artificial-1\"\n[[synthesizer]]\nkind = \"privbayes\"\n";
        for extra in ["epsilon_grid = []\n", "epsilon_grid = [0.0]\n", "repeats_outer = 0\n", "train_frac = 1.0\n"] {
            let text = format!("{extra}{base}");
            assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))), "{extra}");
        }
        assert!(ExperimentConfig::from_toml("[dataset]\nartificial = \"artificial-9\"\n[[synthesizer]]\nkind = \"resample\"\n").is_err());
        assert!(ExperimentConfig::from_toml("[dataset]\ncsv = \"x.csv\"\n[[synthesizer]]\nkind = \"resample\"\n").is_err());
        assert!(ExperimentConfig::from_toml("[dataset]\nartificial = \"artificial-1\"\nsynthesizer = []\n").is_err());
    }
}
