use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SynthesizerConfig};
use crate::association::{association_matrix, AssociationMatrix};
use crate::featgen::apply_recipe;
use crate::forest::{evaluate_auc, train_forest};
use crate::importance::{compute_importance, ImportanceVector};
use crate::ranksim::{compare, permute_importance, SimilarityReport};
use crate::seed::{derive, Part};
use crate::tabular::{split, Table};
use crate::{Error, Result};

/// Outcome of one (synthesizer, epsilon, outer, inner) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: usize,
    pub dataset: String,
    pub method: String,
    /// Privacy budget of the run; absent for non-private baselines.
    pub epsilon: Option<f64>,
    pub outer: usize,
    pub inner: usize,
    pub seed: u64,
    /// Budget actually consumed by the fitted synthesizer.
    pub spent_epsilon: Option<f64>,
    /// Set when any step failed; the run is then left out of summaries.
    pub error: Option<String>,
    pub similarity: Option<SimilarityReport>,
    /// Similarity after randomly permuting the synthetic ranking.
    pub permutation_baseline: Option<SimilarityReport>,
    /// Both forests are scored on the real validation split.
    pub auc_original: Option<f64>,
    pub auc_synthetic: Option<f64>,
    pub importance_original: Option<ImportanceVector>,
    pub importance_synthetic: Option<ImportanceVector>,
}

impl RunResult {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

/// A finished sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub results: Vec<RunResult>,
    /// Associations between the real (engineered) features.
    pub association: AssociationMatrix,
}

fn sub(seed: u64, tag: &str) -> u64 {
    derive(&[Part::Int(seed), Part::Str(tag)])
}

fn eps_part(eps: Option<f64>) -> Part<'static> {
    eps.map_or(Part::None, Part::Real)
}

/// Everything computed from the real table for one (outer, inner) slot; it
/// is shared by every synthesizer and epsilon.
struct RealSide {
    validation: Table,
    importance: ImportanceVector,
    auc: f64,
}

fn engineer(table: &Table, cfg: &ExperimentConfig) -> Result<Table> {
    match &cfg.recipe {
        Some(r) => Ok(apply_recipe(table, r)?.table),
        None => Ok(table.clone()),
    }
}

fn real_side(engineered: &Table, cfg: &ExperimentConfig, outer: usize, inner: usize) -> Result<RealSide> {
    let seed = derive(&[
        Part::Int(cfg.master_seed),
        Part::Str("original"),
        Part::Int(outer as u64),
        Part::Int(inner as u64),
    ]);
    let parts = split(engineered, cfg.train_frac, sub(seed, "split"))?;
    let forest = train_forest(&parts.train, &cfg.forest, sub(seed, "forest"))?;
    let importance = compute_importance(
        cfg.importance,
        &forest,
        &parts.train,
        &parts.validation,
        &cfg.shap,
        &cfg.pfi,
        sub(seed, "importance"),
    )?;
    let auc = evaluate_auc(&forest, &parts.validation)?;
    Ok(RealSide {
        validation: parts.validation,
        importance,
        auc,
    })
}

struct RunSpec<'a> {
    run_id: usize,
    synth: &'a SynthesizerConfig,
    epsilon: Option<f64>,
    outer: usize,
    inner: usize,
}

struct SyntheticSide {
    spent_epsilon: Option<f64>,
    importance: ImportanceVector,
    auc: f64,
    similarity: SimilarityReport,
    permutation: SimilarityReport,
}

fn synthetic_side(
    spec: &RunSpec<'_>,
    run_seed: u64,
    real_table: &Table,
    real: &RealSide,
    assoc: &AssociationMatrix,
    cfg: &ExperimentConfig,
) -> Result<SyntheticSide> {
    let method = spec.synth.tag();
    // one fitted model per outer repetition, sampled once per inner one
    let fit_seed = derive(&[
        Part::Int(cfg.master_seed),
        Part::Str(&method),
        eps_part(spec.epsilon),
        Part::Int(spec.outer as u64),
    ]);
    let fitted = spec.synth.build(spec.epsilon)?.fit(real_table, fit_seed)?;
    let synthetic = fitted.sample(sub(run_seed, "sample"))?;
    let engineered = engineer(&synthetic, cfg)?;
    let parts = split(&engineered, cfg.train_frac, sub(run_seed, "split"))?;
    let forest = train_forest(&parts.train, &cfg.forest, sub(run_seed, "forest"))?;
    let importance = compute_importance(
        cfg.importance,
        &forest,
        &parts.train,
        &parts.validation,
        &cfg.shap,
        &cfg.pfi,
        sub(run_seed, "importance"),
    )?;
    let auc = evaluate_auc(&forest, &real.validation)?;
    let similarity = compare(&real.importance, &importance, assoc, &cfg.rbo)?;
    let shuffled = permute_importance(&importance, sub(run_seed, "permute"));
    let permutation = compare(&real.importance, &shuffled, assoc, &cfg.rbo)?;
    Ok(SyntheticSide {
        spent_epsilon: fitted.spent_epsilon(),
        importance,
        auc,
        similarity,
        permutation,
    })
}

/// Run the whole sweep on the current rayon pool. Only failures of the
/// real-data side abort; synthetic-side failures are recorded per run.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    cfg.validate()?;
    let dataset = cfg.dataset.tag();
    let real_table = cfg
        .dataset
        .load(derive(&[Part::Int(cfg.master_seed), Part::Str("dataset")]))?;
    let engineered = engineer(&real_table, cfg)?;
    let association = association_matrix(&engineered)?;

    let (m, l) = (cfg.repeats_outer, cfg.repeats_inner);
    let slots: Vec<(usize, usize)> = (0..m).flat_map(|j| (0..l).map(move |i| (j, i))).collect();
    let reals: Vec<RealSide> = slots
        .par_iter()
        .map(|&(j, i)| real_side(&engineered, cfg, j, i))
        .collect::<Result<_>>()?;

    let mut specs = Vec::with_capacity(cfg.n_runs());
    for synth in &cfg.synthesizers {
        for epsilon in cfg.epsilons_for(synth) {
            for &(outer, inner) in &slots {
                specs.push(RunSpec {
                    run_id: specs.len(),
                    synth,
                    epsilon,
                    outer,
                    inner,
                });
            }
        }
    }

    let results = specs
        .par_iter()
        .map(|spec| {
            let method = spec.synth.tag();
            let run_seed = derive(&[
                Part::Int(cfg.master_seed),
                Part::Str(&method),
                eps_part(spec.epsilon),
                Part::Int(spec.outer as u64),
                Part::Int(spec.inner as u64),
            ]);
            let real = &reals[spec.outer * l + spec.inner];
            let mut r = RunResult {
                run_id: spec.run_id,
                dataset: dataset.clone(),
                method,
                epsilon: spec.epsilon,
                outer: spec.outer,
                inner: spec.inner,
                seed: run_seed,
                spent_epsilon: None,
                error: None,
                similarity: None,
                permutation_baseline: None,
                auc_original: Some(real.auc),
                auc_synthetic: None,
                importance_original: Some(real.importance.clone()),
                importance_synthetic: None,
            };
            match synthetic_side(spec, run_seed, &real_table, real, &association, cfg) {
                Ok(s) => {
                    r.spent_epsilon = s.spent_epsilon;
                    r.similarity = Some(s.similarity);
                    r.permutation_baseline = Some(s.permutation);
                    r.auc_synthetic = Some(s.auc);
                    r.importance_synthetic = Some(s.importance);
                }
                Err(e) => r.error = Some(e.to_string()),
            }
            r
        })
        .collect();
    Ok(Experiment {
        results,
        association,
    })
}

/// [`run_experiment`] on a dedicated pool of `jobs` threads. Results do not
/// depend on `jobs`.
pub fn run_experiment_with_jobs(cfg: &ExperimentConfig, jobs: usize) -> Result<Experiment> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(cfg))
}
