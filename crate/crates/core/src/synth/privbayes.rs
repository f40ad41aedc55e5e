use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mechanism::{exponential_mechanism, laplace, mi_sensitivity};
use crate::seed;
use crate::tabular::{quantile_bins, Binning, ColumnKind, Schema, Table};
use crate::{Error, Result};

/// Smallest table PrivBayes will fit.
pub const MIN_ROWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivBayesConfig {
    /// Total privacy budget.
    pub epsilon: f64,
    /// Maximum number of parents per node.
    #[serde(default = "default_k")]
    pub k_parents: usize,
    /// Share of the budget spent on structure selection.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Quantile bins per continuous column.
    #[serde(default = "default_bins")]
    pub n_bins: usize,
}

fn default_k() -> usize {
    3
}
fn default_beta() -> f64 {
    0.5
}
fn default_bins() -> usize {
    10
}

impl PrivBayesConfig {
    pub fn new(epsilon: f64) -> Self {
        PrivBayesConfig {
            epsilon,
            k_parents: default_k(),
            beta: default_beta(),
            n_bins: default_bins(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.n_bins < 2 {
            return Err(Error::Config("n_bins must be at least 2".into()));
        }
        Ok(())
    }

    /// `(structure, parameters)` shares of epsilon; they add up to epsilon.
    pub fn budget_split(&self) -> (f64, f64) {
        let structure = self.beta * self.epsilon;
        (structure, self.epsilon - structure)
    }
}

/// One network node: a column, its parents and the noisy conditional table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetNode {
    pub column: String,
    pub parents: Vec<String>,
    /// Size of the node's discretized domain.
    pub cardinality: usize,
    /// `cpt[config][value]`; parent configurations are mixed-radix numbers
    /// with the first parent most significant.
    pub cpt: Vec<Vec<f64>>,
    /// Quantile bins of a continuous column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binning: Option<Binning>,
}

/// A fitted PrivBayes model. Nodes are stored in sampling order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesNet {
    schema: Schema,
    nodes: Vec<NetNode>,
    config: PrivBayesConfig,
    spent_epsilon: f64,
}

impl BayesNet {
    pub fn nodes(&self) -> &[NetNode] {
        &self.nodes
    }

    pub fn ordering(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.column.as_str()).collect()
    }

    pub fn node(&self, column: &str) -> Option<&NetNode> {
        self.nodes.iter().find(|n| n.column == column)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn config(&self) -> &PrivBayesConfig {
        &self.config
    }

    pub fn spent_epsilon(&self) -> f64 {
        self.spent_epsilon
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and check a serialized net.
    pub fn from_json(text: &str) -> Result<Self> {
        let net: BayesNet = serde_json::from_str(text)?;
        net.check()?;
        Ok(net)
    }

    /// Structural consistency: every column appears once, parents precede
    /// their child, and every CPT row is a probability vector.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Internal(format!("malformed Bayesian network: {m}")));
        let cols = self.schema.columns();
        if self.nodes.len() != cols.len() {
            return bad(format!("{} nodes for {} columns", self.nodes.len(), cols.len()));
        }
        for (pos, node) in self.nodes.iter().enumerate() {
            let Some(ci) = self.schema.index_of(&node.column) else {
                return bad(format!("unknown column `{}`", node.column));
            };
            if self.nodes[..pos].iter().any(|n| n.column == node.column) {
                return bad(format!("column `{}` appears twice", node.column));
            }
            let expected = match (cols[ci].kind, &node.binning) {
                (ColumnKind::Categorical { levels }, None) => levels,
                (ColumnKind::Continuous, Some(b)) => b.n_bins(),
                _ => return bad(format!("binning of `{}` does not match its kind", node.column)),
            };
            if node.cardinality != expected {
                return bad(format!("`{}` has cardinality {}", node.column, node.cardinality));
            }
            let mut configs = 1usize;
            for p in &node.parents {
                match self.nodes[..pos].iter().find(|n| &n.column == p) {
                    Some(parent) => configs *= parent.cardinality,
                    None => return bad(format!("parent `{p}` of `{}` is not earlier", node.column)),
                }
            }
            if node.cpt.len() != configs {
                return bad(format!("`{}` has {} CPT rows, expected {configs}", node.column, node.cpt.len()));
            }
            for row in &node.cpt {
                let sum: f64 = row.iter().sum();
                if row.len() != node.cardinality
                    || row.iter().any(|&p| !(p >= 0.0) || !p.is_finite())
                    || (sum - 1.0).abs() > 1e-9
                {
                    return bad(format!("`{}` has an invalid CPT row", node.column));
                }
            }
        }
        Ok(())
    }
}

/// Discretized view of a table: one code column per schema column.
struct Coded {
    codes: Vec<Vec<usize>>,
    cards: Vec<usize>,
    binnings: Vec<Option<Binning>>,
}

fn encode(table: &Table, n_bins: usize) -> Coded {
    let mut codes = Vec::new();
    let mut cards = Vec::new();
    let mut binnings = Vec::new();
    for (col, values) in table.schema().columns().iter().zip(table.columns()) {
        match col.kind {
            ColumnKind::Categorical { levels } => {
                codes.push(values.iter().map(|&v| v as usize).collect());
                cards.push(levels);
                binnings.push(None);
            }
            ColumnKind::Continuous => {
                let b = quantile_bins(values, n_bins);
                codes.push(values.iter().map(|&v| b.bin_of(v)).collect());
                cards.push(b.n_bins());
                binnings.push(Some(b));
            }
        }
    }
    Coded {
        codes,
        cards,
        binnings,
    }
}

impl Coded {
    /// Joint counts of `(parent configuration, child)`, row-major with the
    /// child varying fastest. This is the only place rows are read.
    fn joint_counts(&self, child: usize, parents: &[usize]) -> (Vec<f64>, usize) {
        let configs: usize = parents.iter().map(|&p| self.cards[p]).product();
        let k = self.cards[child];
        let mut counts = vec![0.0; configs * k];
        let n = self.codes[child].len();
        for r in 0..n {
            let mut cfg = 0;
            for &p in parents {
                cfg = cfg * self.cards[p] + self.codes[p][r];
            }
            counts[cfg * k + self.codes[child][r]] += 1.0;
        }
        (counts, configs)
    }

    /// Plug-in mutual information in bits between a child and its parent set.
    fn mutual_information(&self, child: usize, parents: &[usize]) -> f64 {
        if parents.is_empty() {
            return 0.0;
        }
        let (counts, configs) = self.joint_counts(child, parents);
        let k = self.cards[child];
        let n: f64 = counts.iter().sum();
        let mut child_marg = vec![0.0; k];
        let mut parent_marg = vec![0.0; configs];
        for c in 0..configs {
            for v in 0..k {
                child_marg[v] += counts[c * k + v];
                parent_marg[c] += counts[c * k + v];
            }
        }
        let mut mi = 0.0;
        for c in 0..configs {
            for v in 0..k {
                let j = counts[c * k + v];
                if j > 0.0 {
                    mi += j / n * (j * n / (parent_marg[c] * child_marg[v])).log2();
                }
            }
        }
        mi.max(0.0)
    }
}

/// Fit a PrivBayes network. The target is an ordinary node.
pub fn fit_privbayes(table: &Table, cfg: &PrivBayesConfig, seed: u64) -> Result<BayesNet> {
    cfg.validate()?;
    let n = table.n_rows();
    if n < MIN_ROWS {
        return Err(Error::Size(format!("PrivBayes needs at least {MIN_ROWS} rows, got {n}")));
    }
    let coded = encode(table, cfg.n_bins);
    let d = table.n_cols();
    let mut rng = seed::rng(seed);
    let (structure_eps, parameter_eps) = cfg.budget_split();

    // greedy structure selection
    let first = rng.random_range(0..d);
    let mut order = vec![first];
    let mut parent_sets: Vec<Vec<usize>> = vec![Vec::new()];
    let mut remaining: Vec<usize> = (0..d).filter(|&c| c != first).collect();
    let per_selection = if d > 1 { structure_eps / (d - 1) as f64 } else { 0.0 };
    let sensitivity = mi_sensitivity(n);
    while !remaining.is_empty() {
        let size = cfg.k_parents.min(order.len());
        let mut candidates: Vec<(usize, Vec<usize>)> = Vec::new();
        for &child in &remaining {
            for combo in order.iter().copied().combinations(size) {
                candidates.push((child, combo));
            }
        }
        let scores: Vec<f64> = candidates
            .iter()
            .map(|(c, ps)| coded.mutual_information(*c, ps))
            .collect();
        let pick = exponential_mechanism(&scores, per_selection, sensitivity, &mut rng)?;
        let (child, parents) = candidates.swap_remove(pick);
        remaining.retain(|&c| c != child);
        order.push(child);
        parent_sets.push(parents);
    }

    // noisy conditional tables, (1 - beta) epsilon shared by d tables
    let scale = 2.0 * d as f64 / parameter_eps;
    let cols = table.schema().columns();
    let mut nodes = Vec::with_capacity(d);
    for (&col, parents) in order.iter().zip(&parent_sets) {
        let (mut counts, configs) = coded.joint_counts(col, parents);
        for c in counts.iter_mut() {
            *c = (*c + laplace(scale, &mut rng)).max(0.0);
        }
        let k = coded.cards[col];
        let cpt = (0..configs)
            .map(|cfg_idx| {
                let row = &counts[cfg_idx * k..(cfg_idx + 1) * k];
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    row.iter().map(|c| c / mass).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            })
            .collect();
        nodes.push(NetNode {
            column: cols[col].name.clone(),
            parents: parents.iter().map(|&p| cols[p].name.clone()).collect(),
            cardinality: k,
            cpt,
            binning: coded.binnings[col].clone(),
        });
    }
    Ok(BayesNet {
        schema: table.schema().clone(),
        nodes,
        config: *cfg,
        spent_epsilon: cfg.epsilon,
    })
}

fn draw<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the cumulative sum just below 1
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Ancestral sampling of `n_rows` rows; continuous columns are de-binned by a
/// uniform draw inside the sampled bin.
pub fn sample_privbayes(net: &BayesNet, n_rows: usize, seed: u64) -> Result<Table> {
    net.check()?;
    let schema = net.schema();
    let d = schema.len();
    let mut rng = seed::rng(seed);
    // node position -> schema column, parents as node positions
    let col_of: Vec<usize> = net
        .nodes
        .iter()
        .map(|n| schema.index_of(&n.column).expect("checked"))
        .collect();
    let parent_pos: Vec<Vec<usize>> = net
        .nodes
        .iter()
        .map(|n| {
            n.parents
                .iter()
                .map(|p| net.nodes.iter().position(|m| &m.column == p).expect("checked"))
                .collect()
        })
        .collect();
    let mut codes = vec![vec![0usize; n_rows]; d];
    for r in 0..n_rows {
        for (pos, node) in net.nodes.iter().enumerate() {
            let mut cfg = 0;
            for &p in &parent_pos[pos] {
                cfg = cfg * net.nodes[p].cardinality + codes[p][r];
            }
            codes[pos][r] = draw(&node.cpt[cfg], &mut rng);
        }
    }
    let mut columns = vec![Vec::new(); d];
    for (pos, node) in net.nodes.iter().enumerate() {
        columns[col_of[pos]] = match &node.binning {
            None => codes[pos].iter().map(|&c| c as f64).collect(),
            Some(b) => codes[pos].iter().map(|&c| b.sample_within(c, &mut rng)).collect(),
        };
    }
    Table::new(schema.clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::association::cramers_v;
    use crate::tabular::{generate_artificial, ArtificialSpec, ColumnSchema};

    fn two_linked(n: usize, seed: u64) -> Table {
        let mut rng = seed::rng(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
        let schema = Schema::new(vec![
            ColumnSchema::categorical("a", 3),
            ColumnSchema::categorical("b", 3).target(),
        ])
        .unwrap();
        Table::new(schema, vec![a.clone(), a]).unwrap()
    }

    fn five_features(seed: u64) -> Table {
        let spec = ArtificialSpec {
            n_rows: 10_000,
            n_informative: 3,
            n_redundant: 1,
            n_noise: 1,
            categorical: false,
            ..ArtificialSpec::artificial_1()
        };
        let t = generate_artificial(&spec, seed).unwrap();
        // turn one feature categorical to mix kinds
        crate::tabular::discretize(&t, "x1", 4).unwrap()
    }

    #[test]
    fn parent_sets_bounded_and_ordered() {
        let t = five_features(1);
        for k in [0, 1, 3] {
            let cfg = PrivBayesConfig { k_parents: k, ..PrivBayesConfig::new(1.0) };
            let net = fit_privbayes(&t, &cfg, 5).unwrap();
            assert_eq!(net.nodes().len(), t.n_cols());
            for (pos, node) in net.nodes().iter().enumerate() {
                assert!(node.parents.len() <= k);
                let earlier = net.ordering()[..pos].to_vec();
                assert!(node.parents.iter().all(|p| earlier.contains(&p.as_str())));
            }
            net.check().unwrap();
        }
    }

    #[test]
    fn budget_bookkeeping() {
        let cfg = PrivBayesConfig::new(1.0);
        assert_eq!(cfg.budget_split(), (0.5, 0.5));
        let net = fit_privbayes(&two_linked(50, 0), &cfg, 0).unwrap();
        assert_eq!(net.spent_epsilon(), 1.0);
        for eps in [1e-4, 1e-3, 1e-2, 0.1, 0.4, 1.0, 4.0, 10.0] {
            let (s, p) = PrivBayesConfig::new(eps).budget_split();
            assert_eq!(s + p, eps);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let small = two_linked(9, 0);
        assert!(matches!(fit_privbayes(&small, &PrivBayesConfig::new(1.0), 0), Err(Error::Size(_))));
        let t = two_linked(20, 0);
        for eps in [0.0, -1.0, f64::NAN] {
            assert!(matches!(fit_privbayes(&t, &PrivBayesConfig::new(eps), 0), Err(Error::Config(_))));
        }
    }

    #[test]
    fn near_noiseless_marginal() {
        let n = 10_000;
        let y: Vec<f64> = (0..n).map(|i| if i % 10 < 7 { 1.0 } else { 0.0 }).collect();
        let schema = Schema::new(vec![ColumnSchema::categorical("y", 2).target()]).unwrap();
        let t = Table::new(schema, vec![y]).unwrap();
        let net = fit_privbayes(&t, &PrivBayesConfig::new(1e6), 3).unwrap();
        assert!((net.node("y").unwrap().cpt[0][1] - 0.7).abs() < 0.01);
    }

    #[test]
    fn empty_sample_keeps_schema() {
        let t = two_linked(100, 1);
        let net = fit_privbayes(&t, &PrivBayesConfig::new(1.0), 1).unwrap();
        let s = sample_privbayes(&net, 0, 1).unwrap();
        assert_eq!(s.n_rows(), 0);
        assert_eq!(s.schema(), t.schema());
    }

    #[test]
    fn dependence_survives_only_with_budget() {
        let t = two_linked(10_000, 2);
        assert_eq!(cramers_v(t.column(0), t.column(1)).unwrap(), 1.0);
        let net = fit_privbayes(&t, &PrivBayesConfig::new(1e6), 2).unwrap();
        let s = sample_privbayes(&net, 10_000, 2).unwrap();
        assert!(cramers_v(s.column(0), s.column(1)).unwrap() > 0.9);

        // Clamped noise leaves random sparse CPT rows, so the spurious
        // association is bimodal (often exactly 0, sometimes near 1).
        let vs: Vec<f64> = (0..25)
            .map(|seed| {
                let net = fit_privbayes(&t, &PrivBayesConfig::new(1e-4), seed).unwrap();
                let s = sample_privbayes(&net, 10_000, seed).unwrap();
                cramers_v(s.column(0), s.column(1)).unwrap()
            })
            .collect();
        let weak = vs.iter().filter(|&&v| v < 0.3).count();
        let mean = vs.iter().sum::<f64>() / 25.0;
        assert!(weak > 12, "only {weak}/25 runs lost the dependence");
        assert!(mean < 0.5, "mean V {mean}");
    }

    #[test]
    fn marginals_preserved_without_noise() {
        let t = five_features(3);
        let net = fit_privbayes(&t, &PrivBayesConfig::new(1e6), 3).unwrap();
        let s = sample_privbayes(&net, 10_000, 4).unwrap();
        for (c, col) in t.schema().columns().iter().enumerate() {
            let (orig, synth) = match col.kind {
                ColumnKind::Categorical { .. } => (t.column(c).to_vec(), s.column(c).to_vec()),
                ColumnKind::Continuous => {
                    let b = quantile_bins(t.column(c), 10);
                    let code = |v: &[f64]| v.iter().map(|&x| b.bin_of(x) as f64).collect::<Vec<_>>();
                    (code(t.column(c)), code(s.column(c)))
                }
            };
            let levels = orig.iter().chain(&synth).fold(0.0f64, |m, &v| m.max(v)) as usize + 1;
            let freq = |v: &[f64]| {
                let mut f = vec![0.0; levels];
                v.iter().for_each(|&x| f[x as usize] += 1.0 / v.len() as f64);
                f
            };
            let (fo, fs) = (freq(&orig), freq(&synth));
            let tv: f64 = fo.iter().zip(&fs).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
            assert!(tv < 0.02, "column {} tv {tv}", col.name);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let t = five_features(4);
        let net = fit_privbayes(&t, &PrivBayesConfig::new(0.5), 4).unwrap();
        assert_eq!(net, fit_privbayes(&t, &PrivBayesConfig::new(0.5), 4).unwrap());
        let a = sample_privbayes(&net, 500, 9).unwrap();
        assert_eq!(a, sample_privbayes(&net, 500, 9).unwrap());
        for node in net.nodes() {
            for row in &node.cpt {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
        // continuous draws stay inside the observed range
        let c = t.schema().index_of("x0").unwrap();
        let (lo, hi) = t.column(c).iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        assert!(a.column(c).iter().all(|&v| v >= lo && v <= hi));
    }

    #[test]
    fn json_roundtrip_and_corruption() {
        let t = two_linked(200, 5);
        let net = fit_privbayes(&t, &PrivBayesConfig::new(1.0), 5).unwrap();
        let text = net.to_json().unwrap();
        assert_eq!(BayesNet::from_json(&text).unwrap(), net);

        let mut broken = net.clone();
        broken.nodes[0].cpt[0][0] += 0.5;
        assert!(matches!(broken.check(), Err(Error::Internal(_))));
        assert!(matches!(sample_privbayes(&broken, 10, 0), Err(Error::Internal(_))));
        let mut cyclic = net;
        let first = cyclic.nodes[0].column.clone();
        cyclic.nodes[0].parents = vec![cyclic.nodes[1].column.clone()];
        cyclic.nodes[1].parents = vec![first];
        assert!(cyclic.check().is_err());
    }
}
