use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::seed::Rng;

/// How a split node routes a row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SplitRule {
    /// `x <= threshold` goes left.
    Threshold(f64),
    /// `x == level` goes left, every other level right.
    Level(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Weighted class counts of the training rows that reached the leaf.
        counts: Vec<f64>,
        /// `counts` normalised to sum to 1.
        probs: Vec<f64>,
    },
    Split {
        feature: usize,
        rule: SplitRule,
        left: usize,
        right: usize,
        left_weight: f64,
        right_weight: f64,
        /// `(N_node g_node - N_left g_left - N_right g_right) / N_root` with
        /// Gini impurity `g`: the node's contribution to MDI.
        weighted_decrease: f64,
    },
}

/// Prediction-only copy of a forest: every node of every tree in one array,
/// leaf probabilities in another. Routing matches [`Tree::leaf`].
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Flat {
    nodes: Vec<FlatNode>,
    roots: Vec<u32>,
    probs: Vec<f64>,
    n_classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct FlatNode {
    /// Threshold, level, or offset into `probs` for leaves.
    value: f64,
    left: u32,
    right: u32,
    feature: u32,
    kind: FlatKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum FlatKind {
    Leaf,
    Threshold,
    /// Unseen levels go left when `default_left`.
    Level { default_left: bool },
}

impl Flat {
    pub(crate) fn new(trees: &[Tree], n_classes: usize) -> Self {
        let mut flat = Flat {
            nodes: Vec::with_capacity(trees.iter().map(|t| t.nodes.len()).sum()),
            roots: Vec::with_capacity(trees.len()),
            probs: Vec::new(),
            n_classes,
        };
        for t in trees {
            let base = flat.nodes.len() as u32;
            flat.roots.push(base);
            for node in &t.nodes {
                let fnode = match node {
                    Node::Leaf { probs, .. } => {
                        let at = flat.probs.len();
                        flat.probs.extend_from_slice(probs);
                        flat.probs.resize(at + n_classes, 0.0);
                        FlatNode {
                            value: at as f64,
                            left: 0,
                            right: 0,
                            feature: 0,
                            kind: FlatKind::Leaf,
                        }
                    }
                    Node::Split {
                        feature,
                        rule,
                        left,
                        right,
                        left_weight,
                        right_weight,
                        ..
                    } => {
                        let (value, kind) = match *rule {
                            SplitRule::Threshold(t) => (t, FlatKind::Threshold),
                            SplitRule::Level(l) => (
                                l as f64,
                                FlatKind::Level {
                                    default_left: left_weight > right_weight,
                                },
                            ),
                        };
                        FlatNode {
                            value,
                            left: base + *left as u32,
                            right: base + *right as u32,
                            feature: *feature as u32,
                            kind,
                        }
                    }
                };
                flat.nodes.push(fnode);
            }
        }
        flat
    }

    #[inline]
    fn leaf_offset(&self, root: u32, x: &[f64], seen: &[Vec<bool>]) -> usize {
        let mut i = root as usize;
        loop {
            let n = &self.nodes[i];
            let go_left = match n.kind {
                FlatKind::Leaf => return n.value as usize,
                FlatKind::Threshold => x[n.feature as usize] <= n.value,
                FlatKind::Level { default_left } => {
                    let level = x[n.feature as usize] as usize;
                    match seen[n.feature as usize].get(level) {
                        Some(true) => level == n.value as usize,
                        _ => default_left,
                    }
                }
            };
            i = if go_left { n.left } else { n.right } as usize;
        }
    }

    /// Sum over trees of the leaf probability of `class`.
    pub(crate) fn sum_class(&self, x: &[f64], seen: &[Vec<bool>], class: usize) -> f64 {
        self.roots
            .iter()
            .map(|&r| self.probs[self.leaf_offset(r, x, seen) + class])
            .sum()
    }

    /// Add every tree's leaf probabilities to `out`.
    pub(crate) fn accumulate(&self, x: &[f64], seen: &[Vec<bool>], out: &mut [f64]) {
        for &r in &self.roots {
            let at = self.leaf_offset(r, x, seen);
            for (o, p) in out.iter_mut().zip(&self.probs[at..at + self.n_classes]) {
                *o += p;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Reference routing; predictions go through [`Flat`].
    #[cfg(test)]
    pub(crate) fn leaf<'a>(&'a self, x: &[f64], seen: &[Vec<bool>]) -> &'a [f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { probs, .. } => return probs,
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                    left_weight,
                    right_weight,
                    ..
                } => {
                    let v = x[*feature];
                    let go_left = match *rule {
                        SplitRule::Threshold(t) => v <= t,
                        SplitRule::Level(l) => {
                            let level = v as usize;
                            let known = seen[*feature].get(level).copied().unwrap_or(false);
                            if known {
                                level == l
                            } else {
                                left_weight > right_weight
                            }
                        }
                    };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Training data in the layout the builder wants.
pub(crate) struct TrainingData<'a> {
    /// Column-major feature values.
    pub columns: Vec<&'a [f64]>,
    /// `Some(levels)` for categorical features.
    pub levels: Vec<Option<usize>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

pub(crate) struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_leaf: f64,
    pub mtry: usize,
}

struct Builder<'a, 'b> {
    data: &'b TrainingData<'a>,
    weights: Vec<f64>,
    params: &'b TreeParams,
    root_weight: f64,
    nodes: Vec<Node>,
    rng: &'b mut Rng,
}

struct Candidate {
    feature: usize,
    rule: SplitRule,
    proxy: f64,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

/// `sum_c n_c^2 / n`; larger is better for a child.
fn purity(counts: &[f64], total: f64) -> f64 {
    counts.iter().map(|c| c * c).sum::<f64>() / total
}

/// Grow one tree on rows weighted by their bootstrap multiplicity.
pub(crate) fn grow(
    data: &TrainingData<'_>,
    weights: Vec<f64>,
    params: &TreeParams,
    rng: &mut Rng,
) -> Tree {
    let rows: Vec<usize> = (0..weights.len()).filter(|&r| weights[r] > 0.0).collect();
    let root_weight = rows.iter().map(|&r| weights[r]).sum();
    let mut b = Builder {
        data,
        weights,
        params,
        root_weight,
        nodes: Vec::new(),
        rng,
    };
    b.build(rows, 0);
    Tree { nodes: b.nodes }
}

impl Builder<'_, '_> {
    fn class_counts(&self, rows: &[usize]) -> (Vec<f64>, f64) {
        let mut counts = vec![0.0; self.data.n_classes];
        for &r in rows {
            counts[self.data.labels[r]] += self.weights[r];
        }
        let total = counts.iter().sum();
        (counts, total)
    }

    fn make_leaf(&mut self, counts: Vec<f64>, total: f64) -> usize {
        let probs = counts.iter().map(|c| c / total).collect();
        self.nodes.push(Node::Leaf { counts, probs });
        self.nodes.len() - 1
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (counts, total) = self.class_counts(&rows);
        let pure = counts.iter().filter(|&&c| c > 0.0).count() <= 1;
        let depth_capped = self.params.max_depth.is_some_and(|m| depth >= m);
        if pure || depth_capped || total < 2.0 * self.params.min_leaf {
            return self.make_leaf(counts, total);
        }
        let Some(best) = self.best_split(&rows, &counts, total) else {
            return self.make_leaf(counts, total);
        };
        let col = self.data.columns[best.feature];
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&r| match best.rule {
                SplitRule::Threshold(t) => col[r] <= t,
                SplitRule::Level(l) => col[r] as usize == l,
            });
        let (lc, lw) = self.class_counts(&left_rows);
        let (rc, rw) = self.class_counts(&right_rows);
        let decrease = (total * gini(&counts, total) - lw * gini(&lc, lw) - rw * gini(&rc, rw))
            .max(0.0)
            / self.root_weight;

        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf {
            counts: Vec::new(),
            probs: Vec::new(),
        });
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        self.nodes[idx] = Node::Split {
            feature: best.feature,
            rule: best.rule,
            left,
            right,
            left_weight: lw,
            right_weight: rw,
            weighted_decrease: decrease,
        };
        idx
    }

    /// Visit features in random order; stop once `mtry` have been examined
    /// and at least one valid split was found.
    fn best_split(&mut self, rows: &[usize], counts: &[f64], total: f64) -> Option<Candidate> {
        let d = self.data.columns.len();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(self.rng);
        let mut best: Option<Candidate> = None;
        for (visited, &f) in order.iter().enumerate() {
            if visited >= self.params.mtry && best.is_some() {
                break;
            }
            let cand = match self.data.levels[f] {
                Some(levels) => self.split_categorical(f, levels, rows, total),
                None => self.split_continuous(f, rows, counts, total),
            };
            if let Some(c) = cand {
                if best.as_ref().is_none_or(|b| c.proxy > b.proxy) {
                    best = Some(c);
                }
            }
        }
        best
    }

    fn split_categorical(
        &self,
        f: usize,
        levels: usize,
        rows: &[usize],
        total: f64,
    ) -> Option<Candidate> {
        let k = self.data.n_classes;
        let col = self.data.columns[f];
        let mut by_level = vec![0.0; levels * k];
        let mut level_w = vec![0.0; levels];
        for &r in rows {
            let l = col[r] as usize;
            let w = self.weights[r];
            by_level[l * k + self.data.labels[r]] += w;
            level_w[l] += w;
        }
        let mut node = vec![0.0; k];
        for l in 0..levels {
            for c in 0..k {
                node[c] += by_level[l * k + c];
            }
        }
        let min_leaf = self.params.min_leaf;
        let mut best: Option<Candidate> = None;
        let mut rest = vec![0.0; k];
        for l in 0..levels {
            let lw = level_w[l];
            let rw = total - lw;
            if lw < min_leaf || rw < min_leaf || lw <= 0.0 || rw <= 0.0 {
                continue;
            }
            let left = &by_level[l * k..(l + 1) * k];
            for c in 0..k {
                rest[c] = node[c] - left[c];
            }
            let proxy = purity(left, lw) + purity(&rest, rw);
            if best.as_ref().is_none_or(|b| proxy > b.proxy) {
                best = Some(Candidate {
                    feature: f,
                    rule: SplitRule::Level(l),
                    proxy,
                });
            }
        }
        best
    }

    fn split_continuous(
        &self,
        f: usize,
        rows: &[usize],
        counts: &[f64],
        total: f64,
    ) -> Option<Candidate> {
        let k = self.data.n_classes;
        let col = self.data.columns[f];
        let mut sorted: Vec<usize> = rows.to_vec();
        sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        let min_leaf = self.params.min_leaf;
        let mut left = vec![0.0; k];
        let mut right = counts.to_vec();
        let mut lw = 0.0;
        let mut best: Option<Candidate> = None;
        for i in 0..sorted.len() - 1 {
            let r = sorted[i];
            let w = self.weights[r];
            left[self.data.labels[r]] += w;
            right[self.data.labels[r]] -= w;
            lw += w;
            let (a, b) = (col[r], col[sorted[i + 1]]);
            if a == b {
                continue;
            }
            let rw = total - lw;
            if lw < min_leaf || rw < min_leaf {
                continue;
            }
            let proxy = purity(&left, lw) + purity(&right, rw);
            if best.as_ref().is_none_or(|c| proxy > c.proxy) {
                let mid = a + (b - a) / 2.0;
                let threshold = if mid < b { mid } else { a };
                best = Some(Candidate {
                    feature: f,
                    rule: SplitRule::Threshold(threshold),
                    proxy,
                });
            }
        }
        best
    }
}
