//! CART trees shared by the decision tree, the forest, and boosting.

use serde::{Deserialize, Serialize};

use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { value: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// Flat node array; the root is node 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    /// `(feature, threshold)` of every split in preorder.
    pub fn splits(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut stack = vec![0];
        while let Some(at) = stack.pop() {
            if let TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } = self.nodes[at]
            {
                out.push((feature, threshold));
                stack.push(right);
                stack.push(left);
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, at: usize) -> usize {
            match t.nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

const LEAF: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct PackedNode {
    /// Split threshold, or the value of a leaf.
    threshold: f64,
    feature: u32,
    left: u32,
    right: u32,
}

/// A tree repacked for scoring many rows: 24-byte nodes, with rows walked
/// in lockstep groups so their memory loads overlap.
#[derive(Debug, Clone)]
pub struct PackedTree {
    nodes: Vec<PackedNode>,
}

const LANES: usize = 8;

impl From<&Tree> for PackedTree {
    fn from(t: &Tree) -> Self {
        let nodes = t
            .nodes
            .iter()
            .map(|n| match *n {
                TreeNode::Leaf { value } => PackedNode {
                    threshold: value,
                    feature: LEAF,
                    left: 0,
                    right: 0,
                },
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => PackedNode {
                    threshold,
                    feature: feature as u32,
                    left: left as u32,
                    right: right as u32,
                },
            })
            .collect();
        PackedTree { nodes }
    }
}

impl PackedTree {
    /// Adds this tree's prediction for each row to `sums`.
    pub fn accumulate(&self, rows: &[Vec<f64>], sums: &mut [f64]) {
        for (xs, out) in rows.chunks(LANES).zip(sums.chunks_mut(LANES)) {
            let mut at = [0u32; LANES];
            loop {
                let mut moved = false;
                for (k, x) in xs.iter().enumerate() {
                    let n = self.nodes[at[k] as usize];
                    if n.feature != LEAF {
                        at[k] = if x[n.feature as usize] <= n.threshold { n.left } else { n.right };
                        moved = true;
                    }
                }
                if !moved {
                    break;
                }
            }
            for (k, o) in out.iter_mut().enumerate() {
                *o += self.nodes[at[k] as usize].threshold;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Impurity {
    /// Binary targets in `{0, 1}`.
    Gini,
    Variance,
}

impl Impurity {
    fn of(self, n: f64, sum: f64, sum_sq: f64) -> f64 {
        let mean = sum / n;
        match self {
            Impurity::Gini => 2.0 * mean * (1.0 - mean),
            Impurity::Variance => (sum_sq / n - mean * mean).max(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features examined per split; `None` examines all of them.
    pub max_features: Option<usize>,
}

// near-equal splits resolve to the earliest candidate
const TIE: f64 = 1e-9;

pub(crate) struct Grower<'a> {
    pub rows: &'a [&'a [f64]],
    pub targets: &'a [f64],
    pub params: GrowParams,
    pub impurity: Impurity,
    pub leaf_value: &'a dyn Fn(&[usize]) -> f64,
}

impl Grower<'_> {
    /// Grows on `idx` (repeats allowed, as in a bootstrap sample). Features
    /// are subsampled only when a stream is given.
    pub fn grow(&self, idx: Vec<usize>, rng: Option<&mut RandomStream>) -> Tree {
        let mut tree = Tree { nodes: Vec::new() };
        self.node(&mut tree, idx, 0, rng);
        tree
    }

    fn node(&self, tree: &mut Tree, idx: Vec<usize>, depth: usize, mut rng: Option<&mut RandomStream>) -> usize {
        let at = tree.nodes.len();
        tree.nodes.push(TreeNode::Leaf {
            value: (self.leaf_value)(&idx),
        });
        let can_split = idx.len() >= self.params.min_samples_split.max(2) && self.params.max_depth.is_none_or(|d| depth < d);
        if !can_split {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(&idx, rng.as_deref_mut()) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
        let left = self.node(tree, l, depth + 1, rng.as_deref_mut());
        let right = self.node(tree, r, depth + 1, rng);
        tree.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    fn best_split(&self, idx: &[usize], rng: Option<&mut RandomStream>) -> Option<(usize, f64)> {
        let n = idx.len() as f64;
        let (sum, sum_sq) = idx.iter().fold((0.0, 0.0), |(s, q), &i| {
            let y = self.targets[i];
            (s + y, q + y * y)
        });
        let parent = n * self.impurity.of(n, sum, sum_sq);
        if parent <= TIE {
            return None;
        }
        let dims = self.rows[idx[0]].len();
        let features: Vec<usize> = match (self.params.max_features, rng) {
            (Some(k), Some(r)) if k < dims => r.sample_indices(dims, k.max(1)),
            _ => (0..dims).collect(),
        };
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for &f in &features {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]));
            let (mut ls, mut lq) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let y = self.targets[order[k]];
                ls += y;
                lq += y * y;
                let (a, b) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                if a == b {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = n - nl;
                let cost = nl * self.impurity.of(nl, ls, lq) + nr * self.impurity.of(nr, sum - ls, sum_sq - lq);
                if best.is_none_or(|(c, _, _)| cost < c - TIE) {
                    // adjacent floats can round the midpoint up to `b`
                    let mid = a + (b - a) / 2.0;
                    best = Some((cost, f, if mid < b { mid } else { a }));
                }
            }
        }
        best.filter(|(c, _, _)| *c < parent - TIE).map(|(_, f, t)| (f, t))
    }
}
