use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{GrowParams, Grower, Impurity, Tree};
use crate::linalg::sigmoid;
use crate::rng::RandomStream;

fn targets(labels: &[bool]) -> Vec<f64> {
    labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect()
}

/// One Gini tree over all samples and all features.
pub fn fit_tree(rows: &[&[f64]], labels: &[bool], max_depth: Option<usize>, min_samples_split: usize) -> Tree {
    let y = targets(labels);
    let mean = |idx: &[usize]| idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
    Grower {
        rows,
        targets: &y,
        params: GrowParams {
            max_depth,
            min_samples_split,
            max_features: None,
        },
        impurity: Impurity::Gini,
        leaf_value: &mean,
    }
    .grow((0..rows.len()).collect(), None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// `None` uses `ceil(sqrt(features))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

/// Mean of per-tree leaf frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn fit(rows: &[&[f64]], labels: &[bool], p: &ForestParams, rng: &RandomStream) -> Self {
        let y = targets(labels);
        let n = rows.len();
        let dims = rows[0].len();
        let max_features = p.max_features.unwrap_or_else(|| (dims as f64).sqrt().ceil() as usize).clamp(1, dims);
        let trees = (0..p.trees)
            .into_par_iter()
            .map(|t| {
                let mut r = rng.split_index("tree", t);
                let idx: Vec<usize> = if p.bootstrap {
                    (0..n).map(|_| r.below(n)).collect()
                } else {
                    (0..n).collect()
                };
                let mean = |idx: &[usize]| idx.iter().map(|&i| y[i]).sum::<f64>() / idx.len() as f64;
                Grower {
                    rows,
                    targets: &y,
                    params: GrowParams {
                        max_depth: p.max_depth,
                        min_samples_split: p.min_samples_split,
                        max_features: Some(max_features),
                    },
                    impurity: Impurity::Gini,
                    leaf_value: &mean,
                }
                .grow(idx, Some(&mut r))
            })
            .collect();
        Forest { trees }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict(x)).sum::<f64>() / self.trees.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParams {
    pub rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

/// Gradient-boosted regression trees on the logistic loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boosted {
    /// Log-odds of the training prior.
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl Boosted {
    /// Each round fits a variance tree to the residuals `y − p` and sets
    /// leaf values by one Newton step, `Σr / Σp(1−p)`.
    pub fn fit(rows: &[&[f64]], labels: &[bool], p: &BoostParams) -> Self {
        let y = targets(labels);
        let pos = y.iter().sum::<f64>();
        let neg = y.len() as f64 - pos;
        let init = ((pos + 1e-12) / (neg + 1e-12)).ln();
        let mut f = vec![init; y.len()];
        let mut trees = Vec::with_capacity(p.rounds);
        for _ in 0..p.rounds {
            let prob: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
            let resid: Vec<f64> = y.iter().zip(&prob).map(|(a, b)| a - b).collect();
            let newton = |idx: &[usize]| {
                let num: f64 = idx.iter().map(|&i| resid[i]).sum();
                let den: f64 = idx.iter().map(|&i| prob[i] * (1.0 - prob[i])).sum();
                num / den.max(1e-12)
            };
            let tree = Grower {
                rows,
                targets: &resid,
                params: GrowParams {
                    max_depth: Some(p.max_depth),
                    min_samples_split: 2,
                    max_features: None,
                },
                impurity: Impurity::Variance,
                leaf_value: &newton,
            }
            .grow((0..rows.len()).collect(), None);
            for (fi, x) in f.iter_mut().zip(rows) {
                *fi += p.learning_rate * tree.predict(x);
            }
            trees.push(tree);
        }
        Boosted {
            init,
            learning_rate: p.learning_rate,
            trees,
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.init + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>())
    }
}
