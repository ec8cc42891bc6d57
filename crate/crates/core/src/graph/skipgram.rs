//! Skip-gram with negative sampling over node sequences.

use crate::error::{Error, Result};
use crate::linalg::{dot, neg_log_sigmoid, sigmoid};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkipGramParams {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
}

#[derive(Debug, Clone)]
pub struct SkipGramOutput {
    /// Input-side vectors, row-major `num_nodes × dim`.
    pub vectors: Vec<Vec<f64>>,
    /// Mean held-out loss after each epoch; empty if no held-out pairs.
    pub heldout_loss: Vec<f64>,
}

const HELDOUT_FRACTION: f64 = 0.05;
const MAX_HELDOUT_PAIRS: usize = 5000;
const MIN_LR_FRACTION: f64 = 1e-4;

/// Samples from the smoothed unigram distribution `count^0.75`.
pub(crate) struct NegativeTable {
    cdf: Vec<f64>,
}

impl NegativeTable {
    pub(crate) fn new(weights: &[f64]) -> Option<Self> {
        let mut acc = 0.0;
        let cdf: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w.powf(0.75);
                acc
            })
            .collect();
        (acc > 0.0).then_some(NegativeTable { cdf })
    }

    pub(crate) fn draw(&self, rng: &mut RandomStream) -> usize {
        let r = rng.uniform() * self.cdf.last().unwrap();
        self.cdf.partition_point(|&c| c <= r).min(self.cdf.len() - 1)
    }
}

/// Coefficients `g` such that `dL/d(input·target) = g` for the positive
/// target (first entry) and each negative.
pub(crate) fn sgns_coefficients(input: &[f64], context: &[f64], negatives: &[&[f64]]) -> (f64, Vec<f64>) {
    let g_pos = sigmoid(dot(input, context)) - 1.0;
    let g_neg = negatives.iter().map(|n| sigmoid(dot(input, n))).collect();
    (g_pos, g_neg)
}

/// `-ln σ(in·ctx) - Σ ln σ(-in·neg)`.
pub fn sgns_pair_loss(input: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    neg_log_sigmoid(dot(input, context)) + negatives.iter().map(|n| neg_log_sigmoid(-dot(input, n))).sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct PairGradient {
    pub input: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn sgns_pair_grad(input: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let (g_pos, g_neg) = sgns_coefficients(input, context, negatives);
    let mut d_in: Vec<f64> = context.iter().map(|c| g_pos * c).collect();
    for (g, n) in g_neg.iter().zip(negatives) {
        crate::linalg::axpy(*g, n, &mut d_in);
    }
    PairGradient {
        input: d_in,
        context: input.iter().map(|x| g_pos * x).collect(),
        negatives: g_neg.iter().map(|g| input.iter().map(|x| g * x).collect()).collect(),
    }
}

fn pairs_of(walk: &[usize], window: usize, mut f: impl FnMut(usize, usize)) {
    for (i, &center) in walk.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(walk.len());
        for (j, &ctx) in walk.iter().enumerate().take(hi).skip(lo) {
            if j != i {
                f(center, ctx);
            }
        }
    }
}

/// Trains SGNS on `walks` over `num_nodes` nodes. About 5% of the walks
/// are held out for loss tracking. Nodes that never appear as a center
/// keep their initialization.
pub fn skipgram_train(
    walks: &[Vec<usize>],
    num_nodes: usize,
    params: &SkipGramParams,
    rng: &RandomStream,
) -> Result<SkipGramOutput> {
    if walks.is_empty() || num_nodes == 0 {
        return Err(Error::EmptyWalkCorpus);
    }
    if params.window == 0 || params.negatives == 0 || params.dim == 0 {
        return Err(Error::InvalidParameter("skip-gram window, negatives and dim must be positive".into()));
    }
    let dim = params.dim;

    let mut heldout_mask = vec![false; walks.len()];
    if walks.len() >= 2 {
        let k = ((walks.len() as f64 * HELDOUT_FRACTION).ceil() as usize).max(1);
        for i in rng.split("heldout").sample_indices(walks.len(), k) {
            heldout_mask[i] = true;
        }
    }
    let train: Vec<&[usize]> = walks.iter().zip(&heldout_mask).filter(|(_, h)| !**h).map(|(w, _)| w.as_slice()).collect();

    let mut counts = vec![0.0; num_nodes];
    for w in &train {
        for &v in *w {
            counts[v] += 1.0;
        }
    }
    let table = NegativeTable::new(&counts).ok_or(Error::EmptyWalkCorpus)?;

    let mut init = rng.split("init");
    let mut input: Vec<f64> = (0..num_nodes * dim).map(|_| init.uniform_range(-0.5, 0.5) / dim as f64).collect();
    let mut output = vec![0.0; num_nodes * dim];

    let mut heldout_pairs = Vec::new();
    for (w, _) in walks.iter().zip(&heldout_mask).filter(|(_, h)| **h) {
        pairs_of(w, params.window, |c, o| heldout_pairs.push((c, o)));
    }
    heldout_pairs.truncate(MAX_HELDOUT_PAIRS);
    let mut neg_rng = rng.split("heldout-negatives");
    let heldout: Vec<(usize, usize, Vec<usize>)> = heldout_pairs
        .into_iter()
        .map(|(c, o)| (c, o, (0..params.negatives).map(|_| table.draw(&mut neg_rng)).collect()))
        .collect();

    let mut pairs_per_epoch = 0usize;
    for w in &train {
        pairs_of(w, params.window, |_, _| pairs_per_epoch += 1);
    }
    let total_steps = (pairs_per_epoch * params.epochs).max(1) as f64;

    let mut step = 0usize;
    let mut draws = rng.split("negatives");
    let mut grad_in = vec![0.0; dim];
    let mut heldout_loss = Vec::with_capacity(params.epochs);
    for _ in 0..params.epochs {
        for w in &train {
            pairs_of(w, params.window, |center, ctx| {
                let lr = params.lr * (1.0 - step as f64 / total_steps).max(MIN_LR_FRACTION);
                step += 1;
                grad_in.iter_mut().for_each(|g| *g = 0.0);
                let cin = center * dim;
                for d in 0..=params.negatives {
                    let target = if d == 0 {
                        ctx
                    } else {
                        let t = table.draw(&mut draws);
                        if t == ctx {
                            continue;
                        }
                        t
                    };
                    let tout = target * dim;
                    let score = dot(&input[cin..cin + dim], &output[tout..tout + dim]);
                    let g = if d == 0 { sigmoid(score) - 1.0 } else { sigmoid(score) };
                    for k in 0..dim {
                        grad_in[k] += g * output[tout + k];
                        output[tout + k] -= lr * g * input[cin + k];
                    }
                }
                for k in 0..dim {
                    input[cin + k] -= lr * grad_in[k];
                }
            });
        }
        if !heldout.is_empty() {
            let total: f64 = heldout
                .iter()
                .map(|(c, o, negs)| {
                    let row = |t: &Vec<f64>, i: usize| t[i * dim..(i + 1) * dim].to_vec();
                    let neg_rows: Vec<Vec<f64>> = negs.iter().map(|&n| row(&output, n)).collect();
                    let neg_refs: Vec<&[f64]> = neg_rows.iter().map(|r| r.as_slice()).collect();
                    sgns_pair_loss(&row(&input, *c), &row(&output, *o), &neg_refs)
                })
                .sum();
            heldout_loss.push(total / heldout.len() as f64);
        }
    }

    Ok(SkipGramOutput {
        vectors: input.chunks(dim).map(|c| c.to_vec()).collect(),
        heldout_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn gradient_matches_finite_differences() {
        let mut r = seeded_rng(5).split("fd");
        let mut v = |n: usize| (0..n).map(|_| r.uniform_range(-1.0, 1.0)).collect::<Vec<f64>>();
        let (input, ctx, n1, n2) = (v(4), v(4), v(4), v(4));
        let negs = [n1.as_slice(), n2.as_slice()];
        let g = sgns_pair_grad(&input, &ctx, &negs);
        let h = 1e-5;
        for k in 0..4 {
            let mut p = input.clone();
            let mut m = input.clone();
            p[k] += h;
            m[k] -= h;
            let fd = (sgns_pair_loss(&p, &ctx, &negs) - sgns_pair_loss(&m, &ctx, &negs)) / (2.0 * h);
            assert!((fd - g.input[k]).abs() <= 1e-4 * fd.abs().max(1e-3));
        }
    }

    #[test]
    fn negative_table_follows_weights() {
        let t = NegativeTable::new(&[0.0, 1.0, 0.0, 16.0]).unwrap();
        let mut r = seeded_rng(1).split("n");
        let mut hits = [0usize; 4];
        for _ in 0..20_000 {
            hits[t.draw(&mut r)] += 1;
        }
        assert_eq!((hits[0], hits[2]), (0, 0));
        // 16^0.75 = 8
        let ratio = hits[3] as f64 / hits[1] as f64;
        assert!((ratio - 8.0).abs() < 0.6, "{ratio}");
        assert!(NegativeTable::new(&[0.0, 0.0]).is_none());
    }

    #[test]
    fn empty_corpus_rejected() {
        let p = SkipGramParams { dim: 4, window: 2, negatives: 2, epochs: 1, lr: 0.025 };
        assert!(matches!(skipgram_train(&[], 3, &p, &seeded_rng(1)), Err(Error::EmptyWalkCorpus)));
    }

    #[test]
    fn single_node_keeps_a_vector() {
        let p = SkipGramParams { dim: 4, window: 2, negatives: 2, epochs: 2, lr: 0.025 };
        let out = skipgram_train(&[vec![0], vec![0]], 1, &p, &seeded_rng(1)).unwrap();
        assert_eq!(out.vectors.len(), 1);
        assert!(out.vectors[0].iter().all(|x| x.is_finite()));
    }

    #[test]
    fn heldout_loss_decreases() {
        let adj = vec![vec![1, 2], vec![0, 2], vec![0, 1], vec![4, 5], vec![3, 5], vec![3, 4]];
        let walks = super::super::walks::sample_walks(&adj, 40, 20, 1.0, 1.0, &seeded_rng(4));
        let p = SkipGramParams { dim: 8, window: 3, negatives: 5, epochs: 5, lr: 0.025 };
        let out = skipgram_train(&walks.walks, 6, &p, &seeded_rng(4)).unwrap();
        assert_eq!(out.heldout_loss.len(), 5);
        assert!(out.heldout_loss[4] < out.heldout_loss[0], "{:?}", out.heldout_loss);
    }
}
