//! Semantic method embeddings from AST path contexts, trained on method
//! name prediction.

mod code2seq;
mod code2vec;
mod planted;
mod vocab;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use code2seq::{code2seq_encode_train, Code2Seq, SeqContext};
pub use code2vec::{code2vec_train, Code2Vec, FlatContext};
pub use planted::planted_corpus;
pub use vocab::{build_vocab, target_name, Vocabulary, PAD, UNK};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::model::{EmbeddingVector, MethodId};
use crate::paths::PathSet;
use crate::rng::RandomStream;

const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Encoder {
    Code2Vec,
    Code2Seq,
}

impl Encoder {
    pub const ALL: [Encoder; 2] = [Encoder::Code2Vec, Encoder::Code2Seq];

    pub fn as_str(self) -> &'static str {
        match self {
            Encoder::Code2Vec => "code2vec",
            Encoder::Code2Seq => "code2seq",
        }
    }
}

impl fmt::Display for Encoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoder {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Encoder::ALL
            .into_iter()
            .find(|e| e.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown code encoder `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeEmbedding {
    pub encoder: Encoder,
    pub dim: usize,
    pub vectors: BTreeMap<MethodId, EmbeddingVector>,
    /// Methods without contexts; their vectors are zero.
    pub no_contexts: Vec<MethodId>,
    /// Mean held-out cross-entropy after each epoch.
    pub heldout_loss: Vec<f64>,
    /// Top-1 name accuracy on the held-out methods after training.
    pub heldout_accuracy: Option<f64>,
    pub meta: BTreeMap<String, String>,
}

/// Attention weights and pooled vector for one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub alphas: Vec<f64>,
    pub vector: DVector<f64>,
}

/// Attention pooling plus a softmax classifier over method names.
#[derive(Debug, Clone, PartialEq)]
pub struct Head {
    pub attn: DVector<f64>,
    /// One row per target name.
    pub names: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct HeadGrad {
    pub attn: DVector<f64>,
    pub names: DMatrix<f64>,
}

impl Head {
    fn new(dim: usize, targets: usize, rng: &mut RandomStream) -> Self {
        let a = (6.0 / (dim + 1) as f64).sqrt();
        let n = (6.0 / (dim + targets) as f64).sqrt();
        Head {
            attn: DVector::from_fn(dim, |_, _| rng.uniform_range(-a, a)),
            names: DMatrix::from_fn(targets, dim, |_, _| rng.uniform_range(-n, n)),
        }
    }

    pub fn pool(&self, cs: &[DVector<f64>]) -> Pooled {
        let mut alphas: Vec<f64> = cs.iter().map(|c| self.attn.dot(c)).collect();
        crate::linalg::softmax(&mut alphas);
        let mut vector = DVector::zeros(self.attn.len());
        for (a, c) in alphas.iter().zip(cs) {
            vector.axpy(*a, c, 1.0);
        }
        Pooled { alphas, vector }
    }

    fn probabilities(&self, v: &DVector<f64>) -> Vec<f64> {
        let mut p: Vec<f64> = (&self.names * v).iter().copied().collect();
        crate::linalg::softmax(&mut p);
        p
    }

    fn loss(&self, cs: &[DVector<f64>], target: usize) -> f64 {
        let pooled = self.pool(cs);
        -self.probabilities(&pooled.vector)[target].max(f64::MIN_POSITIVE).ln()
    }

    /// Loss, gradient with respect to each context vector, and head grads.
    fn loss_grad(&self, cs: &[DVector<f64>], target: usize) -> (f64, Vec<DVector<f64>>, HeadGrad) {
        let pooled = self.pool(cs);
        let v = &pooled.vector;
        let mut dlogits = DVector::from_vec(self.probabilities(v));
        let loss = -dlogits[target].max(f64::MIN_POSITIVE).ln();
        dlogits[target] -= 1.0;
        let names = &dlogits * v.transpose();
        let dv = self.names.transpose() * &dlogits;

        let dalpha: Vec<f64> = cs.iter().map(|c| dv.dot(c)).collect();
        let mean: f64 = pooled.alphas.iter().zip(&dalpha).map(|(a, d)| a * d).sum();
        let mut attn = DVector::zeros(self.attn.len());
        let dcs = cs
            .iter()
            .zip(pooled.alphas.iter().zip(&dalpha))
            .map(|(c, (a, da))| {
                let ds = a * (da - mean);
                attn.axpy(ds, c, 1.0);
                &dv * *a + &self.attn * ds
            })
            .collect();
        (loss, dcs, HeadGrad { attn, names })
    }

    fn apply(&mut self, g: &HeadGrad, lr: f64) {
        self.attn.axpy(-lr, &g.attn, 1.0);
        self.names -= &g.names * lr;
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        self.attn.iter_mut().chain(self.names.iter_mut()).collect()
    }
}

/// One training example: a method's indexed contexts and its name label.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<C> {
    pub method: MethodId,
    pub contexts: Vec<C>,
    pub target: usize,
}

/// Shared interface of the two context encoders.
pub trait PathEncoder: Clone + Send + Sync {
    type Ctx: Send + Sync;
    type Grad;

    fn head(&self) -> &Head;
    fn encode(&self, ctx: &Self::Ctx) -> DVector<f64>;
    fn loss_grad(&self, sample: &Sample<Self::Ctx>) -> (f64, Self::Grad);
    fn apply(&mut self, g: &Self::Grad, lr: f64);
    /// Every trainable scalar, in a fixed order.
    fn params_mut(&mut self) -> Vec<&mut f64>;

    fn pool(&self, contexts: &[Self::Ctx]) -> Pooled {
        let cs: Vec<DVector<f64>> = contexts.iter().map(|c| self.encode(c)).collect();
        self.head().pool(&cs)
    }

    fn loss(&self, sample: &Sample<Self::Ctx>) -> f64 {
        let cs: Vec<DVector<f64>> = sample.contexts.iter().map(|c| self.encode(c)).collect();
        self.head().loss(&cs, sample.target)
    }

    fn predict(&self, contexts: &[Self::Ctx]) -> usize {
        let p = self.head().probabilities(&self.pool(contexts).vector);
        (0..p.len()).fold(0, |best, i| if p[i] > p[best] { i } else { best })
    }
}

fn heldout_mean<E: PathEncoder>(model: &E, heldout: &[&Sample<E::Ctx>]) -> f64 {
    heldout.iter().map(|s| model.loss(s)).sum::<f64>() / heldout.len() as f64
}

/// Per-sample SGD with linear learning-rate decay.
fn fit<E: PathEncoder>(
    model: &mut E,
    train: &[&Sample<E::Ctx>],
    heldout: &[&Sample<E::Ctx>],
    epochs: usize,
    lr: f64,
    rng: &RandomStream,
) -> Vec<f64> {
    let total = (epochs * train.len()).max(1) as f64;
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut shuffle = rng.split("order");
    let mut losses = Vec::with_capacity(epochs);
    let mut step = 0usize;
    for _ in 0..epochs {
        shuffle.shuffle(&mut order);
        for &i in &order {
            let rate = lr * (1.0 - step as f64 / total).max(MIN_LR_FRACTION);
            step += 1;
            let (_, g) = model.loss_grad(train[i]);
            model.apply(&g, rate);
        }
        if !heldout.is_empty() {
            losses.push(heldout_mean(model, heldout));
        }
    }
    losses
}

/// Splits, trains, and embeds every method in `pathsets`.
#[allow(clippy::too_many_arguments)]
fn train_and_embed<E: PathEncoder>(
    encoder: Encoder,
    mut model: E,
    pathsets: &[PathSet],
    index: impl Fn(&PathSet) -> Vec<E::Ctx> + Sync,
    vocab: &Vocabulary,
    cfg: &Config,
    epochs: usize,
    rng: &RandomStream,
) -> Result<CodeEmbedding> {
    let samples: Vec<Sample<E::Ctx>> = pathsets
        .par_iter()
        .map(|set| Sample {
            method: set.method.clone(),
            contexts: index(set),
            target: vocab.target(set.method.name()),
        })
        .collect();
    let live: Vec<usize> = (0..samples.len()).filter(|&i| !samples[i].contexts.is_empty()).collect();
    let mut is_heldout = vec![false; samples.len()];
    if live.len() >= 2 && cfg.code_holdout > 0.0 {
        let k = ((live.len() as f64 * cfg.code_holdout).ceil() as usize).clamp(1, live.len() - 1);
        for i in rng.split("heldout").sample_indices(live.len(), k) {
            is_heldout[live[i]] = true;
        }
    }
    let train: Vec<&Sample<E::Ctx>> = live.iter().filter(|&&i| !is_heldout[i]).map(|&i| &samples[i]).collect();
    let heldout: Vec<&Sample<E::Ctx>> = live.iter().filter(|&&i| is_heldout[i]).map(|&i| &samples[i]).collect();

    let heldout_loss = fit(&mut model, &train, &heldout, epochs, cfg.code_lr, &rng.split("fit"));
    let heldout_accuracy = (!heldout.is_empty()).then(|| {
        let hits = heldout.iter().filter(|s| model.predict(&s.contexts) == s.target).count();
        hits as f64 / heldout.len() as f64
    });

    let dim = cfg.code_dim;
    let mut vectors = BTreeMap::new();
    let mut no_contexts = Vec::new();
    let pooled: Vec<Option<DVector<f64>>> = samples
        .par_iter()
        .map(|s| (!s.contexts.is_empty()).then(|| model.pool(&s.contexts).vector))
        .collect();
    for (s, v) in samples.iter().zip(pooled) {
        let v = match v {
            Some(v) => EmbeddingVector::new(v.iter().copied().collect())?,
            None => {
                no_contexts.push(s.method.clone());
                EmbeddingVector::zeros(dim)
            }
        };
        vectors.insert(s.method.clone(), v);
    }
    if !no_contexts.is_empty() {
        log::warn!("{} method(s) without path contexts get zero {encoder} vectors", no_contexts.len());
    }
    let meta = [
        ("dim", dim.to_string()),
        ("epochs", epochs.to_string()),
        ("train_methods", train.len().to_string()),
        ("heldout_methods", heldout.len().to_string()),
        ("lr", cfg.code_lr.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(CodeEmbedding {
        encoder,
        dim,
        vectors,
        no_contexts,
        heldout_loss,
        heldout_accuracy,
        meta,
    })
}

pub fn embed_code(encoder: Encoder, pathsets: &[PathSet], vocab: &Vocabulary, cfg: &Config, rng: &RandomStream) -> Result<CodeEmbedding> {
    let rng = rng.split(encoder.as_str());
    match encoder {
        Encoder::Code2Vec => code2vec_train(pathsets, vocab, cfg, &rng),
        Encoder::Code2Seq => code2seq_encode_train(pathsets, vocab, cfg, &rng),
    }
}

/// Central-difference check of `loss_grad`; returns the worst relative
/// error, with `floor` guarding near-zero components.
pub fn max_gradient_error<E: PathEncoder>(model: &E, sample: &Sample<E::Ctx>, h: f64, floor: f64) -> f64 {
    let (_, g) = model.loss_grad(sample);
    let mut analytic = model.clone();
    for p in analytic.params_mut() {
        *p = 0.0;
    }
    analytic.apply(&g, -1.0);
    let analytic: Vec<f64> = analytic.params_mut().into_iter().map(|p| *p).collect();
    let count = analytic.len();
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let mut plus = model.clone();
        *plus.params_mut()[k] += h;
        let mut minus = model.clone();
        *minus.params_mut()[k] -= h;
        let fd = (plus.loss(sample) - minus.loss(sample)) / (2.0 * h);
        let a = analytic[k];
        worst = worst.max((fd - a).abs() / fd.abs().max(a.abs()).max(floor));
    }
    worst
}


#[cfg(test)]
mod planted_tests {
    use super::*;
    use crate::rng::seeded_rng;

    fn small_cfg() -> Config {
        let mut cfg = Config::default();
        cfg.code_dim = 32;
        cfg.code2vec_epochs = 20;
        cfg.code2seq_epochs = 20;
        cfg
    }

    #[test]
    fn planted_signal_is_learned() {
        let sets = planted_corpus(12, 10, 4, &seeded_rng(1));
        let vocab = build_vocab(&sets, 1, 5).unwrap();
        for enc in Encoder::ALL {
            let e = embed_code(enc, &sets, &vocab, &small_cfg(), &seeded_rng(2)).unwrap();
            assert!(e.heldout_accuracy.unwrap() >= 0.9, "{enc}: {:?}", e.heldout_accuracy);
            assert!(e.heldout_loss.last() < e.heldout_loss.first(), "{enc}");
            assert_eq!(e.vectors.len(), sets.len());
        }
    }

    #[test]
    fn empty_methods_flagged_and_reproducible() {
        let mut sets = planted_corpus(3, 4, 2, &seeded_rng(1));
        sets[0].contexts.clear();
        let vocab = build_vocab(&sets, 1, 5).unwrap();
        let mut cfg = small_cfg();
        cfg.code2seq_epochs = 2;
        for enc in Encoder::ALL {
            let a = embed_code(enc, &sets, &vocab, &cfg, &seeded_rng(3)).unwrap();
            assert_eq!(a.no_contexts, vec![sets[0].method.clone()]);
            assert!(a.vectors[&sets[0].method].as_slice().iter().all(|v| *v == 0.0));
            assert_eq!(a, embed_code(enc, &sets, &vocab, &cfg, &seeded_rng(3)).unwrap());
        }
    }
}
