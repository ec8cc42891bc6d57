use nalgebra::{DMatrix, DVector};

use super::{train_and_embed, CodeEmbedding, Encoder, Head, HeadGrad, PathEncoder, Sample, Vocabulary};
use crate::config::Config;
use crate::error::Result;
use crate::paths::PathSet;
use crate::rng::RandomStream;

/// A context as three symbols: start token, whole path, end token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatContext {
    pub start: usize,
    pub path: usize,
    pub end: usize,
}

/// `c = tanh(W·[e_start; e_path; e_end])`, attention-pooled.
#[derive(Debug, Clone, PartialEq)]
pub struct Code2Vec {
    /// Token embeddings, one column per token.
    pub tokens: DMatrix<f64>,
    /// Path embeddings, one column per path symbol.
    pub paths: DMatrix<f64>,
    pub w: DMatrix<f64>,
    pub head: Head,
}

pub struct Code2VecGrad {
    tokens: Vec<(usize, DVector<f64>)>,
    paths: Vec<(usize, DVector<f64>)>,
    w: DMatrix<f64>,
    head: HeadGrad,
}

impl Code2Vec {
    pub fn new(n_tokens: usize, n_paths: usize, n_targets: usize, dim: usize, rng: &RandomStream) -> Self {
        let mut r = rng.split("init");
        let e = (6.0 / (dim + 1) as f64).sqrt();
        let tokens = DMatrix::from_fn(dim, n_tokens, |_, _| r.uniform_range(-e, e));
        let paths = DMatrix::from_fn(dim, n_paths, |_, _| r.uniform_range(-e, e));
        let b = (6.0 / (4 * dim) as f64).sqrt();
        let w = DMatrix::from_fn(dim, 3 * dim, |_, _| r.uniform_range(-b, b));
        let head = Head::new(dim, n_targets, &mut r);
        Code2Vec { tokens, paths, w, head }
    }

    fn input(&self, c: &FlatContext) -> DVector<f64> {
        let d = self.w.nrows();
        let mut x = DVector::zeros(3 * d);
        x.rows_mut(0, d).copy_from(&self.tokens.column(c.start));
        x.rows_mut(d, d).copy_from(&self.paths.column(c.path));
        x.rows_mut(2 * d, d).copy_from(&self.tokens.column(c.end));
        x
    }
}

impl PathEncoder for Code2Vec {
    type Ctx = FlatContext;
    type Grad = Code2VecGrad;

    fn head(&self) -> &Head {
        &self.head
    }

    fn encode(&self, ctx: &FlatContext) -> DVector<f64> {
        (&self.w * self.input(ctx)).map(f64::tanh)
    }

    fn loss_grad(&self, sample: &Sample<FlatContext>) -> (f64, Code2VecGrad) {
        let d = self.w.nrows();
        let inputs: Vec<DVector<f64>> = sample.contexts.iter().map(|c| self.input(c)).collect();
        let cs: Vec<DVector<f64>> = inputs.iter().map(|x| (&self.w * x).map(f64::tanh)).collect();
        let (loss, dcs, head) = self.head.loss_grad(&cs, sample.target);
        let mut g = Code2VecGrad {
            tokens: Vec::new(),
            paths: Vec::new(),
            w: DMatrix::zeros(d, 3 * d),
            head,
        };
        for ((ctx, x), (c, dc)) in sample.contexts.iter().zip(&inputs).zip(cs.iter().zip(&dcs)) {
            let dz = dc.component_mul(&c.map(|v| 1.0 - v * v));
            g.w += &dz * x.transpose();
            let dx = self.w.transpose() * dz;
            g.tokens.push((ctx.start, dx.rows(0, d).into_owned()));
            g.paths.push((ctx.path, dx.rows(d, d).into_owned()));
            g.tokens.push((ctx.end, dx.rows(2 * d, d).into_owned()));
        }
        (loss, g)
    }

    fn apply(&mut self, g: &Code2VecGrad, lr: f64) {
        for (i, v) in &g.tokens {
            self.tokens.column_mut(*i).axpy(-lr, v, 1.0);
        }
        for (i, v) in &g.paths {
            self.paths.column_mut(*i).axpy(-lr, v, 1.0);
        }
        self.w -= &g.w * lr;
        self.head.apply(&g.head, lr);
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = self.tokens.iter_mut().chain(self.paths.iter_mut()).chain(self.w.iter_mut()).collect();
        out.extend(self.head.params_mut());
        out
    }
}

pub(crate) fn flat_contexts(set: &PathSet, vocab: &Vocabulary) -> Vec<FlatContext> {
    set.contexts
        .iter()
        .map(|c| FlatContext {
            start: vocab.token(&c.start_token),
            path: vocab.path(&c.path_symbol()),
            end: vocab.token(&c.end_token),
        })
        .collect()
}

pub fn code2vec_train(pathsets: &[PathSet], vocab: &Vocabulary, cfg: &Config, rng: &RandomStream) -> Result<CodeEmbedding> {
    let model = Code2Vec::new(
        vocab.token_to_index.len(),
        vocab.path_to_index.len(),
        vocab.target_name_to_index.len(),
        cfg.code_dim,
        rng,
    );
    train_and_embed(
        Encoder::Code2Vec,
        model,
        pathsets,
        |s| flat_contexts(s, vocab),
        vocab,
        cfg,
        cfg.code2vec_epochs,
        rng,
    )
}
