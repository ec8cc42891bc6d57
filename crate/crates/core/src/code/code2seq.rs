use nalgebra::{DMatrix, DVector};

use super::{train_and_embed, CodeEmbedding, Encoder, Head, HeadGrad, PathEncoder, Sample, Vocabulary};
use crate::config::Config;
use crate::error::Result;
use crate::linalg::sigmoid;
use crate::paths::PathSet;
use crate::rng::RandomStream;

/// A context as subtoken lists for both endpoints and the node sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqContext {
    pub start: Vec<usize>,
    pub nodes: Vec<usize>,
    pub end: Vec<usize>,
}

/// Gated recurrent unit; `h0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gru {
    pub wz: DMatrix<f64>,
    pub uz: DMatrix<f64>,
    pub bz: DVector<f64>,
    pub wr: DMatrix<f64>,
    pub ur: DMatrix<f64>,
    pub br: DVector<f64>,
    pub wh: DMatrix<f64>,
    pub uh: DMatrix<f64>,
    pub bh: DVector<f64>,
}

struct GruStep {
    h_prev: DVector<f64>,
    z: DVector<f64>,
    r: DVector<f64>,
    cand: DVector<f64>,
}

impl Gru {
    fn new(dim: usize, r: &mut RandomStream) -> Self {
        let b = (6.0 / (2 * dim) as f64).sqrt();
        let mut m = || DMatrix::from_fn(dim, dim, |_, _| r.uniform_range(-b, b));
        Gru {
            wz: m(),
            uz: m(),
            wr: m(),
            ur: m(),
            wh: m(),
            uh: m(),
            bz: DVector::zeros(dim),
            br: DVector::zeros(dim),
            bh: DVector::zeros(dim),
        }
    }

    fn run(&self, xs: &[DVector<f64>]) -> (DVector<f64>, Vec<GruStep>) {
        let mut h = DVector::zeros(self.bz.len());
        let mut steps = Vec::with_capacity(xs.len());
        for x in xs {
            let z = (&self.wz * x + &self.uz * &h + &self.bz).map(sigmoid);
            let r = (&self.wr * x + &self.ur * &h + &self.br).map(sigmoid);
            let cand = (&self.wh * x + &self.uh * r.component_mul(&h) + &self.bh).map(f64::tanh);
            let next = h.component_mul(&z.map(|v| 1.0 - v)) + z.component_mul(&cand);
            steps.push(GruStep { h_prev: h, z, r, cand });
            h = next;
        }
        (h, steps)
    }

    fn zeros_like(&self) -> Gru {
        let d = self.bz.len();
        Gru {
            wz: DMatrix::zeros(d, d),
            uz: DMatrix::zeros(d, d),
            wr: DMatrix::zeros(d, d),
            ur: DMatrix::zeros(d, d),
            wh: DMatrix::zeros(d, d),
            uh: DMatrix::zeros(d, d),
            bz: DVector::zeros(d),
            br: DVector::zeros(d),
            bh: DVector::zeros(d),
        }
    }

    /// Backpropagates `dh` from the final state; accumulates into `g` and
    /// returns the gradient for each input.
    fn backward(&self, xs: &[DVector<f64>], steps: &[GruStep], mut dh: DVector<f64>, g: &mut Gru) -> Vec<DVector<f64>> {
        let mut dxs = vec![DVector::zeros(0); xs.len()];
        for t in (0..xs.len()).rev() {
            let (x, s) = (&xs[t], &steps[t]);
            let dcand = dh.component_mul(&s.z);
            let dz = dh.component_mul(&(&s.cand - &s.h_prev));
            let mut dh_prev = dh.component_mul(&s.z.map(|v| 1.0 - v));

            let ah = dcand.component_mul(&s.cand.map(|v| 1.0 - v * v));
            let rh = s.r.component_mul(&s.h_prev);
            g.wh += &ah * x.transpose();
            g.uh += &ah * rh.transpose();
            g.bh += &ah;
            let drh = self.uh.transpose() * &ah;
            let dr = drh.component_mul(&s.h_prev);
            dh_prev += drh.component_mul(&s.r);

            let az = dz.component_mul(&s.z.map(|v| v * (1.0 - v)));
            g.wz += &az * x.transpose();
            g.uz += &az * s.h_prev.transpose();
            g.bz += &az;
            dh_prev += self.uz.transpose() * &az;

            let ar = dr.component_mul(&s.r.map(|v| v * (1.0 - v)));
            g.wr += &ar * x.transpose();
            g.ur += &ar * s.h_prev.transpose();
            g.br += &ar;
            dh_prev += self.ur.transpose() * &ar;

            dxs[t] = self.wh.transpose() * ah + self.wz.transpose() * az + self.wr.transpose() * ar;
            dh = dh_prev;
        }
        dxs
    }

    fn axpy(&mut self, lr: f64, g: &Gru) {
        for (p, d) in self.matrices_mut().into_iter().zip(g.matrices()) {
            *p -= d * lr;
        }
        self.bz.axpy(-lr, &g.bz, 1.0);
        self.br.axpy(-lr, &g.br, 1.0);
        self.bh.axpy(-lr, &g.bh, 1.0);
    }

    fn matrices(&self) -> [&DMatrix<f64>; 6] {
        [&self.wz, &self.uz, &self.wr, &self.ur, &self.wh, &self.uh]
    }

    fn matrices_mut(&mut self) -> [&mut DMatrix<f64>; 6] {
        [&mut self.wz, &mut self.uz, &mut self.wr, &mut self.ur, &mut self.wh, &mut self.uh]
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        let Gru { wz, uz, bz, wr, ur, br, wh, uh, bh } = self;
        [wz, uz, wr, ur, wh, uh]
            .into_iter()
            .flat_map(|m| m.iter_mut())
            .chain([bz, br, bh].into_iter().flat_map(|v| v.iter_mut()))
            .collect()
    }
}

/// Tokens are sums of subtoken vectors, the path is the final GRU state
/// over node vectors, and `c = tanh(FC·[path; start; end])`.
#[derive(Debug, Clone, PartialEq)]
pub struct Code2Seq {
    pub subtokens: DMatrix<f64>,
    pub nodes: DMatrix<f64>,
    pub gru: Gru,
    pub fc: DMatrix<f64>,
    pub head: Head,
}

pub struct Code2SeqGrad {
    subtokens: Vec<(usize, DVector<f64>)>,
    nodes: Vec<(usize, DVector<f64>)>,
    gru: Gru,
    fc: DMatrix<f64>,
    head: HeadGrad,
}

impl Code2Seq {
    pub fn new(n_subtokens: usize, n_nodes: usize, n_targets: usize, dim: usize, rng: &RandomStream) -> Self {
        let mut r = rng.split("init");
        let e = (6.0 / (dim + 1) as f64).sqrt();
        // summed subtokens start small so the path state is not drowned out
        let subtokens = DMatrix::from_fn(dim, n_subtokens, |_, _| r.uniform_range(-0.1, 0.1));
        let nodes = DMatrix::from_fn(dim, n_nodes, |_, _| r.uniform_range(-e, e));
        let gru = Gru::new(dim, &mut r);
        let b = (6.0 / (4 * dim) as f64).sqrt();
        let fc = DMatrix::from_fn(dim, 3 * dim, |_, _| r.uniform_range(-b, b));
        let head = Head::new(dim, n_targets, &mut r);
        Code2Seq { subtokens, nodes, gru, fc, head }
    }

    fn token(&self, subs: &[usize]) -> DVector<f64> {
        let mut v = DVector::zeros(self.fc.nrows());
        for &s in subs {
            v += self.subtokens.column(s);
        }
        v
    }

    fn node_inputs(&self, ctx: &SeqContext) -> Vec<DVector<f64>> {
        ctx.nodes.iter().map(|&n| self.nodes.column(n).into_owned()).collect()
    }

    fn input(&self, path: &DVector<f64>, ctx: &SeqContext) -> DVector<f64> {
        let d = self.fc.nrows();
        let mut x = DVector::zeros(3 * d);
        x.rows_mut(0, d).copy_from(path);
        x.rows_mut(d, d).copy_from(&self.token(&ctx.start));
        x.rows_mut(2 * d, d).copy_from(&self.token(&ctx.end));
        x
    }

    /// Final recurrent state for a context's node sequence.
    pub fn path_embedding(&self, ctx: &SeqContext) -> DVector<f64> {
        self.gru.run(&self.node_inputs(ctx)).0
    }
}

impl PathEncoder for Code2Seq {
    type Ctx = SeqContext;
    type Grad = Code2SeqGrad;

    fn head(&self) -> &Head {
        &self.head
    }

    fn encode(&self, ctx: &SeqContext) -> DVector<f64> {
        let path = self.path_embedding(ctx);
        (&self.fc * self.input(&path, ctx)).map(f64::tanh)
    }

    fn loss_grad(&self, sample: &Sample<SeqContext>) -> (f64, Code2SeqGrad) {
        let d = self.fc.nrows();
        let forward: Vec<_> = sample
            .contexts
            .iter()
            .map(|ctx| {
                let xs = self.node_inputs(ctx);
                let (path, steps) = self.gru.run(&xs);
                let x = self.input(&path, ctx);
                let c = (&self.fc * &x).map(f64::tanh);
                (xs, steps, x, c)
            })
            .collect();
        let cs: Vec<DVector<f64>> = forward.iter().map(|f| f.3.clone()).collect();
        let (loss, dcs, head) = self.head.loss_grad(&cs, sample.target);
        let mut g = Code2SeqGrad {
            subtokens: Vec::new(),
            nodes: Vec::new(),
            gru: self.gru.zeros_like(),
            fc: DMatrix::zeros(d, 3 * d),
            head,
        };
        for ((ctx, (xs, steps, x, c)), dc) in sample.contexts.iter().zip(&forward).zip(&dcs) {
            let dz = dc.component_mul(&c.map(|v| 1.0 - v * v));
            g.fc += &dz * x.transpose();
            let dx = self.fc.transpose() * dz;
            let dstart = dx.rows(d, d).into_owned();
            let dend = dx.rows(2 * d, d).into_owned();
            g.subtokens.extend(ctx.start.iter().map(|&s| (s, dstart.clone())));
            g.subtokens.extend(ctx.end.iter().map(|&s| (s, dend.clone())));
            let dnodes = self.gru.backward(xs, steps, dx.rows(0, d).into_owned(), &mut g.gru);
            g.nodes.extend(ctx.nodes.iter().copied().zip(dnodes));
        }
        (loss, g)
    }

    fn apply(&mut self, g: &Code2SeqGrad, lr: f64) {
        for (i, v) in &g.subtokens {
            self.subtokens.column_mut(*i).axpy(-lr, v, 1.0);
        }
        for (i, v) in &g.nodes {
            self.nodes.column_mut(*i).axpy(-lr, v, 1.0);
        }
        self.gru.axpy(lr, &g.gru);
        self.fc -= &g.fc * lr;
        self.head.apply(&g.head, lr);
    }

    fn params_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = self.subtokens.iter_mut().chain(self.nodes.iter_mut()).collect();
        out.extend(self.gru.params_mut());
        out.extend(self.fc.iter_mut());
        out.extend(self.head.params_mut());
        out
    }
}

pub(crate) fn seq_contexts(set: &PathSet, vocab: &Vocabulary) -> Vec<SeqContext> {
    set.contexts
        .iter()
        .map(|c| SeqContext {
            start: vocab.subtokens(&c.start_token),
            nodes: c.node_types.iter().map(|n| vocab.node(&n.to_string())).collect(),
            end: vocab.subtokens(&c.end_token),
        })
        .collect()
}

pub fn code2seq_encode_train(pathsets: &[PathSet], vocab: &Vocabulary, cfg: &Config, rng: &RandomStream) -> Result<CodeEmbedding> {
    let model = Code2Seq::new(
        vocab.subtoken_to_index.len(),
        vocab.node_type_to_index.len(),
        vocab.target_name_to_index.len(),
        cfg.code_dim,
        rng,
    );
    train_and_embed(
        Encoder::Code2Seq,
        model,
        pathsets,
        |s| seq_contexts(s, vocab),
        vocab,
        cfg,
        cfg.code2seq_epochs,
        rng,
    )
}
