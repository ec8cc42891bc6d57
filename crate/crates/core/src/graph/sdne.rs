//! SDNE: a sigmoid autoencoder over adjacency rows with a Laplacian
//! penalty pulling linked nodes' codes together.

use nalgebra::{DMatrix, DVector};

use super::{check_dims, GraphEmbedding, Technique};
use crate::config::Config;
use crate::depgraph::{undirected_view, MethodDependencyGraph};
use crate::error::Result;
use crate::rng::RandomStream;

const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdneLoss {
    pub alpha: f64,
    pub beta: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// Layers `n → hidden → dim → hidden → n`; weights are `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdneNet {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

#[derive(Debug, Clone)]
pub struct SdneGrad {
    pub weights: Vec<DMatrix<f64>>,
    pub biases: Vec<DVector<f64>>,
}

fn sigmoid_mat(mut z: DMatrix<f64>) -> DMatrix<f64> {
    z.apply(|v| *v = crate::linalg::sigmoid(*v));
    z
}

/// `Σ b_ij (x̂_ij − x_ij)²` with `b = beta` on nonzero inputs, else 1.
fn reconstruction(xhat: &DMatrix<f64>, x: &DMatrix<f64>, beta: f64) -> (f64, DMatrix<f64>) {
    let mut loss = 0.0;
    let grad = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let b = if x[(i, j)] != 0.0 { beta } else { 1.0 };
        let r = xhat[(i, j)] - x[(i, j)];
        loss += b * r * r;
        2.0 * b * r
    });
    (loss, grad)
}

/// `Σ_ij s_ij ‖y_i − y_j‖²` over the columns of `y`.
pub fn laplacian_penalty(y: &DMatrix<f64>, s: &DMatrix<f64>) -> f64 {
    let mut total = 0.0;
    for i in 0..y.ncols() {
        for j in 0..y.ncols() {
            if s[(i, j)] != 0.0 {
                total += s[(i, j)] * (y.column(i) - y.column(j)).norm_squared();
            }
        }
    }
    total
}

impl SdneNet {
    pub fn new(n: usize, hidden: usize, dim: usize, rng: &RandomStream) -> Self {
        let mut r = rng.split("init");
        let sizes = [(hidden, n), (dim, hidden), (hidden, dim), (n, hidden)];
        let weights = sizes
            .iter()
            .map(|&(o, i)| {
                let bound = (6.0 / (o + i) as f64).sqrt();
                DMatrix::from_fn(o, i, |_, _| r.uniform_range(-bound, bound))
            })
            .collect();
        let biases = sizes.iter().map(|&(o, _)| DVector::zeros(o)).collect();
        SdneNet { weights, biases }
    }

    /// Activations `[x, h1, y, h3, x̂]` for a batch whose columns are inputs.
    fn forward(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = vec![x.clone()];
        for (w, b) in self.weights.iter().zip(&self.biases) {
            let mut z = w * acts.last().unwrap();
            for mut col in z.column_iter_mut() {
                col += b;
            }
            acts.push(sigmoid_mat(z));
        }
        acts
    }

    /// Bottleneck codes, one column per input column.
    pub fn encode(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.forward(x).swap_remove(2)
    }

    fn regularizer(&self, p: &SdneLoss) -> f64 {
        self.weights
            .iter()
            .map(|w| p.nu1 * w.iter().map(|v| v.abs()).sum::<f64>() + p.nu2 * w.norm_squared())
            .sum()
    }

    /// Batch loss: mean over columns of the weighted reconstruction plus
    /// alpha times the Laplacian term, plus L1/L2 on the weights.
    pub fn loss(&self, x: &DMatrix<f64>, s: &DMatrix<f64>, p: &SdneLoss) -> f64 {
        let acts = self.forward(x);
        let m = x.ncols() as f64;
        let (rec, _) = reconstruction(&acts[4], x, p.beta);
        (rec + p.alpha * laplacian_penalty(&acts[2], s)) / m + self.regularizer(p)
    }

    pub fn loss_grad(&self, x: &DMatrix<f64>, s: &DMatrix<f64>, p: &SdneLoss) -> (f64, SdneGrad) {
        let acts = self.forward(x);
        let m = x.ncols() as f64;
        let (rec, d_out) = reconstruction(&acts[4], x, p.beta);
        let y = &acts[2];
        let loss = (rec + p.alpha * laplacian_penalty(y, s)) / m + self.regularizer(p);

        // d/dY of Σ s_ij‖y_i−y_j‖² is 2·Y·L with L the Laplacian of S+Sᵀ
        let s2 = s + s.transpose();
        let mut lap = -s2.clone();
        for i in 0..s2.nrows() {
            lap[(i, i)] += s2.row(i).sum();
        }
        let d_y_lap = y * lap * (2.0 * p.alpha / m);

        let mut dw = vec![DMatrix::zeros(0, 0); 4];
        let mut db = vec![DVector::zeros(0); 4];
        let mut upstream = d_out / m;
        for layer in (0..4).rev() {
            let a = &acts[layer + 1];
            let delta = upstream.component_mul(&a.map(|v| v * (1.0 - v)));
            let w = &self.weights[layer];
            dw[layer] = &delta * acts[layer].transpose()
                + w.map(|v| p.nu1 * v.signum() * (v != 0.0) as u8 as f64 + 2.0 * p.nu2 * v);
            db[layer] = delta.column_sum();
            upstream = w.transpose() * delta;
            if layer == 2 {
                upstream += &d_y_lap;
            }
        }
        (loss, SdneGrad { weights: dw, biases: db })
    }

    fn step(&mut self, g: &SdneGrad, lr: f64) {
        for (w, d) in self.weights.iter_mut().zip(&g.weights) {
            *w -= d * lr;
        }
        for (b, d) in self.biases.iter_mut().zip(&g.biases) {
            *b -= d * lr;
        }
    }
}

fn adjacency(adj: &[Vec<usize>]) -> DMatrix<f64> {
    let n = adj.len();
    let mut a = DMatrix::zeros(n, n);
    for (i, nbrs) in adj.iter().enumerate() {
        for &j in nbrs {
            a[(i, j)] = 1.0;
        }
    }
    a
}

pub fn sdne(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let dim = cfg.graph_dim;
    check_dims(dim, g.len(), cfg)?;
    let n = g.len();
    let a = adjacency(&undirected_view(g));
    let p = SdneLoss {
        alpha: cfg.sdne_alpha,
        beta: cfg.sdne_beta,
        nu1: cfg.sdne_nu1,
        nu2: cfg.sdne_nu2,
    };
    let mut net = SdneNet::new(n, cfg.sdne_hidden, dim, rng);
    let batch = cfg.sdne_batch_size.max(1);
    let total = (cfg.sdne_epochs * n.div_ceil(batch)).max(1) as f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut shuffle = rng.split("order");
    let mut losses = Vec::with_capacity(cfg.sdne_epochs);
    let mut steps = 0usize;
    for _ in 0..cfg.sdne_epochs {
        shuffle.shuffle(&mut order);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let x = DMatrix::from_fn(n, chunk.len(), |r, c| a[(chunk[c], r)]);
            let s = DMatrix::from_fn(chunk.len(), chunk.len(), |i, j| a[(chunk[i], chunk[j])]);
            let (loss, grad) = net.loss_grad(&x, &s, &p);
            epoch_loss += loss;
            let lr = cfg.sdne_lr * (1.0 - steps as f64 / total).max(MIN_LR_FRACTION);
            net.step(&grad, lr);
            steps += 1;
        }
        losses.push(epoch_loss);
    }
    let codes = net.encode(&a.transpose());
    let rows = codes.column_iter().map(|c| c.iter().copied().collect()).collect();
    let meta = vec![
        ("alpha", cfg.sdne_alpha.to_string()),
        ("beta", cfg.sdne_beta.to_string()),
        ("nu1", cfg.sdne_nu1.to_string()),
        ("nu2", cfg.sdne_nu2.to_string()),
        ("batch_size", cfg.sdne_batch_size.to_string()),
        ("epochs", cfg.sdne_epochs.to_string()),
        ("hidden", cfg.sdne_hidden.to_string()),
    ];
    GraphEmbedding::from_rows(Technique::Sdne, dim, rows, meta, losses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::small_cfg;
    use crate::rng::seeded_rng;

    #[test]
    fn nonzero_entries_weighted_by_beta() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let xhat = DMatrix::from_row_slice(2, 1, &[0.7, 0.3]);
        let (_, g) = reconstruction(&xhat, &x, 5.0);
        assert!((g[(0, 0)] / g[(1, 0)] + 5.0).abs() < 1e-12);
    }

    #[test]
    fn penalty_grows_with_linked_distance() {
        let s = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let near = DMatrix::from_row_slice(2, 3, &[0.0, 0.1, 5.0, 0.0, 0.1, 5.0]);
        let far = DMatrix::from_row_slice(2, 3, &[0.0, 5.0, 0.1, 0.0, 5.0, 0.1]);
        assert!(laplacian_penalty(&far, &s) > laplacian_penalty(&near, &s));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rng = seeded_rng(21);
        let mut net = SdneNet::new(5, 4, 2, &rng);
        let mut r = rng.split("bias");
        for b in net.biases.iter_mut() {
            b.apply(|v| *v = r.uniform_range(-0.5, 0.5));
        }
        let adj = [vec![1, 2], vec![0, 2], vec![0, 1, 3], vec![2, 4], vec![3]];
        let a = adjacency(&adj);
        let batch = [0usize, 2, 3];
        let x = DMatrix::from_fn(5, 3, |row, c| a[(batch[c], row)]);
        let s = DMatrix::from_fn(3, 3, |i, j| a[(batch[i], batch[j])]);
        // large alpha so the Laplacian path is exercised
        let p = SdneLoss { alpha: 0.3, beta: 5.0, nu1: 1e-3, nu2: 1e-2 };
        let (_, g) = net.loss_grad(&x, &s, &p);
        let h = 1e-5;
        for layer in 0..4 {
            for idx in 0..net.weights[layer].len() {
                let mut plus = net.clone();
                plus.weights[layer][idx] += h;
                let mut minus = net.clone();
                minus.weights[layer][idx] -= h;
                let fd = (plus.loss(&x, &s, &p) - minus.loss(&x, &s, &p)) / (2.0 * h);
                let an = g.weights[layer][idx];
                assert!((fd - an).abs() <= 1e-4 * fd.abs().max(an.abs()).max(1e-3), "W{layer}[{idx}]: {fd} vs {an}");
            }
            for idx in 0..net.biases[layer].len() {
                let mut plus = net.clone();
                plus.biases[layer][idx] += h;
                let mut minus = net.clone();
                minus.biases[layer][idx] -= h;
                let fd = (plus.loss(&x, &s, &p) - minus.loss(&x, &s, &p)) / (2.0 * h);
                let an = g.biases[layer][idx];
                assert!((fd - an).abs() <= 1e-4 * fd.abs().max(an.abs()).max(1e-3), "b{layer}[{idx}]");
            }
        }
    }

    #[test]
    fn barbell_training_reduces_loss_and_separates() {
        let g = MethodDependencyGraph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]);
        let cfg = small_cfg();
        let emb = sdne(&g, &cfg, &seeded_rng(6)).unwrap();
        assert_eq!(emb.losses.len(), 100);
        assert!(emb.losses[99] < emb.losses[0], "{} vs {}", emb.losses[99], emb.losses[0]);
        let (intra, inter) = crate::graph::cluster_separation(&emb.vectors, &[0, 0, 0, 1, 1, 1]);
        assert!(intra > inter, "{intra} vs {inter}");
    }
}
