//! ProNE: sparse matrix factorization followed by spectral propagation.

use nalgebra::DMatrix;

use super::{check_dims, GraphEmbedding, Technique};
use crate::config::Config;
use crate::depgraph::{undirected_view, MethodDependencyGraph};
use crate::error::Result;
use crate::linalg::{l1_rows, normalize_rows, sorted_svd};
use crate::rng::RandomStream;

const OVERSAMPLES: usize = 10;
const POWER_ITERS: usize = 5;

/// Modified Bessel function of the first kind, integer order, by series.
fn bessel_i(order: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(order as i32) / (1..=order).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= half * half / (k as f64 * (k + order) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Left singular vectors scaled by `sqrt(σ)`, rows then L2-normalized;
/// zero-padded to `dim` columns.
fn scaled_left(u: &DMatrix<f64>, singular: &[f64], dim: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(u.nrows(), dim);
    for c in 0..dim.min(singular.len()) {
        out.set_column(c, &(u.column(c) * singular[c].max(0.0).sqrt()));
    }
    normalize_rows(&mut out);
    out
}

/// Halko-style randomized SVD; falls back to a dense SVD when the sketch
/// would not be smaller than the matrix.
fn randomized_embedding(m: &DMatrix<f64>, dim: usize, rng: &RandomStream) -> DMatrix<f64> {
    let sketch = dim + OVERSAMPLES;
    if sketch >= m.nrows().min(m.ncols()) {
        let svd = sorted_svd(m);
        return scaled_left(&svd.u, &svd.singular, dim);
    }
    let mut r = rng.split("sketch");
    let omega = DMatrix::from_fn(m.ncols(), sketch, |_, _| r.normal());
    let mut q = (m * omega).qr().q();
    for _ in 0..POWER_ITERS {
        let z = (m.transpose() * &q).qr().q();
        q = (m * z).qr().q();
    }
    let b = q.transpose() * m;
    let svd = sorted_svd(&b);
    scaled_left(&(q * svd.u), &svd.singular, dim)
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

/// Stage 1: factorize `log(P_ij) - log(neg_j)` on the edge support, with
/// `P` the transition matrix and `neg` the smoothed column mass.
fn initial_embedding(a: &DMatrix<f64>, dim: usize, rng: &RandomStream) -> DMatrix<f64> {
    let n = a.nrows();
    let c1 = l1_rows(a);
    let mut neg: Vec<f64> = (0..n).map(|j| c1.column(j).sum().powf(0.75)).collect();
    let total: f64 = neg.iter().sum();
    if total > 0.0 {
        neg.iter_mut().for_each(|x| *x /= total);
    }
    let f = DMatrix::from_fn(n, n, |i, j| {
        if a[(i, j)] == 0.0 {
            return 0.0;
        }
        let lc = if c1[(i, j)] > 0.0 { c1[(i, j)].ln() } else { 0.0 };
        let ln = if neg[j] > 0.0 { neg[j].ln() } else { 0.0 };
        lc - ln
    });
    randomized_embedding(&f, dim, rng)
}

/// Stage 2: Chebyshev expansion of a Gaussian band-pass filter over the
/// normalized Laplacian of `I + A`, then re-embedding by dense SVD.
fn propagate(a: &DMatrix<f64>, init: &DMatrix<f64>, step: usize, theta: f64, mu: f64) -> DMatrix<f64> {
    if step <= 1 {
        return init.clone();
    }
    let n = a.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let a_self = &eye + a;
    let lap = &eye - l1_rows(&a_self);
    let m = &lap - &eye * mu;

    let mut lx0 = init.clone();
    let mut lx1 = &m * init;
    lx1 = &m * &lx1 * 0.5 - init;
    let mut conv = init * bessel_i(0, theta) - &lx1 * (2.0 * bessel_i(1, theta));
    for i in 2..step {
        let mut lx2 = &m * &lx1;
        lx2 = &m * &lx2 - &lx1 * 2.0 - &lx0;
        let c = 2.0 * bessel_i(i, theta);
        if i % 2 == 0 {
            conv += &lx2 * c;
        } else {
            conv -= &lx2 * c;
        }
        lx0 = lx1;
        lx1 = lx2;
    }
    let mm = a_self * (init - conv);
    let svd = sorted_svd(&mm);
    scaled_left(&svd.u, &svd.singular, init.ncols())
}

/// Both stages, for inspection: `(initial, propagated)`.
pub fn prone_stages(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> (DMatrix<f64>, DMatrix<f64>) {
    let a = adjacency(&undirected_view(g));
    let init = initial_embedding(&a, cfg.graph_dim, rng);
    let out = propagate(&a, &init, cfg.prone_step, cfg.prone_theta, cfg.prone_mu);
    (init, out)
}

pub fn prone(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    check_dims(cfg.graph_dim, g.len(), cfg)?;
    let (_, out) = prone_stages(g, cfg, rng);
    let rows = out.row_iter().map(|r| r.iter().copied().collect()).collect();
    let meta = vec![
        ("step", cfg.prone_step.to_string()),
        ("theta", cfg.prone_theta.to_string()),
        ("mu", cfg.prone_mu.to_string()),
    ];
    GraphEmbedding::from_rows(Technique::ProNE, cfg.graph_dim, rows, meta, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{small_cfg, twin_triangles};
    use crate::rng::seeded_rng;

    #[test]
    fn bessel_values() {
        // reference values of I_n(0.5)
        assert!((bessel_i(0, 0.5) - 1.063_483_370_741_323_5).abs() < 1e-14);
        assert!((bessel_i(1, 0.5) - 0.257_894_305_390_896_5).abs() < 1e-14);
        assert!((bessel_i(2, 0.5) - 0.031_906_149_177_738_24).abs() < 1e-14);
        assert_eq!(bessel_i(3, 0.0), 0.0);
    }

    #[test]
    fn zero_step_is_identity() {
        let mut cfg = small_cfg();
        cfg.prone_step = 0;
        let (init, out) = prone_stages(&twin_triangles(), &cfg, &seeded_rng(1));
        assert_eq!(init, out);
    }

    #[test]
    fn randomized_svd_matches_dense_on_low_rank() {
        let mut r = seeded_rng(4).split("m");
        let u = DMatrix::from_fn(40, 3, |_, _| r.normal());
        let v = DMatrix::from_fn(3, 40, |_, _| r.normal());
        let m = u * v;
        let fast = randomized_embedding(&m, 3, &seeded_rng(5));
        let svd = sorted_svd(&m);
        let exact = scaled_left(&svd.u, &svd.singular, 3);
        // equal up to per-column sign
        for c in 0..3 {
            let d = (fast.column(c) - exact.column(c)).norm().min((fast.column(c) + exact.column(c)).norm());
            assert!(d < 1e-6, "column {c}: {d}");
        }
    }

    #[test]
    fn table_params_recorded() {
        let emb = prone(&twin_triangles(), &small_cfg(), &seeded_rng(1)).unwrap();
        assert_eq!(emb.meta["step"], "10");
        assert_eq!(emb.meta["theta"], "0.5");
        assert_eq!(emb.meta["mu"], "0.2");
    }
}
