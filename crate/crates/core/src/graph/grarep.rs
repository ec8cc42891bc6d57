use nalgebra::DMatrix;

use super::{check_dims, split_dim, GraphEmbedding, Technique};
use crate::config::Config;
use crate::depgraph::{undirected_view, MethodDependencyGraph};
use crate::error::Result;
use crate::linalg::half_factors;

/// Row-normalized transition matrix; a zero-degree row becomes uniform
/// over all nodes.
fn transition(adj: &[Vec<usize>]) -> DMatrix<f64> {
    let n = adj.len();
    let mut t = DMatrix::zeros(n, n);
    for (i, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            t.row_mut(i).fill(1.0 / n as f64);
        } else {
            for &j in nbrs {
                t[(i, j)] = 1.0 / nbrs.len() as f64;
            }
        }
    }
    t
}

/// `max(0, log(P_ij / β))` with `β = 1/|V|`, for `P = A^step`.
pub fn grarep_step_matrix(power: &DMatrix<f64>) -> DMatrix<f64> {
    let n = power.nrows() as f64;
    power.map(|x| if x > 0.0 { (x * n).ln().max(0.0) } else { 0.0 })
}

/// Rank-`rank` factors `(U·Σ^½, V·Σ^½)` of a step matrix; the left factor
/// is the embedding block.
pub fn grarep_factor(x: &DMatrix<f64>, rank: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    half_factors(x, rank)
}

pub fn grarep(g: &MethodDependencyGraph, cfg: &Config) -> Result<GraphEmbedding> {
    let dim = cfg.graph_dim;
    check_dims(dim, g.len(), cfg)?;
    let per_step = split_dim(dim, cfg.grarep_kstep, "grarep steps")?;
    let n = g.len();
    let a = transition(&undirected_view(g));
    let mut rows = vec![Vec::with_capacity(dim); n];
    let mut power = DMatrix::identity(n, n);
    for _ in 0..cfg.grarep_kstep {
        power = &power * &a;
        let (left, _) = grarep_factor(&grarep_step_matrix(&power), per_step);
        for (i, row) in rows.iter_mut().enumerate() {
            row.extend(left.row(i).iter());
        }
    }
    let meta = vec![("kstep", cfg.grarep_kstep.to_string()), ("per_step_dim", per_step.to_string())];
    GraphEmbedding::from_rows(Technique::GraRep, dim, rows, meta, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::small_cfg;
    use nalgebra::SymmetricEigen;

    /// Squared Frobenius error of the best rank-r approximation, from the
    /// eigenvalues of XᵀX rather than an SVD.
    fn eckart_young_tail(x: &DMatrix<f64>, r: usize) -> f64 {
        let eig = SymmetricEigen::new(x.transpose() * x);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0)).collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev.iter().skip(r).sum()
    }

    #[test]
    fn four_cycle_full_rank() {
        let g = MethodDependencyGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let x = grarep_step_matrix(&transition(&undirected_view(&g)));
        let (l, r) = grarep_factor(&x, 4);
        let err = (&l * r.transpose() - &x).norm_squared();
        assert!((err - eckart_young_tail(&x, 4)).abs() < 1e-8);
    }

    #[test]
    fn truncated_factor_is_optimal() {
        let g = MethodDependencyGraph::from_edges(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 6), (6, 3)]);
        let t = transition(&undirected_view(&g));
        let x = grarep_step_matrix(&t);
        for r in 1..=7 {
            let (l, rt) = grarep_factor(&x, r);
            let err = (&l * rt.transpose() - &x).norm_squared();
            assert!((err - eckart_young_tail(&x, r)).abs() < 1e-8, "rank {r}");
        }
    }

    #[test]
    fn single_node_is_zero() {
        let mut cfg = small_cfg();
        cfg.graph_dim = 8;
        cfg.grarep_kstep = 4;
        let emb = grarep(&MethodDependencyGraph::from_edges(1, &[]), &cfg).unwrap();
        assert_eq!(emb.vectors[0].as_slice(), &[0.0; 8]);
    }

    #[test]
    fn table_dims() {
        let mut cfg = small_cfg();
        cfg.graph_dim = 128;
        cfg.grarep_kstep = 4;
        let g = MethodDependencyGraph::from_edges(3, &[(0, 1), (1, 2)]);
        let emb = grarep(&g, &cfg).unwrap();
        assert_eq!(emb.vectors[1].dim(), 128);
        assert_eq!(emb.meta["per_step_dim"], "32");
    }
}
