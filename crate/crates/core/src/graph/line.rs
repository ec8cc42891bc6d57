//! LINE: edge-sampling SGD for first-order (shared vertex vectors) and
//! second-order (vertex vs. context vectors) proximity, on directed edges.

use super::skipgram::NegativeTable;
use super::{check_dims, split_dim, GraphEmbedding, Technique};
use crate::config::Config;
use crate::depgraph::MethodDependencyGraph;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, neg_log_sigmoid, sigmoid};
use crate::rng::RandomStream;

const EVAL_EDGES: usize = 1000;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineSample {
    pub src: usize,
    pub dst: usize,
    pub negatives: Vec<usize>,
}

fn target_table<'a>(order: usize, vertex: &'a [Vec<f64>], context: &'a [Vec<f64>]) -> &'a [Vec<f64>] {
    if order == 1 {
        vertex
    } else {
        context
    }
}

/// Summed negative-sampling objective over `samples`.
pub fn line_objective(order: usize, vertex: &[Vec<f64>], context: &[Vec<f64>], samples: &[LineSample]) -> f64 {
    let ctx = target_table(order, vertex, context);
    samples
        .iter()
        .map(|s| {
            let u = &vertex[s.src];
            neg_log_sigmoid(dot(u, &ctx[s.dst])) + s.negatives.iter().map(|&n| neg_log_sigmoid(-dot(u, &ctx[n]))).sum::<f64>()
        })
        .sum()
}

/// Gradient of [`line_objective`] with respect to the vertex and context
/// tables. For first order everything lands in the vertex table.
pub fn line_objective_grad(
    order: usize,
    vertex: &[Vec<f64>],
    context: &[Vec<f64>],
    samples: &[LineSample],
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let ctx = target_table(order, vertex, context);
    let zero = |t: &[Vec<f64>]| t.iter().map(|r| vec![0.0; r.len()]).collect::<Vec<_>>();
    let mut dv = zero(vertex);
    let mut dc = zero(context);
    for s in samples {
        let u = &vertex[s.src];
        let targets = std::iter::once((s.dst, 1.0)).chain(s.negatives.iter().map(|&n| (n, 0.0)));
        for (t, label) in targets {
            let g = sigmoid(dot(u, &ctx[t])) - label;
            axpy(g, &ctx[t], &mut dv[s.src]);
            let into = if order == 1 { &mut dv[t] } else { &mut dc[t] };
            axpy(g, u, into);
        }
    }
    (dv, dc)
}

struct OrderResult {
    rows: Vec<Vec<f64>>,
    losses: Vec<f64>,
    draws: usize,
    steps: usize,
}

fn train_order(order: usize, n: usize, dim: usize, edges: &[(usize, usize)], cfg: &Config, rng: &RandomStream) -> OrderResult {
    let mut out_degree = vec![0.0; n];
    for &(a, _) in edges {
        out_degree[a] += 1.0;
    }
    let table = NegativeTable::new(&out_degree).expect("edges are non-empty");
    let k = cfg.line_negative_ratio;

    let mut init = rng.split("init");
    let mut vertex: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| init.uniform_range(-0.5, 0.5) / dim as f64).collect())
        .collect();
    let mut context = vec![vec![0.0; dim]; n];

    let mut eval_rng = rng.split("eval");
    let eval: Vec<LineSample> = eval_rng
        .sample_indices(edges.len(), EVAL_EDGES)
        .into_iter()
        .map(|i| LineSample {
            src: edges[i].0,
            dst: edges[i].1,
            negatives: (0..k).map(|_| table.draw(&mut eval_rng)).collect(),
        })
        .collect();

    let total = (cfg.line_epochs * edges.len()).max(1) as f64;
    let mut order_rng = rng.split("order");
    let mut draws_rng = rng.split("negatives");
    let (mut steps, mut draws) = (0usize, 0usize);
    let mut losses = Vec::with_capacity(cfg.line_epochs);
    let mut idx: Vec<usize> = (0..edges.len()).collect();
    let mut err = vec![0.0; dim];
    for _ in 0..cfg.line_epochs {
        order_rng.shuffle(&mut idx);
        for &e in &idx {
            let (src, dst) = edges[e];
            let lr = cfg.line_lr * (1.0 - steps as f64 / total).max(MIN_LR_FRACTION);
            steps += 1;
            let u = vertex[src].clone();
            err.iter_mut().for_each(|x| *x = 0.0);
            for d in 0..=k {
                let (t, label) = if d == 0 {
                    (dst, 1.0)
                } else {
                    draws += 1;
                    (table.draw(&mut draws_rng), 0.0)
                };
                let tv = if order == 1 { &mut vertex[t] } else { &mut context[t] };
                let g = label - sigmoid(dot(&u, tv));
                axpy(g, tv, &mut err);
                axpy(lr * g, &u, tv);
            }
            axpy(lr, &err, &mut vertex[src]);
        }
        losses.push(line_objective(order, &vertex, &context, &eval) / eval.len() as f64);
    }
    OrderResult {
        rows: vertex,
        losses,
        draws,
        steps,
    }
}

fn normalize(rows: &mut [Vec<f64>]) {
    for r in rows {
        let n = crate::linalg::norm(r);
        if n > 0.0 {
            r.iter_mut().for_each(|x| *x /= n);
        }
    }
}

pub fn line(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let dim = cfg.graph_dim;
    check_dims(dim, g.len(), cfg)?;
    let orders: Vec<usize> = match cfg.line_order {
        1 => vec![1],
        2 => vec![2],
        3 => vec![1, 2],
        o => return Err(Error::InvalidParameter(format!("line_order must be 1, 2 or 3, got {o}"))),
    };
    let part = split_dim(dim, orders.len(), "line orders")?;
    let n = g.len();
    let mut meta = vec![
        ("order", cfg.line_order.to_string()),
        ("negative_ratio", cfg.line_negative_ratio.to_string()),
        ("epochs", cfg.line_epochs.to_string()),
    ];
    if g.edges.is_empty() {
        log::warn!("LINE on a graph without edges; all vectors are zero");
        return GraphEmbedding::from_rows(Technique::Line, dim, vec![vec![0.0; dim]; n], meta, Vec::new());
    }
    let mut rows = vec![Vec::with_capacity(dim); n];
    let mut losses: Vec<f64> = Vec::new();
    let (mut draws, mut steps) = (0, 0);
    for o in orders {
        let mut r = train_order(o, n, part, &g.edges, cfg, &rng.split_index("order", o));
        if cfg.line_order == 3 {
            normalize(&mut r.rows);
        }
        for (row, part_row) in rows.iter_mut().zip(&r.rows) {
            row.extend_from_slice(part_row);
        }
        if losses.is_empty() {
            losses = r.losses;
        } else {
            losses.iter_mut().zip(&r.losses).for_each(|(a, b)| *a += b);
        }
        draws += r.draws;
        steps += r.steps;
    }
    meta.push(("edge_samples", steps.to_string()));
    meta.push(("negative_draws", draws.to_string()));
    GraphEmbedding::from_rows(Technique::Line, dim, rows, meta, losses)
}
