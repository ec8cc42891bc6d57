use rayon::prelude::*;

use crate::rng::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<usize>>,
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub num_nodes: usize,
}

/// Second-order biased walks over symmetric adjacency lists (each sorted).
///
/// From `cur`, having arrived from `prev`, neighbour `x` gets weight `1/p`
/// if `x == prev`, 1 if `x` is adjacent to `prev`, else `1/q`. The first
/// step is uniform. Walks are ordered round-major; within a round the
/// start nodes are shuffled. Each walk draws from its own child stream, so
/// the result does not depend on thread count.
pub fn sample_walks(
    adj: &[Vec<usize>],
    length: usize,
    per_node: usize,
    p: f64,
    q: f64,
    rng: &RandomStream,
) -> WalkCorpus {
    let n = adj.len();
    let uniform = p == 1.0 && q == 1.0;
    let mut starts = Vec::with_capacity(n * per_node);
    for round in 0..per_node {
        let mut order: Vec<usize> = (0..n).collect();
        rng.split_index("round", round).shuffle(&mut order);
        starts.extend(order.into_iter().map(|v| (round, v)));
    }
    let walks = starts
        .par_iter()
        .map(|&(round, start)| {
            let mut stream = rng.split_index("walk", round * n + start);
            walk_from(adj, start, length, p, q, uniform, &mut stream)
        })
        .collect();
    WalkCorpus {
        walks,
        walk_length: length,
        walks_per_node: per_node,
        num_nodes: n,
    }
}

fn walk_from(
    adj: &[Vec<usize>],
    start: usize,
    length: usize,
    p: f64,
    q: f64,
    uniform: bool,
    rng: &mut RandomStream,
) -> Vec<usize> {
    let mut walk = Vec::with_capacity(length);
    walk.push(start);
    let mut weights = Vec::new();
    while walk.len() < length {
        let cur = *walk.last().unwrap();
        let nbrs = &adj[cur];
        if nbrs.is_empty() {
            break;
        }
        let next = if uniform || walk.len() == 1 {
            nbrs[rng.below(nbrs.len())]
        } else {
            let prev = walk[walk.len() - 2];
            weights.clear();
            weights.extend(nbrs.iter().map(|&x| {
                if x == prev {
                    1.0 / p
                } else if adj[prev].binary_search(&x).is_ok() {
                    1.0
                } else {
                    1.0 / q
                }
            }));
            let total: f64 = weights.iter().sum();
            let mut r = rng.uniform() * total;
            let mut pick = nbrs.len() - 1;
            for (k, w) in weights.iter().enumerate() {
                if r < *w {
                    pick = k;
                    break;
                }
                r -= w;
            }
            nbrs[pick]
        };
        walk.push(next);
    }
    walk
}

/// Splits each walk into `k` interleaved sequences keeping every `k`-th
/// node: `[a,b,c,d,e]` at `k = 2` gives `[a,c,e]` and `[b,d]`.
pub fn skip_corpus(walks: &[Vec<usize>], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for walk in walks {
        for offset in 0..k.min(walk.len()) {
            out.push(walk[offset..].iter().step_by(k).copied().collect());
        }
    }
    out
}
