use rayon::prelude::*;

use super::skipgram::{skipgram_train, SkipGramParams};
use super::walks::{sample_walks, skip_corpus, WalkCorpus};
use super::{check_dims, split_dim, GraphEmbedding, Technique};
use crate::config::Config;
use crate::depgraph::{undirected_view, MethodDependencyGraph};
use crate::error::Result;
use crate::rng::RandomStream;

/// Trains one skip-gram per scale `k = 1..=scales` on the `k`-skipped
/// corpus and concatenates. DeepWalk and node2vec are the one-scale case,
/// so Walklets at `K = 1` reproduces them exactly.
fn multiscale(walks: &WalkCorpus, scales: usize, params: SkipGramParams, rng: &RandomStream) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let per_scale = split_dim(params.dim, scales, "walklets scales")?;
    let results = (1..=scales)
        .into_par_iter()
        .map(|k| {
            let corpus = skip_corpus(&walks.walks, k);
            let p = SkipGramParams { dim: per_scale, ..params };
            skipgram_train(&corpus, walks.num_nodes, &p, &rng.split_index("scale", k))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = vec![Vec::with_capacity(params.dim); walks.num_nodes];
    let mut losses = vec![0.0; results[0].heldout_loss.len()];
    for r in &results {
        for (row, v) in rows.iter_mut().zip(&r.vectors) {
            row.extend_from_slice(v);
        }
        for (acc, l) in losses.iter_mut().zip(&r.heldout_loss) {
            *acc += l;
        }
    }
    Ok((rows, losses))
}

fn sg_params(cfg: &Config, window: usize) -> SkipGramParams {
    SkipGramParams {
        dim: cfg.graph_dim,
        window,
        negatives: cfg.skipgram_negatives,
        epochs: cfg.skipgram_epochs,
        lr: cfg.skipgram_lr,
    }
}

fn walk_embedding(
    technique: Technique,
    g: &MethodDependencyGraph,
    cfg: &Config,
    rng: &RandomStream,
    (walks_per_node, length, window, scales, p, q): (usize, usize, usize, usize, f64, f64),
) -> Result<GraphEmbedding> {
    check_dims(cfg.graph_dim, g.len(), cfg)?;
    let adj = undirected_view(g);
    let corpus = sample_walks(&adj, length, walks_per_node, p, q, &rng.split("walks"));
    let (rows, losses) = multiscale(&corpus, scales, sg_params(cfg, window), rng)?;
    let meta = vec![
        ("number_walks", walks_per_node.to_string()),
        ("walk_length", length.to_string()),
        ("window_size", window.to_string()),
        ("scales", scales.to_string()),
        ("p", p.to_string()),
        ("q", q.to_string()),
        ("negatives", cfg.skipgram_negatives.to_string()),
        ("epochs", cfg.skipgram_epochs.to_string()),
    ];
    GraphEmbedding::from_rows(technique, cfg.graph_dim, rows, meta, losses)
}

pub fn deepwalk(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let params = (cfg.deepwalk_walks, cfg.deepwalk_walk_length, cfg.deepwalk_window, 1, 1.0, 1.0);
    walk_embedding(Technique::DeepWalk, g, cfg, rng, params)
}

/// Biased walks; walk count, length and window follow the DeepWalk keys.
pub fn node2vec(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let params = (
        cfg.deepwalk_walks,
        cfg.deepwalk_walk_length,
        cfg.deepwalk_window,
        1,
        cfg.node2vec_p,
        cfg.node2vec_q,
    );
    walk_embedding(Technique::Node2Vec, g, cfg, rng, params)
}

pub fn walklets(g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let params = (
        cfg.walklets_walks,
        cfg.walklets_walk_length,
        cfg.walklets_window,
        cfg.walklets_scales,
        1.0,
        1.0,
    );
    walk_embedding(Technique::Walklets, g, cfg, rng, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::graph::tests::{small_cfg, twin_triangles};
    use crate::rng::seeded_rng;

    #[test]
    fn walklets_at_one_scale_is_deepwalk() {
        let mut cfg = small_cfg();
        cfg.walklets_scales = 1;
        cfg.walklets_walks = cfg.deepwalk_walks;
        cfg.walklets_walk_length = cfg.deepwalk_walk_length;
        cfg.walklets_window = cfg.deepwalk_window;
        let g = twin_triangles();
        let a = deepwalk(&g, &cfg, &seeded_rng(8)).unwrap();
        let b = walklets(&g, &cfg, &seeded_rng(8)).unwrap();
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn scale_dims() {
        let mut cfg = small_cfg();
        cfg.graph_dim = 130;
        cfg.walklets_scales = 5;
        cfg.walklets_walks = 2;
        cfg.walklets_walk_length = 10;
        let emb = walklets(&twin_triangles(), &cfg, &seeded_rng(1)).unwrap();
        assert_eq!(emb.vectors[0].dim(), 130);
        cfg.graph_dim = 128;
        assert!(matches!(
            walklets(&twin_triangles(), &cfg, &seeded_rng(1)),
            Err(Error::DimNotDivisible { dim: 128, parts: 5, .. })
        ));
    }

    #[test]
    fn defaults_recorded() {
        let mut cfg = Config::default();
        cfg.graph_dim = 4;
        cfg.deepwalk_walk_length = 80;
        let emb = deepwalk(&twin_triangles(), &cfg, &seeded_rng(1)).unwrap();
        assert_eq!(emb.meta["number_walks"], "10");
        assert_eq!(emb.meta["walk_length"], "80");
        assert_eq!(emb.meta["window_size"], "10");
        let emb = node2vec(&twin_triangles(), &cfg, &seeded_rng(1)).unwrap();
        assert_eq!((emb.meta["p"].as_str(), emb.meta["q"].as_str()), ("0.25", "0.25"));
    }
}
