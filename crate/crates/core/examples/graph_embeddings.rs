//! Embeds two triangles joined by one edge with every graph technique and
//! reports mean cosine within and across the triangles.
//!
//! cargo run --example graph_embeddings

use rmove::config::Config;
use rmove::depgraph::MethodDependencyGraph;
use rmove::graph::{cluster_separation, embed_graph, Technique};
use rmove::rng::seeded_rng;

fn main() -> rmove::Result<()> {
    let g = MethodDependencyGraph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
    let mut cfg = Config::default();
    cfg.graph_dim = 8;
    cfg.grarep_kstep = 2;
    cfg.walklets_scales = 2;
    cfg.sdne_hidden = 16;
    println!("{:<10} {:>7} {:>7}", "technique", "intra", "inter");
    for t in Technique::ALL {
        let emb = embed_graph(t, &g, &cfg, &seeded_rng(1))?;
        let (intra, inter) = cluster_separation(&emb.vectors, &[0, 0, 0, 1, 1, 1]);
        println!("{:<10} {intra:>7.3} {inter:>7.3}", t.to_string());
    }
    Ok(())
}
