//! Structural method embeddings from the method dependency graph.

mod grarep;
mod line;
mod prone;
mod random_walk;
mod sdne;
pub mod skipgram;
pub mod walks;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use grarep::{grarep, grarep_factor, grarep_step_matrix};
pub use line::{line, line_objective, line_objective_grad, LineSample};
pub use prone::{prone, prone_stages};
pub use random_walk::{deepwalk, node2vec, walklets};
pub use sdne::{laplacian_penalty, sdne, SdneGrad, SdneLoss, SdneNet};
pub use skipgram::{sgns_pair_grad, sgns_pair_loss, skipgram_train, SkipGramOutput, SkipGramParams};
pub use walks::{sample_walks, skip_corpus, WalkCorpus};

use crate::config::Config;
use crate::depgraph::MethodDependencyGraph;
use crate::error::{Error, Result};
use crate::linalg::cosine;
use crate::model::{dim_ratio_ok, EmbeddingVector};
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    DeepWalk,
    Node2Vec,
    Walklets,
    GraRep,
    Line,
    ProNE,
    Sdne,
}

impl Technique {
    pub const ALL: [Technique; 7] = [
        Technique::DeepWalk,
        Technique::Node2Vec,
        Technique::Walklets,
        Technique::GraRep,
        Technique::Line,
        Technique::ProNE,
        Technique::Sdne,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Technique::DeepWalk => "deepwalk",
            Technique::Node2Vec => "node2vec",
            Technique::Walklets => "walklets",
            Technique::GraRep => "grarep",
            Technique::Line => "line",
            Technique::ProNE => "prone",
            Technique::Sdne => "sdne",
        }
    }

    /// Whether the output depends on SGD sampling, as opposed to a
    /// (mostly) deterministic matrix factorization.
    pub fn is_stochastic(self) -> bool {
        !matches!(self, Technique::GraRep | Technique::ProNE)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown graph technique `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEmbedding {
    pub technique: Technique,
    pub dim: usize,
    /// One vector per graph node, indexed like `MethodDependencyGraph::nodes`.
    pub vectors: Vec<EmbeddingVector>,
    /// Hyperparameters actually used.
    pub meta: BTreeMap<String, String>,
    /// Per-epoch monitoring loss, where the technique has one.
    pub losses: Vec<f64>,
}

impl GraphEmbedding {
    fn from_rows(technique: Technique, dim: usize, rows: Vec<Vec<f64>>, meta: Vec<(&str, String)>, losses: Vec<f64>) -> Result<Self> {
        let vectors = rows
            .into_iter()
            .map(|mut r| {
                // zero-width graphs still need a finite vector
                for x in r.iter_mut() {
                    if !x.is_finite() {
                        *x = 0.0;
                    }
                }
                EmbeddingVector::new(r)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphEmbedding {
            technique,
            dim,
            vectors,
            meta: meta.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            losses,
        })
    }
}

pub fn embed_graph(technique: Technique, g: &MethodDependencyGraph, cfg: &Config, rng: &RandomStream) -> Result<GraphEmbedding> {
    let rng = rng.split(technique.as_str());
    match technique {
        Technique::DeepWalk => deepwalk(g, cfg, &rng),
        Technique::Node2Vec => node2vec(g, cfg, &rng),
        Technique::Walklets => walklets(g, cfg, &rng),
        Technique::GraRep => grarep(g, cfg),
        Technique::Line => line(g, cfg, &rng),
        Technique::ProNE => prone(g, cfg, &rng),
        Technique::Sdne => sdne(g, cfg, &rng),
    }
}

/// Warns (or fails under `strict_dims`) when `dim` is not well below `|V|`.
pub(crate) fn check_dims(dim: usize, nodes: usize, cfg: &Config) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("embedding dimension must be positive".into()));
    }
    if !dim_ratio_ok(dim, nodes) {
        let msg = format!("embedding dimension {dim} is not small relative to {nodes} nodes");
        if cfg.strict_dims {
            return Err(Error::InvalidParameter(msg));
        }
        log::warn!("{msg}");
    }
    Ok(())
}

pub(crate) fn split_dim(dim: usize, parts: usize, what: &'static str) -> Result<usize> {
    if parts == 0 || !dim.is_multiple_of(parts) {
        return Err(Error::DimNotDivisible { dim, parts, what });
    }
    Ok(dim / parts)
}

/// Mean pairwise cosine within clusters and across clusters.
pub fn cluster_separation(vectors: &[EmbeddingVector], clusters: &[usize]) -> (f64, f64) {
    let (mut intra, mut ni, mut inter, mut nx) = (0.0, 0usize, 0.0, 0usize);
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            let c = cosine(vectors[i].as_slice(), vectors[j].as_slice());
            if clusters[i] == clusters[j] {
                intra += c;
                ni += 1;
            } else {
                inter += c;
                nx += 1;
            }
        }
    }
    (intra / ni.max(1) as f64, inter / nx.max(1) as f64)
}
