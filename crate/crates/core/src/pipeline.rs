//! The stages chained in memory, and the manifest that ties the on-disk
//! stage artifacts together.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::code::{build_vocab, embed_code, CodeEmbedding, Encoder};
use crate::config::Config;
use crate::depgraph::{build_mdg, MethodDependencyGraph};
use crate::error::{Error, Result};
use crate::evaluation::{compute_metrics, BenchRow, EvalResult};
use crate::frontend::Corpus;
use crate::fusion::{graph_vectors, FusionNormalizers, HybridSpace};
use crate::graph::{embed_graph, GraphEmbedding, Technique};
use crate::model::{MethodId, MoveMethodTriple};
use crate::paths::{mine_corpus, PathLimits, PathSet};
use crate::recommend::{recommend_moves, RecommendOptions, Recommendation};
use crate::rng::RandomStream;
use crate::training::{cross_validate_by_method, generate_relocation_data, train_classifier, CvReport, Hyperparams, TrainedModel};

/// Everything derived from a corpus before fusion.
#[derive(Debug, Clone)]
pub struct Embedded {
    pub mdg: MethodDependencyGraph,
    pub pathsets: Vec<PathSet>,
    pub graph: GraphEmbedding,
    pub code: CodeEmbedding,
}

pub fn embed_corpus(corpus: &Corpus, technique: Technique, encoder: Encoder, cfg: &Config, rng: &RandomStream) -> Result<Embedded> {
    let mdg = build_mdg(corpus);
    let pathsets = mine_corpus(corpus, &PathLimits::from_config(cfg), &rng.split("paths"))?;
    let graph = embed_graph(technique, &mdg, cfg, &rng.split("graph"))?;
    let vocab = build_vocab(&pathsets, cfg.code_min_count, cfg.code_subtokens)?;
    let code = embed_code(encoder, &pathsets, &vocab, cfg, &rng.split("code"))?;
    Ok(Embedded { mdg, pathsets, graph, code })
}

pub fn fuse_embedded(corpus: &Corpus, e: &Embedded, alpha: f64) -> Result<(HybridSpace, FusionNormalizers)> {
    let graph = graph_vectors(&e.graph, &e.mdg);
    let norms = FusionNormalizers::fit(&e.code.vectors, &graph)?;
    let space = HybridSpace::build(corpus, &e.code.vectors, &graph, &norms, alpha)?;
    Ok((space, norms))
}

/// Outcome of training on the current placement and recommending moves.
#[derive(Debug, Clone)]
pub struct RelocationRun {
    pub cv: CvReport,
    pub model: TrainedModel,
    pub recommendations: Vec<Recommendation>,
    pub eval: EvalResult,
    /// Ground-truth triples whose target is the top-ranked candidate.
    pub target_ranked_first: usize,
    pub infer_ms_per_method: f64,
}

/// Cross-validates `hp` on relocation samples of `space`, with folds
/// grouped by method, refits on all of them, then recommends moves and scores them against `ground_truth`.
/// Methods in `exclude` contribute no training samples.
#[allow(clippy::too_many_arguments)]
pub fn relocation_experiment(
    corpus: &Corpus,
    space: &HybridSpace,
    pathsets: &[PathSet],
    ground_truth: &[MoveMethodTriple],
    exclude: &BTreeSet<MethodId>,
    hp: &Hyperparams,
    cfg: &Config,
    rng: &RandomStream,
) -> Result<RelocationRun> {
    let samples = generate_relocation_data(corpus, space, exclude, cfg.relocation_pairs, &rng.split("samples"))?;
    let cv = cross_validate_by_method(hp, &samples, cfg.cv_folds, cfg.cv_repeats, &rng.split("cv"))?;
    let model = train_classifier(hp.kind(), &samples, hp, &rng.split("model"))?;
    let start = Instant::now();
    let recommendations = recommend_moves(&model, corpus, space, pathsets, &RecommendOptions::from_config(cfg))?;
    let infer_ms_per_method = start.elapsed().as_secs_f64() * 1e3 / corpus.methods.len().max(1) as f64;
    let eval = compute_metrics(&recommendations, ground_truth);
    let by_method: BTreeMap<&MethodId, &Recommendation> = recommendations.iter().map(|r| (&r.method, r)).collect();
    let target_ranked_first = ground_truth
        .iter()
        .filter(|t| {
            by_method
                .get(&t.method)
                .and_then(|r| r.ranked.first())
                .is_some_and(|c| c.class == t.target_class)
        })
        .count();
    Ok(RelocationRun {
        cv,
        model,
        recommendations,
        eval,
        target_ranked_first,
        infer_ms_per_method,
    })
}

/// One row per (technique, encoder, classifier), in argument order.
pub fn run_bench(
    corpus: &Corpus,
    ground_truth: &[MoveMethodTriple],
    combos: &[(Technique, Encoder)],
    classifiers: &[Hyperparams],
    cfg: &Config,
) -> Result<Vec<BenchRow>> {
    let rng = crate::rng::seeded_rng(cfg.seed);
    let mut rows = Vec::new();
    for &(technique, encoder) in combos {
        let e = embed_corpus(corpus, technique, encoder, cfg, &rng)?;
        let (space, _) = fuse_embedded(corpus, &e, cfg.alpha)?;
        for hp in classifiers {
            let run = relocation_experiment(corpus, &space, &e.pathsets, ground_truth, &BTreeSet::new(), hp, cfg, &rng)?;
            rows.push(BenchRow {
                combo: format!("{technique}+{encoder}"),
                classifier: hp.kind().to_string(),
                precision: run.cv.mean.precision,
                recall: run.cv.mean.recall,
                f1: run.cv.mean.f1,
                infer_ms_per_method: run.infer_ms_per_method,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    /// Path → SHA-256 of every file the stage read.
    pub inputs: BTreeMap<String, String>,
    /// Path → SHA-256 of every file the stage wrote.
    pub outputs: BTreeMap<String, String>,
    pub config_hash: String,
    pub seed: u64,
}

/// `manifest.json` in the work directory. Paths inside the work directory
/// are stored relative to it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub config_hash: String,
    pub stages: BTreeMap<String, StageRecord>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl PipelineManifest {
    pub fn load(work: &Path) -> Result<Self> {
        let path = work.join(MANIFEST_FILE);
        if !path.exists() {
            return Ok(PipelineManifest::default());
        }
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }

    pub fn save(&self, work: &Path) -> Result<()> {
        let path = work.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn key(work: &Path, path: &Path) -> String {
        path.strip_prefix(work).unwrap_or(path).to_string_lossy().into_owned()
    }

    /// Hashes `inputs` and compares each with the hash recorded by the
    /// stage that wrote it. A mismatch fails unless `force`.
    pub fn check_inputs(&self, work: &Path, stage: &str, inputs: &[PathBuf], force: bool) -> Result<BTreeMap<String, String>> {
        let mut hashes = BTreeMap::new();
        for p in inputs {
            let key = Self::key(work, p);
            let actual = sha256_file(p)?;
            let recorded = self.stages.values().find_map(|s| s.outputs.get(&key));
            if recorded.is_some_and(|r| *r != actual) {
                if !force {
                    return Err(Error::HashMismatch {
                        stage: stage.to_string(),
                        path: p.display().to_string(),
                    });
                }
                log::warn!("{}: changed since it was written; continuing under --force", p.display());
            }
            hashes.insert(key, actual);
        }
        Ok(hashes)
    }

    pub fn record(&mut self, work: &Path, stage: &str, inputs: BTreeMap<String, String>, outputs: &[PathBuf], cfg: &Config) -> Result<()> {
        let mut out = BTreeMap::new();
        for p in outputs {
            out.insert(Self::key(work, p), sha256_file(p)?);
        }
        self.config_hash = cfg.hash();
        self.stages.insert(
            stage.to_string(),
            StageRecord {
                inputs,
                outputs: out,
                config_hash: cfg.hash(),
                seed: cfg.seed,
            },
        );
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_catches_edited_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let work = dir.path();
        let file = work.join("a.txt");
        fs::write(&file, "one").unwrap();
        let cfg = Config::default();
        let mut m = PipelineManifest::default();
        m.record(work, "extract", BTreeMap::new(), std::slice::from_ref(&file), &cfg).unwrap();
        m.save(work).unwrap();
        let m = PipelineManifest::load(work).unwrap();
        assert_eq!(m.stages["extract"].outputs.keys().collect::<Vec<_>>(), vec!["a.txt"]);
        assert!(m.check_inputs(work, "fuse", std::slice::from_ref(&file), false).is_ok());
        fs::write(&file, "two").unwrap();
        assert!(matches!(
            m.check_inputs(work, "fuse", std::slice::from_ref(&file), false),
            Err(Error::HashMismatch { .. })
        ));
        assert!(m.check_inputs(work, "fuse", &[file], true).is_ok());
    }
}
