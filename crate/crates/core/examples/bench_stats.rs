//! Benchmarks three classifiers on one embedding combination, then tests
//! whether their per-fold F1 scores differ.
//!
//! cargo run --release --example bench_stats

use rmove::code::Encoder;
use rmove::config::Config;
use rmove::evaluation::{bench_text, generate_smelly_corpus, kruskal_wallis, pairwise_kruskal_wallis, SmellInjectionSpec};
use rmove::frontend::parse_source;
use rmove::graph::Technique;
use rmove::model::ProjectId;
use rmove::pipeline::{embed_corpus, fuse_embedded, run_bench};
use rmove::rng::seeded_rng;
use rmove::training::{cross_validate_by_method, generate_relocation_data, ClassifierKind};

fn main() -> rmove::Result<()> {
    let spec = SmellInjectionSpec::default();
    let smelly = generate_smelly_corpus(&spec)?;
    let corpus = parse_source(&ProjectId::new(&spec.project)?, &smelly.files)?;
    let mut cfg = Config::default();
    cfg.graph_dim = 32;
    cfg.code_dim = 32;
    cfg.cv_folds = 5;
    cfg.cv_repeats = 2;
    let kinds = [ClassifierKind::Rf, ClassifierKind::Lr, ClassifierKind::Nb];
    let hps: Vec<_> = kinds.iter().map(|k| k.default_params()).collect();
    let rows = run_bench(&corpus, &smelly.ground_truth, &[(Technique::DeepWalk, Encoder::Code2Vec)], &hps, &cfg)?;
    print!("{}", bench_text(&rows));

    let rng = seeded_rng(cfg.seed);
    let e = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng)?;
    let (space, _) = fuse_embedded(&corpus, &e, cfg.alpha)?;
    let samples = generate_relocation_data(&corpus, &space, &Default::default(), 1, &rng.split("samples"))?;
    let mut groups = Vec::new();
    for hp in &hps {
        let cv = cross_validate_by_method(hp, &samples, cfg.cv_folds, cfg.cv_repeats, &rng.split("cv"))?;
        groups.push(cv.rows.iter().map(|r| r.f1).collect::<Vec<f64>>());
    }
    let kw = kruskal_wallis(&groups)?;
    println!("kruskal-wallis over {} classifiers: H {:.3}, p {:.4}", groups.len(), kw.h, kw.p_value);
    for p in pairwise_kruskal_wallis(&groups)? {
        println!("  {} vs {}: adjusted p {:.4}", kinds[p.first], kinds[p.second], p.p_adjusted);
    }
    Ok(())
}
