//! Builds labeled pairs from known moves on a synthetic corpus, then
//! cross-validates every classifier and grid-searches the random forest.
//!
//! cargo run --release --example classifiers

use rmove::code::Encoder;
use rmove::config::Config;
use rmove::evaluation::{generate_smelly_corpus, SmellInjectionSpec};
use rmove::frontend::parse_source;
use rmove::graph::Technique;
use rmove::model::ProjectId;
use rmove::pipeline::{embed_corpus, fuse_embedded};
use rmove::rng::seeded_rng;
use rmove::training::{cross_validate, generate_training_data, grid_search, ClassifierKind};

fn main() -> rmove::Result<()> {
    let spec = SmellInjectionSpec {
        classes: 12,
        injected_moves: 40,
        ..SmellInjectionSpec::default()
    };
    let smelly = generate_smelly_corpus(&spec)?;
    let corpus = parse_source(&ProjectId::new(&spec.project)?, &smelly.files)?;
    let mut cfg = Config::default();
    cfg.graph_dim = 32;
    cfg.code_dim = 32;
    let rng = seeded_rng(cfg.seed);
    let e = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng)?;
    let (space, _) = fuse_embedded(&corpus, &e, cfg.alpha)?;
    let samples = generate_training_data(&smelly.ground_truth, &space)?;
    println!("{} samples from {} moves", samples.len(), smelly.ground_truth.len());

    for kind in ClassifierKind::ALL {
        let cv = cross_validate(&kind.default_params(), &samples, 5, 2, &rng.split(kind.as_str()))?;
        println!("{:<4} f1 {:.3}", kind.as_str(), cv.mean.f1);
    }
    let grid = ClassifierKind::Rf.default_grid();
    let found = grid_search(ClassifierKind::Rf, &samples, &grid, 3, &rng.split("grid"))?;
    println!("best of {} forests: {}", grid.len(), found.best);
    Ok(())
}
