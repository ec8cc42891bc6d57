//! Runs the whole pipeline on a synthetic corpus and prints the move
//! report, with the injected methods left out of training.
//!
//! cargo run --release --example recommend_report

use std::collections::BTreeSet;

use rmove::code::Encoder;
use rmove::config::Config;
use rmove::evaluation::{generate_smelly_corpus, SmellInjectionSpec};
use rmove::frontend::parse_source;
use rmove::graph::Technique;
use rmove::model::{MethodId, ProjectId};
use rmove::pipeline::{embed_corpus, fuse_embedded, relocation_experiment};
use rmove::recommend::{report_text, Decision};
use rmove::rng::seeded_rng;
use rmove::training::ClassifierKind;

fn main() -> rmove::Result<()> {
    let spec = SmellInjectionSpec::default();
    let smelly = generate_smelly_corpus(&spec)?;
    let corpus = parse_source(&ProjectId::new(&spec.project)?, &smelly.files)?;
    let mut cfg = Config::default();
    cfg.graph_dim = 32;
    cfg.code_dim = 32;
    cfg.cv_folds = 5;
    cfg.cv_repeats = 1;
    let rng = seeded_rng(cfg.seed);
    let e = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng)?;
    let (space, _) = fuse_embedded(&corpus, &e, cfg.alpha)?;
    let suspects: BTreeSet<MethodId> = smelly.ground_truth.iter().map(|t| t.method.clone()).collect();
    let hp = ClassifierKind::Rf.default_params();
    let run = relocation_experiment(&corpus, &space, &e.pathsets, &smelly.ground_truth, &suspects, &hp, &cfg, &rng)?;

    let moves: Vec<_> = run.recommendations.iter().filter(|r| matches!(r.decision, Decision::Move(_))).cloned().collect();
    print!("{}", report_text(&moves));
    println!(
        "precision {:.3}, recall {:.3}, f1 {:.3}",
        run.eval.precision, run.eval.recall, run.eval.f1
    );
    Ok(())
}
