//! Generates a corpus with injected Feature Envy, embeds it with DeepWalk
//! and code2vec, trains a random forest on the current placement and checks
//! which injected methods it sends home.
//!
//! cargo run --release --example injected_smells -- [seed] [key=value ...]

use std::collections::BTreeSet;

use rmove::code::Encoder;
use rmove::evaluation::{generate_smelly_corpus, SmellInjectionSpec};
use rmove::frontend::parse_source;
use rmove::graph::Technique;
use rmove::model::ProjectId;
use rmove::pipeline::{embed_corpus, fuse_embedded, relocation_experiment};
use rmove::recommend::Decision;
use rmove::rng::seeded_rng;
use rmove::training::ClassifierKind;
use rmove::Config;

fn main() -> rmove::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let spec = SmellInjectionSpec::default();
    let smelly = generate_smelly_corpus(&spec)?;
    let corpus = parse_source(&ProjectId::new(&spec.project)?, &smelly.files)?;

    let mut cfg = Config::default();
    cfg.seed = seed;
    cfg.graph_dim = 32;
    cfg.code_dim = 32;
    cfg.cv_folds = 5;
    cfg.cv_repeats = 1;
    for arg in std::env::args().skip(2) {
        let (key, value) = arg.split_once('=').expect("overrides look like key=value");
        cfg.set(key, value).map_err(|message| rmove::Error::Config { line: 0, message })?;
    }
    let rng = seeded_rng(seed);
    let embedded = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng)?;
    let (space, _) = fuse_embedded(&corpus, &embedded, cfg.alpha)?;
    let hp = ClassifierKind::Rf.default_params();
    let run = relocation_experiment(&corpus, &space, &embedded.pathsets, &smelly.ground_truth, &BTreeSet::new(), &hp, &cfg, &rng)?;

    println!("cv f1 {:.3} (precision {:.3}, recall {:.3})", run.cv.mean.f1, run.cv.mean.precision, run.cv.mean.recall);
    for t in &smelly.ground_truth {
        let rec = run.recommendations.iter().find(|r| r.method == t.method).expect("every method is scored");
        let top = rec.ranked.first().map_or("-".to_string(), |c| format!("{} ({:.2})", c.class, c.prob));
        let moved = matches!(&rec.decision, Decision::Move(c) if *c == t.target_class);
        println!("{:<40} home {:<28} top {top} {}", t.method.name(), t.target_class.simple_name(), if moved { "moved" } else { "" });
    }
    println!(
        "{}/{} injected methods ranked home first; recommendation f1 {:.3}; {:.3} ms per method",
        run.target_ranked_first,
        smelly.ground_truth.len(),
        run.eval.f1,
        run.infer_ms_per_method
    );
    Ok(())
}
