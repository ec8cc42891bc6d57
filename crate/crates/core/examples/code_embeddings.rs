//! Trains both path-context encoders on a corpus where each method name
//! is signalled by a few planted contexts among noise.
//!
//! cargo run --release --example code_embeddings

use rmove::code::{build_vocab, embed_code, planted_corpus, Encoder};
use rmove::config::Config;
use rmove::rng::seeded_rng;

fn main() -> rmove::Result<()> {
    let sets = planted_corpus(12, 10, 4, &seeded_rng(1));
    let vocab = build_vocab(&sets, 1, 5)?;
    let mut cfg = Config::default();
    cfg.code_dim = 32;
    for enc in Encoder::ALL {
        let e = embed_code(enc, &sets, &vocab, &cfg, &seeded_rng(2))?;
        let first = e.heldout_loss.first().copied().unwrap_or(f64::NAN);
        let last = e.heldout_loss.last().copied().unwrap_or(f64::NAN);
        println!(
            "{enc}: held-out loss {first:.3} -> {last:.3}, name accuracy {:.3}",
            e.heldout_accuracy.unwrap_or(0.0)
        );
    }
    Ok(())
}
