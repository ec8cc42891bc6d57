//! Metrics, significance testing, the injected-smell benchmark corpus, and
//! benchmark tables.

mod bench;
mod metrics;
mod stats;
mod synth;

pub use bench::{bench_csv, bench_text, parse_bench_csv, BenchRow};
pub use metrics::{compute_metrics, EvalResult, Prf};
pub use stats::{kruskal_wallis, pairwise_kruskal_wallis, KruskalWallis, PairwiseTest};
pub use synth::{generate_smelly_corpus, triples_from_jsonl, triples_to_jsonl, SmellInjectionSpec, SmellyCorpus, SYNTH_PACKAGE};
