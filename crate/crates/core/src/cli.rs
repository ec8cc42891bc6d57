//! The `rmove` command line: one subcommand per pipeline stage, each
//! reading and writing artifacts in a work directory.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::code::{build_vocab, embed_code, Encoder};
use crate::config::Config;
use crate::depgraph::{build_mdg, MethodDependencyGraph};
use crate::error::{Error, Result};
use crate::evaluation::{
    bench_csv, bench_text, compute_metrics, generate_smelly_corpus, triples_from_jsonl, triples_to_jsonl, SmellInjectionSpec,
};
use crate::frontend::{export_facts, ingest_facts, parse_source, Corpus};
use crate::fusion::{table_vectors, FusionNormalizers, HybridSpace};
use crate::graph::{embed_graph, Technique};
use crate::model::{MethodId, ProjectId};
use crate::paths::{mine_corpus, PathLimits, PathSet};
use crate::persist::{index_path, EmbeddingTable};
use crate::pipeline::{run_bench, PipelineManifest};
use crate::recommend::{parse_report_jsonl, recommend_moves, report_jsonl, report_text, summarize, RecommendOptions};
use crate::rng::{seeded_rng, RandomStream};
use crate::training::{
    cross_validate_by_method, generate_relocation_data, generate_training_data, grid_search, train_classifier, ClassifierKind, LabeledSample,
    TrainedModel,
};

const CORPUS_FILE: &str = "corpus.facts.jsonl";
const MDG_FILE: &str = "mdg.edges";
const HYBRID_FILE: &str = "hybrid.emb";
const NORMALIZERS_FILE: &str = "normalizers.json";
const SAMPLES_FILE: &str = "samples.jsonl";
const MODEL_FILE: &str = "model.rmmdl";
const CV_FILE: &str = "cv.json";
const RECOMMENDATIONS_FILE: &str = "recommendations.jsonl";
const EVAL_FILE: &str = "eval.json";
const BENCH_FILE: &str = "bench.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

#[derive(Debug, Parser)]
#[command(name = "rmove", version, about = "Move Method refactoring recommendation from fused code and call-graph embeddings")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Runs on a single worker thread.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Overrides one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Directory holding the stage artifacts and `manifest.json`.
    #[arg(short, long, global = true, default_value = "work")]
    pub work: PathBuf,
    /// Runs a stage even when its inputs changed since they were written.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse sources (or ingest facts) into a corpus, path contexts and the method dependency graph.
    Extract(ExtractArgs),
    /// Embed the method dependency graph.
    EmbedGraph(TechniqueArgs),
    /// Embed methods from their path contexts.
    EmbedCode(EncoderArgs),
    /// Normalize and fuse code and graph embeddings into hybrid vectors.
    Fuse(FuseArgs),
    /// Build labeled (method, class) samples.
    GenData(GenDataArgs),
    /// Train a classifier on the samples.
    Train(TrainArgs),
    /// Score candidate classes for every method.
    Recommend(RecommendArgs),
    /// Compare recommendations with ground-truth moves.
    Evaluate(EvaluateArgs),
    /// Cross-validate embedding and classifier combinations on one corpus.
    Bench(BenchArgs),
    /// Write a synthetic corpus with injected Feature Envy.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory searched recursively for `.java` files.
    #[arg(long, value_name = "DIR", conflicts_with = "facts", required_unless_present = "facts")]
    pub src: Option<PathBuf>,
    /// Facts JSONL file instead of sources.
    #[arg(long, value_name = "FILE")]
    pub facts: Option<PathBuf>,
    /// Project name for parsed sources.
    #[arg(long, default_value = "synth")]
    pub project: String,
}

#[derive(Debug, Args)]
pub struct TechniqueArgs {
    /// deepwalk, node2vec, walklets, grarep, line, prone or sdne.
    #[arg(long, default_value = "deepwalk")]
    pub technique: String,
}

#[derive(Debug, Args)]
pub struct EncoderArgs {
    /// code2vec or code2seq.
    #[arg(long, default_value = "code2vec")]
    pub encoder: String,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[command(flatten)]
    pub technique: TechniqueArgs,
    #[command(flatten)]
    pub encoder: EncoderArgs,
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// Ground-truth move triples (JSONL); without it, samples come from the current placement.
    #[arg(long, value_name = "FILE")]
    pub triples: Option<PathBuf>,
    /// Triples whose methods give no placement samples.
    #[arg(long, value_name = "FILE", conflicts_with = "triples")]
    pub exclude: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// dt, nb, svm, lr, rf or gbt (xgb is accepted for gbt).
    #[arg(long, default_value = "rf")]
    pub classifier: String,
    /// Tunes on the default grid with `grid_folds` folds.
    #[arg(long)]
    pub grid: bool,
    /// Also runs `cv_repeats` × `cv_folds` cross-validation and writes cv.json.
    #[arg(long)]
    pub cv: bool,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    /// Model file; defaults to the one in the work directory.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Overrides the `tau` key
    #[arg(long)]
    pub tau: Option<f64>,
    /// Overrides the `top_k` key
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Only consider classes linked to the method by a call or a shared token.
    #[arg(long)]
    pub linked_only: bool,
    /// Prints JSON lines instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    pub ground_truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Source directory; the work-directory corpus when absent.
    #[arg(long, value_name = "DIR")]
    pub src: Option<PathBuf>,
    #[arg(long, default_value = "synth")]
    pub project: String,
    #[arg(long, value_name = "FILE")]
    pub ground_truth: PathBuf,
    /// Comma-separated graph techniques.
    #[arg(long, default_value = "deepwalk")]
    pub techniques: String,
    /// Comma-separated code encoders.
    #[arg(long, default_value = "code2vec")]
    pub encoders: String,
    /// Comma-separated classifiers.
    #[arg(long, default_value = "rf")]
    pub classifiers: String,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    pub classes: usize,
    #[arg(long, default_value_t = 8)]
    pub methods_per_class: usize,
    #[arg(long, default_value_t = 3)]
    pub calls: usize,
    /// Number of injected misplaced methods.
    #[arg(long, default_value_t = 10)]
    pub moves: usize,
    #[arg(long, default_value = "synth")]
    pub project: String,
    /// Output directory.
    #[arg(short, long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the subcommand and returns
/// the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    configure_threads(cli.global.deterministic);
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads(deterministic: bool) {
    let from_env = std::env::var("RMOVE_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok());
    let threads = match (deterministic, from_env) {
        (true, _) | (_, Some(0)) => Some(1),
        (false, n) => n,
    };
    if let Some(n) = threads {
        // a second call in one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_config(g: &GlobalArgs) -> Result<Config> {
    let mut cfg = match &g.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    for o in &g.overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| Error::InvalidParameter(format!("--set expects KEY=VALUE, got `{o}`")))?;
        cfg.set(key.trim(), value.trim()).map_err(|message| Error::Config { line: 0, message })?;
    }
    if let Some(seed) = g.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Stage<'a> {
    name: &'static str,
    work: &'a Path,
    force: bool,
    cfg: &'a Config,
    manifest: PipelineManifest,
}

impl<'a> Stage<'a> {
    fn open(name: &'static str, g: &'a GlobalArgs, cfg: &'a Config) -> Result<Self> {
        fs::create_dir_all(&g.work).map_err(|e| Error::io(&g.work, e))?;
        Ok(Stage {
            name,
            work: &g.work,
            force: g.force,
            cfg,
            manifest: PipelineManifest::load(&g.work)?,
        })
    }

    fn path(&self, file: &str) -> PathBuf {
        self.work.join(file)
    }

    fn rng(&self) -> RandomStream {
        seeded_rng(self.cfg.seed)
    }

    /// Checks `inputs` against the manifest, runs `body`, then records the
    /// files it returns.
    fn run(mut self, inputs: Vec<PathBuf>, body: impl FnOnce(&Self) -> Result<Vec<PathBuf>>) -> Result<()> {
        let hashes = self.manifest.check_inputs(self.work, self.name, &inputs, self.force)?;
        let outputs = body(&self)?;
        self.manifest.record(self.work, self.name, hashes, &outputs, self.cfg)?;
        self.manifest.save(self.work)
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// `.java` files under `dir`, as (path relative to `dir`, text), sorted.
fn java_sources(dir: &Path) -> Result<Vec<(String, String)>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, PathBuf)>) -> Result<()> {
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else if path.extension().is_some_and(|x| x == "java") {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
                out.push((rel, path));
            }
        }
        Ok(())
    }
    let mut found = Vec::new();
    walk(dir, dir, &mut found)?;
    found.sort();
    found.into_iter().map(|(rel, p)| Ok((rel, read_text(&p)?))).collect()
}

fn load_corpus(stage: &Stage) -> Result<Corpus> {
    ingest_facts(&read_text(&stage.path(CORPUS_FILE))?)
}

fn corpus_paths(corpus: &Corpus, cfg: &Config) -> Result<Vec<PathSet>> {
    mine_corpus(corpus, &PathLimits::from_config(cfg), &seeded_rng(cfg.seed).split("paths"))
}

fn graph_file(t: Technique) -> String {
    format!("graph.{t}.emb")
}

fn code_file(e: Encoder) -> String {
    format!("code.{e}.emb")
}

fn with_index(path: PathBuf) -> Vec<PathBuf> {
    let idx = index_path(&path);
    vec![path, idx]
}

fn parse_list<T: std::str::FromStr<Err = Error>>(list: &str) -> Result<Vec<T>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse()).collect()
}

fn dispatch(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let cfg = load_config(g)?;
    match &cli.command {
        Command::Extract(a) => extract(a, g, &cfg),
        Command::EmbedGraph(a) => embed_graph_stage(a, g, &cfg),
        Command::EmbedCode(a) => embed_code_stage(a, g, &cfg),
        Command::Fuse(a) => fuse(a, g, &cfg),
        Command::GenData(a) => gen_data(a, g, &cfg),
        Command::Train(a) => train(a, g, &cfg),
        Command::Recommend(a) => recommend(a, g, &cfg),
        Command::Evaluate(a) => evaluate(a, g, &cfg),
        Command::Bench(a) => bench(a, g, &cfg),
        Command::Synth(a) => synth(a, &cfg),
    }
}

fn extract(a: &ExtractArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let stage = Stage::open("extract", g, cfg)?;
    let inputs: Vec<PathBuf> = match (&a.facts, &a.src) {
        (Some(f), _) => vec![f.clone()],
        (None, Some(dir)) => java_sources(dir)?.into_iter().map(|(rel, _)| dir.join(rel)).collect(),
        (None, None) => return Err(Error::InvalidParameter("extract needs --src or --facts".into())),
    };
    stage.run(inputs, |s| {
        let corpus = match (&a.facts, &a.src) {
            (Some(f), _) => ingest_facts(&read_text(f)?)?,
            (_, Some(dir)) => parse_source(&ProjectId::new(&a.project)?, &java_sources(dir)?)?,
            _ => unreachable!("checked above"),
        };
        let corpus = if cfg.exclude_accessors { corpus.without_accessors() } else { corpus };
        let pathsets = corpus_paths(&corpus, cfg)?;
        let mdg = build_mdg(&corpus);
        let facts = write_text(&s.path(CORPUS_FILE), &export_facts(&corpus, &pathsets))?;
        let edges = write_text(&s.path(MDG_FILE), &mdg.to_edge_list())?;
        let st = corpus.stats();
        let contexts: usize = pathsets.iter().map(|p| p.contexts.len()).sum();
        println!(
            "{} classes, {} methods, {} calls, {contexts} path contexts, {} graph edges",
            st.classes,
            st.methods,
            st.calls,
            mdg.edges.len()
        );
        let d = &corpus.diagnostics;
        if d.unresolved_calls + d.ambiguous_calls > 0 {
            eprintln!("{} unresolved and {} ambiguous calls dropped", d.unresolved_calls, d.ambiguous_calls);
        }
        Ok(vec![facts, edges])
    })
}

fn load_mdg(stage: &Stage, corpus: &Corpus) -> Result<MethodDependencyGraph> {
    let path = stage.path(MDG_FILE);
    MethodDependencyGraph::from_edge_list(&read_text(&path)?, corpus.methods.keys().cloned().collect(), &path)
}

fn embed_graph_stage(a: &TechniqueArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let technique: Technique = a.technique.parse()?;
    let stage = Stage::open("embed-graph", g, cfg)?;
    let inputs = vec![stage.path(CORPUS_FILE), stage.path(MDG_FILE)];
    stage.run(inputs, |s| {
        let corpus = load_corpus(s)?;
        let mdg = load_mdg(s, &corpus)?;
        let emb = embed_graph(technique, &mdg, cfg, &s.rng().split("graph"))?;
        let out = s.path(&graph_file(technique));
        EmbeddingTable::from_graph(&emb, &mdg)?.write(&out)?;
        print!("{technique}: {} nodes, dim {}", emb.vectors.len(), emb.dim);
        match emb.losses.last() {
            Some(l) => println!(", final loss {l:.6}"),
            None => println!(),
        }
        Ok(with_index(out))
    })
}

fn embed_code_stage(a: &EncoderArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let encoder: Encoder = a.encoder.parse()?;
    let stage = Stage::open("embed-code", g, cfg)?;
    let inputs = vec![stage.path(CORPUS_FILE)];
    stage.run(inputs, |s| {
        let corpus = load_corpus(s)?;
        let pathsets = corpus_paths(&corpus, cfg)?;
        let vocab = build_vocab(&pathsets, cfg.code_min_count, cfg.code_subtokens)?;
        let emb = embed_code(encoder, &pathsets, &vocab, cfg, &s.rng().split("code"))?;
        let out = s.path(&code_file(encoder));
        EmbeddingTable::from_code(&emb)?.write(&out)?;
        let vocab_out = write_text(&s.path(&format!("vocab.{encoder}.json")), &vocab.to_json())?;
        print!("{encoder}: {} methods, dim {}", emb.vectors.len(), emb.dim);
        match emb.heldout_accuracy {
            Some(acc) => println!(", held-out name accuracy {acc:.3}"),
            None => println!(),
        }
        if !emb.no_contexts.is_empty() {
            eprintln!("{} methods without path contexts get zero vectors", emb.no_contexts.len());
        }
        let mut outs = with_index(out);
        outs.push(vocab_out);
        Ok(outs)
    })
}

fn fuse(a: &FuseArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let technique: Technique = a.technique.technique.parse()?;
    let encoder: Encoder = a.encoder.encoder.parse()?;
    let stage = Stage::open("fuse", g, cfg)?;
    let graph_path = stage.path(&graph_file(technique));
    let code_path = stage.path(&code_file(encoder));
    let mut inputs = vec![stage.path(CORPUS_FILE)];
    inputs.extend(with_index(graph_path.clone()));
    inputs.extend(with_index(code_path.clone()));
    stage.run(inputs, |s| {
        let corpus = load_corpus(s)?;
        let graph = table_vectors(&EmbeddingTable::read(&graph_path)?)?;
        let code = table_vectors(&EmbeddingTable::read(&code_path)?)?;
        let norms = FusionNormalizers::fit(&code, &graph)?;
        let space = HybridSpace::build(&corpus, &code, &graph, &norms, cfg.alpha)?;
        let out = s.path(HYBRID_FILE);
        space.to_table()?.write(&out)?;
        let norms_out = write_text(&s.path(NORMALIZERS_FILE), &norms.to_json())?;
        println!(
            "{} methods and {} classes fused at dim {} (alpha {}); {} empty classes",
            space.methods.len(),
            space.classes.len(),
            space.dim,
            cfg.alpha,
            space.empty_classes.len()
        );
        let mut outs = with_index(out);
        outs.push(norms_out);
        Ok(outs)
    })
}

fn load_space(s: &Stage, corpus: &Corpus) -> Result<HybridSpace> {
    HybridSpace::from_table(&EmbeddingTable::read(&s.path(HYBRID_FILE))?, corpus)
}

fn gen_data(a: &GenDataArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let stage = Stage::open("gen-data", g, cfg)?;
    let mut inputs = vec![stage.path(CORPUS_FILE)];
    inputs.extend(with_index(stage.path(HYBRID_FILE)));
    inputs.extend(a.triples.iter().chain(&a.exclude).cloned());
    stage.run(inputs, |s| {
        let corpus = load_corpus(s)?;
        let space = load_space(s, &corpus)?;
        let samples = match &a.triples {
            Some(path) => generate_training_data(&triples_from_jsonl(&read_text(path)?)?, &space)?,
            None => {
                let exclude: BTreeSet<MethodId> = match &a.exclude {
                    Some(path) => triples_from_jsonl(&read_text(path)?)?.into_iter().map(|t| t.method).collect(),
                    None => BTreeSet::new(),
                };
                generate_relocation_data(&corpus, &space, &exclude, cfg.relocation_pairs, &s.rng().split("samples"))?
            }
        };
        let text: String = samples
            .iter()
            .map(|x| serde_json::to_string(x).expect("sample serializes") + "\n")
            .collect();
        let out = write_text(&s.path(SAMPLES_FILE), &text)?;
        let positives = samples.iter().filter(|x| x.label).count();
        println!("{} samples: {positives} positive, {} negative", samples.len(), samples.len() - positives);
        Ok(vec![out])
    })
}

fn read_samples(path: &Path) -> Result<Vec<LabeledSample>> {
    read_text(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::MalformedRecord {
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn train(a: &TrainArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let kind: ClassifierKind = a.classifier.parse()?;
    let stage = Stage::open("train", g, cfg)?;
    let inputs = vec![stage.path(SAMPLES_FILE), stage.path(NORMALIZERS_FILE)];
    stage.run(inputs, |s| {
        let samples = read_samples(&s.path(SAMPLES_FILE))?;
        let norms = FusionNormalizers::from_json(&read_text(&s.path(NORMALIZERS_FILE))?)?;
        let rng = s.rng().split("train");
        let model = if a.grid {
            let found = grid_search(kind, &samples, &kind.default_grid(), cfg.grid_folds, &rng)?;
            println!("grid winner {}", found.best);
            found.model
        } else {
            train_classifier(kind, &samples, &kind.default_params(), &rng)?
        };
        let model = model.with_provenance(&norms.hash(), &cfg.to_text());
        let out = s.path(MODEL_FILE);
        model.write(&out)?;
        let mut outs = vec![out];
        if a.cv {
            let report = cross_validate_by_method(&model.hyperparams, &samples, cfg.cv_folds, cfg.cv_repeats, &s.rng().split("cv"))?;
            println!(
                "{} x {} cross-validation: precision {:.3}, recall {:.3}, f1 {:.3}",
                cfg.cv_repeats, cfg.cv_folds, report.mean.precision, report.mean.recall, report.mean.f1
            );
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            outs.push(write_text(&s.path(CV_FILE), &text)?);
        }
        println!("trained {} on {} samples", model.hyperparams, samples.len());
        Ok(outs)
    })
}

fn recommend(a: &RecommendArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let stage = Stage::open("recommend", g, cfg)?;
    let model_path = a.model.clone().unwrap_or_else(|| stage.path(MODEL_FILE));
    let mut inputs = vec![stage.path(CORPUS_FILE), model_path.clone(), stage.path(NORMALIZERS_FILE)];
    inputs.extend(with_index(stage.path(HYBRID_FILE)));
    stage.run(inputs, |s| {
        let corpus = load_corpus(s)?;
        let space = load_space(s, &corpus)?;
        let model = TrainedModel::read(&model_path, Some(2 * space.dim))?;
        let norms = FusionNormalizers::from_json(&read_text(&s.path(NORMALIZERS_FILE))?)?;
        if model.normalizer_hash != norms.hash() && !s.force {
            return Err(Error::HashMismatch {
                stage: s.name.into(),
                path: model_path.display().to_string(),
            });
        }
        let mut opts = RecommendOptions::from_config(cfg);
        opts.tau = a.tau.unwrap_or(opts.tau);
        opts.top_k = a.top_k.unwrap_or(opts.top_k);
        opts.linked_only |= a.linked_only;
        let pathsets = if opts.linked_only { corpus_paths(&corpus, cfg)? } else { Vec::new() };
        let recs = recommend_moves(&model, &corpus, &space, &pathsets, &opts)?;
        let jsonl = report_jsonl(&recs);
        let out = write_text(&s.path(RECOMMENDATIONS_FILE), &jsonl)?;
        if a.json {
            print!("{jsonl}");
        } else {
            print!("{}", report_text(&recs));
        }
        let sum = summarize(&recs);
        log::info!("{} moves among {} methods", sum.moves, sum.methods);
        Ok(vec![out])
    })
}

fn evaluate(a: &EvaluateArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let stage = Stage::open("evaluate", g, cfg)?;
    let inputs = vec![stage.path(RECOMMENDATIONS_FILE), a.ground_truth.clone()];
    stage.run(inputs, |s| {
        let recs = parse_report_jsonl(&read_text(&s.path(RECOMMENDATIONS_FILE))?)?;
        let truth = triples_from_jsonl(&read_text(&a.ground_truth)?)?;
        let result = compute_metrics(&recs, &truth);
        let json = serde_json::to_string_pretty(&result).expect("result serializes") + "\n";
        print!("{json}");
        Ok(vec![write_text(&s.path(EVAL_FILE), &json)?])
    })
}

fn bench(a: &BenchArgs, g: &GlobalArgs, cfg: &Config) -> Result<()> {
    let techniques: Vec<Technique> = parse_list(&a.techniques)?;
    let encoders: Vec<Encoder> = parse_list(&a.encoders)?;
    let classifiers: Vec<ClassifierKind> = parse_list(&a.classifiers)?;
    let stage = Stage::open("bench", g, cfg)?;
    let mut inputs = vec![a.ground_truth.clone()];
    match &a.src {
        Some(dir) => inputs.extend(java_sources(dir)?.into_iter().map(|(rel, _)| dir.join(rel))),
        None => inputs.push(stage.path(CORPUS_FILE)),
    }
    stage.run(inputs, |s| {
        let corpus = match &a.src {
            Some(dir) => parse_source(&ProjectId::new(&a.project)?, &java_sources(dir)?)?,
            None => load_corpus(s)?,
        };
        let truth = triples_from_jsonl(&read_text(&a.ground_truth)?)?;
        let combos: Vec<(Technique, Encoder)> = techniques.iter().flat_map(|&t| encoders.iter().map(move |&e| (t, e))).collect();
        let hps: Vec<_> = classifiers.iter().map(|k| k.default_params()).collect();
        let rows = run_bench(&corpus, &truth, &combos, &hps, cfg)?;
        print!("{}", bench_text(&rows));
        Ok(vec![write_text(&s.path(BENCH_FILE), &bench_csv(&rows))?])
    })
}

fn synth(a: &SynthArgs, cfg: &Config) -> Result<()> {
    let spec = SmellInjectionSpec {
        project: a.project.clone(),
        classes: a.classes,
        methods_per_class: a.methods_per_class,
        calls_per_method: a.calls,
        injected_moves: a.moves,
        seed: cfg.seed,
    };
    let corpus = generate_smelly_corpus(&spec)?;
    for (rel, text) in &corpus.files {
        write_text(&a.out.join(rel), text)?;
    }
    write_text(&a.out.join(GROUND_TRUTH_FILE), &triples_to_jsonl(&corpus.ground_truth))?;
    println!(
        "{} classes, {} methods, {} injected moves (seed {}) written to {}",
        spec.classes,
        spec.classes * spec.methods_per_class,
        corpus.ground_truth.len(),
        spec.seed,
        a.out.display()
    );
    Ok(())
}
