//! Scoring candidate target classes and deciding Move or Stay per method.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::frontend::Corpus;
use crate::fusion::HybridSpace;
use crate::model::{ClassId, MethodId};
use crate::paths::{PathSet, METHOD_NAME_TOKEN};
use crate::training::TrainedModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Move(ClassId),
    Stay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedClass {
    pub class: ClassId,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub method: MethodId,
    #[serde(rename = "source")]
    pub source_class: ClassId,
    pub decision: Decision,
    /// Best `top_k` candidates, by probability then class id.
    pub ranked: Vec<RankedClass>,
    /// Score of the method paired with its own class.
    pub source_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecommendOptions {
    pub tau: f64,
    pub top_k: usize,
    pub compare_source: bool,
    pub linked_only: bool,
}

impl RecommendOptions {
    pub fn from_config(cfg: &Config) -> Self {
        RecommendOptions {
            tau: cfg.tau,
            top_k: cfg.top_k,
            compare_source: cfg.compare_source,
            linked_only: cfg.linked_only,
        }
    }
}

pub fn score_pair(model: &TrainedModel, hebd_method: &[f64], hebd_class: &[f64]) -> Result<f64> {
    let mut x = Vec::with_capacity(hebd_method.len() + hebd_class.len());
    x.extend_from_slice(hebd_method);
    x.extend_from_slice(hebd_class);
    model.predict_proba(&x)
}

/// Classes reachable from each method by a call edge (either direction)
/// or a shared identifier token. Tokens without letters (operators,
/// numbers) and the masked method name do not link.
fn linked_classes(corpus: &Corpus, pathsets: &[PathSet]) -> BTreeMap<MethodId, BTreeSet<ClassId>> {
    let mut out: BTreeMap<MethodId, BTreeSet<ClassId>> = BTreeMap::new();
    for (a, b) in &corpus.raw_calls {
        out.entry(a.clone()).or_default().insert(b.class());
        out.entry(b.clone()).or_default().insert(a.class());
    }
    let tokens_of = |s: &PathSet| -> BTreeSet<String> {
        s.contexts
            .iter()
            .flat_map(|c| [&c.start_token, &c.end_token])
            .filter(|t| t.as_str() != METHOD_NAME_TOKEN && t.chars().any(char::is_alphabetic))
            .cloned()
            .collect()
    };
    let method_tokens: BTreeMap<&MethodId, BTreeSet<String>> = pathsets.iter().map(|s| (&s.method, tokens_of(s))).collect();
    let mut class_of_token: BTreeMap<&str, BTreeSet<ClassId>> = BTreeMap::new();
    for (m, toks) in &method_tokens {
        for t in toks {
            class_of_token.entry(t.as_str()).or_default().insert(m.class());
        }
    }
    for (m, toks) in &method_tokens {
        let entry = out.entry((*m).clone()).or_default();
        for t in toks {
            entry.extend(class_of_token[t.as_str()].iter().cloned());
        }
    }
    out
}

/// Scores every method against every non-empty class of its project
/// other than its own. `pathsets` is only read with `linked_only`.
pub fn recommend_moves(
    model: &TrainedModel,
    corpus: &Corpus,
    space: &HybridSpace,
    pathsets: &[PathSet],
    opts: &RecommendOptions,
) -> Result<Vec<Recommendation>> {
    let links = opts.linked_only.then(|| linked_classes(corpus, pathsets));
    let classes: Vec<&ClassId> = corpus
        .classes
        .iter()
        .map(|c| &c.id)
        .filter(|c| !space.empty_classes.contains(*c))
        .collect();
    let methods: Vec<&MethodId> = corpus.methods.keys().collect();
    let scorer = model.batch_scorer();
    methods
        .par_iter()
        .map(|&m| {
            let owner = m.class();
            let hm = space.method(m)?;
            let source_prob = score_pair(model, hm, &space.pair_class(m, &owner)?)?;
            let mut candidates = Vec::new();
            let mut rows = Vec::new();
            for &c in &classes {
                if *c == owner || c.project() != owner.project() {
                    continue;
                }
                if let Some(links) = &links {
                    if !links.get(m).is_some_and(|set| set.contains(c)) {
                        continue;
                    }
                }
                let mut x = Vec::with_capacity(2 * hm.len());
                x.extend_from_slice(hm);
                x.extend_from_slice(space.class(c)?);
                candidates.push(c);
                rows.push(x);
            }
            let probs = scorer.predict_proba(&rows)?;
            let mut ranked: Vec<RankedClass> = candidates
                .into_iter()
                .zip(probs)
                .map(|(c, prob)| RankedClass { class: c.clone(), prob })
                .collect();
            ranked.sort_by(|a, b| b.prob.total_cmp(&a.prob).then_with(|| a.class.cmp(&b.class)));
            let decision = match ranked.first() {
                Some(best) if best.prob > opts.tau && (!opts.compare_source || best.prob > source_prob) => Decision::Move(best.class.clone()),
                _ => Decision::Stay,
            };
            ranked.truncate(opts.top_k.max(1));
            Ok(Recommendation {
                method: m.clone(),
                source_class: owner,
                decision,
                ranked,
                source_prob,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub methods: usize,
    pub moves: usize,
    pub stays: usize,
}

pub fn summarize(recs: &[Recommendation]) -> ReportSummary {
    let moves = recs.iter().filter(|r| matches!(r.decision, Decision::Move(_))).count();
    ReportSummary {
        methods: recs.len(),
        moves,
        stays: recs.len() - moves,
    }
}

/// One JSON object per recommendation, then `{"summary": ...}`. Each
/// line also carries the source pairing score as `source_prob`.
pub fn report_jsonl(recs: &[Recommendation]) -> String {
    #[derive(Serialize)]
    struct Line<'a> {
        method: &'a MethodId,
        source: &'a ClassId,
        decision: &'a Decision,
        ranked: &'a [RankedClass],
        source_prob: f64,
    }
    let mut out = String::new();
    for r in recs {
        let line = Line {
            method: &r.method,
            source: &r.source_class,
            decision: &r.decision,
            ranked: &r.ranked,
            source_prob: r.source_prob,
        };
        out.push_str(&serde_json::to_string(&line).expect("recommendation serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::json!({ "summary": summarize(recs) }).to_string());
    out.push('\n');
    out
}

/// Reads the recommendation lines of [`report_jsonl`] output back; the
/// summary line is skipped.
pub fn parse_report_jsonl(text: &str) -> Result<Vec<Recommendation>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with("{\"summary\"") {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: k + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn report_text(recs: &[Recommendation]) -> String {
    let width = recs.iter().map(|r| r.method.as_str().len()).max().unwrap_or(6).max(6);
    let mut out = format!("{:<width$}  {:<8}  {}\n", "method", "decision", "candidates");
    for r in recs {
        let decision = match &r.decision {
            Decision::Move(_) => "move",
            Decision::Stay => "stay",
        };
        let cands: Vec<String> = r.ranked.iter().map(|c| format!("{} ({:.3})", c.class, c.prob)).collect();
        let _ = writeln!(out, "{:<width$}  {decision:<8}  {}", r.method.as_str(), cands.join(", "));
    }
    let s = summarize(recs);
    let _ = writeln!(out, "{} methods, {} moves, {} stays", s.methods, s.moves, s.stays);
    out
}
