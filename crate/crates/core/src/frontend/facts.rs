//! Neutral facts JSONL: one `class`, `method`, `call`, or `path_context`
//! record per line, for corpora pre-extracted by external tools.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::corpus::{Corpus, MethodEntry};
use super::parser::parse_method;
use crate::error::{Error, Result};
use crate::model::{ClassId, ClassRecord, MethodId, MethodRecord, ProjectId};
use crate::paths::{PathContext, PathNode, PathSet};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Class {
        id: String,
        project: String,
    },
    Method {
        id: String,
        class: String,
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<Vec<String>>,
        /// Method source in the subset grammar; parsed into an AST.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        source: Option<String>,
    },
    Call {
        src: String,
        dst: String,
    },
    PathContext {
        method: String,
        start: String,
        nodes: Vec<PathNode>,
        end: String,
    },
}

const DEFAULT_PROJECT: &str = "facts";

/// Reads facts strictly in line order; references must point to records
/// on earlier lines.
pub fn ingest_facts(stream: &str) -> Result<Corpus> {
    let mut project: Option<ProjectId> = None;
    let mut classes: BTreeMap<ClassId, ClassRecord> = BTreeMap::new();
    let mut methods: BTreeMap<MethodId, MethodEntry> = BTreeMap::new();
    let mut calls = Vec::new();

    for (idx, line) in stream.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::MalformedRecord {
            line: line_no,
            message,
        };
        let record: Record = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        match record {
            Record::Class { id, project: p } => {
                let pid = ProjectId::new(&p).map_err(|e| bad(e.to_string()))?;
                let cid = ClassId::parse(&id).map_err(|e| bad(e.to_string()))?;
                if cid.project() != pid {
                    return Err(bad(format!("class `{id}` is not in project `{p}`")));
                }
                match &project {
                    Some(existing) if *existing != pid => {
                        return Err(bad(format!("second project `{p}` in one facts stream")))
                    }
                    _ => project = Some(pid),
                }
                if classes.contains_key(&cid) {
                    return Err(bad(format!("duplicate class `{id}`")));
                }
                classes.insert(cid.clone(), ClassRecord::new(cid));
            }
            Record::Method {
                id,
                class,
                name,
                params,
                source,
            } => {
                let mid = MethodId::parse(&id).map_err(|e| bad(e.to_string()))?;
                let cid = ClassId::parse(&class).map_err(|e| bad(e.to_string()))?;
                if mid.class() != cid {
                    return Err(bad(format!("method `{id}` does not belong to `{class}`")));
                }
                let Some(owner) = classes.get_mut(&cid) else {
                    return Err(Error::DanglingReference { kind: "class", id: class });
                };
                if methods.contains_key(&mid) {
                    return Err(bad(format!("duplicate method `{id}`")));
                }
                let ast = match &source {
                    Some(src) => Some(parse_method(&format!("facts line {line_no}"), src)?),
                    None => None,
                };
                let params = params.unwrap_or_else(|| params_from_signature(mid.signature()));
                let record = MethodRecord::new(mid.clone(), &name, params, ast.is_some())
                    .map_err(|e| bad(e.to_string()))?;
                owner.methods.insert(mid.clone());
                let contexts = if ast.is_some() { None } else { Some(Vec::new()) };
                methods.insert(mid, MethodEntry { record, ast, contexts });
            }
            Record::Call { src, dst } => {
                let a = lookup(&methods, &src)?;
                let b = lookup(&methods, &dst)?;
                calls.push((a, b));
            }
            Record::PathContext {
                method,
                start,
                nodes,
                end,
            } => {
                let mid = lookup(&methods, &method)?;
                if nodes.is_empty() {
                    return Err(bad("path context without nodes".into()));
                }
                let entry = methods.get_mut(&mid).unwrap();
                let Some(list) = entry.contexts.as_mut() else {
                    return Err(Error::MixedModes(method));
                };
                list.push(PathContext {
                    start_token: start,
                    node_types: nodes,
                    end_token: end,
                });
            }
        }
    }

    let project = project.unwrap_or_else(|| ProjectId::new(DEFAULT_PROJECT).unwrap());
    let mut corpus = Corpus::empty(project);
    corpus.classes = classes.into_values().collect();
    corpus.methods = methods;
    corpus.raw_calls = calls;
    Ok(corpus)
}

fn lookup(methods: &BTreeMap<MethodId, MethodEntry>, raw: &str) -> Result<MethodId> {
    MethodId::parse(raw)
        .ok()
        .filter(|id| methods.contains_key(id))
        .ok_or_else(|| Error::DanglingReference {
            kind: "method",
            id: raw.to_string(),
        })
}

fn params_from_signature(sig: &str) -> Vec<String> {
    let inner = sig
        .split_once('(')
        .map(|(_, rest)| rest.trim_end_matches(')'))
        .unwrap_or("");
    inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

/// Writes a corpus and its mined path sets as facts JSONL. Ingesting the
/// output reproduces the classes, methods, calls and contexts.
pub fn export_facts(corpus: &Corpus, pathsets: &[PathSet]) -> String {
    let by_method: BTreeMap<&MethodId, &PathSet> = pathsets.iter().map(|p| (&p.method, p)).collect();
    let mut out = String::new();
    let mut emit = |r: &Record| {
        let _ = writeln!(out, "{}", serde_json::to_string(r).expect("facts records serialize"));
    };
    for class in &corpus.classes {
        emit(&Record::Class {
            id: class.id.to_string(),
            project: class.project.to_string(),
        });
    }
    for (id, entry) in &corpus.methods {
        emit(&Record::Method {
            id: id.to_string(),
            class: entry.record.owner.to_string(),
            name: entry.record.name.clone(),
            params: Some(entry.record.param_types.clone()),
            source: None,
        });
    }
    for (a, b) in &corpus.raw_calls {
        emit(&Record::Call {
            src: a.to_string(),
            dst: b.to_string(),
        });
    }
    for (id, entry) in &corpus.methods {
        let contexts = by_method
            .get(id)
            .map(|p| p.contexts.as_slice())
            .or(entry.contexts.as_deref())
            .unwrap_or(&[]);
        for c in contexts {
            emit(&Record::PathContext {
                method: id.to_string(),
                start: c.start_token.clone(),
                nodes: c.node_types.clone(),
                end: c.end_token.clone(),
            });
        }
    }
    out
}

/// Only the `path_context` lines for the given path sets.
pub fn export_path_contexts(pathsets: &[PathSet]) -> String {
    let mut out = String::new();
    for set in pathsets {
        for c in &set.contexts {
            let r = Record::PathContext {
                method: set.method.to_string(),
                start: c.start_token.clone(),
                nodes: c.node_types.clone(),
                end: c.end_token.clone(),
            };
            let _ = writeln!(out, "{}", serde_json::to_string(&r).expect("facts records serialize"));
        }
    }
    out
}
