use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ast::{AstNode, NodeType};
use super::parser::{parse_file, ParsedFile};
use crate::error::{Error, Result};
use crate::model::{make_method_id, ClassId, ClassRecord, MethodId, MethodRecord, ProjectId};
use crate::paths::PathContext;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodEntry {
    pub record: MethodRecord,
    /// Present for parsed methods.
    pub ast: Option<AstNode>,
    /// Present for methods ingested with pre-extracted path contexts.
    pub contexts: Option<Vec<PathContext>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub unresolved_calls: usize,
    pub ambiguous_calls: usize,
}

/// Classes, methods and resolved call edges of one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub project: ProjectId,
    /// Sorted by id.
    pub classes: Vec<ClassRecord>,
    pub methods: BTreeMap<MethodId, MethodEntry>,
    /// Resolved caller/callee pairs, one per call site.
    pub raw_calls: Vec<(MethodId, MethodId)>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub classes: usize,
    pub methods: usize,
    pub calls: usize,
    pub path_contexts: usize,
}

impl Corpus {
    pub fn empty(project: ProjectId) -> Self {
        Corpus {
            project,
            classes: Vec::new(),
            methods: BTreeMap::new(),
            raw_calls: Vec::new(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn class(&self, id: &ClassId) -> Option<&ClassRecord> {
        self.classes
            .binary_search_by(|c| c.id.cmp(id))
            .ok()
            .map(|i| &self.classes[i])
    }

    /// Pre-extracted contexts count as path contexts; parsed methods count
    /// zero until mined.
    pub fn stats(&self) -> CorpusStats {
        CorpusStats {
            classes: self.classes.len(),
            methods: self.methods.len(),
            calls: self.raw_calls.len(),
            path_contexts: self
                .methods
                .values()
                .map(|m| m.contexts.as_ref().map_or(0, Vec::len))
                .sum(),
        }
    }

    /// Drops constructors and `get`/`set`/`is` accessors together with
    /// every call edge touching them.
    pub fn without_accessors(&self) -> Corpus {
        let is_accessor = |r: &MethodRecord| {
            let n = r.name.as_str();
            let prefixed = |p: &str| {
                n.len() > p.len() && n.starts_with(p) && n[p.len()..].starts_with(|c: char| c.is_uppercase())
            };
            n == r.owner.simple_name() || prefixed("get") || prefixed("set") || prefixed("is")
        };
        let mut out = self.clone();
        out.methods.retain(|_, m| !is_accessor(&m.record));
        for c in &mut out.classes {
            c.methods.retain(|id| out.methods.contains_key(id));
        }
        out.raw_calls
            .retain(|(a, b)| out.methods.contains_key(a) && out.methods.contains_key(b));
        out
    }
}

pub fn corpus_stats(c: &Corpus) -> CorpusStats {
    c.stats()
}

fn signature_of(method: &AstNode) -> (String, Vec<String>) {
    let name = method.children[1].token().to_string();
    let params: Vec<String> = method
        .children
        .iter()
        .filter(|c| c.node_type == NodeType::Parameter)
        .map(|p| p.children[0].token().to_string())
        .collect();
    (name, params)
}

pub(crate) fn method_record(class: &ClassId, method: &AstNode) -> Result<MethodRecord> {
    let (name, params) = signature_of(method);
    let sig = format!("{name}({})", params.join(","));
    let project = class.project();
    let id = make_method_id(&project, class.class_path(), &sig)?;
    let body = method
        .children
        .last()
        .is_some_and(|c| c.node_type == NodeType::Block);
    MethodRecord::new(id, &name, params, body)
}

/// Callee name and argument count of a call node.
fn callee(call: &AstNode) -> (bool, &str, usize) {
    let target = &call.children[0];
    let argc = call.children.len() - 1;
    match target.node_type {
        NodeType::FieldAccess => (true, target.children[1].token(), argc),
        _ => (false, target.token(), argc),
    }
}

/// Parses `files` (sorted by path first) into one project corpus.
///
/// Calls resolve by name and arity: an unqualified call prefers the
/// caller's own class, otherwise a call resolves only when exactly one
/// corpus method matches. Other calls are dropped and counted.
pub fn parse_source(project: &ProjectId, files: &[(String, String)]) -> Result<Corpus> {
    let mut sorted: Vec<&(String, String)> = files.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let parsed: Vec<ParsedFile> = sorted
        .par_iter()
        .map(|(path, text)| parse_file(path, text))
        .collect::<Result<_>>()?;

    let mut corpus = Corpus::empty(project.clone());
    let mut classes: BTreeMap<ClassId, ClassRecord> = BTreeMap::new();
    for file in &parsed {
        for class in &file.classes {
            let name = class.children[0].token();
            let path = match &file.package {
                Some(pkg) => format!("{pkg}.{name}"),
                None => name.to_string(),
            };
            let cid = ClassId::new(project, &path)?;
            if classes.contains_key(&cid) {
                return Err(Error::DuplicateClass(cid.to_string()));
            }
            let mut record = ClassRecord::new(cid.clone());
            for m in class.children.iter().filter(|m| m.node_type == NodeType::MethodDeclaration) {
                let rec = method_record(&cid, m)?;
                if corpus.methods.contains_key(&rec.id) {
                    return Err(Error::DuplicateMethodSignature(rec.id.to_string()));
                }
                record.methods.insert(rec.id.clone());
                corpus.methods.insert(
                    rec.id.clone(),
                    MethodEntry {
                        record: rec,
                        ast: Some(m.clone()),
                        contexts: None,
                    },
                );
            }
            classes.insert(cid, record);
        }
    }
    corpus.classes = classes.into_values().collect();
    resolve_calls(&mut corpus);
    Ok(corpus)
}

fn resolve_calls(corpus: &mut Corpus) {
    let mut by_key: HashMap<(&str, usize), Vec<&MethodId>> = HashMap::new();
    for (id, entry) in &corpus.methods {
        by_key
            .entry((entry.record.name.as_str(), entry.record.arity()))
            .or_default()
            .push(id);
    }
    let mut calls = Vec::new();
    let mut diag = Diagnostics::default();
    for (caller, entry) in &corpus.methods {
        let Some(ast) = &entry.ast else { continue };
        let owner = &entry.record.owner;
        ast.visit(&mut |n| {
            if n.node_type != NodeType::MethodCall {
                return;
            }
            let (qualified, name, argc) = callee(n);
            let candidates = by_key.get(&(name, argc)).map(Vec::as_slice).unwrap_or(&[]);
            let own: Vec<&&MethodId> = candidates.iter().filter(|c| c.class() == *owner).collect();
            let target = if !qualified && own.len() == 1 {
                Some((*own[0]).clone())
            } else if candidates.len() == 1 {
                Some(candidates[0].clone())
            } else {
                if candidates.is_empty() {
                    diag.unresolved_calls += 1;
                } else {
                    diag.ambiguous_calls += 1;
                }
                None
            };
            if let Some(t) = target {
                calls.push((caller.clone(), t));
            }
        });
    }
    corpus.raw_calls = calls;
    corpus.diagnostics = diag;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proj() -> ProjectId {
        ProjectId::new("p").unwrap()
    }

    fn corpus(src: &str) -> Corpus {
        parse_source(&proj(), &[("A.java".into(), src.into())]).unwrap()
    }

    #[test]
    fn call_chain_edges() {
        let c = corpus(
            "class A {
                void m1() { m2(); m3(); }
                void m2() { m3(); }
                void m3() { }
            }",
        );
        let edges: Vec<(&str, &str)> = c.raw_calls.iter().map(|(a, b)| (a.name(), b.name())).collect();
        assert_eq!(edges, vec![("m1", "m2"), ("m1", "m3"), ("m2", "m3")]);
        assert_eq!(c.stats(), CorpusStats { classes: 1, methods: 3, calls: 3, path_contexts: 0 });
    }

    #[test]
    fn empty_class() {
        let c = corpus("class A {}");
        assert_eq!(c.classes.len(), 1);
        assert!(c.classes[0].methods.is_empty());
        assert!(c.raw_calls.is_empty());
    }

    #[test]
    fn empty_corpus_stats() {
        assert_eq!(Corpus::empty(proj()).stats(), CorpusStats::default());
    }

    #[test]
    fn overloads_resolve_by_arity() {
        let c = corpus("class A { void f() { g(1); g(); h(); } void g() {} void g(int x) {} }");
        let targets: Vec<&str> = c.raw_calls.iter().map(|(_, b)| b.signature()).collect();
        assert_eq!(targets, vec!["g(int)", "g()"]);
        assert_eq!(c.diagnostics.unresolved_calls, 1);
    }

    #[test]
    fn own_class_preferred_then_unique_global() {
        let c = parse_source(
            &proj(),
            &[
                ("b.java".into(), "class B { void run() { go(); } void go() {} }".into()),
                ("a.java".into(), "class A { void go() {} void only() {} void x() { go(); b.only(); b.go(); } }".into()),
            ],
        )
        .unwrap();
        let edges: Vec<(String, String)> =
            c.raw_calls.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        assert!(edges.contains(&("p::A::x()".into(), "p::A::go()".into())));
        assert!(edges.contains(&("p::A::x()".into(), "p::A::only()".into())));
        assert!(edges.contains(&("p::B::run()".into(), "p::B::go()".into())));
        assert_eq!(c.diagnostics.ambiguous_calls, 1);
    }

    #[test]
    fn duplicates_rejected() {
        let dup_class = parse_source(
            &proj(),
            &[("a".into(), "class A {}".into()), ("b".into(), "class A {}".into())],
        );
        assert!(matches!(dup_class, Err(Error::DuplicateClass(_))));
        let dup_method = parse_source(&proj(), &[("a".into(), "class A { void f() {} int f() {} }".into())]);
        assert!(matches!(dup_method, Err(Error::DuplicateMethodSignature(_))));
    }

    #[test]
    fn file_order_irrelevant() {
        let a = ("a.java".to_string(), "class A { void f() { g(); } }".to_string());
        let b = ("b.java".to_string(), "class B { void g() {} }".to_string());
        let x = parse_source(&proj(), &[a.clone(), b.clone()]).unwrap();
        let y = parse_source(&proj(), &[b, a]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn accessor_filter() {
        let c = corpus("class A { void A() {} int getX() { return x; } void setX(int v) { x = v; } boolean isOk() { return ok; } void run() { getX(); } void gets() {} }");
        let filtered = c.without_accessors();
        let kept: Vec<&str> = filtered.methods.keys().map(|m| m.name()).collect();
        assert_eq!(kept, vec!["gets", "run"]);
        assert!(filtered.raw_calls.is_empty());
    }
}
