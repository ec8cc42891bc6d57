//! Synthetic corpora with injected Feature Envy.
//!
//! Each class gets an identifier theme (`order`, `ledger`, ...) used by its
//! field, locals and method names, and its methods call one another. An
//! injected method is written into a different class but keeps its theme
//! and its calls, so it envies the class it came from.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{make_method_id, ClassId, MoveMethodTriple, ProjectId};
use crate::rng::{seeded_rng, RandomStream};

const THEMES: [&str; 24] = [
    "order", "invoice", "customer", "stock", "payment", "account", "shipment", "ledger", "sensor", "route", "ticket", "badge", "recipe",
    "planet", "garden", "vessel", "lesson", "parcel", "tenant", "canvas", "engine", "harbor", "signal", "meadow",
];
const QUALIFIERS: [&str; 8] = ["north", "amber", "rapid", "quiet", "silver", "hollow", "bright", "cedar"];
const VERBS: [&str; 10] = ["load", "store", "check", "update", "compute", "merge", "find", "apply", "scale", "close"];
const ATTRS: [&str; 8] = ["total", "count", "limit", "level", "weight", "price", "rate", "size"];

pub const SYNTH_PACKAGE: &str = "synth";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmellInjectionSpec {
    pub project: String,
    pub classes: usize,
    pub methods_per_class: usize,
    /// Calls from each method to other, non-injected methods of its class.
    pub calls_per_method: usize,
    pub injected_moves: usize,
    pub seed: u64,
}

impl Default for SmellInjectionSpec {
    fn default() -> Self {
        SmellInjectionSpec {
            project: "synth".into(),
            classes: 10,
            methods_per_class: 8,
            calls_per_method: 3,
            injected_moves: 10,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmellyCorpus {
    /// `(path, source)` per class, sorted by path.
    pub files: Vec<(String, String)>,
    /// One triple per injected method: from the class it was written into
    /// back to the class it belongs to.
    pub ground_truth: Vec<MoveMethodTriple>,
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next().map_or(String::new(), |f| f.to_ascii_uppercase().to_string() + c.as_str())
}

/// Distinct per index: a base word, prefixed by qualifiers counting up.
fn theme(i: usize) -> String {
    let base = THEMES[i % THEMES.len()];
    let mut k = i / THEMES.len();
    if k == 0 {
        return base.to_string();
    }
    let mut prefix = Vec::new();
    while k > 0 {
        k -= 1;
        prefix.push(QUALIFIERS[k % QUALIFIERS.len()]);
        k /= QUALIFIERS.len();
    }
    let mut out = prefix[0].to_string();
    for q in &prefix[1..] {
        out.push_str(&capitalize(q));
    }
    out + &capitalize(base)
}

struct Method {
    name: String,
    home: usize,
    callees: Vec<usize>,
}

fn method_body(out: &mut String, m: &Method, methods: &[Method], theme: &str, rng: &mut RandomStream) {
    let attr = |r: &mut RandomStream| format!("{theme}{}", capitalize(ATTRS[r.below(ATTRS.len())]));
    let field = format!("{theme}Count");
    let local = attr(rng);
    let _ = writeln!(out, "    int {}(int {theme}Id) {{", m.name);
    let _ = writeln!(out, "        int {local} = {theme}Id * {} + {field};", 2 + rng.below(7));
    for (k, &c) in m.callees.iter().enumerate() {
        let callee = &methods[c].name;
        match (k + rng.below(3)) % 3 {
            0 => {
                let _ = writeln!(out, "        if ({local} > {}) {{\n            {local} = {callee}({local});\n        }}", rng.below(50));
            }
            1 => {
                let other = attr(rng);
                let _ = writeln!(out, "        {local} = {local} + {callee}({theme}Id) - {other};");
            }
            _ => {
                let _ = writeln!(out, "        {field} = {callee}({field} + {local});");
            }
        }
    }
    let _ = writeln!(out, "        return {local} > {field} ? {local} : {field};");
    let _ = writeln!(out, "    }}");
}

/// Writes the corpus described by `spec`; equal specs give byte-identical
/// output.
pub fn generate_smelly_corpus(spec: &SmellInjectionSpec) -> Result<SmellyCorpus> {
    let infeasible = |msg: String| Err(Error::SpecInfeasible(msg));
    let project = ProjectId::new(&spec.project)?;
    let total = spec.classes * spec.methods_per_class;
    if spec.classes == 0 || spec.methods_per_class == 0 {
        return infeasible("no classes or no methods".into());
    }
    if spec.injected_moves > total {
        return infeasible(format!("{} injected moves exceed {total} methods", spec.injected_moves));
    }
    if spec.injected_moves > 0 && spec.classes < 2 {
        return infeasible("injection needs at least two classes".into());
    }
    let per_class = spec.injected_moves.div_ceil(spec.classes);
    if spec.methods_per_class < per_class + spec.calls_per_method + 1 {
        return infeasible(format!(
            "{} methods per class cannot hold {per_class} injected methods and {} callees each",
            spec.methods_per_class, spec.calls_per_method
        ));
    }
    let root = seeded_rng(spec.seed).split("synth");

    // injected slots are dealt round-robin over a shuffled class order
    let mut class_order: Vec<usize> = (0..spec.classes).collect();
    root.split("classes").shuffle(&mut class_order);
    let mut injected_in = vec![0usize; spec.classes];
    for k in 0..spec.injected_moves {
        injected_in[class_order[k % spec.classes]] += 1;
    }

    let mut methods = Vec::with_capacity(total);
    let mut injected = BTreeSet::new();
    for c in 0..spec.classes {
        let mut r = root.split_index("class", c);
        let base = methods.len();
        let mut local: Vec<usize> = (0..spec.methods_per_class).collect();
        r.shuffle(&mut local);
        let mine: BTreeSet<usize> = local[..injected_in[c]].iter().map(|&j| base + j).collect();
        let stay: Vec<usize> = (0..spec.methods_per_class).map(|j| base + j).filter(|i| !mine.contains(i)).collect();
        let t = capitalize(&theme(c));
        for j in 0..spec.methods_per_class {
            let me = base + j;
            let pool: Vec<usize> = stay.iter().copied().filter(|&s| s != me).collect();
            let callees = r.sample_indices(pool.len(), spec.calls_per_method).into_iter().map(|k| pool[k]).collect();
            methods.push(Method {
                name: format!("{}{t}{j}", VERBS[j % VERBS.len()]),
                home: c,
                callees,
            });
        }
        injected.extend(mine);
    }

    // every injected method is written into some other class
    let mut host: Vec<usize> = methods.iter().map(|m| m.home).collect();
    let mut place = root.split("hosts");
    for &i in &injected {
        let k = place.below(spec.classes - 1);
        host[i] = if k >= methods[i].home { k + 1 } else { k };
    }

    let class_name = |c: usize| format!("{}Service", capitalize(&theme(c)));
    let class_id = |c: usize| ClassId::new(&project, &format!("{SYNTH_PACKAGE}.{}", class_name(c)));
    let mut files = Vec::with_capacity(spec.classes);
    for c in 0..spec.classes {
        let r = root.split_index("bodies", c);
        let own_theme = theme(c);
        let mut src = format!("package {SYNTH_PACKAGE};\n\npublic class {} {{\n    int {own_theme}Count = 0;\n", class_name(c));
        for (i, m) in methods.iter().enumerate().filter(|(i, _)| host[*i] == c) {
            src.push('\n');
            let mut mr = r.split_index("method", i);
            method_body(&mut src, m, &methods, &theme(m.home), &mut mr);
        }
        src.push_str("}\n");
        files.push((format!("{SYNTH_PACKAGE}/{}.java", class_name(c)), src));
    }
    files.sort();

    let mut ground_truth = Vec::with_capacity(injected.len());
    for &i in &injected {
        let source = class_id(host[i])?;
        let method = make_method_id(&project, source.class_path(), &format!("{}(int)", methods[i].name))?;
        ground_truth.push(MoveMethodTriple::new(method, class_id(methods[i].home)?)?);
    }
    ground_truth.sort_by(|a, b| a.method.cmp(&b.method));
    Ok(SmellyCorpus { files, ground_truth })
}

pub fn triples_to_jsonl(triples: &[MoveMethodTriple]) -> String {
    triples
        .iter()
        .map(|t| serde_json::to_string(t).expect("triple serializes") + "\n")
        .collect()
}

pub fn triples_from_jsonl(text: &str) -> Result<Vec<MoveMethodTriple>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: MoveMethodTriple = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: k + 1,
            message: e.to_string(),
        })?;
        t.validate().map_err(|e| Error::MalformedRecord {
            line: k + 1,
            message: e.to_string(),
        })?;
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depgraph::build_mdg;
    use crate::frontend::parse_source;

    fn spec(classes: usize, per: usize, moves: usize, seed: u64) -> SmellInjectionSpec {
        SmellInjectionSpec {
            classes,
            methods_per_class: per,
            injected_moves: moves,
            seed,
            ..SmellInjectionSpec::default()
        }
    }

    #[test]
    fn ten_distinct_triples() {
        let s = generate_smelly_corpus(&spec(10, 8, 10, 7)).unwrap();
        assert_eq!(s.ground_truth.len(), 10);
        let methods: BTreeSet<_> = s.ground_truth.iter().map(|t| &t.method).collect();
        assert_eq!(methods.len(), 10);
        for t in &s.ground_truth {
            assert_ne!(t.source_class, t.target_class);
        }
    }

    #[test]
    fn output_is_byte_identical() {
        let a = generate_smelly_corpus(&spec(6, 5, 4, 3)).unwrap();
        assert_eq!(a, generate_smelly_corpus(&spec(6, 5, 4, 3)).unwrap());
        assert_ne!(a.files, generate_smelly_corpus(&spec(6, 5, 4, 4)).unwrap().files);
    }

    #[test]
    fn parses_with_the_expected_counts() {
        let sp = spec(10, 8, 10, 7);
        let s = generate_smelly_corpus(&sp).unwrap();
        let corpus = parse_source(&ProjectId::new("synth").unwrap(), &s.files).unwrap();
        let stats = corpus.stats();
        assert_eq!((stats.classes, stats.methods), (10, 80));
        assert_eq!(stats.calls, 80 * sp.calls_per_method);
        assert_eq!(corpus.diagnostics.unresolved_calls + corpus.diagnostics.ambiguous_calls, 0);
        for t in &s.ground_truth {
            assert!(corpus.methods.contains_key(&t.method), "{}", t.method);
        }
    }

    #[test]
    fn injected_methods_call_into_their_target() {
        let s = generate_smelly_corpus(&spec(10, 8, 10, 7)).unwrap();
        let corpus = parse_source(&ProjectId::new("synth").unwrap(), &s.files).unwrap();
        let g = build_mdg(&corpus);
        for t in &s.ground_truth {
            let i = g.index_of(&t.method).unwrap();
            let outs: Vec<_> = g.edges.iter().filter(|(a, _)| *a == i).map(|&(_, b)| g.nodes[b].class()).collect();
            assert!(!outs.is_empty());
            assert!(outs.iter().all(|c| *c == t.target_class), "{}", t.method);
        }
    }

    #[test]
    fn zero_moves_and_infeasible_specs() {
        assert!(generate_smelly_corpus(&spec(3, 5, 0, 1)).unwrap().ground_truth.is_empty());
        assert!(matches!(generate_smelly_corpus(&spec(2, 5, 11, 1)), Err(Error::SpecInfeasible(_))));
        assert!(matches!(generate_smelly_corpus(&spec(1, 8, 1, 1)), Err(Error::SpecInfeasible(_))));
        assert!(matches!(generate_smelly_corpus(&spec(2, 3, 2, 1)), Err(Error::SpecInfeasible(_))));
    }

    #[test]
    fn many_classes_keep_distinct_themes() {
        let themes: BTreeSet<String> = (0..500).map(theme).collect();
        assert_eq!(themes.len(), 500);
    }

    #[test]
    fn triples_round_trip() {
        let s = generate_smelly_corpus(&spec(4, 5, 3, 2)).unwrap();
        let text = triples_to_jsonl(&s.ground_truth);
        assert!(text.lines().next().unwrap().starts_with("{\"method\":"));
        assert_eq!(triples_from_jsonl(&text).unwrap(), s.ground_truth);
        assert!(matches!(triples_from_jsonl("{}"), Err(Error::MalformedRecord { line: 1, .. })));
    }
}
