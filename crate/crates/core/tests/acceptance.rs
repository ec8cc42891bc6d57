//! Acceptance criteria 1-11, run in order in one test so the timing
//! checks are not disturbed by other tests. Prints one line per criterion.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rmove::code::{
    build_vocab, embed_code, max_gradient_error, planted_corpus, Code2Seq, Code2Vec, Encoder, FlatContext, Sample, SeqContext,
};
use rmove::depgraph::{build_mdg, MethodDependencyGraph};
use rmove::evaluation::{compute_metrics, generate_smelly_corpus, SmellInjectionSpec};
use rmove::frontend::{parse_method, parse_source, AstNode};
use rmove::fusion::{FusionNormalizers, HybridSpace, MethodVectors};
use rmove::graph::{
    embed_graph, grarep, grarep_factor, line_objective, line_objective_grad, prone_stages, sgns_pair_grad, sgns_pair_loss, LineSample,
    SdneLoss, SdneNet, Technique,
};
use rmove::model::{ClassId, EmbeddingVector, MethodId, MoveMethodTriple, ProjectId};
use rmove::paths::{extract_paths, Direction, PathContext, PathLimits, PathNode, METHOD_NAME_TOKEN};
use rmove::pipeline::{embed_corpus, fuse_embedded, relocation_experiment};
use rmove::recommend::{recommend_moves, Decision, RecommendOptions, Recommendation};
use rmove::rng::{seeded_rng, RandomStream};
use rmove::training::{generate_training_data, train_classifier, ClassifierKind};
use rmove::Config;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn project() -> ProjectId {
    ProjectId::new("p").unwrap()
}

fn mid(s: &str) -> MethodId {
    MethodId::parse(s).unwrap()
}

fn cid(s: &str) -> ClassId {
    ClassId::parse(s).unwrap()
}

fn vectors(entries: &[(&str, &[f64])]) -> MethodVectors {
    entries
        .iter()
        .map(|(m, v)| (mid(m), EmbeddingVector::new(v.to_vec()).unwrap()))
        .collect()
}

// 1 ---------------------------------------------------------------------

fn three_class_space() -> HybridSpace {
    let src = [
        ("A.java".to_string(), "class A { void a1() {} void a2() {} }".to_string()),
        ("B.java".to_string(), "class B { void b1() {} void b2() {} }".to_string()),
        ("C.java".to_string(), "class C { void c1() {} void c2() {} }".to_string()),
    ];
    let corpus = parse_source(&project(), &src).unwrap();
    let mut r = seeded_rng(101);
    let mut random = |n: usize| -> MethodVectors {
        corpus
            .methods
            .keys()
            .map(|m| (m.clone(), EmbeddingVector::new((0..n).map(|_| r.uniform_range(-1.0, 1.0)).collect()).unwrap()))
            .collect()
    };
    let code = random(3);
    let graph = random(2);
    let norms = FusionNormalizers::fit(&code, &graph).unwrap();
    HybridSpace::build(&corpus, &code, &graph, &norms, 0.5).unwrap()
}

fn mean_of(space: &HybridSpace, ms: &[&MethodId]) -> Vec<f64> {
    let mut out = vec![0.0; space.dim];
    for m in ms {
        for (o, v) in out.iter_mut().zip(&space.methods[*m].values) {
            *o += v / ms.len() as f64;
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let space = three_class_space();
    let methods: Vec<MethodId> = space.methods.keys().cloned().collect();
    let classes: Vec<ClassId> = space.classes.keys().cloned().collect();
    let mut pool = Vec::new();
    for m in &methods {
        for c in classes.iter().filter(|c| **c != m.class()) {
            pool.push(MoveMethodTriple::new(m.clone(), c.clone()).unwrap());
        }
    }
    // every subset of the 12 candidate triples with up to 3 members
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..pool.len() {
        sets.push(vec![a]);
        for b in a + 1..pool.len() {
            sets.push(vec![a, b]);
            for c in b + 1..pool.len() {
                sets.push(vec![a, b, c]);
            }
        }
    }
    let expected_features = |t: &MoveMethodTriple, positive: bool| {
        let mut f = space.methods[&t.method].values.clone();
        let class = if positive { &t.target_class } else { &t.source_class };
        let members: Vec<&MethodId> = space.members[class].iter().filter(|o| **o != t.method).collect();
        f.extend(mean_of(&space, &members));
        f
    };
    for set in &sets {
        let triples: Vec<MoveMethodTriple> = set.iter().map(|&i| pool[i].clone()).collect();
        let samples = generate_training_data(&triples, &space).map_err(|e| e.to_string())?;
        let pos = samples.iter().filter(|s| s.label).count();
        let neg = samples.len() - pos;
        check(pos == triples.len() && neg == triples.len(), || format!("{set:?}: {pos} positive, {neg} negative"))?;
        for (k, t) in triples.iter().enumerate() {
            let of_triple: Vec<_> = samples.iter().filter(|s| s.triple == Some(k)).collect();
            check(of_triple.len() == 2, || format!("triple {k} has {} samples", of_triple.len()))?;
            for s in of_triple {
                let want = expected_features(t, s.label);
                let ok = s.features.len() == want.len() && s.features.iter().zip(&want).all(|(a, b)| (a - b).abs() < 1e-12);
                check(ok, || format!("triple {k} label {} features differ", s.label))?;
            }
        }
        // a method leaving its source in j triples repeats that negative j times
        for t in &triples {
            let j = triples.iter().filter(|u| u.method == t.method).count();
            let dup = samples
                .iter()
                .filter(|s| !s.label && s.method == t.method && s.class == t.source_class)
                .count();
            check(dup == j, || format!("{}: {dup} negatives for {j} triples", t.method))?;
        }
    }
    Ok(format!("{} triple sets checked", sets.len()))
}

// 2 ---------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let src = [
        ("A.java".to_string(), "class A { void m1() {} void m2() {} }".to_string()),
        ("B.java".to_string(), "class B { void m3() {} }".to_string()),
    ];
    let corpus = parse_source(&project(), &src).unwrap();
    let code = vectors(&[("p::A::m1()", &[0.0, 10.0]), ("p::A::m2()", &[2.0, 20.0]), ("p::B::m3()", &[4.0, 30.0])]);
    let graph = vectors(&[("p::A::m1()", &[1.0, -1.0]), ("p::A::m2()", &[3.0, 1.0]), ("p::B::m3()", &[5.0, -1.0])]);
    let norms = FusionNormalizers::fit(&code, &graph).unwrap();
    // normalized code: m1 (0, 0), m2 (.5, .5), m3 (1, 1); graph: m1 (0, 0), m2 (.5, 1), m3 (1, 0)
    let cases: [(f64, [[f64; 4]; 3], [[f64; 4]; 2]); 2] = [
        (
            0.5,
            [[0.0, 0.0, 0.0, 0.0], [0.25, 0.25, 0.25, 0.5], [0.5, 0.5, 0.5, 0.0]],
            [[0.125, 0.125, 0.125, 0.25], [0.5, 0.5, 0.5, 0.0]],
        ),
        (
            0.3,
            [[0.0, 0.0, 0.0, 0.0], [0.15, 0.15, 0.35, 0.7], [0.3, 0.3, 0.7, 0.0]],
            [[0.075, 0.075, 0.175, 0.35], [0.3, 0.3, 0.7, 0.0]],
        ),
    ];
    let mut worst: f64 = 0.0;
    for (alpha, methods, classes) in cases {
        let space = HybridSpace::build(&corpus, &code, &graph, &norms, alpha).map_err(|e| e.to_string())?;
        for (m, want) in ["p::A::m1()", "p::A::m2()", "p::B::m3()"].iter().zip(methods) {
            for (a, b) in space.method(&mid(m)).unwrap().iter().zip(want) {
                worst = worst.max((a - b).abs());
            }
        }
        for (c, want) in ["p::A", "p::B"].iter().zip(classes) {
            for (a, b) in space.class(&cid(c)).unwrap().iter().zip(want) {
                worst = worst.max((a - b).abs());
            }
        }
        // seen from m1, class A is m2 alone
        for (a, b) in space.pair_class(&mid("p::A::m1()"), &cid("p::A")).unwrap().iter().zip(methods[1]) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.1e}"))
}

// 3 ---------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut r = seeded_rng(303);
    let methods: Vec<MethodId> = (0..5)
        .flat_map(|c| (0..3).map(move |j| format!("p::C{c}::m{j}()")))
        .map(|s| mid(&s))
        .collect();
    let other_class = |m: &MethodId, r: &mut RandomStream| loop {
        let c = cid(&format!("p::C{}", r.below(5)));
        if c != m.class() {
            return c;
        }
    };
    for case in 0..1000 {
        let truth: Vec<MoveMethodTriple> = (0..r.below(6))
            .map(|_| {
                let m = methods[r.below(methods.len())].clone();
                let t = other_class(&m, &mut r);
                MoveMethodTriple::new(m, t).unwrap()
            })
            .collect();
        let recs: Vec<Recommendation> = (0..r.below(8))
            .map(|_| {
                let m = methods[r.below(methods.len())].clone();
                let decision = if r.uniform() < 0.3 {
                    Decision::Stay
                } else if !truth.is_empty() && r.uniform() < 0.5 {
                    // reuse a truth target so hits are common
                    let t = &truth[r.below(truth.len())];
                    if t.method == m {
                        Decision::Move(t.target_class.clone())
                    } else {
                        Decision::Move(other_class(&m, &mut r))
                    }
                } else {
                    Decision::Move(other_class(&m, &mut r))
                };
                Recommendation {
                    source_class: m.class(),
                    method: m,
                    decision,
                    ranked: Vec::new(),
                    source_prob: 0.5,
                }
            })
            .collect();

        let mut distinct: Vec<&MoveMethodTriple> = Vec::new();
        for t in &truth {
            if !distinct.contains(&t) {
                distinct.push(t);
            }
        }
        let (mut hits, mut moves) = (0usize, 0usize);
        for rec in &recs {
            if let Decision::Move(target) = &rec.decision {
                moves += 1;
                if distinct
                    .iter()
                    .any(|t| t.method == rec.method && t.source_class == rec.source_class && t.target_class == *target)
                {
                    hits += 1;
                }
            }
        }
        let p = if moves == 0 { 0.0 } else { hits as f64 / moves as f64 };
        let rc = if distinct.is_empty() { 0.0 } else { hits as f64 / distinct.len() as f64 };
        let f = if p + rc == 0.0 { 0.0 } else { 2.0 * p * rc / (p + rc) };
        let got = compute_metrics(&recs, &truth);
        let ok = got.correct == hits
            && got.recommended == moves
            && got.moved == distinct.len()
            && (got.precision - p).abs() < 1e-12
            && (got.recall - rc).abs() < 1e-12
            && (got.f1 - f).abs() < 1e-12
            && got.nothing_recommended == (moves == 0);
        check(ok, || format!("case {case}: {got:?} vs ({hits}, {moves}, {}, {p}, {rc}, {f})", distinct.len()))?;
    }
    Ok("1000 random cases".into())
}

// 4 ---------------------------------------------------------------------

struct SourceGen {
    r: RandomStream,
    locals: Vec<String>,
}

impl SourceGen {
    fn name(&mut self) -> String {
        self.locals[self.r.below(self.locals.len())].clone()
    }

    fn expr(&mut self, depth: usize) -> String {
        let pick = if depth == 0 { self.r.below(2) } else { self.r.below(7) };
        match pick {
            0 => self.name(),
            1 => self.r.below(100).to_string(),
            2 => {
                let op = ["+", "-", "*", "<", ">", "==", "&&"][self.r.below(7)];
                format!("{} {op} {}", self.expr(depth - 1), self.expr(depth - 1))
            }
            3 => format!("({} ? {} : {})", self.expr(depth - 1), self.expr(depth - 1), self.expr(depth - 1)),
            4 => format!("!{}", self.name()),
            5 => {
                let args: Vec<String> = (0..self.r.below(3)).map(|_| self.expr(depth - 1)).collect();
                format!("helper{}({})", self.r.below(3), args.join(", "))
            }
            _ => format!("other.size{}()", self.r.below(2)),
        }
    }

    fn stmt(&mut self, depth: usize) -> String {
        let pick = if depth == 0 { self.r.below(3) } else { self.r.below(5) };
        match pick {
            0 => {
                let v = format!("v{}", self.locals.len());
                let s = format!("int {v} = {};", self.expr(2));
                self.locals.push(v);
                s
            }
            1 => format!("{} = {};", self.name(), self.expr(2)),
            2 => format!("helper{}({});", self.r.below(3), self.expr(1)),
            3 => format!("if ({}) {{ {} }} else {{ {} }}", self.expr(1), self.stmt(depth - 1), self.stmt(depth - 1)),
            _ => format!("while ({}) {{ {} }}", self.expr(1), self.stmt(depth - 1)),
        }
    }

    fn method(&mut self) -> String {
        self.locals = vec!["a".into(), "b".into()];
        let body: Vec<String> = (0..1 + self.r.below(4)).map(|_| self.stmt(2)).collect();
        format!("int run(int a, int b) {{ {} return {}; }}", body.join(" "), self.expr(1))
    }
}

/// All leaf pairs, each walked through its lowest common ancestor found by
/// comparing root-to-leaf chains.
fn brute_force_paths(root: &AstNode) -> Vec<PathContext> {
    fn collect<'a>(n: &'a AstNode, chain: &mut Vec<&'a AstNode>, out: &mut Vec<(Vec<&'a AstNode>, &'a AstNode)>) {
        if n.children.is_empty() {
            out.push((chain.clone(), n));
            return;
        }
        chain.push(n);
        for c in &n.children {
            collect(c, chain, out);
        }
        chain.pop();
    }
    let mut leaves = Vec::new();
    collect(root, &mut Vec::new(), &mut leaves);
    let name_leaf = root.children.get(1).filter(|n| n.children.is_empty());
    let token = |leaf: &AstNode| -> String {
        if name_leaf.is_some_and(|n| std::ptr::eq(n, leaf)) {
            METHOD_NAME_TOKEN.to_string()
        } else {
            leaf.token().to_string()
        }
    };
    let mut out = Vec::new();
    for i in 0..leaves.len() {
        for j in i + 1..leaves.len() {
            let (ci, li) = &leaves[i];
            let (cj, lj) = &leaves[j];
            let shared = ci.iter().zip(cj).take_while(|(x, y)| std::ptr::eq(**x, **y)).count();
            let mut nodes: Vec<PathNode> = ci[shared..].iter().rev().map(|n| PathNode::new(n.node_type.as_str(), Direction::Up)).collect();
            nodes.push(PathNode::new(ci[shared - 1].node_type.as_str(), Direction::Down));
            nodes.extend(cj[shared..].iter().map(|n| PathNode::new(n.node_type.as_str(), Direction::Down)));
            out.push(PathContext {
                start_token: token(li),
                node_types: nodes,
                end_token: token(lj),
            });
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let unlimited = PathLimits::unbounded_count(usize::MAX, usize::MAX);
    let id = mid("p::A::run(int,int)");
    let golden = parse_method("A.java", "int f(int a, int b) { return b > 0 ? a : -1; }").map_err(|e| e.to_string())?;
    let set = extract_paths(&id, &golden, &unlimited, &seeded_rng(0)).map_err(|e| e.to_string())?;
    let want = "b ↑ BinaryExpression ↑ ConditionalExpression ↓ a";
    check(set.contexts.iter().any(|c| c.to_string() == want), || format!("no `{want}` context"))?;

    let mut generator = SourceGen {
        r: seeded_rng(404),
        locals: Vec::new(),
    };
    let (mut checked, mut contexts, mut most_leaves) = (0, 0, 0);
    while checked < 200 {
        let src = generator.method();
        let ast = parse_method("A.java", &src).map_err(|e| format!("{src}: {e}"))?;
        let leaves = ast.leaf_tokens().len();
        if leaves > 40 {
            continue;
        }
        most_leaves = most_leaves.max(leaves);
        let mined = extract_paths(&id, &ast, &unlimited, &seeded_rng(1)).map_err(|e| e.to_string())?;
        let oracle = brute_force_paths(&ast);
        check(mined.contexts == oracle, || format!("{src}: {} mined vs {} expected", mined.contexts.len(), oracle.len()))?;
        checked += 1;
        contexts += oracle.len();
    }
    Ok(format!("golden path found; 200 methods, {contexts} contexts, up to {most_leaves} leaves"))
}

// 5 ---------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let src = "class A { void m1() { m2(); m3(); } void m2() { m3(); } void m3() { } }";
    let corpus = parse_source(&project(), &[("A.java".into(), src.into())]).map_err(|e| e.to_string())?;
    let g = build_mdg(&corpus);
    let edges: BTreeSet<(&str, &str)> = g.edges.iter().map(|&(a, b)| (g.nodes[a].name(), g.nodes[b].name())).collect();
    let want: BTreeSet<(&str, &str)> = [("m1", "m2"), ("m1", "m3"), ("m2", "m3")].into();
    check(edges == want, || format!("{edges:?}"))?;
    Ok("{(m1,m2),(m1,m3),(m2,m3)}".into())
}

// 6 ---------------------------------------------------------------------

fn table(r: &mut RandomStream, rows: usize, cols: usize) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..cols).map(|_| r.uniform_range(-1.0, 1.0)).collect()).collect()
}

const FD_STEP: f64 = 1e-5;

fn fd_error(analytic: f64, mut eval: impl FnMut(f64) -> f64) -> f64 {
    let fd = (eval(FD_STEP) - eval(-FD_STEP)) / (2.0 * FD_STEP);
    (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1e-3)
}

fn skipgram_error() -> f64 {
    let mut r = seeded_rng(61);
    let t = table(&mut r, 4, 5);
    let negs = [t[2].as_slice(), t[3].as_slice()];
    let g = sgns_pair_grad(&t[0], &t[1], &negs);
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        worst = worst.max(fd_error(g.input[k], |d| {
            let mut x = t[0].clone();
            x[k] += d;
            sgns_pair_loss(&x, &t[1], &negs)
        }));
    }
    worst
}

fn line_error(order: usize) -> f64 {
    let mut r = seeded_rng(62);
    let (vertex, context) = (table(&mut r, 5, 3), table(&mut r, 5, 3));
    let samples = vec![
        LineSample { src: 0, dst: 1, negatives: vec![2, 3] },
        LineSample { src: 4, dst: 2, negatives: vec![0, 1, 1] },
        LineSample { src: 2, dst: 0, negatives: vec![4] },
    ];
    let (dv, dc) = line_objective_grad(order, &vertex, &context, &samples);
    let mut worst: f64 = 0.0;
    for (which, grad) in [(0, &dv), (1, &dc)] {
        for i in 0..5 {
            for k in 0..3 {
                worst = worst.max(fd_error(grad[i][k], |d| {
                    let (mut v, mut c) = (vertex.clone(), context.clone());
                    if which == 0 {
                        v[i][k] += d;
                    } else {
                        c[i][k] += d;
                    }
                    line_objective(order, &v, &c, &samples)
                }));
            }
        }
    }
    worst
}

fn sdne_error() -> f64 {
    let rng = seeded_rng(63);
    let mut net = SdneNet::new(4, 3, 2, &rng);
    let mut r = rng.split("biases");
    for b in net.biases.iter_mut() {
        b.apply(|v| *v = r.uniform_range(-0.5, 0.5));
    }
    let adj = DMatrix::from_row_slice(4, 4, &[0., 1., 1., 0., 1., 0., 1., 0., 1., 1., 0., 1., 0., 0., 1., 0.]);
    let x = adj.clone();
    let s = adj;
    let p = SdneLoss { alpha: 0.2, beta: 5.0, nu1: 1e-3, nu2: 1e-2 };
    let (_, g) = net.loss_grad(&x, &s, &p);
    let mut worst: f64 = 0.0;
    for layer in 0..net.weights.len() {
        for idx in 0..net.weights[layer].len() {
            worst = worst.max(fd_error(g.weights[layer][idx], |d| {
                let mut n = net.clone();
                n.weights[layer][idx] += d;
                n.loss(&x, &s, &p)
            }));
        }
        for idx in 0..net.biases[layer].len() {
            worst = worst.max(fd_error(g.biases[layer][idx], |d| {
                let mut n = net.clone();
                n.biases[layer][idx] += d;
                n.loss(&x, &s, &p)
            }));
        }
    }
    worst
}

fn encoder_errors() -> (f64, f64) {
    let method = mid("p::A::f()");
    let c2v = Code2Vec::new(6, 4, 3, 4, &seeded_rng(64));
    let flat = Sample {
        method: method.clone(),
        contexts: vec![
            FlatContext { start: 2, path: 1, end: 5 },
            FlatContext { start: 4, path: 3, end: 2 },
            FlatContext { start: 3, path: 2, end: 3 },
        ],
        target: 1,
    };
    let mut c2s = Code2Seq::new(6, 5, 3, 4, &seeded_rng(65));
    let mut r = seeded_rng(66);
    for b in [&mut c2s.gru.bz, &mut c2s.gru.br, &mut c2s.gru.bh] {
        *b = DVector::from_fn(b.len(), |_, _| r.uniform_range(-0.5, 0.5));
    }
    let seq = Sample {
        method,
        contexts: vec![
            SeqContext { start: vec![2, 3], nodes: vec![2, 4, 3], end: vec![5] },
            SeqContext { start: vec![4], nodes: vec![3], end: vec![2, 2] },
        ],
        target: 2,
    };
    (max_gradient_error(&c2v, &flat, FD_STEP, 1e-3), max_gradient_error(&c2s, &seq, FD_STEP, 1e-3))
}

fn random_graph(r: &mut RandomStream, n: usize) -> MethodDependencyGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && r.uniform() < 0.3 {
                edges.push((a, b));
            }
        }
    }
    MethodDependencyGraph::from_edges(n, &edges)
}

/// `max(0, ln(n · Pᵏ))` for the symmetrized, row-normalized adjacency;
/// an isolated node walks uniformly.
fn log_transition_powers(g: &MethodDependencyGraph, steps: usize) -> Vec<DMatrix<f64>> {
    let n = g.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(x, y) in &g.edges {
        if x != y {
            a[(x, y)] = 1.0;
            a[(y, x)] = 1.0;
        }
    }
    for i in 0..n {
        let deg: f64 = a.row(i).sum();
        if deg == 0.0 {
            a.row_mut(i).fill(1.0 / n as f64);
        } else {
            a.row_mut(i).scale_mut(1.0 / deg);
        }
    }
    let mut p = DMatrix::identity(n, n);
    (0..steps)
        .map(|_| {
            p = &p * &a;
            p.map(|v| if v > 0.0 { (v * n as f64).ln().max(0.0) } else { 0.0 })
        })
        .collect()
}

fn grarep_error() -> f64 {
    let mut r = seeded_rng(67);
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        let g = random_graph(&mut r, n);
        let steps = 2;
        let mut cfg = Config::default();
        cfg.grarep_kstep = steps;
        cfg.graph_dim = steps * n;
        let emb = grarep(&g, &cfg).unwrap();
        for (k, x) in log_transition_powers(&g, steps).iter().enumerate() {
            // at full rank each block L satisfies (L Lᵀ)² = X Xᵀ
            let l = DMatrix::from_fn(n, n, |i, c| emb.vectors[i].as_slice()[k * n + c]);
            let llt = &l * l.transpose();
            worst = worst.max((&llt * &llt - x * x.transpose()).amax());
            // truncated factors reach the Eckart-Young error, from the eigenvalues of XᵀX
            let mut ev: Vec<f64> = SymmetricEigen::new(x.transpose() * x).eigenvalues.iter().map(|v| v.max(0.0)).collect();
            ev.sort_by(|a, b| b.total_cmp(a));
            for rank in 1..n {
                let (left, right) = grarep_factor(x, rank);
                let err = (&left * right.transpose() - x).norm_squared();
                worst = worst.max((err - ev[rank..].iter().sum::<f64>()).abs());
            }
        }
    }
    worst
}

fn criterion_6() -> Outcome {
    let (c2v, c2s) = encoder_errors();
    let errors = [
        ("skip-gram", skipgram_error()),
        ("LINE-1", line_error(1)),
        ("LINE-2", line_error(2)),
        ("SDNE", sdne_error()),
        ("code2vec", c2v),
        ("code2seq", c2s),
    ];
    for (name, e) in errors {
        check(e <= 1e-4, || format!("{name} gradient relative error {e:e}"))?;
    }
    let grarep = grarep_error();
    check(grarep <= 1e-8, || format!("GraRep off the dense oracle by {grarep:e}"))?;
    let mut cfg = Config::default();
    cfg.graph_dim = 4;
    cfg.prone_step = 0;
    let (init, out) = prone_stages(&random_graph(&mut seeded_rng(68), 12), &cfg, &seeded_rng(69));
    check(init == out, || "ProNE with step 0 changed its initialization".into())?;
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    Ok(format!("worst gradient error {worst:.1e}; GraRep {grarep:.1e}; ProNE step 0 exact"))
}

// 7 ---------------------------------------------------------------------

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

fn criterion_7() -> Outcome {
    let mut edges = Vec::new();
    for (a, b) in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] {
        edges.push((a, b));
        edges.push((b, a));
    }
    let g = MethodDependencyGraph::from_edges(6, &edges);
    let mut cfg = Config::default();
    cfg.graph_dim = 8;
    cfg.deepwalk_walks = 10;
    cfg.deepwalk_walk_length = 20;
    cfg.deepwalk_window = 3;
    cfg.walklets_walks = 10;
    cfg.walklets_walk_length = 20;
    cfg.walklets_scales = 2;
    cfg.grarep_kstep = 2;
    cfg.line_epochs = 100;
    cfg.sdne_hidden = 16;
    let mut summary = Vec::new();
    for t in Technique::ALL {
        let mut separated = 0;
        for seed in 0..10 {
            let emb = embed_graph(t, &g, &cfg, &seeded_rng(seed)).map_err(|e| e.to_string())?;
            let v: Vec<&[f64]> = emb.vectors.iter().map(|x| x.as_slice()).collect();
            let (mut intra, mut inter) = (Vec::new(), Vec::new());
            for i in 0..6 {
                for j in i + 1..6 {
                    let c = cosine(v[i], v[j]);
                    if (i < 3) == (j < 3) {
                        intra.push(c);
                    } else {
                        inter.push(c);
                    }
                }
            }
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            if mean(&intra) > mean(&inter) {
                separated += 1;
            }
        }
        let need = if t.is_stochastic() { 9 } else { 10 };
        check(separated >= need, || format!("{t}: {separated}/10 seeds separate, need {need}"))?;
        summary.push(format!("{t} {separated}/10"));
    }
    Ok(summary.join(", "))
}

// 8 ---------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let sets = planted_corpus(12, 10, 4, &seeded_rng(1));
    let vocab = build_vocab(&sets, 1, 5).map_err(|e| e.to_string())?;
    let mut cfg = Config::default();
    cfg.code_dim = 32;
    let mut summary = Vec::new();
    for enc in Encoder::ALL {
        let e = embed_code(enc, &sets, &vocab, &cfg, &seeded_rng(2)).map_err(|e| e.to_string())?;
        let acc = e.heldout_accuracy.unwrap_or(0.0);
        check(acc >= 0.9, || format!("{enc}: held-out accuracy {acc:.3}"))?;
        summary.push(format!("{enc} {acc:.3}"));
    }
    Ok(summary.join(", "))
}

// 9 ---------------------------------------------------------------------

fn criterion_9() -> Outcome {
    let spec = SmellInjectionSpec::default();
    check(spec.classes == 10 && spec.methods_per_class == 8 && spec.injected_moves == 10, || format!("{spec:?}"))?;
    let smelly = generate_smelly_corpus(&spec).map_err(|e| e.to_string())?;
    let corpus = parse_source(&ProjectId::new(&spec.project).unwrap(), &smelly.files).map_err(|e| e.to_string())?;
    let hp = ClassifierKind::Rf.default_params();
    let mut runs = Vec::new();
    for seed in 0..10u64 {
        let mut cfg = Config::default();
        cfg.seed = seed;
        cfg.graph_dim = 32;
        cfg.code_dim = 32;
        cfg.cv_folds = 5;
        cfg.cv_repeats = 1;
        let rng = seeded_rng(seed);
        let e = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng).map_err(|e| e.to_string())?;
        let (space, _) = fuse_embedded(&corpus, &e, cfg.alpha).map_err(|e| e.to_string())?;
        let run = relocation_experiment(&corpus, &space, &e.pathsets, &smelly.ground_truth, &BTreeSet::new(), &hp, &cfg, &rng)
            .map_err(|e| e.to_string())?;
        runs.push((run.cv.mean.f1, seed, run.target_ranked_first));
    }
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let median = (runs[4].0 + runs[5].0) / 2.0;
    let (upper_f1, upper_seed, ranked_first) = runs[5];
    check(median >= 0.70, || format!("median cv f1 {median:.3}"))?;
    check(ranked_first >= 7, || format!("seed {upper_seed} (f1 {upper_f1:.3}) ranks {ranked_first}/10 targets first"))?;
    Ok(format!("median cv f1 {median:.3}; seed {upper_seed} ranks {ranked_first}/10 targets first"))
}

// 10 --------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let spec = SmellInjectionSpec {
        project: "big".into(),
        classes: 100,
        methods_per_class: 10,
        calls_per_method: 3,
        injected_moves: 20,
        seed: 10,
    };
    let smelly = generate_smelly_corpus(&spec).map_err(|e| e.to_string())?;
    let corpus = parse_source(&ProjectId::new(&spec.project).unwrap(), &smelly.files).map_err(|e| e.to_string())?;
    let mut cfg = Config::default();
    cfg.graph_dim = 32;
    cfg.code_dim = 32;
    // only the scoring is timed; lighter training keeps the setup short
    cfg.code2vec_epochs = 1;
    cfg.max_contexts = 100;
    cfg.deepwalk_walks = 5;
    cfg.deepwalk_walk_length = 40;
    let rng = seeded_rng(10);
    let e = embed_corpus(&corpus, Technique::DeepWalk, Encoder::Code2Vec, &cfg, &rng).map_err(|e| e.to_string())?;
    let (space, _) = fuse_embedded(&corpus, &e, cfg.alpha).map_err(|e| e.to_string())?;
    let samples = rmove::training::generate_relocation_data(&corpus, &space, &BTreeSet::new(), 1, &rng.split("samples"))
        .map_err(|e| e.to_string())?;
    let model = train_classifier(ClassifierKind::Rf, &samples, &ClassifierKind::Rf.default_params(), &rng.split("model"))
        .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let recs = recommend_moves(&model, &corpus, &space, &e.pathsets, &RecommendOptions::from_config(&cfg)).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    check(recs.len() == 1000, || format!("{} recommendations", recs.len()))?;
    check(took < Duration::from_secs(2), || format!("recommend took {took:.2?}"))?;
    Ok(format!("1000 methods x 100 classes in {took:.2?} on {} thread(s)", rayon::current_num_threads()))
}

// 11 --------------------------------------------------------------------

fn run_pipeline(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let bin = env!("CARGO_BIN_EXE_rmove");
    let work = dir.join("work");
    let src = dir.join("src");
    let gt = src.join("ground_truth.jsonl");
    let (src, gt) = (src.to_str().unwrap(), gt.to_str().unwrap());
    let steps: Vec<Vec<&str>> = vec![
        vec!["synth", "-o", src],
        vec!["extract", "--src", src],
        vec!["embed-graph"],
        vec!["embed-code"],
        vec!["fuse"],
        vec!["gen-data"],
        vec!["train", "--cv"],
        vec!["recommend"],
        vec!["evaluate", "--ground-truth", gt],
    ];
    let common = [
        "--deterministic",
        "--seed",
        "42",
        "--set",
        "graph_dim=32",
        "--set",
        "code_dim=32",
        "--set",
        "cv_repeats=2",
        "-w",
        work.to_str().unwrap(),
    ];
    for step in &steps {
        let out = Command::new(bin).args(step).args(common).output().map_err(|e| e.to_string())?;
        check(out.status.success(), || {
            format!("{step:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(work.join("manifest.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut hashes = BTreeMap::new();
    for (stage, record) in manifest["stages"].as_object().ok_or("manifest has no stages")? {
        for (path, hash) in record["outputs"].as_object().ok_or("stage has no outputs")? {
            hashes.insert(format!("{stage}:{path}"), hash.as_str().unwrap_or_default().to_string());
        }
    }
    Ok(hashes)
}

fn criterion_11() -> Outcome {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let first = run_pipeline(a.path())?;
    let second = run_pipeline(b.path())?;
    check(first.len() >= 15, || format!("only {} artifacts recorded", first.len()))?;
    let differing: Vec<&String> = first.keys().filter(|k| first.get(*k) != second.get(*k)).collect();
    check(differing.is_empty() && first.len() == second.len(), || format!("artifacts differ: {differing:?}"))?;
    Ok(format!("{} artifact hashes identical across two runs", first.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome, u64); 11] = [
        ("training-data contract", criterion_1, 1),
        ("fusion arithmetic", criterion_2, 1),
        ("metrics oracle", criterion_3, 5),
        ("path mining oracle", criterion_4, 30),
        ("call graph golden", criterion_5, 1),
        ("embedding numerics", criterion_6, 120),
        ("twin-triangle separation", criterion_7, 120),
        ("planted-signal encoders", criterion_8, 300),
        ("injected smells end to end", criterion_9, 600),
        ("recommend runtime", criterion_10, 60),
        ("determinism", criterion_11, 600),
    ];
    let mut failed = Vec::new();
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took > Duration::from_secs(*budget) {
                Err(format!("{detail}; took {took:.1?}, budget {budget} s"))
            } else {
                Ok(detail)
            }
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{took:.1?}]", k + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why} [{took:.1?}]", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
