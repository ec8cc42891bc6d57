//! Leaf-to-leaf AST path contexts.
//!
//! A context runs from one leaf up to the lowest common ancestor of both
//! leaves and back down to the other. Each intermediate node carries the
//! direction of the step that leaves it, so `b ↑ BinaryExpression ↑
//! ConditionalExpression ↓ a` is stored as
//! `[BinaryExpression↑, ConditionalExpression↓]`; the ancestor always
//! carries `↓`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::frontend::{AstNode, Corpus, NodeType};
use crate::model::MethodId;
use crate::rng::RandomStream;

/// Replaces the declared method's own name so it cannot leak into features.
pub const METHOD_NAME_TOKEN: &str = "METHOD_NAME";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
}

impl Direction {
    pub fn mark(self) -> char {
        match self {
            Direction::Up => '↑',
            Direction::Down => '↓',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathNode {
    pub label: String,
    pub dir: Direction,
}

impl PathNode {
    pub fn new(label: impl Into<String>, dir: Direction) -> Self {
        PathNode {
            label: label.into(),
            dir,
        }
    }
}

impl fmt::Display for PathNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.label, self.dir.mark())
    }
}

impl std::str::FromStr for PathNode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let dir = match s.chars().last() {
            Some('↑') => Direction::Up,
            Some('↓') => Direction::Down,
            _ => return Err(format!("path node `{s}` lacks a direction mark")),
        };
        let label = &s[..s.len() - '↑'.len_utf8()];
        if label.is_empty() {
            return Err(format!("path node `{s}` has no label"));
        }
        Ok(PathNode::new(label, dir))
    }
}

impl Serialize for PathNode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PathNode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathContext {
    #[serde(rename = "start")]
    pub start_token: String,
    #[serde(rename = "nodes")]
    pub node_types: Vec<PathNode>,
    #[serde(rename = "end")]
    pub end_token: String,
}

impl PathContext {
    /// The node sequence as one symbol, e.g. `BinaryExpression↑|ConditionalExpression↓`.
    pub fn path_symbol(&self) -> String {
        let parts: Vec<String> = self.node_types.iter().map(ToString::to_string).collect();
        parts.join("|")
    }

    /// Checks the `↑* ↓+` shape.
    pub fn well_shaped(&self) -> bool {
        let first_down = self
            .node_types
            .iter()
            .position(|n| n.dir == Direction::Down);
        match first_down {
            Some(k) => self.node_types[k..].iter().all(|n| n.dir == Direction::Down),
            None => false,
        }
    }
}

impl fmt::Display for PathContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start_token)?;
        let mut prev = Direction::Up;
        for n in &self.node_types {
            write!(f, " {} {}", prev.mark(), n.label)?;
            prev = n.dir;
        }
        write!(f, " {} {}", prev.mark(), self.end_token)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub method: MethodId,
    pub contexts: Vec<PathContext>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathLimits {
    pub max_length: usize,
    pub max_width: usize,
    pub max_contexts: usize,
}

impl PathLimits {
    pub fn from_config(cfg: &Config) -> Self {
        PathLimits {
            max_length: cfg.max_path_length,
            max_width: cfg.max_path_width,
            max_contexts: cfg.max_contexts,
        }
    }

    /// Length and width limits only; no subsampling.
    pub fn unbounded_count(max_length: usize, max_width: usize) -> Self {
        PathLimits {
            max_length,
            max_width,
            max_contexts: usize::MAX,
        }
    }
}

/// Flattened tree: parent links, depths, labels, and leaves in pre-order.
struct Flat<'a> {
    parent: Vec<usize>,
    depth: Vec<usize>,
    label: Vec<NodeType>,
    leaves: Vec<(usize, &'a str)>,
}

fn flatten(root: &AstNode) -> Flat<'_> {
    let mut flat = Flat {
        parent: Vec::new(),
        depth: Vec::new(),
        label: Vec::new(),
        leaves: Vec::new(),
    };
    fn walk<'a>(n: &'a AstNode, parent: usize, depth: usize, flat: &mut Flat<'a>) {
        let idx = flat.parent.len();
        flat.parent.push(parent);
        flat.depth.push(depth);
        flat.label.push(n.node_type);
        if n.is_leaf() {
            flat.leaves.push((idx, n.token()));
        }
        for c in &n.children {
            walk(c, idx, depth + 1, flat);
        }
    }
    walk(root, usize::MAX, 0, &mut flat);
    // the declared name is the second child of a MethodDeclaration
    if let (Some(ret), Some(name)) = (root.children.first(), root.children.get(1)) {
        if name.is_leaf() {
            let name_idx = 1 + ret.node_count();
            for leaf in &mut flat.leaves {
                if leaf.0 == name_idx {
                    leaf.1 = METHOD_NAME_TOKEN;
                }
            }
        }
    }
    flat
}

impl Flat<'_> {
    fn context(&self, i: usize, j: usize, max_length: usize) -> Option<PathContext> {
        let (a, start) = self.leaves[i];
        let (b, end) = self.leaves[j];
        let mut up = Vec::new();
        let mut down = Vec::new();
        let (mut x, mut y) = (self.parent[a], self.parent[b]);
        while self.depth[x] > self.depth[y] {
            up.push(x);
            x = self.parent[x];
        }
        while self.depth[y] > self.depth[x] {
            down.push(y);
            y = self.parent[y];
        }
        while x != y {
            up.push(x);
            down.push(y);
            x = self.parent[x];
            y = self.parent[y];
        }
        if up.len() + 1 + down.len() > max_length {
            return None;
        }
        let mut nodes: Vec<PathNode> = up
            .iter()
            .map(|&n| PathNode::new(self.label[n].as_str(), Direction::Up))
            .collect();
        nodes.push(PathNode::new(self.label[x].as_str(), Direction::Down));
        nodes.extend(
            down.iter()
                .rev()
                .map(|&n| PathNode::new(self.label[n].as_str(), Direction::Down)),
        );
        Some(PathContext {
            start_token: start.to_string(),
            node_types: nodes,
            end_token: end.to_string(),
        })
    }
}

/// Mines every leaf pair of a method AST within the length and width
/// limits. Pairs are oriented left-to-right in leaf order. When more than
/// `max_contexts` survive, a uniform subsample (from a stream split off
/// `rng` by method id) is kept in its original order.
pub fn extract_paths(
    method: &MethodId,
    ast: &AstNode,
    limits: &PathLimits,
    rng: &RandomStream,
) -> Result<PathSet> {
    if ast.node_type != NodeType::MethodDeclaration {
        return Err(Error::NotAMethodAst(ast.node_type.to_string()));
    }
    let flat = flatten(ast);
    let n = flat.leaves.len();
    let mut contexts = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n.min(i.saturating_add(limits.max_width).saturating_add(1)) {
            if let Some(ctx) = flat.context(i, j, limits.max_length) {
                contexts.push(ctx);
            }
        }
    }
    let mut truncated = false;
    if contexts.len() > limits.max_contexts {
        let keep = rng
            .split(method.as_str())
            .sample_indices(contexts.len(), limits.max_contexts);
        let mut it = keep.into_iter().peekable();
        contexts = contexts
            .into_iter()
            .enumerate()
            .filter_map(|(k, c)| {
                if it.peek() == Some(&k) {
                    it.next();
                    Some(c)
                } else {
                    None
                }
            })
            .collect();
        truncated = true;
    }
    Ok(PathSet {
        method: method.clone(),
        contexts,
        truncated,
    })
}

/// One path set per corpus method, in id order. Parsed methods are mined;
/// methods ingested from facts keep their pre-extracted contexts.
pub fn mine_corpus(corpus: &Corpus, limits: &PathLimits, rng: &RandomStream) -> Result<Vec<PathSet>> {
    let entries: Vec<_> = corpus.methods.iter().collect();
    entries
        .par_iter()
        .map(|(id, entry)| match (&entry.ast, &entry.contexts) {
            (Some(ast), _) => extract_paths(id, ast, limits, rng),
            (None, contexts) => Ok(PathSet {
                method: (*id).clone(),
                contexts: contexts.clone().unwrap_or_default(),
                truncated: false,
            }),
        })
        .collect()
}

/// Splits an identifier at case changes, digit runs, and non-alphanumeric
/// separators; lowercases each piece. Tokens with no alphanumeric
/// characters (operators) come back unchanged.
pub fn subtokenize(token: &str) -> Vec<String> {
    #[derive(PartialEq, Clone, Copy)]
    enum Kind {
        Lower,
        Upper,
        Digit,
    }
    let kind = |c: char| {
        if c.is_ascii_digit() {
            Kind::Digit
        } else if c.is_uppercase() {
            Kind::Upper
        } else {
            Kind::Lower
        }
    };
    let mut out: Vec<String> = Vec::new();
    for chunk in token.split(|c: char| !c.is_alphanumeric()).filter(|s| !s.is_empty()) {
        let chars: Vec<char> = chunk.chars().collect();
        let mut cur = String::new();
        for (i, &c) in chars.iter().enumerate() {
            if i > 0 {
                let (p, k) = (kind(chars[i - 1]), kind(c));
                let next_lower = chars.get(i + 1).is_some_and(|&n| kind(n) == Kind::Lower);
                let boundary = (p == Kind::Lower && k == Kind::Upper)
                    || ((p == Kind::Digit) != (k == Kind::Digit))
                    || (p == Kind::Upper && k == Kind::Upper && next_lower);
                if boundary && !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            cur.extend(c.to_lowercase());
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    if out.is_empty() {
        out.push(token.to_string());
    }
    out
}
