//! Method dependency graph: one node per method, an edge `a -> b` when `a`
//! calls `b` at least once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::Corpus;
use crate::model::MethodId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodDependencyGraph {
    /// Sorted; a node's index is its position here.
    pub nodes: Vec<MethodId>,
    /// Sorted, deduplicated, no self-loops.
    pub edges: Vec<(usize, usize)>,
}

pub fn build_mdg(c: &Corpus) -> MethodDependencyGraph {
    let nodes: Vec<MethodId> = c.methods.keys().cloned().collect();
    let index: BTreeMap<&MethodId, usize> = nodes.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let edges: BTreeSet<(usize, usize)> = c
        .raw_calls
        .iter()
        .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)))
        .filter(|(a, b)| a != b)
        .collect();
    MethodDependencyGraph {
        nodes,
        edges: edges.into_iter().collect(),
    }
}

/// Symmetric adjacency lists, sorted and deduplicated.
pub fn undirected_view(g: &MethodDependencyGraph) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.nodes.len()];
    for &(a, b) in &g.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

impl MethodDependencyGraph {
    /// Builds a graph over anonymous nodes `n0..`; handy for embedding tests.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let width = n.to_string().len();
        let nodes = (0..n)
            .map(|i| MethodId::parse(&format!("g::G::n{i:0width$}()")).unwrap())
            .collect();
        let set: BTreeSet<(usize, usize)> = edges.iter().copied().filter(|(a, b)| a != b && *a < n && *b < n).collect();
        MethodDependencyGraph {
            nodes,
            edges: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, id: &MethodId) -> Option<usize> {
        self.nodes.binary_search(id).ok()
    }

    /// Directed out-neighbour lists.
    pub fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
        }
        adj
    }

    /// Header `|V|`, then one sorted `src<TAB>dst` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.nodes.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{}\t{}", self.nodes[a], self.nodes[b]);
        }
        out
    }

    /// Reads an edge list; `nodes` supplies the full node set, since
    /// isolated methods never appear on an edge line.
    pub fn from_edge_list(text: &str, nodes: Vec<MethodId>, path: &Path) -> Result<Self> {
        let mut lines = text.lines();
        let header: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| Error::format(path, "missing node-count header"))?;
        let mut nodes = nodes;
        nodes.sort();
        nodes.dedup();
        if header != nodes.len() {
            return Err(Error::format(
                path,
                format!("header says {header} nodes, corpus has {}", nodes.len()),
            ));
        }
        let mut edges = BTreeSet::new();
        for (k, line) in lines.enumerate() {
            let (a, b) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(path, format!("line {}: expected src<TAB>dst", k + 2)))?;
            let find = |s: &str| {
                MethodId::parse(s)
                    .ok()
                    .and_then(|id| nodes.binary_search(&id).ok())
                    .ok_or_else(|| Error::format(path, format!("line {}: unknown node `{s}`", k + 2)))
            };
            edges.insert((find(a)?, find(b)?));
        }
        Ok(MethodDependencyGraph {
            nodes,
            edges: edges.into_iter().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;
    use crate::model::ProjectId;

    fn fig2() -> Corpus {
        parse_source(
            &ProjectId::new("p").unwrap(),
            &[(
                "A.java".into(),
                "class A { void m1() { m2(); m3(); m2(); } void m2() { m3(); } void m3() { m3(); } void lone() {} }".into(),
            )],
        )
        .unwrap()
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = build_mdg(&fig2());
        let names: Vec<&str> = g.nodes.iter().map(|m| m.name()).collect();
        assert_eq!(names, vec!["lone", "m1", "m2", "m3"]);
        assert_eq!(g.edges, vec![(1, 2), (1, 3), (2, 3)]);
        assert_eq!(build_mdg(&fig2()), g);
    }

    #[test]
    fn symmetric_view() {
        let g = build_mdg(&fig2());
        let adj = undirected_view(&g);
        assert_eq!(adj, vec![vec![], vec![2, 3], vec![1, 3], vec![1, 2]]);
        assert!(undirected_view(&MethodDependencyGraph::from_edges(0, &[])).is_empty());
        let star = MethodDependencyGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        assert_eq!(undirected_view(&star)[0].len(), 4);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = build_mdg(&fig2());
        let text = g.to_edge_list();
        assert!(text.starts_with("4\np::A::m1()\tp::A::m2()\n"));
        let back = MethodDependencyGraph::from_edge_list(&text, g.nodes.clone(), Path::new("x")).unwrap();
        assert_eq!(back, g);
        assert!(MethodDependencyGraph::from_edge_list("3\n", g.nodes.clone(), Path::new("x")).is_err());
    }
}
