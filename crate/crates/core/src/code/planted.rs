use std::collections::BTreeSet;

use crate::frontend::NodeType;
use crate::model::MethodId;
use crate::paths::{Direction, PathContext, PathNode, PathSet};
use crate::rng::RandomStream;

const VERBS: [&str; 6] = ["get", "set", "compute", "find", "update", "check"];
const NOUNS: [&str; 6] = ["Alpha", "Bravo", "Count", "Delta", "Entry", "Field"];
const NOISE_TOKENS: usize = 16;
const NOISE_PATHS: usize = 8;

/// A corpus where each method name always co-occurs with one path that no
/// other name uses, buried among shared noise contexts.
///
/// `names` distinct names (at most 36), `per_name` methods each, every
/// method carrying its planted context plus `noise` random ones. Same
/// stream, same corpus.
pub fn planted_corpus(names: usize, per_name: usize, noise: usize, rng: &RandomStream) -> Vec<PathSet> {
    let mut r = rng.split("planted");
    let mut seen = BTreeSet::new();
    let mut fresh_path = |r: &mut RandomStream| loop {
        let nodes: Vec<PathNode> = (0..3)
            .map(|k| {
                let t = NodeType::ALL[r.below(NodeType::ALL.len())];
                PathNode::new(t.as_str(), if k == 0 { Direction::Up } else { Direction::Down })
            })
            .collect();
        if seen.insert(nodes.clone()) {
            break nodes;
        }
    };
    let noise_paths: Vec<Vec<PathNode>> = (0..NOISE_PATHS).map(|_| fresh_path(&mut r)).collect();
    let planted: Vec<Vec<PathNode>> = (0..names).map(|_| fresh_path(&mut r)).collect();
    let tokens: Vec<String> = (0..NOISE_TOKENS).map(|i| format!("tok{i}")).collect();
    let token = |r: &mut RandomStream| tokens[r.below(tokens.len())].clone();

    let mut out = Vec::with_capacity(names * per_name);
    for (i, path) in planted.iter().enumerate() {
        let name = format!("{}{}", VERBS[i / NOUNS.len() % VERBS.len()], NOUNS[i % NOUNS.len()]);
        for j in 0..per_name {
            let mut contexts = vec![PathContext {
                start_token: token(&mut r),
                node_types: path.clone(),
                end_token: token(&mut r),
            }];
            for _ in 0..noise {
                contexts.push(PathContext {
                    start_token: token(&mut r),
                    node_types: noise_paths[r.below(NOISE_PATHS)].clone(),
                    end_token: token(&mut r),
                });
            }
            r.shuffle(&mut contexts);
            out.push(PathSet {
                method: MethodId::parse(&format!("planted::C{i}x{j}::{name}()")).expect("valid planted id"),
                contexts,
                truncated: false,
            });
        }
    }
    out
}
