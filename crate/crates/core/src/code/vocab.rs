use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{subtokenize, PathSet};

pub const UNK: usize = 0;
pub const PAD: usize = 1;
const UNK_SYMBOL: &str = "<UNK>";
const PAD_SYMBOL: &str = "<PAD>";

/// Index spaces for both encoders. Every map reserves `UNK = 0` and
/// `PAD = 1`; remaining symbols are numbered in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub token_to_index: BTreeMap<String, usize>,
    pub subtoken_to_index: BTreeMap<String, usize>,
    pub path_to_index: BTreeMap<String, usize>,
    pub node_type_to_index: BTreeMap<String, usize>,
    pub target_name_to_index: BTreeMap<String, usize>,
    pub min_count: usize,
    pub max_subtokens: usize,
}

fn index_map(counts: BTreeMap<String, usize>, min_count: usize) -> BTreeMap<String, usize> {
    let mut map = BTreeMap::from([(UNK_SYMBOL.to_string(), UNK), (PAD_SYMBOL.to_string(), PAD)]);
    for (sym, _) in counts.into_iter().filter(|(s, c)| *c >= min_count && s != UNK_SYMBOL && s != PAD_SYMBOL) {
        let next = map.len();
        map.insert(sym, next);
    }
    map
}

/// Method names subtokenized and re-joined: `getFooBar` -> `get|foo|bar`.
pub fn target_name(method_name: &str) -> String {
    subtokenize(method_name).join("|")
}

pub fn build_vocab(pathsets: &[PathSet], min_count: usize, max_subtokens: usize) -> Result<Vocabulary> {
    if pathsets.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if min_count == 0 {
        return Err(Error::InvalidParameter("min_count must be at least 1".into()));
    }
    let mut tokens = BTreeMap::new();
    let mut subtokens = BTreeMap::new();
    let mut paths = BTreeMap::new();
    let mut nodes = BTreeMap::new();
    let mut names = BTreeMap::new();
    let bump = |m: &mut BTreeMap<String, usize>, k: String| *m.entry(k).or_insert(0) += 1;
    for set in pathsets {
        bump(&mut names, target_name(set.method.name()));
        for ctx in &set.contexts {
            for tok in [&ctx.start_token, &ctx.end_token] {
                bump(&mut tokens, tok.clone());
                for sub in subtokenize(tok).into_iter().take(max_subtokens) {
                    bump(&mut subtokens, sub);
                }
            }
            bump(&mut paths, ctx.path_symbol());
            for node in &ctx.node_types {
                bump(&mut nodes, node.to_string());
            }
        }
    }
    Ok(Vocabulary {
        token_to_index: index_map(tokens, min_count),
        subtoken_to_index: index_map(subtokens, min_count),
        path_to_index: index_map(paths, min_count),
        node_type_to_index: index_map(nodes, min_count),
        // every name stays addressable as a label
        target_name_to_index: index_map(names, 1),
        min_count,
        max_subtokens,
    })
}

impl Vocabulary {
    pub fn lookup(map: &BTreeMap<String, usize>, key: &str) -> usize {
        map.get(key).copied().unwrap_or(UNK)
    }

    pub fn token(&self, t: &str) -> usize {
        Self::lookup(&self.token_to_index, t)
    }

    pub fn path(&self, p: &str) -> usize {
        Self::lookup(&self.path_to_index, p)
    }

    pub fn node(&self, n: &str) -> usize {
        Self::lookup(&self.node_type_to_index, n)
    }

    pub fn target(&self, method_name: &str) -> usize {
        Self::lookup(&self.target_name_to_index, &target_name(method_name))
    }

    /// Subtoken indices of a token, truncated; never empty.
    pub fn subtokens(&self, t: &str) -> Vec<usize> {
        subtokenize(t)
            .iter()
            .take(self.max_subtokens.max(1))
            .map(|s| Self::lookup(&self.subtoken_to_index, s))
            .collect()
    }

    /// Label text for an index, for reporting predictions.
    pub fn target_label(&self, index: usize) -> Option<&str> {
        self.target_name_to_index.iter().find(|(_, i)| **i == index).map(|(k, _)| k.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vocabulary serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
