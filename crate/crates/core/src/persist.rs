//! `RMEMB1` embedding files.
//!
//! Layout, all little-endian: the six magic bytes, a `u16` tag length and
//! the UTF-8 tag, `u32` dim, `u32` row count, then `rows × dim` `f32`
//! values row-major. Row ids live in a sidecar `<file>.index.json` mapping
//! id to row number.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::code::CodeEmbedding;
use crate::depgraph::MethodDependencyGraph;
use crate::error::{Error, Result};
use crate::graph::GraphEmbedding;

pub const EMBEDDING_MAGIC: &[u8; 6] = b"RMEMB1";
pub const HYBRID_TAG: &str = "HYBRID";

/// Named rows of one embedding family. Rows are kept sorted by id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub tag: String,
    pub dim: usize,
    pub rows: BTreeMap<String, Vec<f32>>,
}

pub fn index_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".index.json");
    PathBuf::from(s)
}

impl EmbeddingTable {
    pub fn new(tag: &str, dim: usize) -> Self {
        EmbeddingTable {
            tag: tag.to_string(),
            dim,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, id: &str, values: &[f64]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: values.len(),
            });
        }
        self.rows.insert(id.to_string(), values.iter().map(|&v| v as f32).collect());
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<Vec<f64>> {
        self.rows.get(id).map(|r| r.iter().map(|&v| v as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Graph vectors keyed by the graph's node ids.
    pub fn from_graph(emb: &GraphEmbedding, g: &MethodDependencyGraph) -> Result<Self> {
        let mut t = EmbeddingTable::new(emb.technique.as_str(), emb.dim);
        for (id, v) in g.nodes.iter().zip(&emb.vectors) {
            t.insert(id.as_str(), v.as_slice())?;
        }
        Ok(t)
    }

    pub fn from_code(emb: &CodeEmbedding) -> Result<Self> {
        let mut t = EmbeddingTable::new(emb.encoder.as_str(), emb.dim);
        for (id, v) in &emb.vectors {
            t.insert(id.as_str(), v.as_slice())?;
        }
        Ok(t)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let tag = self.tag.as_bytes();
        let mut out = Vec::with_capacity(16 + tag.len() + 4 * self.dim * self.rows.len());
        out.extend_from_slice(EMBEDDING_MAGIC);
        out.extend_from_slice(&(tag.len() as u16).to_le_bytes());
        out.extend_from_slice(tag);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.rows.len() as u32).to_le_bytes());
        for row in self.rows.values() {
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    /// Sorted JSON object `{id: row}`.
    pub fn index_json(&self) -> String {
        let index: BTreeMap<&str, usize> = self.rows.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
        serde_json::to_string_pretty(&index).expect("index serializes")
    }

    pub fn from_parts(bytes: &[u8], index_json: &str, path: &Path) -> Result<Self> {
        let bad = |m: &str| Error::format(path, m);
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(6).ok_or_else(|| bad("truncated header"))? != EMBEDDING_MAGIC {
            return Err(bad("not an RMEMB1 file"));
        }
        let tag_len = u16::from_le_bytes(cur.array().ok_or_else(|| bad("truncated header"))?) as usize;
        let tag = std::str::from_utf8(cur.take(tag_len).ok_or_else(|| bad("truncated tag"))?)
            .map_err(|_| bad("tag is not UTF-8"))?
            .to_string();
        let dim = u32::from_le_bytes(cur.array().ok_or_else(|| bad("truncated header"))?) as usize;
        let n = u32::from_le_bytes(cur.array().ok_or_else(|| bad("truncated header"))?) as usize;
        if bytes.len() - cur.pos != 4 * dim * n {
            return Err(bad(&format!("payload holds {} bytes, expected {}", bytes.len() - cur.pos, 4 * dim * n)));
        }
        let data: Vec<f32> = bytes[cur.pos..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4-byte chunk")))
            .collect();
        let index: BTreeMap<String, usize> = serde_json::from_str(index_json)
            .map_err(|e| Error::format(index_path(path), e.to_string()))?;
        if index.len() != n {
            return Err(bad(&format!("index lists {} ids for {n} rows", index.len())));
        }
        let mut rows = BTreeMap::new();
        for (id, row) in index {
            if row >= n {
                return Err(bad(&format!("row {row} of `{id}` out of range")));
            }
            rows.insert(id, data[row * dim..(row + 1) * dim].to_vec());
        }
        Ok(EmbeddingTable { tag, dim, rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))?;
        let idx = index_path(path);
        fs::write(&idx, self.index_json()).map_err(|e| Error::io(&idx, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let idx = index_path(path);
        let index = fs::read_to_string(&idx).map_err(|e| Error::io(&idx, e))?;
        EmbeddingTable::from_parts(&bytes, &index, path)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }

    fn array<const N: usize>(&mut self) -> Option<[u8; N]> {
        self.take(N).map(|s| s.try_into().expect("exact length"))
    }
}
