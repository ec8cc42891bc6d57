//! Hybrid embeddings: min-max normalized code and graph vectors, weighted
//! and concatenated per method; a class is the mean of its methods.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::depgraph::MethodDependencyGraph;
use crate::error::{Error, Result};
use crate::frontend::Corpus;
use crate::graph::GraphEmbedding;
use crate::model::{ClassId, ClassRecord, EmbeddingVector, MethodId};
use crate::persist::{EmbeddingTable, HYBRID_TAG};

pub type MethodVectors = BTreeMap<MethodId, EmbeddingVector>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Code,
    Graph,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Code => "code",
            Family::Graph => "graph",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-dimension min-max scaling to `[0, 1]`, fitted on method vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub family: Family,
    pub dims: usize,
    pub mins: Vec<f64>,
    pub maxes: Vec<f64>,
}

pub fn fit_normalizer(family: Family, embeddings: &MethodVectors) -> Result<Normalizer> {
    let mut it = embeddings.values();
    let first = it.next().ok_or(Error::EmptyInput)?;
    let mut mins = first.as_slice().to_vec();
    let mut maxes = mins.clone();
    for v in it {
        if v.dim() != mins.len() {
            return Err(Error::DimensionMismatch {
                expected: mins.len(),
                actual: v.dim(),
            });
        }
        for (k, &x) in v.as_slice().iter().enumerate() {
            mins[k] = mins[k].min(x);
            maxes[k] = maxes[k].max(x);
        }
    }
    Ok(Normalizer {
        family,
        dims: mins.len(),
        mins,
        maxes,
    })
}

impl Normalizer {
    /// Scales `v`; out-of-range entries clamp to `[0, 1]` and are counted.
    pub fn transform(&self, v: &[f64]) -> Result<(Vec<f64>, usize)> {
        if v.len() != self.dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims,
                actual: v.len(),
            });
        }
        let mut clamped = 0;
        let out = v
            .iter()
            .zip(self.mins.iter().zip(&self.maxes))
            .map(|(&x, (&lo, &hi))| {
                if hi <= lo {
                    return 0.5;
                }
                let t = (x - lo) / (hi - lo);
                if !(0.0..=1.0).contains(&t) {
                    clamped += 1;
                }
                t.clamp(0.0, 1.0)
            })
            .collect();
        Ok((out, clamped))
    }
}

/// The fitted pair used for one fusion run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionNormalizers {
    pub code: Normalizer,
    pub graph: Normalizer,
}

impl FusionNormalizers {
    pub fn fit(code: &MethodVectors, graph: &MethodVectors) -> Result<Self> {
        Ok(FusionNormalizers {
            code: fit_normalizer(Family::Code, code)?,
            graph: fit_normalizer(Family::Graph, graph)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("normalizers serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Referenced by trained models.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn hybrid_dim(&self) -> usize {
        self.code.dims + self.graph.dims
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridEmbedding {
    /// A method or class id.
    pub id: String,
    pub values: Vec<f64>,
}

/// `[α·norm(code), (1−α)·norm(graph)]`; also returns the clamp count.
pub fn fuse_method(
    m: &MethodId,
    code: &MethodVectors,
    graph: &MethodVectors,
    norms: &FusionNormalizers,
    alpha: f64,
) -> Result<(HybridEmbedding, usize)> {
    let missing = |family: Family| Error::MissingEmbedding {
        family: family.as_str(),
        id: m.to_string(),
    };
    let c = code.get(m).ok_or_else(|| missing(Family::Code))?;
    let g = graph.get(m).ok_or_else(|| missing(Family::Graph))?;
    let (nc, kc) = norms.code.transform(c.as_slice())?;
    let (ng, kg) = norms.graph.transform(g.as_slice())?;
    let values = nc.iter().map(|x| alpha * x).chain(ng.iter().map(|x| (1.0 - alpha) * x)).collect();
    Ok((
        HybridEmbedding {
            id: m.to_string(),
            values,
        },
        kc + kg,
    ))
}

/// Mean of the member hybrids. A class with no embedded member gets a
/// zero vector and `true` (not a candidate).
pub fn class_embedding(c: &ClassRecord, method_hybrids: &BTreeMap<MethodId, HybridEmbedding>, dim: usize) -> (HybridEmbedding, bool) {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for h in c.methods.iter().filter_map(|m| method_hybrids.get(m)) {
        for (s, v) in sum.iter_mut().zip(&h.values) {
            *s += v;
        }
        n += 1;
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    (
        HybridEmbedding {
            id: c.id.to_string(),
            values: sum,
        },
        n == 0,
    )
}

/// Graph vectors keyed by method id.
pub fn graph_vectors(emb: &GraphEmbedding, g: &MethodDependencyGraph) -> MethodVectors {
    g.nodes.iter().cloned().zip(emb.vectors.iter().cloned()).collect()
}

/// Table rows keyed by method id; non-method ids are an error.
pub fn table_vectors(t: &EmbeddingTable) -> Result<MethodVectors> {
    t.rows
        .iter()
        .map(|(id, row)| Ok((MethodId::parse(id)?, EmbeddingVector::new(row.iter().map(|&v| v as f64).collect())?)))
        .collect()
}

/// Every method and class of one corpus in hybrid space.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSpace {
    pub dim: usize,
    pub methods: BTreeMap<MethodId, HybridEmbedding>,
    pub classes: BTreeMap<ClassId, HybridEmbedding>,
    pub empty_classes: BTreeSet<ClassId>,
    /// Members with a hybrid, per class.
    pub members: BTreeMap<ClassId, Vec<MethodId>>,
    /// Normalized entries that fell outside the fitted range.
    pub clamped: usize,
}

impl HybridSpace {
    pub fn build(corpus: &Corpus, code: &MethodVectors, graph: &MethodVectors, norms: &FusionNormalizers, alpha: f64) -> Result<Self> {
        let dim = norms.hybrid_dim();
        let mut methods = BTreeMap::new();
        let mut clamped = 0;
        for m in corpus.methods.keys() {
            let (h, k) = fuse_method(m, code, graph, norms, alpha)?;
            clamped += k;
            methods.insert(m.clone(), h);
        }
        if clamped > 0 {
            log::info!("{clamped} normalized entries clamped to [0, 1]");
        }
        let mut space = HybridSpace {
            dim,
            methods,
            classes: BTreeMap::new(),
            empty_classes: BTreeSet::new(),
            members: BTreeMap::new(),
            clamped,
        };
        space.rebuild_classes(corpus);
        Ok(space)
    }

    fn rebuild_classes(&mut self, corpus: &Corpus) {
        for c in &corpus.classes {
            let (h, empty) = class_embedding(c, &self.methods, self.dim);
            if empty {
                self.empty_classes.insert(c.id.clone());
            }
            self.classes.insert(c.id.clone(), h);
            let live = c.methods.iter().filter(|m| self.methods.contains_key(*m)).cloned().collect();
            self.members.insert(c.id.clone(), live);
        }
    }

    /// The class as seen from method `m`: when `m` is a member, the mean
    /// of the other members, so a method is never compared with itself.
    /// A class whose only member is `m` falls back to the full mean.
    pub fn pair_class(&self, m: &MethodId, c: &ClassId) -> Result<Vec<f64>> {
        self.class_excluding(c, m)
    }

    /// Mean of the members of `c` other than `left_out`; the full mean when
    /// `left_out` is not a member or is the only one.
    pub fn class_excluding(&self, c: &ClassId, left_out: &MethodId) -> Result<Vec<f64>> {
        self.class_without(c, &[left_out])
    }

    /// Mean of the members of `c` not in `left_out`; the full mean when
    /// that would leave nothing or `left_out` holds no member.
    pub fn class_without(&self, c: &ClassId, left_out: &[&MethodId]) -> Result<Vec<f64>> {
        let full = self.class(c)?;
        let members = &self.members[c];
        let kept: Vec<&MethodId> = members.iter().filter(|o| !left_out.contains(o)).collect();
        if kept.is_empty() || kept.len() == members.len() {
            return Ok(full.to_vec());
        }
        let mut sum = vec![0.0; self.dim];
        for other in &kept {
            for (s, v) in sum.iter_mut().zip(&self.methods[*other].values) {
                *s += v;
            }
        }
        let n = kept.len() as f64;
        Ok(sum.into_iter().map(|s| s / n).collect())
    }

    pub fn method(&self, m: &MethodId) -> Result<&[f64]> {
        self.methods
            .get(m)
            .map(|h| h.values.as_slice())
            .ok_or_else(|| Error::MissingHybrid(m.to_string()))
    }

    pub fn class(&self, c: &ClassId) -> Result<&[f64]> {
        self.classes
            .get(c)
            .map(|h| h.values.as_slice())
            .ok_or_else(|| Error::MissingHybrid(c.to_string()))
    }

    pub fn to_table(&self) -> Result<EmbeddingTable> {
        let mut t = EmbeddingTable::new(HYBRID_TAG, self.dim);
        for h in self.methods.values().chain(self.classes.values()) {
            t.insert(&h.id, &h.values)?;
        }
        Ok(t)
    }

    /// Method rows come from the table; class rows are recomputed from the
    /// corpus membership so the empty-class flags are exact.
    pub fn from_table(t: &EmbeddingTable, corpus: &Corpus) -> Result<Self> {
        let mut methods = BTreeMap::new();
        for m in corpus.methods.keys() {
            let values = t.get(m.as_str()).ok_or_else(|| Error::MissingHybrid(m.to_string()))?;
            methods.insert(
                m.clone(),
                HybridEmbedding {
                    id: m.to_string(),
                    values,
                },
            );
        }
        let mut space = HybridSpace {
            dim: t.dim,
            methods,
            classes: BTreeMap::new(),
            empty_classes: BTreeSet::new(),
            members: BTreeMap::new(),
            clamped: 0,
        };
        space.rebuild_classes(corpus);
        Ok(space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mid(s: &str) -> MethodId {
        MethodId::parse(s).unwrap()
    }

    fn vecs(rows: &[(&str, &[f64])]) -> MethodVectors {
        rows.iter().map(|(id, v)| (mid(id), EmbeddingVector::new(v.to_vec()).unwrap())).collect()
    }

    #[test]
    fn fit_and_transform() {
        let n = fit_normalizer(Family::Code, &vecs(&[("p::A::f()", &[0.0, 2.0]), ("p::A::g()", &[4.0, 2.0])])).unwrap();
        assert_eq!(n.mins, vec![0.0, 2.0]);
        assert_eq!(n.maxes, vec![4.0, 2.0]);
        assert_eq!(n.transform(&[4.0, 2.0]).unwrap(), (vec![1.0, 0.5], 0));
        assert_eq!(n.transform(&[8.0, 2.0]).unwrap(), (vec![1.0, 0.5], 1));
        let one = fit_normalizer(Family::Graph, &vecs(&[("p::A::f()", &[3.0, -1.0, 7.0])])).unwrap();
        assert_eq!(one.transform(&[3.0, -1.0, 7.0]).unwrap().0, vec![0.5; 3]);
        assert!(matches!(fit_normalizer(Family::Code, &BTreeMap::new()), Err(Error::EmptyInput)));
    }

    fn unit_norms() -> FusionNormalizers {
        let unit = |family| Normalizer {
            family,
            dims: 2,
            mins: vec![0.0; 2],
            maxes: vec![1.0; 2],
        };
        FusionNormalizers {
            code: unit(Family::Code),
            graph: unit(Family::Graph),
        }
    }

    #[test]
    fn fused_layout() {
        let code = vecs(&[("p::A::f()", &[1.0, 0.0])]);
        let graph = vecs(&[("p::A::f()", &[0.0, 1.0])]);
        let m = mid("p::A::f()");
        let (h, _) = fuse_method(&m, &code, &graph, &unit_norms(), 0.5).unwrap();
        assert_eq!(h.values, vec![0.5, 0.0, 0.0, 0.5]);
        let (h, _) = fuse_method(&m, &code, &graph, &unit_norms(), 1.0).unwrap();
        assert_eq!(&h.values[2..], &[0.0, 0.0]);
        let err = fuse_method(&m, &code, &BTreeMap::new(), &unit_norms(), 0.5).unwrap_err();
        assert!(matches!(err, Error::MissingEmbedding { family: "graph", .. }));
    }

    #[test]
    fn class_means() {
        let hy = |id: &str, v: [f64; 4]| {
            (
                mid(id),
                HybridEmbedding {
                    id: id.into(),
                    values: v.to_vec(),
                },
            )
        };
        let hybrids: BTreeMap<_, _> = [hy("p::A::f()", [1.0, 0.0, 0.0, 0.0]), hy("p::A::g()", [0.0, 1.0, 0.0, 0.0])].into();
        let mut a = ClassRecord::new(ClassId::parse("p::A").unwrap());
        a.methods.extend(hybrids.keys().cloned());
        assert_eq!(class_embedding(&a, &hybrids, 4).0.values, vec![0.5, 0.5, 0.0, 0.0]);
        a.methods.remove(&mid("p::A::g()"));
        let (single, flagged) = class_embedding(&a, &hybrids, 4);
        assert!(!flagged);
        assert_eq!(single.values, hybrids[&mid("p::A::f()")].values);
        let empty = ClassRecord::new(ClassId::parse("p::E").unwrap());
        let (h, flagged) = class_embedding(&empty, &hybrids, 4);
        assert!(flagged);
        assert_eq!(h.values, vec![0.0; 4]);
    }

    proptest! {
        #[test]
        fn entries_bounded_and_split_recovers(
            rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 5), 2..8),
            alpha in 0.01f64..0.99,
        ) {
            let code: MethodVectors = rows.iter().enumerate()
                .map(|(i, r)| (mid(&format!("p::A::m{i}()")), EmbeddingVector::new(r[..2].to_vec()).unwrap()))
                .collect();
            let graph: MethodVectors = rows.iter().enumerate()
                .map(|(i, r)| (mid(&format!("p::A::m{i}()")), EmbeddingVector::new(r[2..].to_vec()).unwrap()))
                .collect();
            let norms = FusionNormalizers::fit(&code, &graph).unwrap();
            let bound = alpha.max(1.0 - alpha);
            for m in code.keys() {
                let (h, clamped) = fuse_method(m, &code, &graph, &norms, alpha).unwrap();
                prop_assert_eq!(clamped, 0);
                prop_assert_eq!(h.values.len(), 5);
                prop_assert!(h.values.iter().all(|&v| (0.0..=bound).contains(&v)));
                let (half, _) = fuse_method(m, &code, &graph, &norms, 0.5).unwrap();
                let expect: Vec<f64> = norms.code.transform(code[m].as_slice()).unwrap().0.into_iter()
                    .chain(norms.graph.transform(graph[m].as_slice()).unwrap().0)
                    .collect();
                let doubled: Vec<f64> = half.values.iter().map(|v| v * 2.0).collect();
                prop_assert_eq!(doubled, expect);
            }
        }

        #[test]
        fn class_mean_in_hull_and_order_free(
            rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..6),
        ) {
            let hybrids: BTreeMap<MethodId, HybridEmbedding> = rows.iter().enumerate()
                .map(|(i, r)| {
                    let id = format!("p::A::m{i}()");
                    (mid(&id), HybridEmbedding { id, values: r.clone() })
                })
                .collect();
            let mut c = ClassRecord::new(ClassId::parse("p::A").unwrap());
            c.methods.extend(hybrids.keys().cloned());
            let (h, flagged) = class_embedding(&c, &hybrids, 3);
            prop_assert!(!flagged);
            for k in 0..3 {
                let lo = rows.iter().map(|r| r[k]).fold(f64::INFINITY, f64::min);
                let hi = rows.iter().map(|r| r[k]).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(h.values[k] >= lo - 1e-12 && h.values[k] <= hi + 1e-12);
                // order-free: a reversed summation gives the same mean
                let rev: f64 = rows.iter().rev().map(|r| r[k]).sum::<f64>() / rows.len() as f64;
                prop_assert!((rev - h.values[k]).abs() < 1e-12);
            }
        }
    }
}
