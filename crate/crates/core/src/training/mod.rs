//! Labeled (method, class) pairs and the classical classifiers trained on
//! them.

mod bayes;
mod cv;
mod ensemble;
mod logistic;
mod model_file;
mod svm;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bayes::GaussianNb;
pub use cv::{
    cross_validate, cross_validate_by_method, cross_validate_with, grid_search, method_folds, nested_cross_validate, stratified_folds, CvReport, FoldPolicy,
    FoldScore, GridResult,
};
pub use ensemble::{fit_tree, BoostParams, Boosted, Forest, ForestParams};
pub use logistic::{penalized_nll, LogisticModel};
pub use model_file::MODEL_MAGIC;
pub use svm::{platt, LinearSvm};
pub use tree::{PackedTree, Tree, TreeNode};

use crate::error::{Error, Result};
use crate::frontend::Corpus;
use crate::fusion::HybridSpace;
use crate::linalg::sigmoid;
use crate::model::{ClassId, MethodId, MoveMethodTriple};
use crate::rng::RandomStream;

/// `hebd(method) ⊕ hebd(class)` with its label and origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: bool,
    pub method: MethodId,
    pub class: ClassId,
    /// Index of the originating triple; `None` for relocation samples.
    pub triple: Option<usize>,
}

fn pair(space: &HybridSpace, m: &MethodId, c: &ClassId, label: bool, triple: Option<usize>) -> Result<LabeledSample> {
    let mut features = space.method(m)?.to_vec();
    features.extend(space.pair_class(m, c)?);
    Ok(LabeledSample {
        features,
        label,
        method: m.clone(),
        class: c.clone(),
        triple,
    })
}

/// One negative (method ⊕ source) and one positive (method ⊕ target) per
/// triple, in triple order. A method leaving one source in `k` triples
/// therefore contributes its negative `k` times.
pub fn generate_training_data(triples: &[MoveMethodTriple], space: &HybridSpace) -> Result<Vec<LabeledSample>> {
    let mut out = Vec::with_capacity(2 * triples.len());
    for (k, t) in triples.iter().enumerate() {
        t.validate()?;
        out.push(pair(space, &t.method, &t.source_class, false, Some(k))?);
        out.push(pair(space, &t.method, &t.target_class, true, Some(k))?);
    }
    Ok(out)
}

/// Samples from methods assumed to be well placed. Each method gets
/// `pairs` positives with its owner class and `pairs` negatives with other
/// non-empty classes of the project, drawn per method. Methods in
/// `exclude` and methods alone in their class are skipped.
///
/// A positive pairs the method with its owner minus itself; draws after
/// the first also leave out one random other member, so the positives
/// differ. Negatives leave out as many random members of the other class,
/// so the class half alone cannot give the label away.
pub fn generate_relocation_data(
    corpus: &Corpus,
    space: &HybridSpace,
    exclude: &BTreeSet<MethodId>,
    pairs: usize,
    rng: &RandomStream,
) -> Result<Vec<LabeledSample>> {
    let live: Vec<&ClassId> = corpus
        .classes
        .iter()
        .map(|c| &c.id)
        .filter(|c| !space.empty_classes.contains(*c))
        .collect();
    let sample = |m: &MethodId, class: &ClassId, left_out: &[&MethodId], label: bool| -> Result<LabeledSample> {
        let mut features = space.method(m)?.to_vec();
        features.extend(space.class_without(class, left_out)?);
        Ok(LabeledSample {
            features,
            label,
            method: m.clone(),
            class: class.clone(),
            triple: None,
        })
    };
    let mut out = Vec::new();
    for (m, entry) in &corpus.methods {
        let owner = &entry.record.owner;
        let mates: Vec<&MethodId> = space.members[owner].iter().filter(|o| *o != m).collect();
        if exclude.contains(m) || mates.is_empty() {
            continue;
        }
        let others: Vec<&ClassId> = live.iter().copied().filter(|c| *c != owner).collect();
        if others.is_empty() {
            continue;
        }
        let mut r = rng.split(m.as_str());
        for draw in 0..pairs {
            // one extra member leaves after the first draw, when it can
            let extra = usize::from(draw > 0 && mates.len() > 1);
            let wrong = others[r.below(others.len())];
            let members = &space.members[wrong];
            let gone: Vec<&MethodId> = r
                .sample_indices(members.len(), (1 + extra).min(members.len()))
                .into_iter()
                .map(|i| &members[i])
                .collect();
            out.push(sample(m, wrong, &gone, false)?);
            let mut gone = vec![m];
            if extra == 1 {
                gone.push(mates[r.below(mates.len())]);
            }
            out.push(sample(m, owner, &gone, true)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Dt,
    Nb,
    Svm,
    Lr,
    Rf,
    Gbt,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 6] = [
        ClassifierKind::Dt,
        ClassifierKind::Nb,
        ClassifierKind::Svm,
        ClassifierKind::Lr,
        ClassifierKind::Rf,
        ClassifierKind::Gbt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Dt => "dt",
            ClassifierKind::Nb => "nb",
            ClassifierKind::Svm => "svm",
            ClassifierKind::Lr => "lr",
            ClassifierKind::Rf => "rf",
            ClassifierKind::Gbt => "gbt",
        }
    }

    pub fn default_params(self) -> Hyperparams {
        match self {
            ClassifierKind::Dt => Hyperparams::Dt {
                max_depth: None,
                min_samples_split: 2,
            },
            ClassifierKind::Nb => Hyperparams::Nb { var_smoothing: 1e-9 },
            ClassifierKind::Svm => Hyperparams::Svm {
                lambda: 1e-3,
                epochs: 20,
            },
            ClassifierKind::Lr => Hyperparams::Lr { l2: 1.0 },
            ClassifierKind::Rf => Hyperparams::Rf {
                trees: 100,
                max_depth: None,
                max_features: None,
                bootstrap: true,
            },
            ClassifierKind::Gbt => Hyperparams::Gbt {
                rounds: 100,
                learning_rate: 0.1,
                max_depth: 3,
            },
        }
    }

    /// Grids searched when none is given.
    pub fn default_grid(self) -> Vec<Hyperparams> {
        let mut grid = Vec::new();
        match self {
            ClassifierKind::Dt => {
                for max_depth in [Some(4), Some(8), None] {
                    for min_samples_split in [2, 5] {
                        grid.push(Hyperparams::Dt {
                            max_depth,
                            min_samples_split,
                        });
                    }
                }
            }
            ClassifierKind::Nb => {
                for var_smoothing in [1e-9, 1e-6, 1e-3] {
                    grid.push(Hyperparams::Nb { var_smoothing });
                }
            }
            ClassifierKind::Svm => {
                for lambda in [1e-4, 1e-3, 1e-2] {
                    grid.push(Hyperparams::Svm { lambda, epochs: 20 });
                }
            }
            ClassifierKind::Lr => {
                for l2 in [0.01, 0.1, 1.0, 10.0] {
                    grid.push(Hyperparams::Lr { l2 });
                }
            }
            ClassifierKind::Rf => {
                for trees in [50, 100, 200] {
                    for max_depth in [Some(8), Some(16), None] {
                        grid.push(Hyperparams::Rf {
                            trees,
                            max_depth,
                            max_features: None,
                            bootstrap: true,
                        });
                    }
                }
            }
            ClassifierKind::Gbt => {
                for rounds in [50, 100] {
                    for learning_rate in [0.05, 0.1, 0.3] {
                        grid.push(Hyperparams::Gbt {
                            rounds,
                            learning_rate,
                            max_depth: 3,
                        });
                    }
                }
            }
        }
        grid
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "xgb" {
            return Ok(ClassifierKind::Gbt);
        }
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown classifier `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Hyperparams {
    Dt {
        max_depth: Option<usize>,
        min_samples_split: usize,
    },
    Nb {
        var_smoothing: f64,
    },
    Svm {
        lambda: f64,
        epochs: usize,
    },
    Lr {
        l2: f64,
    },
    Rf {
        trees: usize,
        max_depth: Option<usize>,
        /// `None` is `ceil(sqrt(features))`.
        max_features: Option<usize>,
        bootstrap: bool,
    },
    Gbt {
        rounds: usize,
        learning_rate: f64,
        max_depth: usize,
    },
}

impl Hyperparams {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Hyperparams::Dt { .. } => ClassifierKind::Dt,
            Hyperparams::Nb { .. } => ClassifierKind::Nb,
            Hyperparams::Svm { .. } => ClassifierKind::Svm,
            Hyperparams::Lr { .. } => ClassifierKind::Lr,
            Hyperparams::Rf { .. } => ClassifierKind::Rf,
            Hyperparams::Gbt { .. } => ClassifierKind::Gbt,
        }
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let depth = |d: &Option<usize>| d.map_or("inf".to_string(), |d| d.to_string());
        match self {
            Hyperparams::Dt {
                max_depth,
                min_samples_split,
            } => write!(f, "dt(depth={}, min_split={min_samples_split})", depth(max_depth)),
            Hyperparams::Nb { var_smoothing } => write!(f, "nb(var_smoothing={var_smoothing:e})"),
            Hyperparams::Svm { lambda, epochs } => write!(f, "svm(lambda={lambda:e}, epochs={epochs})"),
            Hyperparams::Lr { l2 } => write!(f, "lr(l2={l2})"),
            Hyperparams::Rf {
                trees,
                max_depth,
                max_features,
                bootstrap,
            } => write!(
                f,
                "rf(trees={trees}, depth={}, max_features={}, bootstrap={bootstrap})",
                depth(max_depth),
                max_features.map_or("sqrt".to_string(), |m| m.to_string())
            ),
            Hyperparams::Gbt {
                rounds,
                learning_rate,
                max_depth,
            } => write!(f, "gbt(rounds={rounds}, lr={learning_rate}, depth={max_depth})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classifier {
    Tree(Tree),
    Bayes(GaussianNb),
    Svm(LinearSvm),
    Logistic(LogisticModel),
    Forest(Forest),
    Boosted(Boosted),
}

impl Classifier {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let p = match self {
            Classifier::Tree(t) => t.predict(x),
            Classifier::Bayes(m) => m.predict_proba(x),
            Classifier::Svm(m) => m.predict_proba(x),
            Classifier::Logistic(m) => m.predict_proba(x),
            Classifier::Forest(m) => m.predict_proba(x),
            Classifier::Boosted(m) => m.predict_proba(x),
        };
        p.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub kind: ClassifierKind,
    pub hyperparams: Hyperparams,
    /// Feature length, `2 × hybrid dim`.
    pub dim: usize,
    pub classifier: Classifier,
    /// Hash of the normalizers the features were built with.
    pub normalizer_hash: String,
    /// Text form of the run configuration.
    pub config: String,
}

impl TrainedModel {
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self.classifier.predict_proba(x))
    }

    /// A scorer for many rows at once, with tree ensembles repacked.
    pub fn batch_scorer(&self) -> BatchScorer<'_> {
        let trees = match &self.classifier {
            Classifier::Tree(t) => std::slice::from_ref(t),
            Classifier::Forest(f) => &f.trees,
            Classifier::Boosted(b) => &b.trees,
            _ => &[],
        };
        BatchScorer {
            model: self,
            packed: trees.iter().map(PackedTree::from).collect(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<bool> {
        Ok(self.predict_proba(x)? > 0.5)
    }

    /// Attaches the run provenance persisted with the model.
    pub fn with_provenance(mut self, normalizer_hash: &str, config: &str) -> Self {
        self.normalizer_hash = normalizer_hash.to_string();
        self.config = config.to_string();
        self
    }
}

/// Gives the same probabilities as [`TrainedModel::predict_proba`].
#[derive(Debug, Clone)]
pub struct BatchScorer<'a> {
    model: &'a TrainedModel,
    packed: Vec<PackedTree>,
}

impl BatchScorer<'_> {
    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        if let Some(x) = rows.iter().find(|x| x.len() != self.model.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.model.dim,
                actual: x.len(),
            });
        }
        let mut sums = vec![0.0; rows.len()];
        for t in &self.packed {
            t.accumulate(rows, &mut sums);
        }
        let finish = |s: f64| match &self.model.classifier {
            Classifier::Tree(_) => s,
            Classifier::Forest(f) => s / f.trees.len() as f64,
            Classifier::Boosted(b) => sigmoid(b.init + b.learning_rate * s),
            other => unreachable!("{other:?} has no trees"),
        };
        Ok(match &self.model.classifier {
            Classifier::Tree(_) | Classifier::Forest(_) | Classifier::Boosted(_) => sums.into_iter().map(|s| finish(s).clamp(0.0, 1.0)).collect(),
            c => rows.iter().map(|x| c.predict_proba(x)).collect(),
        })
    }
}

pub fn train_classifier(kind: ClassifierKind, samples: &[LabeledSample], hp: &Hyperparams, rng: &RandomStream) -> Result<TrainedModel> {
    if hp.kind() != kind {
        return Err(Error::InvalidParameter(format!("{hp} given for classifier {kind}")));
    }
    let Some(first) = samples.first() else {
        return Err(Error::SingleClassInput);
    };
    let dim = first.features.len();
    if let Some(bad) = samples.iter().find(|s| s.features.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.features.len(),
        });
    }
    let positives = samples.iter().filter(|s| s.label).count();
    if samples.len() < 2 || positives == 0 || positives == samples.len() {
        return Err(Error::SingleClassInput);
    }
    let rows: Vec<&[f64]> = samples.iter().map(|s| s.features.as_slice()).collect();
    let labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
    let rng = rng.split(kind.as_str());
    let classifier = match *hp {
        Hyperparams::Dt {
            max_depth,
            min_samples_split,
        } => Classifier::Tree(fit_tree(&rows, &labels, max_depth, min_samples_split)),
        Hyperparams::Nb { var_smoothing } => Classifier::Bayes(GaussianNb::fit(&rows, &labels, var_smoothing)),
        Hyperparams::Svm { lambda, epochs } => Classifier::Svm(LinearSvm::fit(&rows, &labels, lambda, epochs, &mut rng.split("sgd"))),
        Hyperparams::Lr { l2 } => Classifier::Logistic(LogisticModel::fit(&rows, &labels, l2)),
        Hyperparams::Rf {
            trees,
            max_depth,
            max_features,
            bootstrap,
        } => Classifier::Forest(Forest::fit(
            &rows,
            &labels,
            &ForestParams {
                trees,
                max_depth,
                min_samples_split: 2,
                max_features,
                bootstrap,
            },
            &rng,
        )),
        Hyperparams::Gbt {
            rounds,
            learning_rate,
            max_depth,
        } => Classifier::Boosted(Boosted::fit(
            &rows,
            &labels,
            &BoostParams {
                rounds,
                learning_rate,
                max_depth,
            },
        )),
    };
    Ok(TrainedModel {
        kind,
        hyperparams: hp.clone(),
        dim,
        classifier,
        normalizer_hash: String::new(),
        config: String::new(),
    })
}
