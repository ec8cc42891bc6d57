use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::MoveMethodTriple;
use crate::recommend::{Decision, Recommendation};

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when nothing was recommended, so precision is 0 by convention.
    pub nothing_recommended: bool,
}

impl Prf {
    pub fn from_counts(correct: usize, recommended: usize, moved: usize) -> Prf {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, recommended);
        let recall = ratio(correct, moved);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            nothing_recommended: recommended == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub correct: usize,
    pub recommended: usize,
    pub moved: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub nothing_recommended: bool,
}

/// A Move counts as correct only when its exact (method, source, target)
/// triple is in the ground truth.
pub fn compute_metrics(recommendations: &[Recommendation], ground_truth: &[MoveMethodTriple]) -> EvalResult {
    let truth: BTreeSet<(&str, &str, &str)> = ground_truth
        .iter()
        .map(|t| (t.method.as_str(), t.source_class.as_str(), t.target_class.as_str()))
        .collect();
    let mut recommended = 0;
    let mut correct = 0;
    for r in recommendations {
        if let Decision::Move(target) = &r.decision {
            recommended += 1;
            if truth.contains(&(r.method.as_str(), r.source_class.as_str(), target.as_str())) {
                correct += 1;
            }
        }
    }
    let moved = truth.len();
    let prf = Prf::from_counts(correct, recommended, moved);
    EvalResult {
        correct,
        recommended,
        moved,
        precision: prf.precision,
        recall: prf.recall,
        f1: prf.f1,
        nothing_recommended: prf.nothing_recommended,
    }
}
