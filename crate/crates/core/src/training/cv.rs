use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_classifier, ClassifierKind, Hyperparams, LabeledSample, TrainedModel};
use crate::error::{Error, Result};
use crate::evaluation::Prf;
use crate::model::MethodId;
use crate::rng::RandomStream;

/// Fold number per sample. Each label is shuffled on its own and dealt
/// round-robin, so every fold holds its share of each label to within one.
pub fn stratified_folds(labels: &[bool], folds: usize, rng: &mut RandomStream) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("{folds} folds; need at least 2")));
    }
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let minority = pos.len().min(neg.len());
    if minority < folds {
        return Err(Error::TooFewSamplesForFolds {
            samples: labels.len(),
            minority,
            folds,
        });
    }
    rng.shuffle(&mut pos);
    rng.shuffle(&mut neg);
    let mut fold = vec![0; labels.len()];
    for (k, &i) in pos.iter().enumerate() {
        fold[i] = k % folds;
    }
    // continue the deal where the positives stopped to even out fold sizes
    for (k, &i) in neg.iter().enumerate() {
        fold[i] = (k + pos.len()) % folds;
    }
    Ok(fold)
}

/// Fold number per sample with every sample of one method in the same
/// fold. Methods are shuffled and dealt round-robin; when each method
/// contributes as many positives as negatives, so does each fold.
pub fn method_folds(samples: &[LabeledSample], folds: usize, rng: &mut RandomStream) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!("{folds} folds; need at least 2")));
    }
    let mut methods: Vec<&MethodId> = samples.iter().map(|s| &s.method).collect::<BTreeSet<_>>().into_iter().collect();
    if methods.len() < folds {
        return Err(Error::TooFewSamplesForFolds {
            samples: samples.len(),
            minority: methods.len(),
            folds,
        });
    }
    rng.shuffle(&mut methods);
    let fold_of: BTreeMap<&MethodId, usize> = methods.iter().enumerate().map(|(k, m)| (*m, k % folds)).collect();
    Ok(samples.iter().map(|s| fold_of[&s.method]).collect())
}

/// How samples are dealt into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldPolicy {
    /// By label, see [`stratified_folds`].
    Stratified,
    /// By method, see [`method_folds`].
    ByMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub repeat: usize,
    pub fold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    /// Sorted by (repeat, fold).
    pub rows: Vec<FoldScore>,
    /// Means over all rows.
    pub mean: Prf,
}

fn score(model: &TrainedModel, test: &[&LabeledSample]) -> Result<Prf> {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for s in test {
        match (model.predict(&s.features)?, s.label) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(Prf::from_counts(tp, tp + fp, tp + fn_))
}

type FitFn<'a> = dyn Fn(&[LabeledSample], &RandomStream) -> Result<TrainedModel> + Sync + 'a;

/// Repeated stratified k-fold with an arbitrary fitting procedure. Folds
/// run in parallel; every (repeat, fold) cell has its own stream.
pub fn cross_validate_with(
    samples: &[LabeledSample],
    folds: usize,
    repeats: usize,
    policy: FoldPolicy,
    rng: &RandomStream,
    fit: &FitFn<'_>,
) -> Result<CvReport> {
    let labels: Vec<bool> = samples.iter().map(|s| s.label).collect();
    let assignments = (0..repeats)
        .map(|r| {
            let mut fr = rng.split_index("folds", r);
            match policy {
                FoldPolicy::Stratified => stratified_folds(&labels, folds, &mut fr),
                FoldPolicy::ByMethod => method_folds(samples, folds, &mut fr),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> = (0..repeats).flat_map(|r| (0..folds).map(move |f| (r, f))).collect();
    let rows = cells
        .par_iter()
        .map(|&(r, f)| {
            let assign = &assignments[r];
            let train: Vec<LabeledSample> = samples.iter().zip(assign).filter(|(_, &a)| a != f).map(|(s, _)| s.clone()).collect();
            let test: Vec<&LabeledSample> = samples.iter().zip(assign).filter(|(_, &a)| a == f).map(|(s, _)| s).collect();
            let model = fit(&train, &rng.split_index("fit", r * folds + f))?;
            let prf = score(&model, &test)?;
            Ok(FoldScore {
                repeat: r,
                fold: f,
                precision: prf.precision,
                recall: prf.recall,
                f1: prf.f1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len() as f64;
    let mean = Prf {
        precision: rows.iter().map(|r| r.precision).sum::<f64>() / n,
        recall: rows.iter().map(|r| r.recall).sum::<f64>() / n,
        f1: rows.iter().map(|r| r.f1).sum::<f64>() / n,
        nothing_recommended: false,
    };
    Ok(CvReport { rows, mean })
}

pub fn cross_validate(hp: &Hyperparams, samples: &[LabeledSample], folds: usize, repeats: usize, rng: &RandomStream) -> Result<CvReport> {
    cross_validate_with(samples, folds, repeats, FoldPolicy::Stratified, rng, &|train, r| train_classifier(hp.kind(), train, hp, r))
}

/// As [`cross_validate`], but no method has samples on both sides of a
/// split.
pub fn cross_validate_by_method(hp: &Hyperparams, samples: &[LabeledSample], folds: usize, repeats: usize, rng: &RandomStream) -> Result<CvReport> {
    cross_validate_with(samples, folds, repeats, FoldPolicy::ByMethod, rng, &|train, r| train_classifier(hp.kind(), train, hp, r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub best: Hyperparams,
    /// Refit on every sample with `best`.
    pub model: TrainedModel,
    /// Mean F1 per grid point, in grid order.
    pub scores: Vec<f64>,
}

/// Exhaustive search by mean F1 over one stratified split; the first grid
/// point wins ties.
pub fn grid_search(kind: ClassifierKind, samples: &[LabeledSample], grid: &[Hyperparams], folds: usize, rng: &RandomStream) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty hyperparameter grid".into()));
    }
    if let Some(bad) = grid.iter().find(|h| h.kind() != kind) {
        return Err(Error::InvalidParameter(format!("{bad} in a {kind} grid")));
    }
    // every point sees the same folds
    let folds_rng = rng.split("grid-folds");
    let scores = grid
        .par_iter()
        .map(|hp| Ok(cross_validate(hp, samples, folds, 1, &folds_rng)?.mean.f1))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = i;
        }
    }
    let model = train_classifier(kind, samples, &grid[best], &rng.split("refit"))?;
    Ok(GridResult {
        best: grid[best].clone(),
        model,
        scores,
    })
}

/// Outer repeated k-fold whose training parts are tuned by an inner grid
/// search, so tuning never sees the outer test fold.
pub fn nested_cross_validate(
    kind: ClassifierKind,
    samples: &[LabeledSample],
    grid: &[Hyperparams],
    folds: usize,
    repeats: usize,
    inner_folds: usize,
    rng: &RandomStream,
) -> Result<CvReport> {
    cross_validate_with(samples, folds, repeats, FoldPolicy::Stratified, rng, &|train, r| {
        Ok(grid_search(kind, train, grid, inner_folds, r)?.model)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use crate::training::tests::{blobs, sample};
    use proptest::prelude::*;

    #[test]
    fn two_folds_on_four_samples() {
        let labels = [true, false, true, false];
        let f = stratified_folds(&labels, 2, &mut seeded_rng(1)).unwrap();
        for fold in 0..2 {
            let pos = (0..4).filter(|&i| f[i] == fold && labels[i]).count();
            let neg = (0..4).filter(|&i| f[i] == fold && !labels[i]).count();
            assert_eq!((pos, neg), (1, 1));
        }
        assert!(matches!(
            stratified_folds(&[true, false, false], 2, &mut seeded_rng(1)),
            Err(Error::TooFewSamplesForFolds { minority: 1, .. })
        ));
    }

    #[test]
    fn ten_by_ten_has_a_hundred_rows() {
        let data = blobs(40, 3);
        let hp = ClassifierKind::Nb.default_params();
        let r = cross_validate(&hp, &data, 10, 10, &seeded_rng(4)).unwrap();
        assert_eq!(r.rows.len(), 100);
        assert_eq!(r, cross_validate(&hp, &data, 10, 10, &seeded_rng(4)).unwrap());
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let data: Vec<LabeledSample> = (0..20).map(|i| sample(vec![if i < 10 { i as f64 } else { 90.0 + i as f64 }], i >= 10)).collect();
        let r = cross_validate(&ClassifierKind::Dt.default_params(), &data, 5, 2, &seeded_rng(0)).unwrap();
        assert_eq!(r.mean.f1, 1.0);
    }

    #[test]
    fn grid_picks_the_deeper_tree_on_xor() {
        // depth-1 stumps cannot fit XOR; unbounded trees can
        let mut data = Vec::new();
        for i in 0..40 {
            let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
            let jitter = (i as f64) * 1e-3;
            data.push(sample(vec![a + jitter, b - jitter], (a != b) as u8 == 1));
        }
        let grid = vec![
            Hyperparams::Dt {
                max_depth: Some(1),
                min_samples_split: 2,
            },
            Hyperparams::Dt {
                max_depth: None,
                min_samples_split: 2,
            },
        ];
        let g = grid_search(ClassifierKind::Dt, &data, &grid, 4, &seeded_rng(5)).unwrap();
        assert_eq!(g.best, grid[1]);
        assert!(g.scores[1] > g.scores[0]);
        let again = grid_search(ClassifierKind::Dt, &data, &grid, 4, &seeded_rng(5)).unwrap();
        assert_eq!(again.best, g.best);
        let single = grid_search(ClassifierKind::Dt, &data, &grid[..1], 4, &seeded_rng(5)).unwrap();
        assert_eq!(single.best, grid[0]);
    }

    #[test]
    fn nested_runs() {
        let data = blobs(40, 8);
        let grid = ClassifierKind::Lr.default_grid();
        let r = nested_cross_validate(ClassifierKind::Lr, &data, &grid, 4, 1, 2, &seeded_rng(1)).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(r.mean.f1 > 0.6);
    }

    #[test]
    fn method_folds_keep_methods_together() {
        let mut data = Vec::new();
        for m in 0..12 {
            for label in [false, true] {
                let mut s = sample(vec![m as f64], label);
                s.method = MethodId::parse(&format!("p::A::f{m}()")).unwrap();
                data.push(s);
            }
        }
        let f = method_folds(&data, 4, &mut seeded_rng(2)).unwrap();
        for pair in f.chunks(2) {
            assert_eq!(pair[0], pair[1]);
        }
        for fold in 0..4 {
            assert_eq!(f.iter().filter(|&&x| x == fold).count(), 6);
        }
        assert!(matches!(method_folds(&data[..6], 4, &mut seeded_rng(2)), Err(Error::TooFewSamplesForFolds { .. })));
    }

    proptest! {
        #[test]
        fn folds_preserve_label_ratio(labels in prop::collection::vec(any::<bool>(), 10..60), k in 2usize..6, seed in 0u64..1000) {
            let pos = labels.iter().filter(|&&l| l).count();
            let neg = labels.len() - pos;
            prop_assume!(pos.min(neg) >= k);
            let f = stratified_folds(&labels, k, &mut seeded_rng(seed)).unwrap();
            for fold in 0..k {
                let p = (0..labels.len()).filter(|&i| f[i] == fold && labels[i]).count();
                let n = (0..labels.len()).filter(|&i| f[i] == fold && !labels[i]).count();
                prop_assert!((p as f64 - pos as f64 / k as f64).abs() <= 1.0);
                prop_assert!((n as f64 - neg as f64 / k as f64).abs() <= 1.0);
            }
        }
    }
}
