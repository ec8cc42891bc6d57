use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub h: f64,
    pub p_value: f64,
    pub df: usize,
    /// Every observation was equal; `h` is 0 and `p_value` 1 by convention.
    pub all_identical: bool,
}

/// Average ranks (1-based) of `values`, plus the tie term `Σ(t³ − t)`.
fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut ties = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        let t = (j - i + 1) as f64;
        ties += t * t * t - t;
        i = j + 1;
    }
    (ranks, ties)
}

/// Rank-sum test across independent groups, tie-corrected, with the
/// chi-square approximation on `groups − 1` degrees of freedom.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<KruskalWallis> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter(format!("{} groups; need at least 2", groups.len())));
    }
    if groups.iter().any(Vec::is_empty) {
        return Err(Error::InvalidParameter("empty group".into()));
    }
    if let Some(v) = groups.iter().flatten().find(|v| v.is_nan()) {
        return Err(Error::InvalidParameter(format!("observation {v}")));
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let df = groups.len() - 1;
    let (ranks, ties) = midranks(&all);
    let correction = 1.0 - ties / (n * n * n - n);
    if correction <= 0.0 {
        return Ok(KruskalWallis {
            h: 0.0,
            p_value: 1.0,
            df,
            all_identical: true,
        });
    }
    let mut at = 0;
    let mut sum = 0.0;
    for g in groups {
        let r: f64 = ranks[at..at + g.len()].iter().sum();
        sum += r * r / g.len() as f64;
        at += g.len();
    }
    let h = (12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0)) / correction;
    let h = h.max(0.0);
    let chi = ChiSquared::new(df as f64).expect("df >= 1");
    Ok(KruskalWallis {
        h,
        p_value: chi.sf(h).clamp(0.0, 1.0),
        df,
        all_identical: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTest {
    pub first: usize,
    pub second: usize,
    pub test: KruskalWallis,
    /// Bonferroni-adjusted over all pairs, capped at 1.
    pub p_adjusted: f64,
}

/// Every pair of groups tested on its own, for multiple comparisons.
pub fn pairwise_kruskal_wallis(groups: &[Vec<f64>]) -> Result<Vec<PairwiseTest>> {
    let pairs = groups.len() * groups.len().saturating_sub(1) / 2;
    let mut out = Vec::with_capacity(pairs);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let test = kruskal_wallis(&[groups[i].clone(), groups[j].clone()])?;
            out.push(PairwiseTest {
                first: i,
                second: j,
                p_adjusted: (test.p_value * pairs as f64).min(1.0),
                test,
            });
        }
    }
    Ok(out)
}
