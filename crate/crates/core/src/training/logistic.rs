use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::linalg::sigmoid;

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-10;

/// L2-penalized logistic regression; the intercept is not penalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

/// Penalized negative log-likelihood, the objective `fit` minimizes.
pub fn penalized_nll(rows: &[&[f64]], labels: &[bool], l2: f64, weights: &[f64], bias: f64) -> f64 {
    let data: f64 = rows
        .iter()
        .zip(labels)
        .map(|(x, &y)| {
            let z = bias + x.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>();
            // log(1 + e^z) - y z, computed stably
            let softplus = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
            softplus - if y { z } else { 0.0 }
        })
        .sum();
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

impl LogisticModel {
    /// Newton iterations (IRLS) on the penalized likelihood.
    pub fn fit(rows: &[&[f64]], labels: &[bool], l2: f64) -> Self {
        let n = rows.len();
        let d = rows[0].len();
        let x = DMatrix::from_fn(n, d + 1, |i, j| if j == d { 1.0 } else { rows[i][j] });
        let y = DVector::from_fn(n, |i, _| if labels[i] { 1.0 } else { 0.0 });
        let mut penalty = DVector::from_element(d + 1, l2);
        // keeps the Hessian invertible when l2 = 0 and data are degenerate
        penalty[d] = 1e-10;
        let mut beta = DVector::zeros(d + 1);
        for _ in 0..MAX_ITER {
            let p = (&x * &beta).map(sigmoid);
            let w = p.map(|v| (v * (1.0 - v)).max(1e-12));
            let grad = x.transpose() * (&p - &y) + penalty.component_mul(&beta);
            let mut hess = x.transpose() * DMatrix::from_fn(n, d + 1, |i, j| x[(i, j)] * w[i]);
            for k in 0..=d {
                hess[(k, k)] += penalty[k];
            }
            let Some(step) = hess.cholesky().map(|c| c.solve(&grad)) else {
                break;
            };
            beta -= &step;
            if step.amax() < TOL {
                break;
            }
        }
        LogisticModel {
            weights: beta.rows(0, d).iter().copied().collect(),
            bias: beta[d],
        }
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.decision(x))
    }
}
