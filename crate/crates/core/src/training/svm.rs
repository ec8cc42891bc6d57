use serde::{Deserialize, Serialize};

use crate::linalg::sigmoid;
use crate::rng::RandomStream;

/// Linear SVM trained with Pegasos (hinge loss, SGD), with probabilities
/// from a sigmoid fitted to the training margins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub platt_a: f64,
    pub platt_b: f64,
}

impl LinearSvm {
    pub fn fit(rows: &[&[f64]], labels: &[bool], lambda: f64, epochs: usize, rng: &mut RandomStream) -> Self {
        let d = rows[0].len();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..rows.len()).collect();
        let mut t = 0usize;
        for _ in 0..epochs {
            rng.shuffle(&mut order);
            for &i in &order {
                t += 1;
                let eta = 1.0 / (lambda * t as f64);
                let y = if labels[i] { 1.0 } else { -1.0 };
                let margin = y * (b + rows[i].iter().zip(&w).map(|(a, c)| a * c).sum::<f64>());
                // the intercept is a weight on a constant feature, shrunk alike
                let shrink = 1.0 - eta * lambda;
                for v in &mut w {
                    *v *= shrink;
                }
                b *= shrink;
                if margin < 1.0 {
                    for (v, &x) in w.iter_mut().zip(rows[i]) {
                        *v += eta * y * x;
                    }
                    b += eta * y;
                }
            }
        }
        let mut svm = LinearSvm {
            weights: w,
            bias: b,
            platt_a: -1.0,
            platt_b: 0.0,
        };
        let margins: Vec<f64> = rows.iter().map(|x| svm.decision(x)).collect();
        (svm.platt_a, svm.platt_b) = platt(&margins, labels);
        svm
    }

    pub fn decision(&self, x: &[f64]) -> f64 {
        self.bias + x.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(-(self.platt_a * self.decision(x) + self.platt_b))
    }
}

/// Platt's sigmoid fit `P(y=1|f) = 1 / (1 + exp(A f + B))` by Newton's
/// method with regularized targets.
pub fn platt(f: &[f64], labels: &[bool]) -> (f64, f64) {
    let n_pos = labels.iter().filter(|&&l| l).count() as f64;
    let n_neg = labels.len() as f64 - n_pos;
    let hi = (n_pos + 1.0) / (n_pos + 2.0);
    let lo = 1.0 / (n_neg + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();
    let (mut a, mut b) = (0.0, ((n_neg + 1.0) / (n_pos + 1.0)).ln());
    let objective = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(&fi, &ti)| {
                let z = a * fi + b;
                // cross-entropy against p = 1 / (1 + e^z), overflow-safe
                if z >= 0.0 {
                    ti * z + (-z).exp().ln_1p()
                } else {
                    (ti - 1.0) * z + z.exp().ln_1p()
                }
            })
            .sum()
    };
    let mut fval = objective(a, b);
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (1e-12, 1e-12, 0.0, 0.0, 0.0);
        for (&fi, &ti) in f.iter().zip(&t) {
            let p = sigmoid(-(a * fi + b));
            let q = 1.0 - p;
            let d2 = p * q;
            h11 += fi * fi * d2;
            h22 += d2;
            h21 += fi * d2;
            let d1 = ti - p;
            g1 += fi * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                (a, b, fval) = (na, nb, nf);
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn separates_and_calibrates() {
        let xs: Vec<[f64; 2]> = (0..40)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                [s * (1.0 + (i as f64) * 0.01), 0.3 * ((i * 7 % 5) as f64 - 2.0)]
            })
            .collect();
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let labels: Vec<bool> = (0..40).map(|i| i % 2 == 0).collect();
        let svm = LinearSvm::fit(&rows, &labels, 0.01, 50, &mut seeded_rng(1));
        for (x, &l) in rows.iter().zip(&labels) {
            let p = svm.predict_proba(x);
            assert!((0.0..=1.0).contains(&p));
            assert_eq!(p > 0.5, l);
        }
        assert!(svm.platt_a < 0.0);
    }

    #[test]
    fn platt_is_monotone_increasing_in_margin() {
        let f = [-2.0, -1.0, -0.5, 0.3, 1.0, 2.5];
        let (a, b) = platt(&f, &[false, false, true, false, true, true]);
        let p = |x: f64| sigmoid(-(a * x + b));
        assert!(p(-2.0) < p(0.0) && p(0.0) < p(2.0));
    }
}
