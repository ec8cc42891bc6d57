use serde::{Deserialize, Serialize};

/// Gaussian naive Bayes over two classes; index 0 is the negative class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    /// Population variances plus the smoothing term.
    pub variances: [Vec<f64>; 2],
}

impl GaussianNb {
    /// `var_smoothing` is scaled by the largest per-feature variance of
    /// the whole training set.
    pub fn fit(rows: &[&[f64]], labels: &[bool], var_smoothing: f64) -> Self {
        let d = rows[0].len();
        let stats = |sel: &dyn Fn(usize) -> bool| {
            let members: Vec<&[f64]> = rows.iter().enumerate().filter(|(i, _)| sel(*i)).map(|(_, r)| *r).collect();
            let n = members.len().max(1) as f64;
            let mean: Vec<f64> = (0..d).map(|k| members.iter().map(|r| r[k]).sum::<f64>() / n).collect();
            let var: Vec<f64> = (0..d)
                .map(|k| members.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n)
                .collect();
            (members.len(), mean, var)
        };
        let (_, _, all_var) = stats(&|_| true);
        let eps = var_smoothing * all_var.iter().cloned().fold(0.0, f64::max);
        let (n0, m0, v0) = stats(&|i| !labels[i]);
        let (n1, m1, v1) = stats(&|i| labels[i]);
        let total = (n0 + n1) as f64;
        // a fully constant feature would otherwise have zero variance
        let floor = if eps > 0.0 { eps } else { 1e-12 };
        let smooth = |v: Vec<f64>| v.into_iter().map(|x| x + floor).collect();
        GaussianNb {
            priors: [n0 as f64 / total, n1 as f64 / total],
            means: [m0, m1],
            variances: [smooth(v0), smooth(v1)],
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let log_joint = |c: usize| {
            let ll: f64 = x
                .iter()
                .zip(self.means[c].iter().zip(&self.variances[c]))
                .map(|(&xi, (&m, &v))| -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (xi - m).powi(2) / v))
                .sum();
            self.priors[c].ln() + ll
        };
        let (a, b) = (log_joint(0), log_joint(1));
        // logistic of the log-odds, stable for large gaps
        let z = b - a;
        if z.is_nan() {
            return 0.5;
        }
        1.0 / (1.0 + (-z).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_one_dimensional_case() {
        let xs = [[0.0], [1.0], [10.0], [11.0]];
        let rows: Vec<&[f64]> = xs.iter().map(|r| r.as_slice()).collect();
        let nb = GaussianNb::fit(&rows, &[false, false, true, true], 0.0);
        assert_eq!(nb.means, [vec![0.5], vec![10.5]]);
        assert!((nb.variances[0][0] - 0.25).abs() < 1e-9);
        assert!((nb.variances[1][0] - 0.25).abs() < 1e-9);
        // equal priors and variances: the posterior is one half exactly
        // halfway between the class means
        assert!((nb.predict_proba(&[5.5]) - 0.5).abs() < 1e-12);
        assert!(nb.predict_proba(&[5.0]) < 0.5);
        assert!(nb.predict_proba(&[0.0]) < 1e-6);
    }
}
