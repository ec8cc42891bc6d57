//! Small dense helpers shared by the embedding trainers.

use nalgebra::DMatrix;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln(sigmoid(x))`, stable for large |x|.
#[inline]
pub fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot(a, b) / (na * nb)
    }
}

/// In-place softmax.
pub fn softmax(xs: &mut [f64]) {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in xs.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in xs.iter_mut() {
        *x /= sum;
    }
}

/// Scales each row to unit L2 norm; zero rows stay zero.
pub fn normalize_rows(m: &mut DMatrix<f64>) {
    for mut row in m.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
}

/// Row-normalizes to unit L1 norm; zero rows stay zero.
pub fn l1_rows(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        let s: f64 = row.iter().map(|v| v.abs()).sum();
        if s > 0.0 {
            row /= s;
        }
    }
    out
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular: Vec<f64>,
    pub v: DMatrix<f64>,
}

pub fn sorted_svd(m: &DMatrix<f64>) -> SortedSvd {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let k = order.len();
    let mut su = DMatrix::zeros(u.nrows(), k);
    let mut sv = DMatrix::zeros(v_t.ncols(), k);
    let mut singular = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v_t.row(src).transpose());
        singular.push(svd.singular_values[src]);
    }
    // fix signs so the largest-magnitude entry of each left vector is positive
    for c in 0..k {
        let col = su.column(c);
        let (mut best, mut arg) = (0.0f64, 0usize);
        for (r, v) in col.iter().enumerate() {
            if v.abs() > best + 1e-12 {
                best = v.abs();
                arg = r;
            }
        }
        if su[(arg, c)] < 0.0 {
            su.column_mut(c).neg_mut();
            sv.column_mut(c).neg_mut();
        }
    }
    SortedSvd { u: su, singular, v: sv }
}

/// Rank-`rank` factors `(U·S^½, V·S^½)`, zero-padded when the matrix has
/// fewer than `rank` singular values.
pub fn half_factors(m: &DMatrix<f64>, rank: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let svd = sorted_svd(m);
    let mut left = DMatrix::zeros(m.nrows(), rank);
    let mut right = DMatrix::zeros(m.ncols(), rank);
    for c in 0..rank.min(svd.singular.len()) {
        let s = svd.singular[c].max(0.0).sqrt();
        left.set_column(c, &(svd.u.column(c) * s));
        right.set_column(c, &(svd.v.column(c) * s));
    }
    (left, right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_sigmoid_terms() {
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
        assert!((neg_log_sigmoid(0.0) - 2f64.ln()).abs() < 1e-15);
        assert!(neg_log_sigmoid(-800.0).is_finite());
        assert!(neg_log_sigmoid(800.0) >= 0.0);
        assert!((sigmoid(-3.0) + sigmoid(3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn softmax_sums_to_one() {
        let mut v = vec![1000.0, 1001.0, 999.0];
        softmax(&mut v);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svd_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 4.0, 0.0, 1.0]);
        let s = sorted_svd(&m);
        assert!(s.singular.windows(2).all(|w| w[0] >= w[1]));
        let (l, r) = half_factors(&m, 3);
        assert!((l * r.transpose() - m).norm() < 1e-10);
    }
}
