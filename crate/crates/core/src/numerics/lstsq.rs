use crate::error::{Error, Result};

use super::{svd_small, MatrixMN};

/// Relative singular-value floor below which a system counts as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// `argmin ‖a·x − b‖₂` through the SVD pseudoinverse.
pub fn solve_least_squares(a: &MatrixMN, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "rhs has {} entries, matrix has {} rows",
            b.len(),
            a.rows()
        )));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("least-squares rhs"));
    }
    let svd = svd_small(a)?;
    let largest = svd.sigma[0];
    let smallest = *svd.sigma.last().expect("at least one column");
    if largest == 0.0 || smallest <= RANK_TOLERANCE * largest {
        let condition = if smallest == 0.0 {
            f64::INFINITY
        } else {
            largest / smallest
        };
        return Err(Error::RankDeficient { condition });
    }
    let utb = svd.u.tr_mul_vec(b)?;
    let scaled: Vec<f64> = utb.iter().zip(&svd.sigma).map(|(x, s)| x / s).collect();
    svd.v.mul_vec(&scaled)
}

/// Solves the symmetric positive definite system `a·x = b` by Cholesky.
///
/// Returns `None` when a pivot is not safely positive.
pub fn solve_spd(a: &MatrixMN, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    debug_assert_eq!(n, b.len());
    let max_diag = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max);
    if max_diag == 0.0 || !max_diag.is_finite() {
        return None;
    }
    let mut l = MatrixMN::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-14 * max_diag || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Some(x)
}
