use crate::error::{Error, Result};

use super::MatrixMN;

/// Widest matrix `svd_small` accepts. The fits use 3 columns, the homography
/// DLT 8 and the absolute-conic system 5.
pub const MAX_SVD_COLS: usize = 9;

const MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `a = u · diag(sigma) · vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    /// m×n, orthonormal columns.
    pub u: MatrixMN,
    /// Nonincreasing, nonnegative.
    pub sigma: Vec<f64>,
    /// n×n orthonormal; column `j` is the right-singular vector of `sigma[j]`.
    pub v: MatrixMN,
}

impl SvdResult {
    /// Right-singular vector belonging to the smallest singular value.
    pub fn smallest_right_vector(&self) -> Vec<f64> {
        self.v.column(self.v.cols() - 1)
    }

    /// Right-singular vector belonging to the largest singular value.
    pub fn largest_right_vector(&self) -> Vec<f64> {
        self.v.column(0)
    }

    pub fn reconstruct(&self) -> MatrixMN {
        let mut us = self.u.clone();
        for i in 0..us.rows() {
            for (j, s) in self.sigma.iter().enumerate() {
                us[(i, j)] *= s;
            }
        }
        us.matmul(&self.v.transpose())
            .expect("svd factors have consistent shapes")
    }
}

/// SVD of a tall, narrow matrix by one-sided Jacobi rotations.
///
/// The rotations orthogonalize the columns of `a`, which diagonalizes `aᵀa`
/// without ever forming it. Each right-singular vector is sign-normalized so
/// its first nonzero component is positive.
pub fn svd_small(a: &MatrixMN) -> Result<SvdResult> {
    if !a.is_finite() {
        return Err(Error::NonFinite("svd input"));
    }
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::Dimension(format!(
            "svd needs rows >= cols, got {m}x{n}"
        )));
    }
    if n > MAX_SVD_COLS {
        return Err(Error::Dimension(format!(
            "svd_small supports at most {MAX_SVD_COLS} columns, got {n}"
        )));
    }

    // Work column-major: cols[j] is column j of the evolving a·V.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut v = MatrixMN::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (xp, xq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (a_p, a_q) = (*xp, *xq);
                    *xp = c * a_p - s * a_q;
                    *xq = s * a_p + c * a_q;
                }
                for i in 0..n {
                    let (v_p, v_q) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * v_p - s * v_q;
                    v[(i, q)] = s * v_p + c * v_q;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort keeps ties in column order, so the output is deterministic.
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = MatrixMN::zeros(m, n);
    let mut v_sorted = MatrixMN::zeros(n, n);
    let cutoff = sigma[0].max(f64::MIN_POSITIVE) * f64::EPSILON * (m as f64);
    let mut filled = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let mut vk: Vec<f64> = v.column(j);
        let mut uk: Vec<f64> = if sigma[k] > cutoff {
            cols[j].iter().map(|x| x / sigma[k]).collect()
        } else {
            complete_basis(&filled, m)
        };
        if let Some(first) = vk.iter().find(|x| x.abs() > 1e-14) {
            if *first < 0.0 {
                vk.iter_mut().for_each(|x| *x = -*x);
                uk.iter_mut().for_each(|x| *x = -*x);
            }
        }
        for i in 0..n {
            v_sorted[(i, k)] = vk[i];
        }
        for i in 0..m {
            u[(i, k)] = uk[i];
        }
        filled.push(uk);
    }

    Ok(SvdResult {
        u,
        sigma,
        v: v_sorted,
    })
}

/// Unit vector orthogonal to every vector in `basis`, via Gram–Schmidt on
/// the standard basis.
fn complete_basis(basis: &[Vec<f64>], m: usize) -> Vec<f64> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for e in 0..m {
        let mut cand = vec![0.0; m];
        cand[e] = 1.0;
        for _ in 0..2 {
            for b in basis {
                let d: f64 = cand.iter().zip(b).map(|(x, y)| x * y).sum();
                cand.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
        }
        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if best.as_ref().is_none_or(|(n, _)| norm > *n + 1e-12) {
            best = Some((norm, cand));
        }
    }
    let (norm, mut cand) = best.expect("m >= 1");
    cand.iter_mut().for_each(|x| *x /= norm);
    cand
}
