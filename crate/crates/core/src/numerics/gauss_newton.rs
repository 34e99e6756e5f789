use crate::error::{Error, Result};

use super::lstsq::solve_spd;
use super::MatrixMN;

#[derive(Debug, Clone, Copy)]
pub struct GaussNewtonOptions {
    pub max_iters: usize,
    /// Stop once the accepted step is below `step_tol · (1 + ‖x‖)`.
    pub step_tol: f64,
    /// Stop once the RMS residual falls below this.
    pub residual_tol: f64,
}

impl Default for GaussNewtonOptions {
    fn default() -> Self {
        Self {
            max_iters: 100,
            step_tol: 1e-12,
            residual_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GaussNewtonReport {
    pub x: Vec<f64>,
    pub final_rms: f64,
    pub iters: usize,
}

const MAX_DAMPING_TRIES: usize = 12;

fn rms(r: &[f64]) -> f64 {
    if r.is_empty() {
        return 0.0;
    }
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

fn eval<F>(f: &F, x: &[f64]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let r = f(x);
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(Error::NonFinite("residuals"))
    }
}

/// Central-difference Jacobian, one row per residual.
fn jacobian<F>(f: &F, x: &[f64], m: usize) -> Result<MatrixMN>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut jac = MatrixMN::zeros(m, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = 1e-6 * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let plus = eval(f, &probe)?;
        probe[j] = x[j] - h;
        let minus = eval(f, &probe)?;
        probe[j] = x[j];
        if plus.len() != m || minus.len() != m {
            return Err(Error::Dimension("residual length changed".into()));
        }
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// Solves `(jtj + λI)·x = rhs` after symmetric diagonal scaling, which keeps
/// the Cholesky pivots meaningful when parameters have very different units.
fn solve_damped(jtj: &MatrixMN, rhs: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let n = jtj.rows();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = (jtj[(i, i)] + lambda).sqrt();
            if d > 0.0 && d.is_finite() {
                d
            } else {
                1.0
            }
        })
        .collect();
    let mut a = jtj.clone();
    for i in 0..n {
        a[(i, i)] += lambda;
        for j in 0..n {
            a[(i, j)] /= scale[i] * scale[j];
        }
    }
    let b: Vec<f64> = rhs.iter().zip(&scale).map(|(r, s)| r / s).collect();
    let y = solve_spd(&a, &b)?;
    Some(y.iter().zip(&scale).map(|(y, s)| y / s).collect())
}

/// Minimizes `‖residual_fn(x)‖²` by Gauss–Newton with Levenberg fallback.
///
/// A step is only accepted when it lowers the RMS residual. When the plain
/// normal equations are singular or the step fails to descend, the diagonal is
/// damped starting at `1e-3 · trace(JᵀJ)` and grown tenfold per retry.
pub fn gauss_newton<F>(
    residual_fn: F,
    x0: &[f64],
    opts: &GaussNewtonOptions,
) -> Result<GaussNewtonReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial parameters"));
    }
    let mut x = x0.to_vec();
    let mut r = eval(&residual_fn, &x)?;
    let m = r.len();
    let mut current = rms(&r);
    let mut iters = 0;

    while iters < opts.max_iters && current > opts.residual_tol {
        iters += 1;
        let jac = jacobian(&residual_fn, &x, m)?;
        let jtj = jac.gram();
        let neg_grad: Vec<f64> = jac.tr_mul_vec(&r)?.into_iter().map(|g| -g).collect();
        let trace: f64 = (0..jtj.rows()).map(|i| jtj[(i, i)]).sum();

        let mut accepted = None;
        let mut any_solved = false;
        for attempt in 0..=MAX_DAMPING_TRIES {
            let lambda = if attempt == 0 {
                0.0
            } else {
                1e-3 * trace * 10f64.powi(attempt as i32 - 1)
            };
            let step = solve_damped(&jtj, &neg_grad, lambda);
            let Some(step) = step else { continue };
            any_solved = true;
            let candidate: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + b).collect();
            let Ok(r_new) = eval(&residual_fn, &candidate) else {
                continue;
            };
            let new_rms = rms(&r_new);
            if new_rms < current {
                accepted = Some((candidate, r_new, new_rms, step));
                break;
            }
        }

        match accepted {
            Some((candidate, r_new, new_rms, step)) => {
                let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
                let x_norm = candidate.iter().map(|s| s * s).sum::<f64>().sqrt();
                x = candidate;
                r = r_new;
                current = new_rms;
                if step_norm <= opts.step_tol * (1.0 + x_norm) {
                    break;
                }
            }
            None if !any_solved => return Err(Error::SingularNormalEquations),
            // No descent direction left: x is a local minimum to working precision.
            None => break,
        }
    }

    Ok(GaussNewtonReport {
        x,
        final_rms: current,
        iters,
    })
}
