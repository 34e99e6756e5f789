//! Small dense linear algebra and nonlinear least squares.
//!
//! Everything here is sized for the pipeline's fits: point matrices with
//! three columns, DLT systems with eight, and camera refinement problems with
//! a few hundred parameters.

mod gauss_newton;
mod lstsq;
mod matrix;
mod svd;

pub use gauss_newton::{gauss_newton, GaussNewtonOptions, GaussNewtonReport};
pub use lstsq::{solve_least_squares, solve_spd, RANK_TOLERANCE};
pub use matrix::MatrixMN;
pub use svd::{svd_small, SvdResult, MAX_SVD_COLS};
