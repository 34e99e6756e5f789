use crate::error::{Error, Result};
use crate::geometry::{nearest_rotation, Mat3, RigidTransform, Vec3};
use crate::numerics::{svd_small, MatrixMN};

use super::CameraIntrinsics;

/// Relative cutoff on the second-smallest singular value of the conic
/// constraint system; below it the null space is not unique.
pub const MOTION_DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Row of the zero-skew conic constraint `hᵢᵀ·B·hⱼ` over
/// `b = (B11, B22, B13, B23, B33)`.
fn conic_row(h: &Mat3, i: usize, j: usize) -> [f64; 5] {
    let (a, b) = (h.column(i), h.column(j));
    [
        a.x * b.x,
        a.y * b.y,
        a.x * b.z + a.z * b.x,
        a.y * b.z + a.z * b.y,
        a.z * b.z,
    ]
}

/// Closed-form pinhole intrinsics from three or more board homographies.
///
/// Each view contributes the two orthogonality constraints that the image of
/// the absolute conic imposes on the first two homography columns. With zero
/// skew the conic has five unknowns, recovered as the null vector of the
/// stacked constraints.
pub fn intrinsics_from_homographies(hs: &[Mat3]) -> Result<CameraIntrinsics> {
    if hs.len() < 3 {
        return Err(Error::InsufficientViews(hs.len()));
    }
    // Pixel coordinates are in the hundreds while the conic entries scale as
    // 1/f²; conditioning with N = diag(1/s, 1/s, 1) keeps the system balanced.
    // N·K is still a zero-skew upper-triangular matrix.
    let s = hs
        .iter()
        .map(|h| {
            let o = h.column(2);
            (o.x / o.z).abs().max((o.y / o.z).abs())
        })
        .filter(|v| v.is_finite())
        .fold(1.0, f64::max);
    let norm = Mat3([[1.0 / s, 0.0, 0.0], [0.0, 1.0 / s, 0.0], [0.0, 0.0, 1.0]]);

    let mut rows = Vec::with_capacity(2 * hs.len());
    for h in hs {
        let hn = norm * *h;
        let f = hn.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::NonFinite("homography"));
        }
        let hn = hn.scaled(1.0 / f);
        let r12 = conic_row(&hn, 0, 1);
        let r11 = conic_row(&hn, 0, 0);
        let r22 = conic_row(&hn, 1, 1);
        rows.push(r12);
        rows.push(std::array::from_fn::<f64, 5, _>(|k| r11[k] - r22[k]));
    }
    let svd = svd_small(&MatrixMN::from_rows(&rows)?)?;
    if svd.sigma[3] <= MOTION_DEGENERACY_TOLERANCE * svd.sigma[0] {
        return Err(Error::DegenerateMotion);
    }
    let mut b = svd.smallest_right_vector();
    if b[0] < 0.0 {
        b.iter_mut().for_each(|v| *v = -*v);
    }
    let [b11, b22, b13, b23, b33] = [b[0], b[1], b[2], b[3], b[4]];
    if b11 <= 0.0 || b22 <= 0.0 {
        return Err(Error::Degenerate("conic is not positive definite"));
    }
    let cx = -b13 / b11;
    let cy = -b23 / b22;
    let lambda = b33 - b13 * b13 / b11 - b23 * b23 / b22;
    if lambda <= 0.0 {
        return Err(Error::Degenerate("conic is not positive definite"));
    }
    let fx = (lambda / b11).sqrt();
    let fy = (lambda / b22).sqrt();
    let k = CameraIntrinsics::pinhole(fx * s, fy * s, cx * s, cy * s);
    k.validate()?;
    Ok(k)
}

pub(crate) fn camera_matrix(k: &CameraIntrinsics) -> Mat3 {
    Mat3([[k.fx, 0.0, k.cx], [0.0, k.fy, k.cy], [0.0, 0.0, 1.0]])
}

/// Board-to-camera pose from a board homography and known intrinsics.
pub fn extrinsics_from_homography(k: &CameraIntrinsics, h: &Mat3) -> Result<RigidTransform> {
    k.validate()?;
    if h.inverse().is_none() {
        return Err(Error::Singular);
    }
    let k_inv = camera_matrix(k).inverse().ok_or(Error::Singular)?;
    let m = k_inv * *h;
    let (c0, c1, c2) = (m.column(0), m.column(1), m.column(2));
    let mut scale = 1.0 / c0.norm();
    if c2.z * scale < 0.0 {
        scale = -scale;
    }
    let r1 = c0 * scale;
    let r2 = c1 * scale;
    let r3 = r1.cross(r2);
    let rotation = nearest_rotation(&Mat3::from_columns(r1, r2, r3))?;
    let translation: Vec3 = c2 * scale;
    Ok(RigidTransform::new(rotation, translation))
}
