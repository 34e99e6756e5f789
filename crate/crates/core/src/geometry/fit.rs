use crate::error::{Error, Result};
use crate::numerics::{svd_small, MatrixMN, SvdResult};

use super::{Line3, Plane, Point3, Vec3};

/// Relative singular-value floor for the collinearity test.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct PlaneFit {
    pub plane: Plane,
    /// RMS of the signed point-to-plane distances, mm.
    pub rms_distance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub line: Line3,
    /// RMS point-to-line distance, mm.
    pub rms_distance: f64,
}

pub fn centroid(points: &[Point3]) -> Point3 {
    let sum = points.iter().fold(Vec3::ZERO, |acc, p| acc + *p);
    sum / points.len() as f64
}

fn centered_svd(points: &[Point3], mean: Point3) -> Result<SvdResult> {
    let data = points
        .iter()
        .flat_map(|p| (*p - mean).to_array())
        .collect::<Vec<_>>();
    let a = MatrixMN::from_row_major(points.len(), 3, data)?;
    svd_small(&a)
}

fn column_vec(svd: &SvdResult, j: usize) -> Vec3 {
    Vec3::new(svd.v[(0, j)], svd.v[(1, j)], svd.v[(2, j)])
}

/// Total least-squares plane through `points`.
///
/// The plane passes through the centroid and its normal is the right-singular
/// vector of the smallest singular value of the centered point matrix.
pub fn fit_plane(points: &[Point3]) -> Result<PlaneFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate("plane fit needs at least 3 points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("plane fit points"));
    }
    let mean = centroid(points);
    let svd = centered_svd(points, mean)?;
    if svd.sigma[1] <= DEGENERACY_TOLERANCE * svd.sigma[0] {
        return Err(Error::Degenerate("points are collinear"));
    }
    let normal = column_vec(&svd, 2);
    let plane = Plane::through_point(normal, mean)?;
    let rms_distance = rms(points.iter().map(|p| plane.signed_distance(*p)));
    Ok(PlaneFit {
        plane,
        rms_distance,
    })
}

/// Total least-squares line through `points`, along the dominant
/// right-singular vector of the centered point matrix.
pub fn fit_line(points: &[Point3]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::Degenerate("line fit needs at least 2 points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite("line fit points"));
    }
    let mean = centroid(points);
    if points.iter().all(|p| p.distance(mean) <= 1e-9) {
        return Err(Error::Degenerate("points are coincident"));
    }
    let svd = centered_svd(points, mean)?;
    let line = Line3::new(mean, column_vec(&svd, 0))?;
    let rms_distance = rms(points.iter().map(|p| line.distance(*p)));
    Ok(LineFit { line, rms_distance })
}

fn rms(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len() as f64;
    (values.map(|v| v * v).sum::<f64>() / n).sqrt()
}
