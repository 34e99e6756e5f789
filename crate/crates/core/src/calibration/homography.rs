use crate::error::{Error, Result};
use crate::geometry::{Mat3, Vec3};
use crate::numerics::{solve_least_squares, MatrixMN};

use super::PixelPoint;

/// Similarity transform sending `pts` to zero mean and mean distance √2.
fn normalizing_transform(pts: &[(f64, f64)]) -> Result<Mat3> {
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(ax, ay), (x, y)| (ax + x, ay + y));
    let (mx, my) = (mx / n, my / n);
    let mean_dist = pts.iter().map(|(x, y)| (x - mx).hypot(y - my)).sum::<f64>() / n;
    if !(mean_dist > 0.0) || !mean_dist.is_finite() {
        return Err(Error::Degenerate("homography points coincide"));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Mat3([[s, 0.0, -s * mx], [0.0, s, -s * my], [0.0, 0.0, 1.0]]))
}

fn apply(t: &Mat3, (x, y): (f64, f64)) -> (f64, f64) {
    let p = *t * Vec3::new(x, y, 1.0);
    (p.x / p.z, p.y / p.z)
}

/// Maps a planar point through a homography.
pub fn apply_homography(h: &Mat3, x: f64, y: f64) -> PixelPoint {
    let (u, v) = apply(h, (x, y));
    PixelPoint::new(u, v)
}

/// Normalized direct linear transform from board-plane points to pixels.
///
/// Both point sets are conditioned first; in the conditioned frame the
/// bottom-right entry is fixed to 1, which leaves an 8-unknown linear
/// least-squares problem. The result is scaled so `H[2][2] = 1`.
pub fn estimate_homography(object_xy: &[(f64, f64)], image: &[PixelPoint]) -> Result<Mat3> {
    if object_xy.len() != image.len() {
        return Err(Error::Dimension(format!(
            "{} object points vs {} image points",
            object_xy.len(),
            image.len()
        )));
    }
    if object_xy.len() < 4 {
        return Err(Error::Degenerate("homography needs at least 4 points"));
    }
    let img: Vec<(f64, f64)> = image.iter().map(|p| (p.u, p.v)).collect();
    if object_xy
        .iter()
        .chain(&img)
        .any(|(a, b)| !a.is_finite() || !b.is_finite())
    {
        return Err(Error::NonFinite("homography points"));
    }
    let t_obj = normalizing_transform(object_xy)?;
    let t_img = normalizing_transform(&img)?;

    let mut rows = Vec::with_capacity(2 * object_xy.len());
    let mut rhs = Vec::with_capacity(2 * object_xy.len());
    for (o, i) in object_xy.iter().zip(&img) {
        let (x, y) = apply(&t_obj, *o);
        let (u, v) = apply(&t_img, *i);
        rows.push([x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
        rhs.push(u);
        rows.push([0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
        rhs.push(v);
    }
    let a = MatrixMN::from_rows(&rows)?;
    let h = solve_least_squares(&a, &rhs).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::Degenerate("homography system is rank deficient"),
        other => other,
    })?;
    let hn = Mat3([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]]);
    let t_img_inv = t_img.inverse().ok_or(Error::Singular)?;
    let full = t_img_inv * hn * t_obj;
    let h22 = full.0[2][2];
    if h22.abs() < 1e-300 {
        return Err(Error::Degenerate("homography maps the origin to infinity"));
    }
    Ok(full.scaled(1.0 / h22))
}
