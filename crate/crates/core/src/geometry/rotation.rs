use crate::error::Result;
use crate::numerics::{svd_small, MatrixMN};

use super::{Line3, Mat3, Point3, Vec3};

/// Rotation by `angle` radians about the unit vector `axis` (Rodrigues form).
pub fn axis_angle_matrix(axis: Vec3, angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    let Vec3 { x, y, z } = axis;
    Mat3([
        [c + t * x * x, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, c + t * y * y, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, c + t * z * z],
    ])
}

/// Rotates `p` by `angle` about the line `axis`.
pub fn rotate_about_axis(p: Point3, axis: &Line3, angle: f64) -> Point3 {
    let r = axis_angle_matrix(axis.direction(), angle);
    axis.point() + r * (p - axis.point())
}

/// Direction about which positive turntable angles turn the object
/// right-handed: the axis direction oriented toward camera +y, i.e. down the
/// image. An axis with no y component keeps its canonical direction.
///
/// [`Line3`] canonicalizes its direction sign, so a fitted axis alone cannot
/// carry the turntable's sense of rotation.
pub fn turntable_spin(axis: &Line3) -> Vec3 {
    let d = axis.direction();
    if d.y < -1e-12 {
        -d
    } else {
        d
    }
}

/// Rotation matrix from a rotation vector (axis scaled by angle).
pub fn rotation_from_vector(w: Vec3) -> Mat3 {
    let angle = w.norm();
    if angle < 1e-15 {
        // First order; exact to machine precision at this magnitude.
        return Mat3([[1.0, -w.z, w.y], [w.z, 1.0, -w.x], [-w.y, w.x, 1.0]]);
    }
    axis_angle_matrix(w / angle, angle)
}

/// Rotation vector of a proper rotation matrix, angle in `[0, π]`.
pub fn rotation_to_vector(r: &Mat3) -> Vec3 {
    let m = &r.0;
    let trace = m[0][0] + m[1][1] + m[2][2];
    let cos = ((trace - 1.0) / 2.0).clamp(-1.0, 1.0);
    let skew = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
    let sin = skew.norm() / 2.0;
    let angle = sin.atan2(cos);
    if angle < 1e-12 {
        return skew / 2.0;
    }
    if cos > -0.9 {
        return skew * (angle / (2.0 * sin));
    }
    // Near π the skew part vanishes; recover the axis from the symmetric part.
    let diag = Vec3::new(m[0][0], m[1][1], m[2][2]);
    let k = [0usize, 1, 2]
        .into_iter()
        .max_by(|&a, &b| diag[a].total_cmp(&diag[b]))
        .unwrap();
    let mut col = [0.0; 3];
    for (i, c) in col.iter_mut().enumerate() {
        *c = (m[i][k] + m[k][i]) / 2.0;
    }
    col[k] = m[k][k] - cos;
    let mut axis = Vec3::from_array(col).normalized().unwrap_or(Vec3::X);
    if axis.dot(skew) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

/// Closest rotation matrix (Frobenius norm) to `m`, with determinant +1.
pub fn nearest_rotation(m: &Mat3) -> Result<Mat3> {
    let a = MatrixMN::from_row_major(3, 3, m.0.iter().flatten().copied().collect())?;
    let svd = svd_small(&a)?;
    let to_mat3 = |x: &MatrixMN| {
        Mat3([
            [x[(0, 0)], x[(0, 1)], x[(0, 2)]],
            [x[(1, 0)], x[(1, 1)], x[(1, 2)]],
            [x[(2, 0)], x[(2, 1)], x[(2, 2)]],
        ])
    };
    let mut u = to_mat3(&svd.u);
    let v = to_mat3(&svd.v);
    if (u * v.transpose()).determinant() < 0.0 {
        for row in u.0.iter_mut() {
            row[2] = -row[2];
        }
    }
    Ok(u * v.transpose())
}
