use std::f64::consts::TAU;

use crate::calibration::{CameraIntrinsics, ChessboardSpec};
use crate::error::{Error, Result};
use crate::geometry::{
    axis_angle_matrix, turntable_spin, Line3, Plane, Point3, RigidTransform, Vec3,
};
use crate::laser::GrayImage;

/// An analytic object standing on the turntable, in the turntable frame at
/// angle zero (camera coordinates).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SceneSurface {
    /// Cylinder around the turntable axis, spanning `±height/2` along the axis
    /// from the axis anchor point.
    Cylinder { radius: f64, height: f64 },
    /// Sphere centered on the axis, `center_height` mm from the anchor point.
    Sphere { radius: f64, center_height: f64 },
    /// Chessboard placed at `pose` (board frame to camera frame).
    Board {
        spec: ChessboardSpec,
        pose: RigidTransform,
    },
}

impl SceneSurface {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SceneSurface::Cylinder { radius, height } => {
                if !(radius > 0.0 && height > 0.0) {
                    return Err(Error::InvalidParameter(
                        "cylinder radius and height must be positive".into(),
                    ));
                }
            }
            SceneSurface::Sphere { radius, .. } => {
                if !(radius > 0.0) {
                    return Err(Error::InvalidParameter(
                        "sphere radius must be positive".into(),
                    ));
                }
            }
            SceneSurface::Board { spec, .. } => spec.validate()?,
        }
        Ok(())
    }

    /// Unsigned distance from `p` to the surface at turntable angle zero.
    ///
    /// For the cylinder, points within the height span measure to the side
    /// wall; beyond it they measure to the nearest cap disc.
    pub fn distance(&self, p: Point3, axis: &Line3) -> f64 {
        match *self {
            SceneSurface::Cylinder { radius, height } => {
                let s = axis.axial_coordinate(p);
                let rho = axis.distance(p);
                let over = s.abs() - height / 2.0;
                if over <= 0.0 {
                    (rho - radius).abs()
                } else if rho <= radius {
                    over
                } else {
                    (rho - radius).hypot(over)
                }
            }
            SceneSurface::Sphere {
                radius,
                center_height,
            } => (p.distance(axis.at(center_height)) - radius).abs(),
            SceneSurface::Board { spec, pose } => {
                let local = pose.inverse().apply(p);
                let (x0, x1, y0, y1) = board_bounds(&spec);
                let dx = (x0 - local.x).max(local.x - x1).max(0.0);
                let dy = (y0 - local.y).max(local.y - y1).max(0.0);
                Vec3::new(dx, dy, local.z).norm()
            }
        }
    }
}

/// Physical board rectangle in board coordinates: the inner-corner grid plus
/// one square of margin on every side.
pub fn board_bounds(spec: &ChessboardSpec) -> (f64, f64, f64, f64) {
    let (w, h) = spec.extent();
    let s = spec.square_size;
    (-s, w + s, -s, h + s)
}

/// Ground-truth description of the virtual rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigConfig {
    pub intrinsics: CameraIntrinsics,
    /// Laser sheet, camera frame.
    pub laser_plane: Plane,
    /// Turntable axis, camera frame.
    pub axis: Line3,
    pub image_size: (usize, usize),
    /// Corner noise σ in px; pixel-intensity noise is 4× this in gray levels.
    pub noise_sigma_px: f64,
    pub seed: u64,
}

impl RigConfig {
    /// Desk-scale reference rig: 640×480 camera with f = 800 px, turntable
    /// axis vertical in the image 400 mm in front of the camera, and a laser
    /// sheet containing the axis, tilted 30° away from the optical axis.
    pub fn reference(seed: u64) -> Self {
        let axis = Line3::new(Vec3::new(0.0, 0.0, 400.0), Vec3::Y).expect("valid axis");
        let tilt = 30f64.to_radians();
        let normal = Vec3::new(tilt.cos(), 0.0, tilt.sin());
        let laser_plane =
            Plane::through_point(normal, axis.point()).expect("valid laser plane");
        Self {
            intrinsics: CameraIntrinsics::pinhole(800.0, 800.0, 320.0, 240.0),
            laser_plane,
            axis,
            image_size: (640, 480),
            noise_sigma_px: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.intrinsics.validate()?;
        if self.image_size.0 < 16 || self.image_size.1 < 16 {
            return Err(Error::InvalidParameter(
                "image must be at least 16x16".into(),
            ));
        }
        if !(self.noise_sigma_px >= 0.0) {
            return Err(Error::InvalidParameter(
                "noise sigma must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn blank_image(&self) -> GrayImage {
        GrayImage::new(self.image_size.0, self.image_size.1).expect("validated size")
    }
}

/// One rendered turntable position.
#[derive(Debug, Clone)]
pub struct ScanFrame {
    pub index: usize,
    /// Turntable rotation relative to frame 0, radians.
    pub angle: f64,
    pub image: GrayImage,
}

/// Unit vectors completing `d` to a right-handed orthonormal frame.
fn perpendicular_basis(d: Vec3) -> (Vec3, Vec3) {
    let helper = if d.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let e1 = (helper - d * helper.dot(d)).normalized().expect("helper not parallel");
    (e1, d.cross(e1))
}

/// Keeps the longest run of consecutive `true` flags in a cyclic sequence and
/// returns its indices in order.
fn longest_cyclic_run(flags: &[bool]) -> Vec<usize> {
    let n = flags.len();
    if flags.iter().all(|f| *f) {
        return (0..n).collect();
    }
    let Some(start) = (0..n).find(|&i| !flags[i]) else {
        return Vec::new();
    };
    let mut best: Vec<usize> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for k in 1..=n {
        let i = (start + k) % n;
        if flags[i] {
            current.push(i);
        } else {
            if current.len() > best.len() {
                best = std::mem::take(&mut current);
            }
            current.clear();
        }
    }
    if current.len() > best.len() {
        best = current;
    }
    best
}

/// Puts the curve in low-to-high axial order along its polyline.
fn orient_by_height(mut pts: Vec<Point3>, axis: &Line3) -> Vec<Point3> {
    if let (Some(first), Some(last)) = (pts.first(), pts.last()) {
        if axis.axial_coordinate(*first) > axis.axial_coordinate(*last) {
            pts.reverse();
        }
    }
    pts
}

/// Samples the camera-visible part of the intersection of the laser sheet
/// with `surface` after the turntable has turned by `angle`.
///
/// A point is visible when the surface's outward normal faces the camera at
/// the origin. The result is a single connected polyline ordered by height
/// along the axis, or empty when the sheet misses the surface.
pub fn surface_laser_curve(
    surface: &SceneSurface,
    angle: f64,
    laser_plane: &Plane,
    axis: &Line3,
    samples: usize,
) -> Vec<Point3> {
    if samples == 0 {
        return Vec::new();
    }
    let n = laser_plane.normal();
    let c = laser_plane.offset();
    let d = axis.direction();
    match *surface {
        SceneSurface::Cylinder { radius, height } => {
            // Surfaces of revolution are unchanged by the turntable.
            let (e1, e2) = perpendicular_basis(d);
            let a = axis.point();
            let nd = n.dot(d);
            if nd.abs() < 1e-12 {
                // Sheet parallel to the axis: two straight generators.
                let (p, q) = (radius * n.dot(e1), radius * n.dot(e2));
                let rhs = c - n.dot(a);
                let r = p.hypot(q);
                if r == 0.0 || rhs.abs() > r {
                    return Vec::new();
                }
                let base = q.atan2(p);
                let spread = (rhs / r).clamp(-1.0, 1.0).acos();
                let candidates = [base + spread, base - spread];
                let visible = candidates.iter().filter_map(|&phi| {
                    let radial = e1 * phi.cos() + e2 * phi.sin();
                    let foot = a + radial * radius;
                    (radial.dot(foot) < 0.0).then_some((foot.norm(), radial))
                });
                let Some((_, radial)) = visible.min_by(|x, y| x.0.total_cmp(&y.0)) else {
                    return Vec::new();
                };
                let steps = (samples.max(2) - 1) as f64;
                return (0..samples)
                    .map(|i| {
                        let s = if samples == 1 {
                            0.0
                        } else {
                            -height / 2.0 + height * i as f64 / steps
                        };
                        a + d * s + radial * radius
                    })
                    .collect();
            }
            // Oblique sheet: an ellipse parameterized by the angle around the axis.
            let mut pts = Vec::with_capacity(samples);
            let mut flags = Vec::with_capacity(samples);
            for i in 0..samples {
                let phi = TAU * i as f64 / samples as f64;
                let radial = e1 * phi.cos() + e2 * phi.sin();
                let s = (c - n.dot(a) - radius * n.dot(radial)) / nd;
                let p = a + d * s + radial * radius;
                flags.push(s.abs() <= height / 2.0 && radial.dot(p) < 0.0);
                pts.push(p);
            }
            let run = longest_cyclic_run(&flags);
            orient_by_height(run.into_iter().map(|i| pts[i]).collect(), axis)
        }
        SceneSurface::Sphere {
            radius,
            center_height,
        } => {
            let center = axis.at(center_height);
            let delta = n.dot(center) - c;
            if delta.abs() >= radius {
                return Vec::new();
            }
            let circle_center = center - n * delta;
            let rho = (radius * radius - delta * delta).sqrt();
            let up = d - n * d.dot(n);
            let e1 = up.normalized().unwrap_or_else(|| perpendicular_basis(n).0);
            let e2 = n.cross(e1);
            let mut pts = Vec::with_capacity(samples);
            let mut flags = Vec::with_capacity(samples);
            for i in 0..samples {
                let psi = TAU * i as f64 / samples as f64;
                let p = circle_center + (e1 * psi.cos() + e2 * psi.sin()) * rho;
                flags.push((p - center).dot(p) < 0.0);
                pts.push(p);
            }
            let run = longest_cyclic_run(&flags);
            orient_by_height(run.into_iter().map(|i| pts[i]).collect(), axis)
        }
        SceneSurface::Board { spec, pose } => {
            let r = axis_angle_matrix(turntable_spin(axis), angle);
            let turn = RigidTransform::new(r, axis.point() - r * axis.point());
            let pose = turn.compose(&pose);
            board_laser_segment(&spec, &pose, laser_plane, samples, axis)
        }
    }
}

fn board_laser_segment(
    spec: &ChessboardSpec,
    pose: &RigidTransform,
    laser_plane: &Plane,
    samples: usize,
    axis: &Line3,
) -> Vec<Point3> {
    // Laser plane expressed in the board frame, intersected with z = 0.
    let local = laser_plane.transformed(&pose.inverse());
    let (nl, cl) = (local.normal(), local.offset());
    let dir2 = (-nl.y, nl.x);
    let len2 = dir2.0.hypot(dir2.1);
    if len2 < 1e-12 {
        return Vec::new();
    }
    let dir2 = (dir2.0 / len2, dir2.1 / len2);
    // Closest point of the line n.x·x + n.y·y = c to the board origin.
    let k = cl / (nl.x * nl.x + nl.y * nl.y);
    let origin2 = (nl.x * k, nl.y * k);
    // Liang–Barsky clip against the board rectangle.
    let (x0, x1, y0, y1) = board_bounds(spec);
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, q) in [
        (-dir2.0, origin2.0 - x0),
        (dir2.0, x1 - origin2.0),
        (-dir2.1, origin2.1 - y0),
        (dir2.1, y1 - origin2.1),
    ] {
        if p.abs() < 1e-15 {
            if q < 0.0 {
                return Vec::new();
            }
            continue;
        }
        let t = q / p;
        if p < 0.0 {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
    }
    if t0 >= t1 {
        return Vec::new();
    }
    let steps = (samples.max(2) - 1) as f64;
    let pts: Vec<Point3> = (0..samples)
        .map(|i| {
            let t = if samples == 1 {
                (t0 + t1) / 2.0
            } else {
                t0 + (t1 - t0) * i as f64 / steps
            };
            pose.apply(Vec3::new(
                origin2.0 + dir2.0 * t,
                origin2.1 + dir2.1 * t,
                0.0,
            ))
        })
        .collect();
    orient_by_height(pts, axis)
}
