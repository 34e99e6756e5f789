//! Sheet-of-light triangulation and turntable merging.

use rayon::prelude::*;

use crate::calibration::{pixel_to_ray, undistort_pixel, CameraIntrinsics};
use crate::error::{Error, Result};
use crate::geometry::{
    axis_angle_matrix, ray_plane_intersect, turntable_spin, Line3, Plane, Point3,
};
use crate::laser::StripeExtraction;
use crate::simulator::SceneSurface;

/// Merged scan in the turntable frame at angle zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    /// Either absent or one color per point.
    pub colors: Option<Vec<[u8; 3]>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            colors: None,
        }
    }

    pub fn with_colors(points: Vec<Point3>, colors: Vec<[u8; 3]>) -> Result<Self> {
        if colors.len() != points.len() {
            return Err(Error::Dimension(format!(
                "{} colors for {} points",
                colors.len(),
                points.len()
            )));
        }
        Ok(Self {
            points,
            colors: Some(colors),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Stripe of one scan frame together with its turntable angle.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMeasurements {
    pub index: usize,
    /// Radians.
    pub angle: f64,
    pub stripe: StripeExtraction,
}

/// Camera-frame points of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangulatedFrame {
    pub index: usize,
    pub angle: f64,
    pub points: Vec<Point3>,
    /// Pixels whose ray missed the laser plane or could not be undistorted.
    pub dropped: usize,
}

/// Intersects every stripe pixel's camera ray with the laser plane.
///
/// Pixels are undistorted first. Pixels that cannot be triangulated are
/// dropped and counted rather than failing the frame.
pub fn triangulate_frame(
    stripe: &StripeExtraction,
    k: &CameraIntrinsics,
    laser_plane: &Plane,
) -> (Vec<Point3>, usize) {
    let mut points = Vec::with_capacity(stripe.points.len());
    let mut dropped = 0;
    for px in &stripe.points {
        let hit = undistort_pixel(k, *px).and_then(|p| {
            let ray = pixel_to_ray(k, p);
            ray_plane_intersect(ray.origin, ray.direction, laser_plane)
        });
        match hit {
            Ok(p) => points.push(p),
            Err(_) => dropped += 1,
        }
    }
    (points, dropped)
}

/// Triangulates every frame, in parallel, keeping frame order.
pub fn triangulate_frames(
    frames: &[FrameMeasurements],
    k: &CameraIntrinsics,
    laser_plane: &Plane,
) -> Vec<TriangulatedFrame> {
    frames
        .par_iter()
        .map(|f| {
            let (points, dropped) = triangulate_frame(&f.stripe, k, laser_plane);
            TriangulatedFrame {
                index: f.index,
                angle: f.angle,
                points,
                dropped,
            }
        })
        .collect()
}

/// Undoes each frame's turntable rotation and concatenates the results in
/// frame order, then row order.
///
/// The turntable turns the object by `+angle` about
/// [`turntable_spin`]`(axis)`, so each frame is rotated by `−angle`.
pub fn merge_frames(frames: &[TriangulatedFrame], axis: &Line3) -> PointCloud {
    let mut order: Vec<&TriangulatedFrame> = frames.iter().collect();
    order.sort_by_key(|f| f.index);
    let anchor = axis.point();
    let spin = turntable_spin(axis);
    let points = order
        .par_iter()
        .map(|f| {
            let r = axis_angle_matrix(spin, -f.angle);
            f.points
                .iter()
                .map(|p| anchor + r * (*p - anchor))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();
    PointCloud::new(points)
}

/// Distance statistics of a cloud against an analytic surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudError {
    pub rms_mm: f64,
    pub max_mm: f64,
    pub n: usize,
}

/// RMS and maximum of the per-point unsigned distance to `surface`.
pub fn evaluate_cloud(cloud: &PointCloud, surface: &SceneSurface, axis: &Line3) -> Result<CloudError> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let (sum, max) = cloud
        .points
        .iter()
        .map(|p| surface.distance(*p, axis))
        .fold((0.0, 0.0f64), |(s, m), d| (s + d * d, m.max(d)));
    Ok(CloudError {
        rms_mm: (sum / cloud.len() as f64).sqrt(),
        max_mm: max,
        n: cloud.len(),
    })
}
