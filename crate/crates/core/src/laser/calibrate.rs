use crate::calibration::{pixel_to_ray, undistort_pixel, CameraIntrinsics};
use crate::error::{Error, Result};
use crate::geometry::{fit_line, fit_plane, ray_plane_intersect, Line3, Plane, Point3};

use super::StripeExtraction;

#[derive(Debug, Clone, Copy)]
pub struct LaserPlaneCalibration {
    pub plane: Plane,
    pub rms: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AxisCalibration {
    pub axis: Line3,
    pub rms: f64,
}

/// Casts every stripe pixel onto a known plane, typically a calibrated board.
///
/// Pixels are undistorted first. Any pixel whose ray misses the plane fails
/// the whole call: calibration inputs are expected to be clean.
pub fn lift_stripe_to_plane(
    stripe: &StripeExtraction,
    k: &CameraIntrinsics,
    reference: &Plane,
) -> Result<Vec<Point3>> {
    stripe
        .points
        .iter()
        .map(|p| {
            let ray = pixel_to_ray(k, undistort_pixel(k, *p)?);
            ray_plane_intersect(ray.origin, ray.direction, reference)
        })
        .collect()
}

/// Fits the laser sheet to stripes lifted from two or more board poses.
pub fn calibrate_laser_plane(lifted_sets: &[Vec<Point3>]) -> Result<LaserPlaneCalibration> {
    if lifted_sets.len() < 2 {
        return Err(Error::Degenerate(
            "laser plane needs stripes from at least two board poses",
        ));
    }
    let all: Vec<Point3> = lifted_sets.iter().flatten().copied().collect();
    let fit = fit_plane(&all)?;
    Ok(LaserPlaneCalibration {
        plane: fit.plane,
        rms: fit.rms_distance,
    })
}

/// Fits the turntable axis to the lifted axis-marker stripe.
pub fn calibrate_rotation_axis(lifted_axis_points: &[Point3]) -> Result<AxisCalibration> {
    let fit = fit_line(lifted_axis_points)?;
    Ok(AxisCalibration {
        axis: fit.line,
        rms: fit.rms_distance,
    })
}
