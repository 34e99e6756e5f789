//! Pipeline stages shared by the one-shot `pipeline` command and the
//! file-driven subcommands.

use laserforge_core::calibration::{board_plane, estimate_board_pose};
use laserforge_core::geometry::Point3;
use laserforge_core::laser::{
    calibrate_laser_plane, calibrate_rotation_axis, extract_laser_points_along,
    lift_stripe_to_plane, AxisCalibration, LaserPlaneCalibration, ScanDirection,
};
use laserforge_core::reconstruction::{merge_frames, triangulate_frames, FrameMeasurements};
use laserforge_core::{
    CameraIntrinsics, ChessboardSpec, GrayImage, Line3, Plane, PointCloud, Result,
    ViewObservation,
};

/// A calibration board as the camera saw it: detected corners and the
/// image with the laser stripe across it.
pub struct BoardShot<'a> {
    pub corners: &'a ViewObservation,
    pub image: &'a GrayImage,
}

/// Stripe on one board, lifted onto the board plane recovered from its
/// corners.
pub fn lift_board_stripe(
    k: &CameraIntrinsics,
    spec: &ChessboardSpec,
    shot: &BoardShot,
    threshold: u8,
) -> Result<Vec<Point3>> {
    let pose = estimate_board_pose(k, spec, shot.corners)?;
    let stripe = extract_laser_points_along(shot.image, threshold, ScanDirection::Rows)?;
    lift_stripe_to_plane(&stripe, k, &board_plane(&pose))
}

pub fn fit_laser(
    k: &CameraIntrinsics,
    spec: &ChessboardSpec,
    shots: &[BoardShot],
    threshold: u8,
) -> Result<LaserPlaneCalibration> {
    let sets = shots
        .iter()
        .map(|s| lift_board_stripe(k, spec, s, threshold))
        .collect::<Result<Vec<_>>>()?;
    calibrate_laser_plane(&sets)
}

pub fn fit_axis(
    k: &CameraIntrinsics,
    spec: &ChessboardSpec,
    shots: &[BoardShot],
    threshold: u8,
) -> Result<AxisCalibration> {
    let mut points = Vec::new();
    for s in shots {
        points.extend(lift_board_stripe(k, spec, s, threshold)?);
    }
    calibrate_rotation_axis(&points)
}

/// Extracts, triangulates and merges a turntable scan. Frames are
/// `(angle in radians, image)` in index order.
pub fn reconstruct(
    k: &CameraIntrinsics,
    plane: &Plane,
    axis: &Line3,
    frames: &[(f64, &GrayImage)],
    threshold: u8,
    direction: ScanDirection,
) -> Result<(PointCloud, usize)> {
    let measurements = frames
        .iter()
        .enumerate()
        .map(|(index, (angle, image))| {
            Ok(FrameMeasurements {
                index,
                angle: *angle,
                stripe: extract_laser_points_along(image, threshold, direction)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let triangulated = triangulate_frames(&measurements, k, plane);
    let dropped = triangulated.iter().map(|f| f.dropped).sum();
    Ok((merge_frames(&triangulated, axis), dropped))
}
