use crate::calibration::{ChessboardSpec, ViewObservation};
use crate::error::{Error, Result};
use crate::geometry::{axis_angle_matrix, Mat3, RigidTransform, Vec3};
use crate::laser::GrayImage;

use super::{
    board_pose_centered, render_corner_observations, render_laser_image_stream,
    surface_laser_curve, RigConfig, ScanOptions, SceneSurface,
};

/// One board placed in front of the rig: its corners and the laser stripe
/// falling across it.
#[derive(Debug, Clone)]
pub struct BoardCapture {
    pub pose: RigidTransform,
    pub corners: ViewObservation,
    pub image: GrayImage,
}

/// Two boards 50 mm in front of and behind the turntable axis, pitched
/// ±20° about the camera x axis and centered where the laser sheet crosses
/// them.
///
/// The pitch makes the stripe drift across the image as it descends the
/// board, so its subpixel phase varies from row to row.
pub fn laser_board_poses(rig: &RigConfig, spec: &ChessboardSpec) -> Result<Vec<RigidTransform>> {
    let n = rig.laser_plane.normal();
    if n.x.abs() < 1e-6 {
        return Err(Error::InvalidParameter(
            "laser sheet must not be parallel to the image x axis".into(),
        ));
    }
    let anchor = rig.axis.point();
    Ok([(-50.0, 20f64), (50.0, -20f64)]
        .into_iter()
        .map(|(dz, pitch)| {
            let (y, z) = (anchor.y, anchor.z + dz);
            let x = (rig.laser_plane.offset() - n.y * y - n.z * z) / n.x;
            let rotation = axis_angle_matrix(Vec3::X, pitch.to_radians());
            board_pose_centered(spec, rotation, Vec3::new(x, y, z))
        })
        .collect())
}

/// A board whose plane contains the turntable axis and faces the camera as
/// squarely as that allows. The laser line on it is the axis itself.
pub fn axis_board_pose(rig: &RigConfig, spec: &ChessboardSpec) -> Result<RigidTransform> {
    let d = rig.axis.direction();
    let normal = (Vec3::Z - d * d.z)
        .normalized()
        .ok_or_else(|| Error::InvalidParameter("axis is along the optical axis".into()))?;
    if normal.cross(rig.laser_plane.normal()).norm() < 1e-6 {
        return Err(Error::InvalidParameter(
            "laser sheet coincides with the axis board".into(),
        ));
    }
    let rotation = Mat3::from_columns(d.cross(normal), d, normal);
    Ok(board_pose_centered(spec, rotation, rig.axis.point()))
}

/// Renders corners and the laser stripe for each pose. Corner noise comes
/// from `rig.seed`, stripe noise from `stream + i` for board `i`.
pub fn capture_boards(
    rig: &RigConfig,
    spec: &ChessboardSpec,
    poses: &[RigidTransform],
    opts: &ScanOptions,
    stream: u64,
) -> Result<Vec<BoardCapture>> {
    let views = render_corner_observations(rig, spec, poses)?;
    poses
        .iter()
        .zip(views)
        .enumerate()
        .map(|(i, (pose, corners))| {
            let surface = SceneSurface::Board {
                spec: *spec,
                pose: *pose,
            };
            let curve =
                surface_laser_curve(&surface, 0.0, &rig.laser_plane, &rig.axis, opts.samples);
            let image = render_laser_image_stream(
                rig,
                &curve,
                opts.stripe_sigma_px,
                opts.peak,
                stream.wrapping_add(i as u64),
                i,
            )?;
            Ok(BoardCapture {
                pose: *pose,
                corners,
                image,
            })
        })
        .collect()
}
