use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::calibration::{
    board_object_points, project_point, CameraIntrinsics, ChessboardSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{axis_angle_matrix, Line3, Plane, RigidTransform, Vec3};
use crate::reconstruction::FrameMeasurements;

use super::{
    analytic_stripe, render_laser_image_stream, surface_laser_curve, RigConfig, ScanFrame,
    SceneSurface,
};

/// Rendering settings shared by every frame of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Points sampled along each laser curve.
    pub samples: usize,
    pub stripe_sigma_px: f64,
    pub peak: u8,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: 2000,
            stripe_sigma_px: 1.5,
            peak: 255,
        }
    }
}

/// What the simulator knows and the pipeline has to recover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub surface: SceneSurface,
    pub axis: Line3,
    pub plane: Plane,
    pub intrinsics: CameraIntrinsics,
}

#[derive(Debug, Clone)]
pub struct SimulatedScan {
    pub frames: Vec<ScanFrame>,
    pub ground_truth: GroundTruth,
}

/// Turntable angle of frame `index` in a full turn of `n_frames` frames.
pub fn frame_angle(index: usize, n_frames: usize) -> f64 {
    index as f64 * TAU / n_frames as f64
}

/// Renders a full turn of the turntable: frame `i` sees the object rotated by
/// `i·2π/n_frames` about the axis. Frame `i` draws its pixel noise from the
/// stream `seed + i`, so frames render independently.
pub fn simulate_scan(
    rig: &RigConfig,
    surface: &SceneSurface,
    n_frames: usize,
    opts: &ScanOptions,
) -> Result<SimulatedScan> {
    rig.validate()?;
    surface.validate()?;
    if n_frames == 0 {
        return Err(Error::InvalidParameter("need at least one frame".into()));
    }
    let frames = (0..n_frames)
        .into_par_iter()
        .map(|index| {
            let angle = frame_angle(index, n_frames);
            let curve =
                surface_laser_curve(surface, angle, &rig.laser_plane, &rig.axis, opts.samples);
            let image = render_laser_image_stream(
                rig,
                &curve,
                opts.stripe_sigma_px,
                opts.peak,
                rig.seed.wrapping_add(index as u64),
                index,
            )?;
            Ok(ScanFrame {
                index,
                angle,
                image,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulatedScan {
        frames,
        ground_truth: GroundTruth {
            surface: *surface,
            axis: rig.axis,
            plane: rig.laser_plane,
            intrinsics: rig.intrinsics,
        },
    })
}

/// Same scan as [`simulate_scan`] but with exact stripe positions instead of
/// rendered images.
pub fn simulate_scan_analytic(
    rig: &RigConfig,
    surface: &SceneSurface,
    n_frames: usize,
    samples: usize,
) -> Result<Vec<FrameMeasurements>> {
    rig.validate()?;
    surface.validate()?;
    (0..n_frames)
        .into_par_iter()
        .map(|index| {
            let angle = frame_angle(index, n_frames);
            let curve = surface_laser_curve(surface, angle, &rig.laser_plane, &rig.axis, samples);
            Ok(FrameMeasurements {
                index,
                angle,
                stripe: analytic_stripe(rig, &curve)?,
            })
        })
        .collect()
}

fn board_in_frame(rig: &RigConfig, spec: &ChessboardSpec, pose: &RigidTransform, margin: f64) -> bool {
    let (w, h) = rig.image_size;
    board_object_points(spec).into_iter().all(|p| {
        project_point(&rig.intrinsics, pose.apply(p)).is_ok_and(|px| {
            px.u >= margin
                && px.v >= margin
                && px.u <= w as f64 - 1.0 - margin
                && px.v <= h as f64 - 1.0 - margin
        })
    })
}

/// Pose placing the board center at `center` (camera frame), rotated by
/// `rotation`.
pub fn board_pose_centered(
    spec: &ChessboardSpec,
    rotation: crate::geometry::Mat3,
    center: Vec3,
) -> RigidTransform {
    let (w, h) = spec.extent();
    let local_center = Vec3::new(w / 2.0, h / 2.0, 0.0);
    RigidTransform::new(rotation, center - rotation * local_center)
}

/// Seeded, varied, fully visible board poses for camera calibration.
///
/// Boards are tilted 10°–40° about a random in-plane axis, spun up to ±20°
/// in plane, and placed so the inner corners span roughly half the image
/// width.
pub fn calibration_board_poses(
    rig: &RigConfig,
    spec: &ChessboardSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<RigidTransform>> {
    rig.validate()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = &rig.intrinsics;
    let (w, _) = spec.extent();
    let depth = k.fx * w / (0.5 * rig.image_size.0 as f64);
    let mut poses = Vec::with_capacity(n);
    let mut attempts = 0;
    while poses.len() < n {
        attempts += 1;
        if attempts > 1000 * n.max(1) {
            return Err(Error::InvalidParameter(
                "could not place calibration boards inside the image".into(),
            ));
        }
        let dir: f64 = rng.gen_range(0.0..TAU);
        let tilt = rng.gen_range(10f64..40.0).to_radians();
        let spin = rng.gen_range(-20f64..20.0).to_radians();
        let r = axis_angle_matrix(Vec3::new(dir.cos(), dir.sin(), 0.0), tilt)
            * axis_angle_matrix(Vec3::Z, spin);
        let z = depth * rng.gen_range(0.85..1.25);
        let center = Vec3::new(
            z * rng.gen_range(-0.12..0.12) * rig.image_size.0 as f64 / k.fx,
            z * rng.gen_range(-0.12..0.12) * rig.image_size.1 as f64 / k.fy,
            z,
        );
        let pose = board_pose_centered(spec, r, center);
        if board_in_frame(rig, spec, &pose, 8.0) {
            poses.push(pose);
        }
    }
    Ok(poses)
}
