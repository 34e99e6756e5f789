use crate::error::{Error, Result};
use crate::geometry::{rotation_from_vector, rotation_to_vector, Plane, Point3, RigidTransform, Vec3};
use crate::numerics::{gauss_newton, GaussNewtonOptions};

use super::{
    board_object_points, estimate_homography, extrinsics_from_homography,
    intrinsics_from_homographies, project_point, undistort_pixel, CameraIntrinsics, ChessboardSpec, PixelPoint,
    ViewObservation,
};

/// Intrinsics plus one board-to-camera pose per view.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub intrinsics: CameraIntrinsics,
    pub poses: Vec<RigidTransform>,
    /// RMS corner reprojection error, px.
    pub rms_reprojection: f64,
}

/// Settings for [`calibrate_camera_with`].
#[derive(Debug, Clone, Copy)]
pub struct CalibrationOptions {
    /// Whether `k1, k2` are refined; when false they stay at zero.
    pub refine_distortion: bool,
    pub solver: GaussNewtonOptions,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            refine_distortion: true,
            solver: GaussNewtonOptions {
                max_iters: 60,
                step_tol: 1e-13,
                residual_tol: 1e-12,
            },
        }
    }
}

/// RMS over all corners of the pixel distance between observation and
/// reprojection.
pub fn reprojection_rms(
    result: &CalibrationResult,
    spec: &ChessboardSpec,
    views: &[ViewObservation],
) -> Result<f64> {
    reprojection_rms_of(&result.intrinsics, &result.poses, spec, views)
}

fn reprojection_rms_of(
    k: &CameraIntrinsics,
    poses: &[RigidTransform],
    spec: &ChessboardSpec,
    views: &[ViewObservation],
) -> Result<f64> {
    if poses.len() != views.len() {
        return Err(Error::Dimension(format!(
            "{} poses for {} views",
            poses.len(),
            views.len()
        )));
    }
    let object = board_object_points(spec);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (pose, view) in poses.iter().zip(views) {
        view.validate(spec)?;
        for (p, obs) in object.iter().zip(&view.corners) {
            let proj = project_point(k, pose.apply(*p))?;
            sum += (proj.u - obs.u).powi(2) + (proj.v - obs.v).powi(2);
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Dimension("no views".into()));
    }
    Ok((sum / count as f64).sqrt())
}

/// Calibrates with [`CalibrationOptions::default`].
pub fn calibrate_camera(
    spec: &ChessboardSpec,
    views: &[ViewObservation],
) -> Result<CalibrationResult> {
    calibrate_camera_with(spec, views, &CalibrationOptions::default())
}

/// Closed-form initialization followed by joint Gauss–Newton refinement of
/// intrinsics, distortion and every pose.
pub fn calibrate_camera_with(
    spec: &ChessboardSpec,
    views: &[ViewObservation],
    opts: &CalibrationOptions,
) -> Result<CalibrationResult> {
    spec.validate()?;
    if views.len() < 3 {
        return Err(Error::InsufficientViews(views.len()));
    }
    for v in views {
        v.validate(spec)?;
    }
    let object = board_object_points(spec);
    let object_xy: Vec<(f64, f64)> = object.iter().map(|p| (p.x, p.y)).collect();

    let homographies = views
        .iter()
        .map(|v| estimate_homography(&object_xy, &v.corners))
        .collect::<Result<Vec<_>>>()?;
    let k0 = intrinsics_from_homographies(&homographies)?;
    let poses0 = homographies
        .iter()
        .map(|h| extrinsics_from_homography(&k0, h))
        .collect::<Result<Vec<_>>>()?;
    let rms0 = reprojection_rms_of(&k0, &poses0, spec, views)?;

    let layout = Layout {
        distortion: opts.refine_distortion,
    };
    let x0 = layout.pack(&k0, &poses0);
    let residuals = |x: &[f64]| -> Vec<f64> {
        let (k, poses) = layout.unpack(x, views.len());
        let mut r = Vec::with_capacity(views.len() * object.len() * 2);
        for (pose, view) in poses.iter().zip(views) {
            for (p, obs) in object.iter().zip(&view.corners) {
                match project_point(&k, pose.apply(*p)) {
                    Ok(proj) => {
                        r.push(proj.u - obs.u);
                        r.push(proj.v - obs.v);
                    }
                    Err(_) => {
                        r.push(f64::NAN);
                        r.push(f64::NAN);
                    }
                }
            }
        }
        r
    };
    let report = gauss_newton(residuals, &x0, &opts.solver)?;
    let (k, poses) = layout.unpack(&report.x, views.len());
    let rms = reprojection_rms_of(&k, &poses, spec, views)?;

    if !(rms <= rms0) {
        return Ok(CalibrationResult {
            intrinsics: k0,
            poses: poses0,
            rms_reprojection: rms0,
        });
    }
    k.validate()?;
    Ok(CalibrationResult {
        intrinsics: k,
        poses,
        rms_reprojection: rms,
    })
}

/// Parameter vector layout: `fx fy cx cy [k1 k2]` then per view a rotation
/// vector and a translation.
#[derive(Clone, Copy)]
struct Layout {
    distortion: bool,
}

impl Layout {
    fn intrinsic_len(&self) -> usize {
        if self.distortion {
            6
        } else {
            4
        }
    }

    fn pack(&self, k: &CameraIntrinsics, poses: &[RigidTransform]) -> Vec<f64> {
        let mut x = vec![k.fx, k.fy, k.cx, k.cy];
        if self.distortion {
            x.extend([k.k1, k.k2]);
        }
        for pose in poses {
            x.extend(rotation_to_vector(&pose.rotation).to_array());
            x.extend(pose.translation.to_array());
        }
        x
    }

    fn unpack(&self, x: &[f64], views: usize) -> (CameraIntrinsics, Vec<RigidTransform>) {
        let mut k = CameraIntrinsics::pinhole(x[0], x[1], x[2], x[3]);
        if self.distortion {
            k = k.with_distortion(x[4], x[5]);
        }
        let base = self.intrinsic_len();
        let poses = (0..views)
            .map(|i| {
                let o = base + 6 * i;
                let w = Vec3::new(x[o], x[o + 1], x[o + 2]);
                let t: Point3 = Vec3::new(x[o + 3], x[o + 4], x[o + 5]);
                RigidTransform::new(rotation_from_vector(w), t)
            })
            .collect();
        (k, poses)
    }
}

/// Reprojects every board corner of `pose` without noise.
pub fn reproject_board(
    k: &CameraIntrinsics,
    spec: &ChessboardSpec,
    pose: &RigidTransform,
) -> Result<Vec<PixelPoint>> {
    board_object_points(spec)
        .into_iter()
        .map(|p| project_point(k, pose.apply(p)))
        .collect()
}

/// Pose of one board seen by an already calibrated camera.
///
/// Corners are undistorted, the pose is read off the board homography, and
/// then refined by minimizing reprojection error with the intrinsics held.
pub fn estimate_board_pose(
    k: &CameraIntrinsics,
    spec: &ChessboardSpec,
    view: &ViewObservation,
) -> Result<RigidTransform> {
    spec.validate()?;
    k.validate()?;
    view.validate(spec)?;
    let object = board_object_points(spec);
    let object_xy: Vec<(f64, f64)> = object.iter().map(|p| (p.x, p.y)).collect();
    let undistorted = view
        .corners
        .iter()
        .map(|c| undistort_pixel(k, *c))
        .collect::<Result<Vec<_>>>()?;
    let h = estimate_homography(&object_xy, &undistorted)?;
    let pose0 = extrinsics_from_homography(k, &h)?;

    let residuals = |x: &[f64]| -> Vec<f64> {
        let pose = RigidTransform::new(
            rotation_from_vector(Vec3::new(x[0], x[1], x[2])),
            Vec3::new(x[3], x[4], x[5]),
        );
        let mut r = Vec::with_capacity(2 * object.len());
        for (p, obs) in object.iter().zip(&view.corners) {
            match project_point(k, pose.apply(*p)) {
                Ok(proj) => r.extend([proj.u - obs.u, proj.v - obs.v]),
                Err(_) => r.extend([f64::NAN, f64::NAN]),
            }
        }
        r
    };
    let mut x0 = rotation_to_vector(&pose0.rotation).to_array().to_vec();
    x0.extend(pose0.translation.to_array());
    let report = gauss_newton(residuals, &x0, &CalibrationOptions::default().solver)?;
    let x = &report.x;
    Ok(RigidTransform::new(
        rotation_from_vector(Vec3::new(x[0], x[1], x[2])),
        Vec3::new(x[3], x[4], x[5]),
    ))
}

/// The board's `z = 0` plane in camera coordinates.
pub fn board_plane(pose: &RigidTransform) -> Plane {
    Plane::through_point(pose.rotation * Vec3::Z, pose.translation)
        .expect("rotation keeps unit length")
}
