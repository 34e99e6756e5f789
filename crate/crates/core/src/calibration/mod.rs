//! Camera model and planar-target calibration.
//!
//! Intrinsics come from board homographies in closed form and are then
//! refined jointly with radial distortion and all board poses by minimizing
//! corner reprojection error.

mod board;
mod camera;
mod closed_form;
mod homography;
mod refine;

pub use board::{board_object_points, ChessboardSpec, ViewObservation};
pub use camera::{
    pixel_to_ray, project_point, undistort_pixel, CameraIntrinsics, PixelPoint, Ray, MIN_DEPTH,
};
pub use closed_form::{
    extrinsics_from_homography, intrinsics_from_homographies, MOTION_DEGENERACY_TOLERANCE,
};
pub use homography::{apply_homography, estimate_homography};
pub use refine::{
    board_plane, calibrate_camera, calibrate_camera_with, estimate_board_pose, reproject_board,
    reprojection_rms, CalibrationOptions,
    CalibrationResult,
};
