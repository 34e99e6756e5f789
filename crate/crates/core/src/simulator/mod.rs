//! Virtual line-laser turntable rig.
//!
//! Renders chessboard corner observations and laser stripe images of
//! analytic surfaces with known ground truth, so every stage of the pipeline
//! can be checked against exact answers.

mod boards;
mod render;
mod scan;
mod scene;

pub use crate::calibration::project_point;
pub use boards::{axis_board_pose, capture_boards, laser_board_poses, BoardCapture};
pub use render::{
    analytic_stripe, render_corner_observations, render_laser_image, render_laser_image_stream,
    INTENSITY_NOISE_PER_PX, STRIPE_SIGMA_RANGE,
};
pub use scan::{
    board_pose_centered, calibration_board_poses, frame_angle, simulate_scan,
    simulate_scan_analytic, GroundTruth, ScanOptions, SimulatedScan,
};
pub use scene::{
    board_bounds, surface_laser_curve, RigConfig, ScanFrame, SceneSurface,
};
