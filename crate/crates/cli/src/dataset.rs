//! The simulated rig shared by `simulate` and `pipeline`.

use laserforge_core::simulator::{
    axis_board_pose, calibration_board_poses, capture_boards, laser_board_poses,
    render_corner_observations, simulate_scan, BoardCapture, RigConfig, ScanOptions,
    SceneSurface, SimulatedScan,
};
use laserforge_core::{ChessboardSpec, Result, ViewObservation};

pub const CAMERA_VIEWS: usize = 20;

// Noise streams for the boards, well clear of the per-frame streams
// `seed + i`.
const LASER_BOARD_STREAM: u64 = 1 << 40;
const AXIS_BOARD_STREAM: u64 = 2 << 40;

/// Desk-scale camera calibration target: 8×6 inner corners, 3 mm squares.
pub fn camera_board() -> ChessboardSpec {
    ChessboardSpec::default()
}

/// Larger target used to calibrate the laser sheet and the axis.
pub fn target_board() -> ChessboardSpec {
    ChessboardSpec::new(8, 6, 15.0).expect("valid board")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneParams {
    pub surface: SceneSurface,
    pub frames: usize,
    pub seed: u64,
    pub noise_px: f64,
}

pub struct Dataset {
    pub rig: RigConfig,
    pub camera_views: Vec<ViewObservation>,
    pub laser_boards: Vec<BoardCapture>,
    pub axis_boards: Vec<BoardCapture>,
    pub scan: SimulatedScan,
}

pub fn rig_for(params: &SceneParams) -> RigConfig {
    RigConfig {
        noise_sigma_px: params.noise_px,
        ..RigConfig::reference(params.seed)
    }
}

pub fn simulate_dataset(params: &SceneParams) -> Result<Dataset> {
    let rig = rig_for(params);
    rig.validate()?;
    params.surface.validate()?;
    let opts = ScanOptions::default();

    let camera = camera_board();
    let poses = calibration_board_poses(&rig, &camera, CAMERA_VIEWS, params.seed)?;
    let camera_views = render_corner_observations(&rig, &camera, &poses)?;

    let target = target_board();
    let stream = |offset: u64| RigConfig {
        seed: params.seed.wrapping_add(offset),
        ..rig
    };
    let laser_boards = capture_boards(
        &stream(LASER_BOARD_STREAM),
        &target,
        &laser_board_poses(&rig, &target)?,
        &opts,
        params.seed.wrapping_add(LASER_BOARD_STREAM + 1),
    )?;
    let axis_boards = capture_boards(
        &stream(AXIS_BOARD_STREAM),
        &target,
        &[axis_board_pose(&rig, &target)?],
        &opts,
        params.seed.wrapping_add(AXIS_BOARD_STREAM + 1),
    )?;
    let scan = simulate_scan(&rig, &params.surface, params.frames, &opts)?;
    Ok(Dataset {
        rig,
        camera_views,
        laser_boards,
        axis_boards,
        scan,
    })
}
