//! Command-line front end for the laserforge scanner.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 for numerical
//! failures (degenerate geometry, failed fits, a cloud over `--max-rms`).

// `!(x > 0.0)` is deliberate: NaN must take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use laserforge_core::calibration::calibrate_camera;
use laserforge_core::io::json::{
    axis_calibration_from_json, axis_calibration_to_json, board_spec_from_json,
    board_spec_to_json, calibration_from_json, calibration_to_json, corners_from_json,
    corners_to_json, ground_truth_from_json, ground_truth_to_json, laser_plane_from_json,
    laser_plane_to_json, views_from_json, views_to_json,
};
use laserforge_core::io::{
    load_session, read_file, read_json, read_pgm, read_ply, write_atomic, write_json,
    write_pgm, write_ply, PlyFormat, ScanSession, SessionFrame,
};
use laserforge_core::geometry::turntable_spin;
use laserforge_core::laser::ScanDirection;
use laserforge_core::reconstruction::evaluate_cloud;
use laserforge_core::simulator::{BoardCapture, GroundTruth, SceneSurface};
use laserforge_core::{ChessboardSpec, Error, GrayImage, ViewObservation};

pub mod dataset;
pub mod stages;

use dataset::{camera_board, simulate_dataset, target_board, SceneParams};
use stages::BoardShot;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "laserforge", version, about = "Line-laser turntable scanner")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a scan plus calibration inputs into a directory.
    Simulate(SimulateArgs),
    /// Calibrate the camera from chessboard corners.
    Calibrate(CalibrateArgs),
    /// Fit the laser sheet from stripes on two or more boards.
    FitLaser(FitBoardsArgs),
    /// Fit the turntable axis from the stripe on a board through the axis.
    FitAxis(FitBoardsArgs),
    /// Turn a scan session into a point cloud.
    Reconstruct(ReconstructArgs),
    /// Compare a cloud against simulator ground truth.
    Evaluate(EvaluateArgs),
    /// Simulate, calibrate, scan and evaluate in one go.
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SurfaceKind {
    Cylinder,
    Sphere,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    #[default]
    Ascii,
    Binary,
}

impl From<FormatArg> for PlyFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Ascii => PlyFormat::Ascii,
            FormatArg::Binary => PlyFormat::BinaryLittleEndian,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SceneArgs {
    #[arg(long, value_enum, default_value = "cylinder")]
    pub surface: SurfaceKind,
    /// Object radius, mm.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub radius: f64,
    /// Cylinder height, mm.
    #[arg(long, default_value_t = 80.0, allow_negative_numbers = true)]
    pub height: f64,
    #[arg(long, default_value_t = 360)]
    pub frames: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Corner noise σ in px; image noise is 4× this in gray levels.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub noise_px: f64,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u8).range(1..=254))]
    pub threshold: u8,
}

impl SceneArgs {
    fn params(&self) -> Result<SceneParams, CliError> {
        if self.frames == 0 {
            return Err(CliError::invalid("--frames must be at least 1"));
        }
        if !(self.noise_px >= 0.0 && self.noise_px.is_finite()) {
            return Err(CliError::invalid("--noise-px must be a finite nonnegative number"));
        }
        let surface = match self.surface {
            SurfaceKind::Cylinder => SceneSurface::Cylinder {
                radius: self.radius,
                height: self.height,
            },
            SurfaceKind::Sphere => SceneSurface::Sphere {
                radius: self.radius,
                center_height: 0.0,
            },
        };
        surface.validate()?;
        Ok(SceneParams {
            surface,
            frames: self.frames,
            seed: self.seed,
            noise_px: self.noise_px,
        })
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Corner observations (views.json).
    #[arg(long)]
    pub views: PathBuf,
    /// Calibration result to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitBoardsArgs {
    /// Board captures (laser_boards.json or axis_board.json).
    #[arg(long)]
    pub boards: PathBuf,
    /// Camera calibration result.
    #[arg(long)]
    pub intrinsics: PathBuf,
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u8).range(1..=254))]
    pub threshold: u8,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub session: PathBuf,
    /// Overrides the session's threshold.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=254))]
    pub threshold: Option<u8>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "ascii")]
    pub format: FormatArg,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long)]
    pub ground_truth: PathBuf,
    /// Exit with status 2 when the RMS distance exceeds this, mm.
    #[arg(long, allow_negative_numbers = true)]
    pub max_rms: Option<f64>,
}

#[derive(Args, Debug)]
pub struct PipelineArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "ascii")]
    pub format: FormatArg,
    /// Exit with status 2 when the cloud RMS exceeds this, mm.
    #[arg(long, allow_negative_numbers = true)]
    pub max_rms: Option<f64>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            EXIT_NUMERICAL
        } else {
            EXIT_INVALID
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message.replace('\n', " "))
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command. Normal
/// output goes to `stdout`; the returned code is the process exit status,
/// with one diagnostic line already written to `stderr` on failure.
pub fn run<I, T>(args: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let text = e.to_string();
            let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("usage error");
            let _ = writeln!(stderr, "laserforge: {}", line.trim_start_matches("error: "));
            return EXIT_INVALID;
        }
    };
    let name = command_name(&cli.command);
    match execute(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "laserforge {name}: {e}");
            e.code
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Simulate(_) => "simulate",
        Command::Calibrate(_) => "calibrate",
        Command::FitLaser(_) => "fit-laser",
        Command::FitAxis(_) => "fit-axis",
        Command::Reconstruct(_) => "reconstruct",
        Command::Evaluate(_) => "evaluate",
        Command::Pipeline(_) => "pipeline",
    }
}

fn execute(command: Command, out: &mut dyn std::io::Write) -> CliResult<()> {
    match command {
        Command::Simulate(a) => simulate(&a, out),
        Command::Calibrate(a) => calibrate(&a, out),
        Command::FitLaser(a) => fit_laser(&a, out),
        Command::FitAxis(a) => fit_axis(&a, out),
        Command::Reconstruct(a) => reconstruct(&a, out),
        Command::Evaluate(a) => evaluate(&a, out),
        Command::Pipeline(a) => pipeline(&a, out),
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::invalid(format!("{}: {e}", dir.display())))
}

fn say(out: &mut dyn std::io::Write, text: std::fmt::Arguments) -> CliResult<()> {
    out.write_fmt(text)
        .map_err(|e| CliError::invalid(format!("cannot write to stdout: {e}")))
}

// ---- simulate ------------------------------------------------------------

fn boards_json<'a>(
    spec: &ChessboardSpec,
    boards: &'a [BoardCapture],
    prefix: &str,
) -> (Value, Vec<(String, &'a GrayImage)>) {
    let mut images = Vec::new();
    let entries: Vec<Value> = boards
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let name = format!("{prefix}_{i}.pgm");
            images.push((name.clone(), &b.image));
            json!({"corners": corners_to_json(&b.corners), "image_path": name})
        })
        .collect();
    (json!({"board": board_spec_to_json(spec), "boards": entries}), images)
}

fn simulate(a: &SimulateArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let params = a.scene.params()?;
    let data = simulate_dataset(&params)?;
    create_dir(&a.out)?;
    let dir = &a.out;

    let mut frames = Vec::with_capacity(data.scan.frames.len());
    for f in &data.scan.frames {
        let name = format!("frame_{:04}.pgm", f.index);
        write_atomic(dir.join(&name), &write_pgm(&f.image))?;
        frames.push(SessionFrame {
            angle: f.angle,
            image_path: PathBuf::from(name),
        });
    }
    let session = ScanSession {
        intrinsics_path: "calibration.json".into(),
        laser_plane_path: "laser_plane.json".into(),
        axis_path: "axis.json".into(),
        frames,
        threshold: a.scene.threshold,
        scan_direction: ScanDirection::Rows,
    };
    write_json(dir.join("session.json"), &session.to_json())?;
    write_json(
        dir.join("ground_truth.json"),
        &ground_truth_to_json(&data.scan.ground_truth),
    )?;
    write_json(
        dir.join("views.json"),
        &views_to_json(&camera_board(), &data.camera_views),
    )?;
    let target = target_board();
    for (file, prefix, boards) in [
        ("laser_boards.json", "laser_board", &data.laser_boards),
        ("axis_board.json", "axis_board", &data.axis_boards),
    ] {
        let (doc, images) = boards_json(&target, boards, prefix);
        for (name, img) in images {
            write_atomic(dir.join(name), &write_pgm(img))?;
        }
        write_json(dir.join(file), &doc)?;
    }
    say(
        out,
        format_args!(
            "wrote {} frames and calibration inputs to {}\n",
            data.scan.frames.len(),
            dir.display()
        ),
    )
}

// ---- calibration stages --------------------------------------------------

fn calibrate(a: &CalibrateArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let (spec, views) = views_from_json(&read_json(&a.views)?)?;
    let result = calibrate_camera(&spec, &views)?;
    write_json(&a.out, &calibration_to_json(&result))?;
    let k = result.intrinsics;
    say(
        out,
        format_args!(
            "fx {:.6} fy {:.6} cx {:.6} cy {:.6} k1 {:.6e} k2 {:.6e} rms_px {:.6}\n",
            k.fx, k.fy, k.cx, k.cy, k.k1, k.k2, result.rms_reprojection
        ),
    )
}

struct LoadedBoards {
    spec: ChessboardSpec,
    boards: Vec<(ViewObservation, GrayImage)>,
}

fn load_boards(path: &Path) -> CliResult<LoadedBoards> {
    let doc = read_json(path)?;
    let obj = doc
        .as_object()
        .ok_or_else(|| CliError::invalid(format!("{}: expected a JSON object", path.display())))?;
    let spec = board_spec_from_json(
        obj.get("board")
            .ok_or_else(|| Error::MissingField("board".into()))?,
    )?;
    let base = path.parent().unwrap_or(Path::new(""));
    let entries = obj
        .get("boards")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::MissingField("boards".into()))?;
    let boards = entries
        .iter()
        .map(|e| {
            let corners = corners_from_json(
                e.get("corners")
                    .ok_or_else(|| Error::MissingField("corners".into()))?,
            )?;
            corners.validate(&spec)?;
            let image_path = e
                .get("image_path")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::MissingField("image_path".into()))?;
            let image = read_pgm(&read_file(base.join(image_path))?)?;
            Ok((corners, image))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(LoadedBoards { spec, boards })
}

fn shots(loaded: &LoadedBoards) -> Vec<BoardShot<'_>> {
    loaded
        .boards
        .iter()
        .map(|(corners, image)| BoardShot { corners, image })
        .collect()
}

fn fit_laser(a: &FitBoardsArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let k = calibration_from_json(&read_json(&a.intrinsics)?)?.intrinsics;
    let loaded = load_boards(&a.boards)?;
    let fit = stages::fit_laser(&k, &loaded.spec, &shots(&loaded), a.threshold)?;
    write_json(&a.out, &laser_plane_to_json(&fit))?;
    let n = fit.plane.normal();
    say(
        out,
        format_args!(
            "normal [{:.9}, {:.9}, {:.9}] offset {:.6} rms_mm {:.6}\n",
            n.x,
            n.y,
            n.z,
            fit.plane.offset(),
            fit.rms
        ),
    )
}

fn fit_axis(a: &FitBoardsArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let k = calibration_from_json(&read_json(&a.intrinsics)?)?.intrinsics;
    let loaded = load_boards(&a.boards)?;
    let fit = stages::fit_axis(&k, &loaded.spec, &shots(&loaded), a.threshold)?;
    write_json(&a.out, &axis_calibration_to_json(&fit))?;
    let (p, d) = (fit.axis.point(), fit.axis.direction());
    say(
        out,
        format_args!(
            "point [{:.6}, {:.6}, {:.6}] direction [{:.9}, {:.9}, {:.9}] rms_mm {:.6}\n",
            p.x, p.y, p.z, d.x, d.y, d.z, fit.rms
        ),
    )
}

// ---- reconstruction ------------------------------------------------------

fn reconstruct(a: &ReconstructArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let session = load_session(&a.session)?;
    let k = calibration_from_json(&read_json(&session.intrinsics_path)?)?.intrinsics;
    let plane = laser_plane_from_json(&read_json(&session.laser_plane_path)?)?.plane;
    let axis = axis_calibration_from_json(&read_json(&session.axis_path)?)?.axis;
    let images = session
        .frames
        .iter()
        .map(|f| read_pgm(&read_file(&f.image_path)?))
        .collect::<Result<Vec<_>, Error>>()?;
    let frames: Vec<(f64, &GrayImage)> = session
        .frames
        .iter()
        .zip(&images)
        .map(|(f, img)| (f.angle, img))
        .collect();
    let threshold = a.threshold.unwrap_or(session.threshold);
    let (cloud, dropped) =
        stages::reconstruct(&k, &plane, &axis, &frames, threshold, session.scan_direction)?;
    write_atomic(&a.out, &write_ply(&cloud, a.format.into()))?;
    say(
        out,
        format_args!(
            "{} points from {} frames ({} dropped) -> {}\n",
            cloud.len(),
            frames.len(),
            dropped,
            a.out.display()
        ),
    )
}

fn check_max_rms(max_rms: Option<f64>, rms: f64) -> CliResult<()> {
    match max_rms {
        Some(limit) if !(rms <= limit) => Err(CliError::numerical(format!(
            "cloud rms {rms:.6} mm exceeds --max-rms {limit} mm"
        ))),
        _ => Ok(()),
    }
}

fn validate_max_rms(max_rms: Option<f64>) -> CliResult<()> {
    match max_rms {
        Some(limit) if !(limit >= 0.0) => Err(CliError::invalid("--max-rms must be nonnegative")),
        _ => Ok(()),
    }
}

fn evaluate(a: &EvaluateArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    validate_max_rms(a.max_rms)?;
    let cloud = read_ply(&read_file(&a.cloud)?)?;
    let gt: GroundTruth = ground_truth_from_json(&read_json(&a.ground_truth)?)?;
    let err = evaluate_cloud(&cloud, &gt.surface, &gt.axis)?;
    say(
        out,
        format_args!(
            "points {}\nrms_mm {:.6}\nmax_mm {:.6}\n",
            err.n, err.rms_mm, err.max_mm
        ),
    )?;
    check_max_rms(a.max_rms, err.rms_mm)
}

// ---- pipeline ------------------------------------------------------------

fn capture_shots(boards: &[BoardCapture]) -> Vec<BoardShot<'_>> {
    boards
        .iter()
        .map(|b| BoardShot {
            corners: &b.corners,
            image: &b.image,
        })
        .collect()
}

/// Errors of every recovered quantity against ground truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineSummary {
    pub intrinsics_rel_error: f64,
    pub rms_reprojection_px: f64,
    pub plane_normal_error_deg: f64,
    pub plane_offset_error_mm: f64,
    pub axis_direction_error_deg: f64,
    pub axis_anchor_error_mm: f64,
    pub points: usize,
    pub dropped: usize,
    pub cloud_rms_mm: f64,
    pub cloud_max_mm: f64,
}

impl fmt::Display for PipelineSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, &str, String); 10] = [
            ("intrinsics", "max rel error", format!("{:.3e}", self.intrinsics_rel_error)),
            ("intrinsics", "rms reproj px", format!("{:.6}", self.rms_reprojection_px)),
            ("laser plane", "normal err deg", format!("{:.6}", self.plane_normal_error_deg)),
            ("laser plane", "offset err mm", format!("{:.6}", self.plane_offset_error_mm)),
            ("axis", "direction err deg", format!("{:.6}", self.axis_direction_error_deg)),
            ("axis", "anchor err mm", format!("{:.6}", self.axis_anchor_error_mm)),
            ("cloud", "points", self.points.to_string()),
            ("cloud", "dropped", self.dropped.to_string()),
            ("cloud", "rms mm", format!("{:.6}", self.cloud_rms_mm)),
            ("cloud", "max mm", format!("{:.6}", self.cloud_max_mm)),
        ];
        writeln!(f, "{:<12} {:<18} {:>12}", "stage", "metric", "value")?;
        for (stage, metric, value) in rows {
            writeln!(f, "{stage:<12} {metric:<18} {value:>12}")?;
        }
        Ok(())
    }
}

/// Runs every stage on a simulated rig and writes the artifacts into `out`.
pub fn run_pipeline(
    params: &SceneParams,
    threshold: u8,
    out: &Path,
    format: PlyFormat,
) -> CliResult<PipelineSummary> {
    let data = simulate_dataset(params)?;
    let truth = data.scan.ground_truth;
    let tk = truth.intrinsics;

    let calib = calibrate_camera(&camera_board(), &data.camera_views)?;
    let k = calib.intrinsics;
    let intrinsics_rel_error = [
        (k.fx, tk.fx),
        (k.fy, tk.fy),
        (k.cx, tk.cx),
        (k.cy, tk.cy),
    ]
    .iter()
    .map(|(a, b)| ((a - b) / b).abs())
    .fold(0.0, f64::max);

    let target = target_board();
    let laser = stages::fit_laser(&k, &target, &capture_shots(&data.laser_boards), threshold)?;
    let axis = stages::fit_axis(&k, &target, &capture_shots(&data.axis_boards), threshold)?;

    let frames: Vec<(f64, &GrayImage)> = data
        .scan
        .frames
        .iter()
        .map(|f| (f.angle, &f.image))
        .collect();
    let (cloud, dropped) = stages::reconstruct(
        &k,
        &laser.plane,
        &axis.axis,
        &frames,
        threshold,
        ScanDirection::Rows,
    )?;
    let err = evaluate_cloud(&cloud, &truth.surface, &truth.axis)?;

    create_dir(out)?;
    write_json(out.join("calibration.json"), &calibration_to_json(&calib))?;
    write_json(out.join("laser_plane.json"), &laser_plane_to_json(&laser))?;
    write_json(out.join("axis.json"), &axis_calibration_to_json(&axis))?;
    write_json(out.join("ground_truth.json"), &ground_truth_to_json(&truth))?;
    write_atomic(out.join("cloud.ply"), &write_ply(&cloud, format))?;

    Ok(PipelineSummary {
        intrinsics_rel_error,
        rms_reprojection_px: calib.rms_reprojection,
        plane_normal_error_deg: laser.plane.normal().angle_to(truth.plane.normal()).to_degrees(),
        plane_offset_error_mm: (laser.plane.offset() - truth.plane.offset()).abs(),
        axis_direction_error_deg: turntable_spin(&axis.axis)
            .angle_to(turntable_spin(&truth.axis))
            .to_degrees(),
        axis_anchor_error_mm: axis.axis.point().distance(truth.axis.point()),
        points: cloud.len(),
        dropped,
        cloud_rms_mm: err.rms_mm,
        cloud_max_mm: err.max_mm,
    })
}

fn pipeline(a: &PipelineArgs, out: &mut dyn std::io::Write) -> CliResult<()> {
    let params = a.scene.params()?;
    validate_max_rms(a.max_rms)?;
    let summary = run_pipeline(&params, a.scene.threshold, &a.out, a.format.into())?;
    say(out, format_args!("{summary}"))?;
    check_max_rms(a.max_rms, summary.cloud_rms_mm)
}
