//! Line-laser turntable 3D scanning.
//!
//! The pipeline runs in five stages:
//!
//! 1. [`calibration`]: camera intrinsics, distortion and board poses from
//!    chessboard corners.
//! 2. [`laser`]: stripe extraction, then the laser sheet and turntable axis
//!    from stripes lifted onto calibrated boards.
//! 3. [`reconstruction`]: each stripe pixel's ray is intersected with the
//!    sheet, and frames are merged by undoing the turntable rotation.
//! 4. [`simulator`]: a virtual rig with exact ground truth for every stage.
//! 5. [`io`]: PLY, PGM and JSON artifacts.
//!
//! [`numerics`] and [`geometry`] hold the shared linear algebra and fits.

// `!(x > 0.0)` is deliberate: NaN must take the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod error;
pub mod geometry;
pub mod io;
pub mod laser;
pub mod numerics;
pub mod reconstruction;
pub mod simulator;

pub use calibration::{CameraIntrinsics, ChessboardSpec, PixelPoint, ViewObservation};
pub use error::{Error, Result};
pub use geometry::{Line3, Plane, Point3, RigidTransform, Vec3};
pub use laser::{GrayImage, StripeExtraction};
pub use reconstruction::PointCloud;
