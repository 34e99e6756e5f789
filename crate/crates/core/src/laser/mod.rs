//! Laser stripe extraction and the two laser-driven calibrations: the
//! laser sheet and the turntable axis.

mod calibrate;
mod image;
mod stripe;

pub use calibrate::{
    calibrate_laser_plane, calibrate_rotation_axis, lift_stripe_to_plane, AxisCalibration,
    LaserPlaneCalibration,
};
pub use image::GrayImage;
pub use stripe::{
    extract_laser_points, extract_laser_points_along, line_centroid, ScanDirection,
    StripeExtraction,
};
