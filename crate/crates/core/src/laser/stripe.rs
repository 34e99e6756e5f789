use rayon::prelude::*;

use crate::calibration::PixelPoint;
use crate::error::{Error, Result};

use super::GrayImage;

/// Which image lines are scanned for the stripe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScanDirection {
    /// One sample per row; suits a near-vertical stripe.
    #[default]
    Rows,
    /// One sample per column; suits a near-horizontal stripe.
    Columns,
}

/// Subpixel stripe centers, at most one per scanned line, ordered by line index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StripeExtraction {
    pub points: Vec<PixelPoint>,
    pub threshold_used: u8,
}

/// Thresholded centroid of the brightest above-threshold run in `line`.
///
/// Runs are compared by summed intensity; on a tie the earliest run wins.
/// Centroid weights are `intensity − threshold + 1`.
pub fn line_centroid(line: &[u8], threshold: u8) -> Option<f64> {
    let mut best: Option<(u64, usize, usize)> = None;
    let mut i = 0;
    while i < line.len() {
        if line[i] < threshold {
            i += 1;
            continue;
        }
        let start = i;
        let mut total = 0u64;
        while i < line.len() && line[i] >= threshold {
            total += u64::from(line[i]);
            i += 1;
        }
        if best.is_none_or(|(t, _, _)| total > t) {
            best = Some((total, start, i));
        }
    }
    let (_, start, end) = best?;
    let (mut weight_sum, mut moment) = (0.0, 0.0);
    for (x, &value) in line.iter().enumerate().take(end).skip(start) {
        let w = f64::from(value) - f64::from(threshold) + 1.0;
        weight_sum += w;
        moment += w * x as f64;
    }
    Some(moment / weight_sum)
}

/// Row-wise stripe extraction; see [`extract_laser_points_along`].
pub fn extract_laser_points(img: &GrayImage, threshold: u8) -> Result<StripeExtraction> {
    extract_laser_points_along(img, threshold, ScanDirection::Rows)
}

/// Locates the laser stripe on every scan line that has pixels at or above
/// `threshold`. Lines without any are skipped.
pub fn extract_laser_points_along(
    img: &GrayImage,
    threshold: u8,
    direction: ScanDirection,
) -> Result<StripeExtraction> {
    if threshold == 0 || threshold == 255 {
        return Err(Error::InvalidParameter(format!(
            "threshold must be in 1..=254, got {threshold}"
        )));
    }
    let points = match direction {
        ScanDirection::Rows => (0..img.height())
            .into_par_iter()
            .filter_map(|y| {
                line_centroid(img.row(y), threshold).map(|u| PixelPoint::new(u, y as f64))
            })
            .collect(),
        ScanDirection::Columns => (0..img.width())
            .into_par_iter()
            .filter_map(|x| {
                line_centroid(&img.column(x), threshold).map(|v| PixelPoint::new(x as f64, v))
            })
            .collect(),
    };
    Ok(StripeExtraction {
        points,
        threshold_used: threshold,
    })
}
