use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::calibration::{
    board_object_points, project_point, ChessboardSpec, PixelPoint, ViewObservation,
};
use crate::error::{Error, Result};
use crate::geometry::{Point3, RigidTransform};
use crate::laser::{GrayImage, StripeExtraction};

use super::RigConfig;

/// Gray levels of pixel noise per pixel of corner noise σ.
pub const INTENSITY_NOISE_PER_PX: f64 = 4.0;

/// Allowed stripe widths (Gaussian σ, px).
pub const STRIPE_SIGMA_RANGE: (f64, f64) = (0.5, 3.0);

fn in_frame(rig: &RigConfig, p: PixelPoint) -> bool {
    let (w, h) = rig.image_size;
    p.u >= 0.0 && p.v >= 0.0 && p.u <= (w - 1) as f64 && p.v <= (h - 1) as f64
}

fn gaussian(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("positive finite sigma"))
}

/// Projects every board corner for every pose and perturbs each coordinate
/// with seeded Gaussian noise of σ = `rig.noise_sigma_px`.
pub fn render_corner_observations(
    rig: &RigConfig,
    spec: &ChessboardSpec,
    poses: &[RigidTransform],
) -> Result<Vec<ViewObservation>> {
    rig.validate()?;
    spec.validate()?;
    let object = board_object_points(spec);
    let noise = gaussian(rig.noise_sigma_px);
    let mut rng = ChaCha8Rng::seed_from_u64(rig.seed);
    poses
        .iter()
        .enumerate()
        .map(|(view, pose)| {
            let corners = object
                .iter()
                .enumerate()
                .map(|(index, p)| {
                    let mut px = project_point(&rig.intrinsics, pose.apply(*p))?;
                    if !in_frame(rig, px) {
                        return Err(Error::OutOfFrame { view, index });
                    }
                    if let Some(n) = &noise {
                        px.u += n.sample(&mut rng);
                        px.v += n.sample(&mut rng);
                    }
                    Ok(px)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ViewObservation { corners })
        })
        .collect()
}

/// Horizontal crossings of the projected polyline with integer image rows.
///
/// Each segment covers rows in the half-open range between its endpoints so
/// interior vertices are not counted twice; the final vertex is included
/// when it falls exactly on a row.
fn row_crossings(projected: &[PixelPoint]) -> BTreeMap<usize, Vec<f64>> {
    let mut rows: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for seg in projected.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if a.v == b.v {
            continue;
        }
        let (lo, hi) = if a.v < b.v { (a.v, b.v) } else { (b.v, a.v) };
        let mut r = lo.ceil();
        while r < hi {
            let t = (r - a.v) / (b.v - a.v);
            rows.entry(r as usize).or_default().push(a.u + t * (b.u - a.u));
            r += 1.0;
        }
    }
    if let Some(last) = projected.last() {
        if last.v.fract() == 0.0 {
            rows.entry(last.v as usize).or_default().push(last.u);
        }
    }
    rows
}

fn project_curve(rig: &RigConfig, curve: &[Point3], view: usize) -> Result<Vec<PixelPoint>> {
    curve
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let px = project_point(&rig.intrinsics, *p)?;
            if in_frame(rig, px) {
                Ok(px)
            } else {
                Err(Error::OutOfFrame { view, index })
            }
        })
        .collect()
}

/// The exact stripe an ideal extractor would report for `curve`: one
/// (distorted) pixel position per crossed row, without rendering.
pub fn analytic_stripe(rig: &RigConfig, curve: &[Point3]) -> Result<StripeExtraction> {
    let projected = project_curve(rig, curve, 0)?;
    let points = row_crossings(&projected)
        .into_iter()
        .map(|(row, us)| PixelPoint::new(us[0], row as f64))
        .collect();
    Ok(StripeExtraction {
        points,
        threshold_used: 0,
    })
}

/// Renders the laser stripe with noise drawn from the `rig.seed` stream.
pub fn render_laser_image(
    rig: &RigConfig,
    curve: &[Point3],
    stripe_sigma_px: f64,
    peak: u8,
) -> Result<GrayImage> {
    render_laser_image_stream(rig, curve, stripe_sigma_px, peak, rig.seed, 0)
}

/// Renders a dark frame with a Gaussian cross-row profile at every row the
/// projected curve crosses, then adds seeded intensity noise of
/// σ = 4 · `rig.noise_sigma_px` gray levels.
///
/// `stream` seeds the noise; `view` labels out-of-frame errors.
pub fn render_laser_image_stream(
    rig: &RigConfig,
    curve: &[Point3],
    stripe_sigma_px: f64,
    peak: u8,
    stream: u64,
    view: usize,
) -> Result<GrayImage> {
    rig.validate()?;
    let (lo, hi) = STRIPE_SIGMA_RANGE;
    if !(lo..=hi).contains(&stripe_sigma_px) {
        return Err(Error::InvalidParameter(format!(
            "stripe sigma {stripe_sigma_px} outside [{lo}, {hi}]"
        )));
    }
    let (w, h) = rig.image_size;
    let projected = project_curve(rig, curve, view)?;
    let crossings = row_crossings(&projected);

    let mut intensity = vec![0.0f64; w * h];
    let reach = (5.0 * stripe_sigma_px).ceil();
    let two_var = 2.0 * stripe_sigma_px * stripe_sigma_px;
    for (row, us) in &crossings {
        let line = &mut intensity[row * w..(row + 1) * w];
        for &u in us {
            let first = (u - reach).floor().max(0.0) as usize;
            let last = ((u + reach).ceil() as usize).min(w - 1);
            for (x, value) in line.iter_mut().enumerate().take(last + 1).skip(first) {
                let d = x as f64 - u;
                let v = f64::from(peak) * (-d * d / two_var).exp();
                *value = value.max(v);
            }
        }
    }

    if let Some(noise) = gaussian(rig.noise_sigma_px * INTENSITY_NOISE_PER_PX) {
        let mut rng = ChaCha8Rng::seed_from_u64(stream);
        for v in intensity.iter_mut() {
            *v += noise.sample(&mut rng);
        }
    }
    let pixels = intensity
        .into_iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    GrayImage::from_pixels(w, h, pixels)
}
