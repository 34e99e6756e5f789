use crate::error::{Error, Result};
use crate::geometry::{Point3, Vec3};

/// Depth below which a camera-frame point cannot be projected.
pub const MIN_DEPTH: f64 = 1e-9;

const UNDISTORT_ITERATIONS: usize = 10;

/// Pinhole intrinsics with two-term radial distortion and zero skew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub k1: f64,
    pub k2: f64,
}

impl CameraIntrinsics {
    /// Distortion-free intrinsics.
    pub fn pinhole(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        Self {
            fx,
            fy,
            cx,
            cy,
            k1: 0.0,
            k2: 0.0,
        }
    }

    pub fn with_distortion(mut self, k1: f64, k2: f64) -> Self {
        self.k1 = k1;
        self.k2 = k2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.fx, self.fy, self.cx, self.cy, self.k1, self.k2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("intrinsics"));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidParameter(
                "focal lengths must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn has_distortion(&self) -> bool {
        self.k1 != 0.0 || self.k2 != 0.0
    }

    /// Radial scale factor `1 + k1·r² + k2·r⁴`.
    fn radial(&self, r2: f64) -> f64 {
        1.0 + self.k1 * r2 + self.k2 * r2 * r2
    }

    /// Applies radial distortion to normalized image coordinates.
    pub fn distort_normalized(&self, x: f64, y: f64) -> (f64, f64) {
        let f = self.radial(x * x + y * y);
        (x * f, y * f)
    }

    pub fn normalized_to_pixel(&self, x: f64, y: f64) -> PixelPoint {
        PixelPoint::new(self.fx * x + self.cx, self.fy * y + self.cy)
    }

    pub fn pixel_to_normalized(&self, p: PixelPoint) -> (f64, f64) {
        ((p.u - self.cx) / self.fx, (p.v - self.cy) / self.fy)
    }
}

/// Image position in pixels. `u` grows rightward, `v` downward, and pixel
/// centers sit on integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PixelPoint {
    pub u: f64,
    pub v: f64,
}

impl PixelPoint {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn distance(self, o: PixelPoint) -> f64 {
        (self.u - o.u).hypot(self.v - o.v)
    }
}

/// A half-line from `origin` along the unit vector `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub direction: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction * t
    }
}

/// Projects a camera-frame point to (distorted) pixel coordinates.
pub fn project_point(k: &CameraIntrinsics, p: Point3) -> Result<PixelPoint> {
    if !p.is_finite() {
        return Err(Error::NonFinite("projected point"));
    }
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera(p.z));
    }
    let (x, y) = k.distort_normalized(p.x / p.z, p.y / p.z);
    Ok(k.normalized_to_pixel(x, y))
}

/// Maps an observed (distorted) pixel to where an ideal pinhole camera with
/// the same `fx, fy, cx, cy` would have seen it.
///
/// The radial model only rescales the distance from the principal point, so
/// the inversion is a scalar problem in that distance: ten fixed-point
/// iterations followed by Newton polishing.
pub fn undistort_pixel(k: &CameraIntrinsics, p: PixelPoint) -> Result<PixelPoint> {
    if !k.has_distortion() {
        return Ok(p);
    }
    let (xd, yd) = k.pixel_to_normalized(p);
    let rd = xd.hypot(yd);
    if rd == 0.0 {
        return Ok(p);
    }
    // 10× the image half-diagonal, taking the principal point as image center.
    let limit = 10.0 * k.cx.hypot(k.cy).max(1.0) / k.fx.min(k.fy);
    let mut r = rd;
    for _ in 0..UNDISTORT_ITERATIONS {
        r = rd / k.radial(r * r);
        if !r.is_finite() || r.abs() > limit {
            return Err(Error::Diverged);
        }
    }
    for _ in 0..3 {
        let r2 = r * r;
        let g = r * k.radial(r2) - rd;
        let dg = 1.0 + 3.0 * k.k1 * r2 + 5.0 * k.k2 * r2 * r2;
        if dg <= 0.0 || g == 0.0 {
            break;
        }
        r -= g / dg;
    }
    if !r.is_finite() || r.abs() > limit {
        return Err(Error::Diverged);
    }
    let s = r / rd;
    Ok(k.normalized_to_pixel(xd * s, yd * s))
}

/// Back-projects an undistorted pixel to the camera ray through it.
pub fn pixel_to_ray(k: &CameraIntrinsics, p: PixelPoint) -> Ray {
    let (x, y) = k.pixel_to_normalized(p);
    let direction = Vec3::new(x, y, 1.0)
        .normalized()
        .expect("z component is 1");
    Ray {
        origin: Vec3::ZERO,
        direction,
    }
}
