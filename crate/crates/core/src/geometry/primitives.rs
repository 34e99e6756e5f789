use crate::error::{Error, Result};

use super::{Mat3, Point3, Vec3};

/// Below this `|normal · direction|` a ray counts as parallel to a plane.
pub const PARALLEL_TOLERANCE: f64 = 1e-9;

/// The plane `{p : normal · p = offset}` with a unit normal and `offset ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    normal: Vec3,
    offset: f64,
}

impl Plane {
    /// Normalizes `(normal, offset)` to the canonical form: unit normal,
    /// nonnegative offset, and for planes through the origin a normal whose
    /// first nonzero component is positive.
    pub fn new(normal: Vec3, offset: f64) -> Result<Self> {
        if !normal.is_finite() || !offset.is_finite() {
            return Err(Error::NonFinite("plane"));
        }
        let len = normal.norm();
        if len < 1e-300 {
            return Err(Error::Degenerate("plane normal is zero"));
        }
        let (mut normal, mut offset) = (normal / len, offset / len);
        if offset.abs() <= 1e-12 {
            offset = 0.0;
            normal = normal.canonical_sign();
        } else if offset < 0.0 {
            normal = -normal;
            offset = -offset;
        }
        Ok(Self { normal, offset })
    }

    /// Plane through `point` with the given normal direction.
    pub fn through_point(normal: Vec3, point: Point3) -> Result<Self> {
        let n = normal.normalized().ok_or(Error::Degenerate("plane normal is zero"))?;
        Self::new(n, n.dot(point))
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// The plane after applying `transform` to every point on it.
    pub fn transformed(&self, transform: &RigidTransform) -> Plane {
        let n = transform.rotation * self.normal;
        let anchor = transform.apply(self.normal * self.offset);
        Plane::new(n, n.dot(anchor)).expect("rigid motion keeps the plane valid")
    }
}

/// An infinite line, anchored at its point closest to the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line3 {
    point: Point3,
    direction: Vec3,
}

impl Line3 {
    /// Builds the canonical form of the line through `through` along `direction`.
    pub fn new(through: Point3, direction: Vec3) -> Result<Self> {
        if !through.is_finite() || !direction.is_finite() {
            return Err(Error::NonFinite("line"));
        }
        let d = direction
            .normalized()
            .ok_or(Error::Degenerate("line direction is zero"))?
            .canonical_sign();
        let point = through - d * through.dot(d);
        Ok(Self { point, direction: d })
    }

    pub fn point(&self) -> Point3 {
        self.point
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    /// Coordinate of the foot of `p` along the line, measured from the anchor.
    pub fn axial_coordinate(&self, p: Point3) -> f64 {
        (p - self.point).dot(self.direction)
    }

    pub fn distance(&self, p: Point3) -> f64 {
        let rel = p - self.point;
        (rel - self.direction * rel.dot(self.direction)).norm()
    }

    pub fn at(&self, s: f64) -> Point3 {
        self.point + self.direction * s
    }
}

/// A proper rigid motion `p ↦ rotation · p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, p: Point3) -> Point3 {
        self.rotation * p + self.translation
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform::new(rt, -(rt * self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }
}

/// Intersects the ray `origin + t·direction`, `t > 0`, with `plane`.
pub fn ray_plane_intersect(origin: Point3, direction: Vec3, plane: &Plane) -> Result<Point3> {
    let denom = plane.normal.dot(direction);
    if denom.abs() < PARALLEL_TOLERANCE {
        return Err(Error::Parallel);
    }
    let t = (plane.offset - plane.normal.dot(origin)) / denom;
    if !(t > 0.0) {
        return Err(Error::BehindOrigin(t));
    }
    Ok(origin + direction * t)
}
