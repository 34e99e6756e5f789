//! Points, planes, lines and rigid motions, plus the fits and rotations
//! the scanner is built on.

mod fit;
mod primitives;
mod rotation;
mod vector;

pub use fit::{centroid, fit_line, fit_plane, LineFit, PlaneFit, DEGENERACY_TOLERANCE};
pub use primitives::{ray_plane_intersect, Line3, Plane, RigidTransform, PARALLEL_TOLERANCE};
pub use rotation::{
    axis_angle_matrix, nearest_rotation, rotate_about_axis, rotation_from_vector,
    rotation_to_vector, turntable_spin,
};
pub use vector::{Mat3, Point3, Vec3};
