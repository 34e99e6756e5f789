use std::f64::consts::{FRAC_PI_2, PI};

use laserforge_core::geometry::{
    axis_angle_matrix, fit_line, fit_plane, ray_plane_intersect, rotate_about_axis, Mat3,
};
use laserforge_core::{Error, Line3, Plane, Point3, RigidTransform, Vec3};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(gauss(rng), gauss(rng), gauss(rng));
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

fn ssd(plane: &Plane, pts: &[Point3]) -> f64 {
    pts.iter().map(|p| plane.signed_distance(*p).powi(2)).sum()
}

/// Sum of squared orthogonal distances to `n·p = d` for an unnormalized
/// `n`.
fn ssd_raw(n: Vec3, d: f64, pts: &[Point3]) -> f64 {
    let len = n.norm();
    pts.iter().map(|p| ((n.dot(*p) - d) / len).powi(2)).sum()
}

#[test]
fn ray_plane_examples() {
    let z5 = Plane::new(Vec3::Z, 5.0).unwrap();
    assert_eq!(ray_plane_intersect(Vec3::ZERO, Vec3::Z, &z5).unwrap(), Vec3::new(0.0, 0.0, 5.0));
    let d = Vec3::new(1.0, 1.0, 1.0).normalized().unwrap();
    let p = ray_plane_intersect(Vec3::ZERO, d, &Plane::new(Vec3::Z, 3.0).unwrap()).unwrap();
    assert!(p.distance(Vec3::new(3.0, 3.0, 3.0)) < 1e-12);
    assert!(matches!(ray_plane_intersect(Vec3::ZERO, Vec3::X, &z5), Err(Error::Parallel)));
    assert!(matches!(
        ray_plane_intersect(Vec3::ZERO, -Vec3::Z, &z5),
        Err(Error::BehindOrigin(_))
    ));
}

#[test]
fn plane_fit_examples() {
    let square = [
        Vec3::new(0.0, 0.0, 5.0),
        Vec3::new(1.0, 0.0, 5.0),
        Vec3::new(0.0, 1.0, 5.0),
        Vec3::new(1.0, 1.0, 5.0),
    ];
    let fit = fit_plane(&square).unwrap();
    assert!(fit.plane.normal().distance(Vec3::Z) < 1e-12);
    assert!((fit.plane.offset() - 5.0).abs() < 1e-12);
    assert!(fit.rms_distance < 1e-12);

    let fit = fit_plane(&[Vec3::X, Vec3::Y, Vec3::Z]).unwrap();
    let s = 1.0 / 3f64.sqrt();
    assert!(fit.plane.normal().distance(Vec3::new(s, s, s)) < 1e-12);
    assert!((fit.plane.offset() - s).abs() < 1e-12);

    let collinear = [Vec3::ZERO, Vec3::X, Vec3::X * 2.0];
    assert!(matches!(fit_plane(&collinear), Err(Error::Degenerate(_))));
    assert!(matches!(fit_plane(&[Vec3::ZERO, Vec3::X]), Err(Error::Degenerate(_))));
}

/// Least squares z = αx + βy + γ through 3×3 normal equations (Cramer).
fn regression_oracle(pts: &[Point3]) -> (f64, f64, f64) {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for p in pts {
        let row = [p.x, p.y, 1.0];
        for i in 0..3 {
            r[i] += row[i] * p.z;
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
        }
    }
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    let solve = |c: usize| {
        let mut mc = m;
        for i in 0..3 {
            mc[i][c] = r[i];
        }
        det(&mc) / d
    };
    (solve(0), solve(1), solve(2))
}

#[test]
fn noisy_plane_beats_regression_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let pts: Vec<Point3> = (0..200)
        .map(|_| {
            let (x, y) = (rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
            Vec3::new(x, y, 2.0 * x - y + 3.0 + 0.01 * gauss(&mut rng))
        })
        .collect();
    let fit = fit_plane(&pts).unwrap();
    let n = fit.plane.normal();
    // Recover z = αx + βy + γ from n·p = d.
    let (alpha, beta, gamma) = (-n.x / n.z, -n.y / n.z, fit.plane.offset() / n.z);
    assert!((alpha - 2.0).abs() < 5e-3 && (beta + 1.0).abs() < 5e-3 && (gamma - 3.0).abs() < 5e-3);

    let truth_ssd = ssd_raw(Vec3::new(2.0, -1.0, -1.0), -3.0, &pts);
    assert!(ssd(&fit.plane, &pts) <= truth_ssd);
    let (a, b, c) = regression_oracle(&pts);
    assert!(ssd(&fit.plane, &pts) <= ssd_raw(Vec3::new(a, b, -1.0), -c, &pts) + 1e-9);
}

/// The 26 perturbation directions: every nonzero vector in {−1, 0, 1}³.
fn perturbations() -> Vec<Vec3> {
    let mut out = Vec::new();
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                if (i, j, k) != (0, 0, 0) {
                    out.push(Vec3::new(i as f64, j as f64, k as f64));
                }
            }
        }
    }
    out
}

#[test]
fn plane_fit_is_locally_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    assert_eq!(perturbations().len(), 26);
    for _ in 0..20 {
        let n = random_unit(&mut rng);
        let d = rng.gen_range(0.0..50.0);
        let (e1, e2) = {
            let h = if n.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
            let e1 = n.cross(h).normalized().unwrap();
            (e1, n.cross(e1))
        };
        let pts: Vec<Point3> = (0..60)
            .map(|_| {
                n * (d + 0.3 * gauss(&mut rng))
                    + e1 * rng.gen_range(-20.0..20.0)
                    + e2 * rng.gen_range(-20.0..20.0)
            })
            .collect();
        let fit = fit_plane(&pts).unwrap();
        let best = ssd(&fit.plane, &pts);
        for delta in perturbations() {
            let pn = (fit.plane.normal() + delta * 1e-3).normalized().unwrap();
            assert!(ssd_raw(pn, fit.plane.offset(), &pts) >= best - 1e-9);
        }
        for dd in [-1e-3, 1e-3] {
            assert!(ssd_raw(fit.plane.normal(), fit.plane.offset() + dd, &pts) >= best - 1e-9);
        }
    }
}

#[test]
fn plane_fit_follows_rigid_motion_and_ignores_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut pts: Vec<Point3> = (0..50)
        .map(|_| Vec3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 0.1 * gauss(&mut rng) + 7.0))
        .collect();
    let fit = fit_plane(&pts).unwrap();
    let motion = RigidTransform::new(axis_angle_matrix(random_unit(&mut rng), 0.7), Vec3::new(3.0, -2.0, 40.0));
    let moved: Vec<Point3> = pts.iter().map(|p| motion.apply(*p)).collect();
    let moved_fit = fit_plane(&moved).unwrap();
    let expected = fit.plane.transformed(&motion);
    assert!(moved_fit.plane.normal().distance(expected.normal()) < 1e-9);
    assert!((moved_fit.plane.offset() - expected.offset()).abs() < 1e-9);

    pts.shuffle(&mut rng);
    let shuffled = fit_plane(&pts).unwrap();
    assert!(shuffled.plane.normal().distance(fit.plane.normal()) < 1e-12);
    assert!((shuffled.rms_distance - fit.rms_distance).abs() < 1e-12);
}

#[test]
fn line_fit_examples() {
    let fit = fit_line(&[Vec3::ZERO, Vec3::Z, Vec3::Z * 2.0]).unwrap();
    assert!(fit.line.direction().distance(Vec3::Z) < 1e-12);
    assert!(fit.line.point().norm() < 1e-12);
    assert!(fit.rms_distance < 1e-12);

    let pts = [Vec3::new(1.0, 1.0, 0.0), Vec3::new(2.0, 2.0, 0.0), Vec3::new(3.0, 3.0, 0.0)];
    let fit = fit_line(&pts).unwrap();
    let s = 1.0 / 2f64.sqrt();
    assert!(fit.line.direction().distance(Vec3::new(s, s, 0.0)) < 1e-12);
    assert!(fit.rms_distance < 1e-12);

    assert!(matches!(fit_line(&[Vec3::X, Vec3::X]), Err(Error::Degenerate(_))));
}

#[test]
fn noisy_line_against_generating_line() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let dir = Vec3::new(1.0, 2.0, 2.0) / 3.0;
    let truth = Line3::new(Vec3::new(5.0, 0.0, 0.0), dir).unwrap();
    let mut pts: Vec<Point3> = (0..100)
        .map(|_| {
            let t = rng.gen_range(-30.0..30.0);
            truth.at(t) + Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)) * 0.01
        })
        .collect();
    let fit = fit_line(&pts).unwrap();
    assert!(fit.line.direction().angle_to(dir) <= 0.01);
    let truth_rms = (pts.iter().map(|p| truth.distance(*p).powi(2)).sum::<f64>() / 100.0).sqrt();
    assert!(fit.rms_distance <= truth_rms);

    pts.reverse();
    let again = fit_line(&pts).unwrap();
    assert!(again.line.direction().distance(fit.line.direction()) < 1e-12);
}

// ---- rotation oracles ----------------------------------------------------

type M3 = [[f64; 3]; 3];

fn mul(a: &M3, b: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn transpose(a: &M3) -> M3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn rot_x(t: f64) -> M3 {
    [[1.0, 0.0, 0.0], [0.0, t.cos(), -t.sin()], [0.0, t.sin(), t.cos()]]
}

fn rot_y(t: f64) -> M3 {
    [[t.cos(), 0.0, t.sin()], [0.0, 1.0, 0.0], [-t.sin(), 0.0, t.cos()]]
}

fn rot_z(t: f64) -> M3 {
    [[t.cos(), -t.sin(), 0.0], [t.sin(), t.cos(), 0.0], [0.0, 0.0, 1.0]]
}

/// Rotation about `u` built in three steps: turn `u` onto the X axis,
/// rotate about X, turn back.
fn align_to_x_oracle(u: Vec3, angle: f64) -> M3 {
    let phi = u.y.atan2(u.x);
    let psi = u.z.atan2(u.x.hypot(u.y));
    let align = mul(&rot_y(psi), &rot_z(-phi));
    mul(&transpose(&align), &mul(&rot_x(angle), &align))
}

fn quat_mul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

/// `q · p · q*` with `q = (cos θ/2, sin θ/2 · u)`.
fn quaternion_rotate(p: Vec3, u: Vec3, angle: f64) -> Vec3 {
    let (s, c) = (angle / 2.0).sin_cos();
    let q = [c, s * u.x, s * u.y, s * u.z];
    let conj = [q[0], -q[1], -q[2], -q[3]];
    let r = quat_mul(quat_mul(q, [0.0, p.x, p.y, p.z]), conj);
    Vec3::new(r[1], r[2], r[3])
}

fn mat_diff(a: &Mat3, b: &M3) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((a.0[i][j] - b[i][j]).abs());
        }
    }
    worst
}

#[test]
fn rodrigues_examples() {
    let r = axis_angle_matrix(Vec3::Z, FRAC_PI_2);
    assert!(mat_diff(&r, &[[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]) < 1e-15);
    let id = axis_angle_matrix(Vec3::new(0.6, 0.0, 0.8), 0.0);
    assert!(mat_diff(&id, &Mat3::IDENTITY.0) == 0.0);
}

#[test]
fn rodrigues_matches_align_to_x_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..500 {
        let u = random_unit(&mut rng);
        let angle = rng.gen_range(-PI..PI);
        let r = axis_angle_matrix(u, angle);
        assert!(mat_diff(&r, &align_to_x_oracle(u, angle)) < 1e-12);
        assert!((r.determinant() - 1.0).abs() < 1e-12);
        assert!((r * r.transpose()).max_abs_diff(&Mat3::IDENTITY) < 1e-12);
    }
}

#[test]
fn rotate_about_axis_examples() {
    let z_axis = Line3::new(Vec3::ZERO, Vec3::Z).unwrap();
    assert!(rotate_about_axis(Vec3::X, &z_axis, FRAC_PI_2).distance(Vec3::Y) < 1e-15);
    let offset = Line3::new(Vec3::X, Vec3::Z).unwrap();
    assert!(rotate_about_axis(Vec3::new(2.0, 0.0, 0.0), &offset, PI).norm() < 1e-15);
}

#[test]
fn rotate_about_axis_matches_quaternions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..1000 {
        let axis = Line3::new(
            Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)),
            random_unit(&mut rng),
        )
        .unwrap();
        let p = Vec3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
        let angle = rng.gen_range(-2.0 * PI..2.0 * PI);
        let a = axis.point();
        let oracle = a + quaternion_rotate(p - a, axis.direction(), angle);
        let got = rotate_about_axis(p, &axis, angle);
        assert!(got.distance(oracle) < 1e-10);
        assert!(rotate_about_axis(got, &axis, -angle).distance(p) < 1e-10);
        assert!((axis.distance(got) - axis.distance(p)).abs() < 1e-9);
        assert!((axis.axial_coordinate(got) - axis.axial_coordinate(p)).abs() < 1e-9);
        let on_axis = axis.at(rng.gen_range(-100.0..100.0));
        assert!(rotate_about_axis(on_axis, &axis, angle).distance(on_axis) < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rotation_preserves_distances(
        seed in any::<u64>(),
        angle in -10.0f64..10.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let axis = Line3::new(Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)) * 20.0, random_unit(&mut rng)).unwrap();
        let p = Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)) * 30.0;
        let q = Vec3::new(gauss(&mut rng), gauss(&mut rng), gauss(&mut rng)) * 30.0;
        let (rp, rq) = (rotate_about_axis(p, &axis, angle), rotate_about_axis(q, &axis, angle));
        prop_assert!((rp.distance(rq) - p.distance(q)).abs() < 1e-9);
    }

    #[test]
    fn canonical_forms_hold(nx in -1.0f64..1.0, ny in -1.0f64..1.0, nz in -1.0f64..1.0, d in -100.0f64..100.0) {
        let n = Vec3::new(nx, ny, nz);
        prop_assume!(n.norm() > 1e-3);
        let plane = Plane::new(n, d).unwrap();
        prop_assert!((plane.normal().norm() - 1.0).abs() < 1e-12);
        prop_assert!(plane.offset() >= 0.0);
        let line = Line3::new(n * d, Vec3::new(ny, nz, nx).cross(n)).unwrap_or(Line3::new(Vec3::ZERO, n).unwrap());
        prop_assert!((line.direction().norm() - 1.0).abs() < 1e-12);
        prop_assert!(line.point().dot(line.direction()).abs() < 1e-9);
    }
}
