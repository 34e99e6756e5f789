use laserforge_core::numerics::{
    gauss_newton, solve_least_squares, svd_small, GaussNewtonOptions, MatrixMN,
};
use laserforge_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> MatrixMN {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    MatrixMN::from_row_major(rows, cols, data).unwrap()
}

fn gram(a: &MatrixMN) -> Vec<Vec<f64>> {
    let n = a.cols();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..a.rows()).map(|r| a[(r, i)] * a[(r, j)]).sum())
                .collect()
        })
        .collect()
}

/// Roots of the 2×2 characteristic polynomial, descending.
fn eig2(m: &[Vec<f64>]) -> Vec<f64> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    vec![tr / 2.0 + disc, tr / 2.0 - disc]
}

/// Roots of the 3×3 characteristic cubic by the trigonometric method,
/// descending.
fn eig3(m: &[Vec<f64>]) -> Vec<f64> {
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return vec![q; 3];
    }
    let b: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| (m[i][j] - if i == j { q } else { 0.0 }) / p)
                .collect()
        })
        .collect();
    let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
        - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let phi = (det_b / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let l1 = q + 2.0 * p * phi.cos();
    let l3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    vec![l1, 3.0 * q - l1 - l3, l3]
}

/// Number of eigenvalues of symmetric `m` below `x`, from the signs of the
/// LDLᵀ pivots of `m − xI` (Sylvester's law of inertia).
fn count_below(m: &[Vec<f64>], x: f64) -> usize {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= x;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = a[k][k];
        if pivot == 0.0 {
            pivot = -1e-300;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            for j in k + 1..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    negatives
}

/// Eigenvalues of a symmetric PSD matrix by inertia bisection, descending.
fn eig_bisect(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let hi0 = m
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1.0;
    (0..n)
        .map(|k| {
            // The (k+1)-th largest eigenvalue is the smallest x with at least
            // n − k eigenvalues below it.
            let (mut lo, mut hi) = (-1.0, hi0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if count_below(m, mid) >= n - k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

fn oracle_singular_values(a: &MatrixMN) -> Vec<f64> {
    let g = gram(a);
    let eig = match g.len() {
        2 => eig2(&g),
        3 => eig3(&g),
        _ => eig_bisect(&g),
    };
    eig.into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

fn check_factorization(a: &MatrixMN, tol: f64) {
    let svd = svd_small(a).unwrap();
    let recon = svd.reconstruct();
    let err = recon.sub(a).unwrap().frobenius_norm();
    assert!(err <= tol * a.frobenius_norm().max(1.0), "reconstruction error {err}");
    for w in svd.sigma.windows(2) {
        assert!(w[0] >= w[1]);
    }
    let n = a.cols();
    for (m, label) in [(&svd.u, "u"), (&svd.v, "v")] {
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..m.rows()).map(|r| m[(r, i)] * m[(r, j)]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-9, "{label} not orthonormal");
            }
        }
    }
    for j in 0..n {
        let first = (0..n).map(|i| svd.v[(i, j)]).find(|c| c.abs() > 1e-12);
        assert!(first.is_none_or(|c| c > 0.0), "sign convention");
    }
}

#[test]
fn tall_random_matrix_matches_cubic_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let a = random_matrix(&mut rng, 100, 3);
    check_factorization(&a, 1e-9);
    let svd = svd_small(&a).unwrap();
    for (s, o) in svd.sigma.iter().zip(oracle_singular_values(&a)) {
        assert!((s - o).abs() < 1e-9, "{s} vs {o}");
    }
}

#[test]
fn oracles_agree_with_each_other() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = random_matrix(&mut rng, 10, 3);
    let g = gram(&a);
    for (x, y) in eig3(&g).iter().zip(eig_bisect(&g)) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn singular_values_match_eigen_oracle_for_2_3_4_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..60 {
        let cols = 2 + case % 3;
        let rows = cols + rng.gen_range(0..20);
        let a = random_matrix(&mut rng, rows, cols);
        check_factorization(&a, 1e-9);
        let svd = svd_small(&a).unwrap();
        for (s, o) in svd.sigma.iter().zip(oracle_singular_values(&a)) {
            assert!((s - o).abs() < 1e-9, "case {case}: {s} vs {o}");
        }
    }
}

#[test]
fn svd_examples() {
    let id = svd_small(&MatrixMN::identity(3)).unwrap();
    assert_eq!(id.sigma, vec![1.0, 1.0, 1.0]);
    let d = svd_small(&MatrixMN::diagonal(&[3.0, 2.0, 1.0])).unwrap();
    assert_eq!(d.sigma, vec![3.0, 2.0, 1.0]);
    let wide = MatrixMN::zeros(2, 3);
    assert!(matches!(svd_small(&wide), Err(Error::Dimension(_))));
    let bad = MatrixMN::from_rows(&[[f64::NAN, 0.0], [0.0, 1.0]]).unwrap();
    assert!(matches!(svd_small(&bad), Err(Error::NonFinite(_))));
}

#[test]
fn rank_deficient_matrix_still_factorizes() {
    let a = MatrixMN::from_rows(&[
        [1.0, 2.0, 3.0],
        [2.0, 4.0, 6.0],
        [-1.0, -2.0, -3.0],
        [0.5, 1.0, 1.5],
    ])
    .unwrap();
    check_factorization(&a, 1e-12);
    let svd = svd_small(&a).unwrap();
    assert!(svd.sigma[1] < 1e-12 && svd.sigma[2] < 1e-12);
}

/// Inverse of a 4×4 matrix by cofactor expansion.
fn inverse4(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let minor = |r: usize, c: usize| -> f64 {
        let rows: Vec<usize> = (0..4).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..4).filter(|&j| j != c).collect();
        let e = |i: usize, j: usize| m[rows[i]][cols[j]];
        e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
            - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    };
    let cof = |r: usize, c: usize| if (r + c).is_multiple_of(2) { minor(r, c) } else { -minor(r, c) };
    let det: f64 = (0..4).map(|c| m[0][c] * cof(0, c)).sum();
    let mut inv = [[0.0; 4]; 4];
    for (r, row) in inv.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = cof(c, r) / det;
        }
    }
    inv
}

#[test]
fn least_squares_matches_normal_equations_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let a = random_matrix(&mut rng, 50, 4);
    let truth = [1.5, -2.0, 0.25, 3.0];
    let b: Vec<f64> = (0..50)
        .map(|r| {
            let clean: f64 = (0..4).map(|c| a[(r, c)] * truth[c]).sum();
            let noise: f64 = StandardNormal.sample(&mut rng);
            clean + 0.1 * noise
        })
        .collect();
    let x = solve_least_squares(&a, &b).unwrap();

    let mut ata = [[0.0; 4]; 4];
    let mut atb = [0.0; 4];
    for r in 0..50 {
        for i in 0..4 {
            atb[i] += a[(r, i)] * b[r];
            for j in 0..4 {
                ata[i][j] += a[(r, i)] * a[(r, j)];
            }
        }
    }
    let inv = inverse4(&ata);
    for i in 0..4 {
        let oracle: f64 = (0..4).map(|j| inv[i][j] * atb[j]).sum();
        assert!((x[i] - oracle).abs() < 1e-8, "{} vs {oracle}", x[i]);
    }
}

#[test]
fn least_squares_examples() {
    let x = solve_least_squares(&MatrixMN::identity(3), &[1.0, 2.0, 3.0]).unwrap();
    for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
        assert!((got - want).abs() < 1e-14);
    }
    let a = MatrixMN::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
    let x = solve_least_squares(&a, &[1.0, 1.0, 2.0]).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    let singular = MatrixMN::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
    assert!(matches!(
        solve_least_squares(&singular, &[1.0, 2.0, 3.0]),
        Err(Error::RankDeficient { .. })
    ));
}

#[test]
fn gauss_newton_examples() {
    let opts = GaussNewtonOptions::default();
    let r = gauss_newton(|x: &[f64]| vec![x[0] - 3.0], &[0.0], &opts).unwrap();
    assert!((r.x[0] - 3.0).abs() < 1e-10);

    let rosen = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
    let r = gauss_newton(rosen, &[-1.2, 1.0], &opts).unwrap();
    assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6);
}

#[test]
fn gauss_newton_matches_polyfit_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let xs: Vec<f64> = (0..40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| {
            let n: f64 = StandardNormal.sample(&mut rng);
            2.0 * x * x - x + 5.0 + 0.05 * n
        })
        .collect();

    // Oracle: 3×3 normal equations of the quadratic fit, solved by Cramer.
    let s = |p: i32| xs.iter().map(|x| x.powi(p)).sum::<f64>();
    let t = |p: i32| xs.iter().zip(&ys).map(|(x, y)| x.powi(p) * y).sum::<f64>();
    let m = [[s(4), s(3), s(2)], [s(3), s(2), s(1)], [s(2), s(1), s(0)]];
    let rhs = [t(2), t(1), t(0)];
    let det3 = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det3(&m);
    let oracle: Vec<f64> = (0..3)
        .map(|c| {
            let mut mc = m;
            for r in 0..3 {
                mc[r][c] = rhs[r];
            }
            det3(&mc) / d
        })
        .collect();

    let residuals = |p: &[f64]| -> Vec<f64> {
        xs.iter()
            .zip(&ys)
            .map(|(x, y)| p[0] * x * x + p[1] * x + p[2] - y)
            .collect()
    };
    let r = gauss_newton(residuals, &[0.0, 0.0, 0.0], &GaussNewtonOptions::default()).unwrap();
    for (got, want) in r.x.iter().zip(&oracle) {
        assert!((got - want).abs() < 1e-8, "{got} vs {want}");
    }
}

#[test]
fn gauss_newton_reports_non_finite_start() {
    let r = gauss_newton(|_: &[f64]| vec![f64::NAN], &[0.0], &GaussNewtonOptions::default());
    assert!(matches!(r, Err(Error::NonFinite(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_reconstructs_and_matches_oracle(seed in any::<u64>(), cols in 2usize..=4, extra in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, cols + extra, cols);
        check_factorization(&a, 1e-9);
        let svd = svd_small(&a).unwrap();
        for (s, o) in svd.sigma.iter().zip(oracle_singular_values(&a)) {
            prop_assert!((s - o).abs() < 1e-9);
        }
    }

    #[test]
    fn least_squares_residual_is_orthogonal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, 12, 3);
        let b: Vec<f64> = (0..12).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let x = solve_least_squares(&a, &b).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let r: Vec<f64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        let atr = a.tr_mul_vec(&r).unwrap();
        let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!(norm(&atr) <= 1e-8 * a.frobenius_norm() * norm(&b));
    }

    #[test]
    fn gauss_newton_never_worsens_the_start(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let f = |x: &[f64]| -> Vec<f64> {
            vec![
                x[0].sin() - target[0],
                x[0] * x[1] - target[1],
                x[1].exp() - target[2].exp(),
                x[0] + x[1] * x[1] - target[3],
            ]
        };
        let x0 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r0 = f(&x0);
        let rms0 = (r0.iter().map(|v| v * v).sum::<f64>() / 4.0).sqrt();
        let report = gauss_newton(f, &x0, &GaussNewtonOptions::default()).unwrap();
        prop_assert!(report.final_rms <= rms0);
    }
}
