mod common;

use common::*;
use compound_hawkes::model::{branching_matrix, mean_drift, DecayKernel, ModelSpec, VectorLaw};
use compound_hawkes::numerics::NumericsConfig;
use compound_hawkes::transforms::*;
use hawkes_oracle as oracle;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest `s ≤ 1e3` with `θ = s·dir` in the domain, by bisection on finiteness.
fn domain_edge(spec: &ModelSpec, dir: &[f64]) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while cumulant_value(spec, &dir.iter().map(|d| d * hi).collect::<Vec<_>>()).is_finite() {
        if hi > 1e3 {
            return hi;
        }
        hi *= 2.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if cumulant_value(spec, &dir.iter().map(|d| d * m).collect::<Vec<_>>()).is_finite() {
            lo = m;
        } else {
            hi = m;
        }
    }
    lo
}

#[test]
fn univariate_pgf_matches_lambert_and_picard() {
    let spec = univariate_unit(0.5, 1.0, 4.0);
    let sol = solve_cluster_pgf(&spec, &[1.1]).unwrap();
    assert!(sol.converged);
    let lambert = oracle::univariate_pgf_lambert(0.5, 1.1).unwrap();
    let picard = oracle::univariate_pgf_picard(0.5, 1.1, 500, 0.8);
    assert!((lambert - picard).abs() < 1e-13);
    assert!(
        (sol.f[0] - lambert).abs() < 1e-12,
        "{} vs {lambert}",
        sol.f[0]
    );
}

#[test]
fn univariate_pgf_outside_domain() {
    let spec = univariate_unit(0.5, 1.0, 4.0);
    assert!((oracle::univariate_z_hat(0.5) - 1.2131).abs() < 1e-4);
    assert!(matches!(
        solve_cluster_pgf(&spec, &[1.3]),
        Err(TransformError::OutsideDomain { .. })
    ));
}

#[test]
fn pgf_at_one_is_one() {
    for spec in [random_marks(), deterministic_marks()] {
        let sol = solve_cluster_pgf(&spec, &[1.0, 1.0]).unwrap();
        assert_eq!(sol.f, vec![1.0, 1.0]);
    }
}

#[test]
fn fixed_point_residuals_and_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [random_marks(), deterministic_marks()] {
        for _ in 0..200 {
            let z: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..1.1)).collect();
            let bump: Vec<f64> = z.iter().map(|v| v + rng.gen_range(0.0..0.02)).collect();
            let (Ok(a), Ok(b)) = (
                solve_cluster_pgf(&spec, &z),
                solve_cluster_pgf(&spec, &bump),
            ) else {
                continue;
            };
            assert!(pgf_residual(&spec, &z, &a.f) < 1e-10);
            assert!(pgf_residual(&spec, &bump, &b.f) < 1e-10);
            assert!(a.f.iter().zip(&b.f).all(|(x, y)| x <= y), "{z:?} {bump:?}");
        }
    }
}

#[test]
fn jacobian_at_one_is_resolvent_of_h_transpose() {
    for spec in [random_marks(), deterministic_marks()] {
        let sol = solve_cluster_pgf(&spec, &[1.0, 1.0]).unwrap();
        let jac = cluster_pgf_jacobian(&spec, &sol).unwrap();
        let h = branching_matrix(&spec);
        let expected = (DMatrix::identity(2, 2) - h.transpose())
            .try_inverse()
            .unwrap();
        assert!((&jac - &expected).abs().max() < 1e-12);
        // and against finite differences of the solver itself
        for k in 0..2 {
            let f = |z: &[f64]| {
                solve_cluster_pgf(&spec, z)
                    .map(|s| s.f[k])
                    .unwrap_or(f64::NAN)
            };
            let fd = oracle::finite_diff_gradient(f, &[1.0, 1.0], 1e-6).unwrap();
            for l in 0..2 {
                assert!(
                    rel_close(fd[l], jac[(k, l)], 1e-6),
                    "({k},{l}) {} vs {}",
                    fd[l],
                    jac[(k, l)]
                );
            }
        }
    }
}

#[test]
fn univariate_derivative_at_one() {
    let spec = univariate_unit(0.5, 1.0, 4.0);
    let sol = solve_cluster_pgf(&spec, &[1.0]).unwrap();
    let jac = cluster_pgf_jacobian(&spec, &sol).unwrap();
    assert!((jac[(0, 0)] - 2.0).abs() < 1e-12);
}

#[test]
fn near_singular_is_raised_before_outside_domain() {
    // the default cutoff (1e12) is beyond f64 reach on a square-root
    // singularity, so scan with a cutoff the scan can actually cross
    let numerics = NumericsConfig {
        near_singular_cond: 1e4,
        ..NumericsConfig::default()
    };
    let spec = random_marks().with_numerics_config(numerics);
    let b = domain_boundary(&spec, &[1.0, 1.0]).unwrap();
    let mut conds = Vec::new();
    let mut first_error = None;
    for k in 1..=14 {
        let s = 1.0 - 10f64.powi(-k);
        let z: Vec<f64> = b.z_hat.iter().map(|zh| 1.0 + s * (zh - 1.0)).collect();
        let sol = match solve_cluster_pgf(&spec, &z) {
            Ok(sol) => sol,
            Err(e) => {
                first_error.get_or_insert(e);
                break;
            }
        };
        match cluster_pgf_jacobian(&spec, &sol) {
            Ok(_) => {}
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
        // brute-force condition number from the eigen-decomposition of AᵀA
        let h = b_hat_bruteforce(&spec, &z, &sol.f);
        let a = DMatrix::identity(2, 2) - h.transpose();
        let ev = (a.transpose() * &a).symmetric_eigenvalues();
        conds.push((ev.max() / ev.min()).sqrt());
    }
    assert!(
        matches!(first_error, Some(TransformError::NearSingular { .. })),
        "{first_error:?}"
    );
    assert!(conds.windows(2).all(|w| w[1] > w[0]), "{conds:?}");
}

/// `B̂_mj = z_j c_mj ∂_m m_{B_j}` from a central difference of the mark mgf.
fn b_hat_bruteforce(spec: &ModelSpec, z: &[f64], f: &[f64]) -> DMatrix<f64> {
    let d = spec.d();
    DMatrix::from_fn(d, d, |m, j| {
        let s: Vec<f64> = (0..d)
            .map(|k| spec.kernel_norm(k, j) * (f[k] - 1.0))
            .collect();
        let grad =
            oracle::finite_diff_gradient(|x| spec.mark(j).mgf(x).unwrap_or(f64::NAN), &s, 1e-7)
                .unwrap();
        z[j] * spec.kernel_norm(m, j) * grad[m]
    })
}

#[test]
fn cumulant_vanishes_at_zero() {
    for spec in [random_marks(), deterministic_marks()] {
        assert_eq!(cumulant_value(&spec, &[0.0, 0.0]), 0.0);
    }
}

#[test]
fn gradient_at_zero_is_drift() {
    for spec in [random_marks(), deterministic_marks()] {
        let g = cumulant_gradient(&spec, &[0.0, 0.0]).unwrap();
        let mu = mean_drift(&spec).unwrap();
        assert!(rel_close(g[0], mu[0], 1e-12) && rel_close(g[1], mu[1], 1e-12));
    }
}

#[test]
fn univariate_cumulant_matches_borel_series() {
    for mu in [0.2, 0.5, 0.8] {
        let spec = univariate_unit(mu, 1.0, 100.0);
        // the series oracle refuses e^θ > 0.99 ẑ, which binds before 0.9 log ẑ for μ near 1
        let z_hat = oracle::univariate_z_hat(mu);
        let top = (0.9 * z_hat.ln()).min((0.99 * z_hat).ln());
        for k in 0..=20 {
            let theta = -0.5 + (top + 0.5) * k as f64 / 20.0;
            let series = oracle::series_cumulant_univariate(mu, 1.0, theta).unwrap();
            let lam = cumulant_value(&spec, &[theta]);
            assert!(
                (lam - series).abs() < 1e-8,
                "mu={mu} θ={theta}: {lam} vs {series}"
            );
        }
    }
    // the stated reference point
    let series = oracle::series_cumulant_univariate(0.5, 1.0, 0.05).unwrap();
    let truncated: f64 = (1..=200)
        .map(|n| (0.05 * n as f64).exp() * oracle::borel_pmf(0.5, n).unwrap())
        .sum::<f64>()
        - 1.0;
    assert!((series - truncated).abs() < 1e-12);
    assert!((cumulant_value(&univariate_unit(0.5, 1.0, 4.0), &[0.05]) - series).abs() < 1e-10);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in [random_marks(), deterministic_marks()] {
        for _ in 0..50 {
            // interior: at most 80% of the way to the boundary along a random ray
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let dir = [phi.cos(), phi.sin()];
            let s = rng.gen_range(0.0..0.8) * domain_edge(&spec, &dir).min(1.0);
            let theta = [s * dir[0], s * dir[1]];
            let g = cumulant_gradient(&spec, &theta).unwrap();
            let fd =
                oracle::finite_diff_gradient(|x| cumulant_value(&spec, x), &theta, 1e-6).unwrap();
            for k in 0..2 {
                assert!(rel_close(g[k], fd[k], 1e-6), "θ={theta:?}: {g:?} vs {fd:?}");
            }
        }
    }
}

#[test]
fn cumulant_is_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = random_marks();
    let mut checked = 0;
    while checked < 1000 {
        let a = [rng.gen_range(-0.3..0.1), rng.gen_range(-0.3..0.1)];
        let b = [rng.gen_range(-0.3..0.1), rng.gen_range(-0.3..0.1)];
        let (fa, fb) = (cumulant_value(&spec, &a), cumulant_value(&spec, &b));
        if !(fa.is_finite() && fb.is_finite()) {
            continue;
        }
        let t: f64 = rng.gen();
        let mid = [t * a[0] + (1.0 - t) * b[0], t * a[1] + (1.0 - t) * b[1]];
        assert!(cumulant_value(&spec, &mid) <= t * fa + (1.0 - t) * fb + 1e-10);
        checked += 1;
    }
}

#[test]
fn gradient_blows_up_at_the_boundary() {
    for spec in [
        random_marks(),
        deterministic_marks(),
        univariate_unit(0.5, 1.0, 4.0),
    ] {
        let dstar = spec.dstar();
        let mut dir = vec![0.0; dstar];
        dir[0] = 1.0;
        let edge = domain_edge(&spec, &dir);
        let norm_at = |dist: f64| {
            let z = claim_mgf_vector(&spec, &embed(dstar, 0, edge - dist)).unwrap();
            let sol = solve_cluster_pgf(&spec, &z).unwrap();
            let jac = cluster_pgf_jacobian(&spec, &sol).unwrap();
            (jac * DVector::from_element(spec.d(), 1.0)).norm()
        };
        let dists = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];
        let norms: Vec<f64> = dists.iter().map(|d| norm_at(*d)).collect();
        assert!(norms.windows(2).all(|w| w[1] > w[0]), "{norms:?}");
        // square-root singularity: each factor 100 closer multiplies the norm by ~10
        let slope = (norms[7] / norms[5]).log10() / (dists[7] / dists[5]).log10();
        assert!((slope + 0.5).abs() < 0.05, "log-log slope {slope}");
        assert!(norms[7] > 1e3 * norms[0], "{norms:?}");
    }
}

#[test]
fn univariate_boundary_closed_forms() {
    for mu in [0.2, 0.5, 0.8] {
        let spec = univariate_unit(mu, 1.0, 4.0);
        let b = domain_boundary(&spec, &[1.0]).unwrap();
        assert!((b.x_hat[0] - oracle::univariate_x_hat(mu)).abs() < 1e-9);
        assert!((b.z_hat[0] - oracle::univariate_z_hat(mu)).abs() < 1e-9);
        assert!(
            solve_cluster_pgf(&spec, &[b.z_hat[0] * (1.0 - 1e-4)])
                .unwrap()
                .converged
        );
        assert!(matches!(
            solve_cluster_pgf(&spec, &[b.z_hat[0] * (1.0 + 1e-4)]),
            Err(TransformError::OutsideDomain { .. })
        ));
    }
}

#[test]
fn decoupled_boundary_is_per_component() {
    let kernel = DecayKernel::exponential(1.0).unwrap();
    let spec = ModelSpec::new(
        vec![0.5, 0.5],
        vec![
            vec![kernel.clone(), kernel.clone()],
            vec![kernel.clone(), kernel],
        ],
        vec![
            VectorLaw::deterministic(vec![0.3, 0.0]).unwrap(),
            VectorLaw::deterministic(vec![0.0, 0.6]).unwrap(),
        ],
        vec![
            VectorLaw::deterministic(vec![1.0, 0.0]).unwrap(),
            VectorLaw::deterministic(vec![0.0, 1.0]).unwrap(),
        ],
        vec![4.0, 4.0],
    )
    .unwrap();
    for r in [[1.0, 1.0], [1.0, 3.0], [5.0, 0.2]] {
        let b = domain_boundary(&spec, &r).unwrap();
        for (k, mu) in [0.3, 0.6].into_iter().enumerate() {
            assert!(
                (b.x_hat[k] - oracle::univariate_x_hat(mu)).abs() < 1e-9,
                "r={r:?}"
            );
            assert!(
                (b.z_hat[k] - oracle::univariate_z_hat(mu)).abs() < 1e-9,
                "r={r:?}"
            );
        }
    }
}

#[test]
fn bivariate_boundary_self_consistency() {
    for spec in [random_marks(), deterministic_marks()] {
        let b = domain_boundary(&spec, &[1.0, 1.0]).unwrap();
        assert!(
            b.fixed_point_residual < 1e-9 && b.eigen_residual < 1e-9,
            "{b:?}"
        );
        assert!(pgf_residual(&spec, &b.z_hat, &b.x_hat) < 1e-9);
        let inside: Vec<f64> = b.z_hat.iter().map(|z| z * (1.0 - 1e-4)).collect();
        let outside: Vec<f64> = b.z_hat.iter().map(|z| z * (1.0 + 1e-4)).collect();
        assert!(solve_cluster_pgf(&spec, &inside).unwrap().converged);
        assert!(matches!(
            solve_cluster_pgf(&spec, &outside),
            Err(TransformError::OutsideDomain { .. })
        ));
    }
}

#[test]
fn outside_claim_mgf_domain_is_infinite() {
    let spec = random_marks();
    let eval = limiting_cumulant_with_gradient(&spec, &[0.45, 0.0]);
    assert!(!eval.in_domain && eval.value == f64::INFINITY && eval.gradient.is_none());
}
