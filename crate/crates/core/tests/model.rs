mod common;

use common::*;
use compound_hawkes::model::*;
use compound_hawkes::numerics::NumericsConfig;
use nalgebra::{DMatrix, DVector};

#[test]
fn bivariate_branching_matrix_by_hand() {
    // c = (1/2, 2/3) by receiving component; H_mj = E[B_mj] c_m
    let h = branching_matrix(&random_marks());
    let expected = [[0.5 * 0.5, 0.25 * 0.5], [0.3 * 2.0 / 3.0, 0.4 * 2.0 / 3.0]];
    for m in 0..2 {
        for j in 0..2 {
            assert!((h[(m, j)] - expected[m][j]).abs() < 1e-15, "H[{m}][{j}]");
        }
    }
    assert_eq!(branching_matrix(&deterministic_marks()), h);
}

#[test]
fn spectral_radius_matches_quadratic_formula() {
    let h = branching_matrix(&random_marks());
    let (a, b, c, d) = (h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
    let tr = a + d;
    let det = a * d - b * c;
    let rho = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
    let got = validate_stability(&random_marks()).unwrap();
    assert!((got - rho).abs() < 1e-9);
    assert!((got - 0.4167).abs() < 1e-4);
}

#[test]
fn scalar_drift() {
    // H = 0.5, E U = 2, λ̄ = 0.5: μ = 2 · 0.5 / (1 − 0.5)
    let spec = ModelSpec::new(
        vec![0.5],
        vec![vec![DecayKernel::exponential(1.0).unwrap()]],
        vec![VectorLaw::deterministic(vec![0.5]).unwrap()],
        vec![VectorLaw::exponential(vec![0.5]).unwrap()],
        vec![3.0],
    )
    .unwrap();
    assert!((mean_drift(&spec).unwrap()[0] - 2.0).abs() < 1e-12);
}

#[test]
fn bivariate_drift_and_net_profit() {
    for spec in [random_marks(), deterministic_marks()] {
        let mu = mean_drift(&spec).unwrap();
        assert!(
            (mu[0] - 3.90).abs() < 0.01 && (mu[1] - 4.76).abs() < 0.01,
            "{mu:?}"
        );
        assert!(validate_net_profit(&spec, 0).unwrap());
        assert!(validate_net_profit(&spec, 1).unwrap());
    }
    let poor = random_marks().with_premium(vec![3.0, 8.0]).unwrap();
    assert!(!validate_net_profit(&poor, 0).unwrap());
}

#[test]
fn drift_is_claim_means_times_stationary_rates() {
    let spec = random_marks();
    let h = branching_matrix(&spec);
    let x = (DMatrix::identity(2, 2) - h)
        .lu()
        .solve(&DVector::from_column_slice(spec.lambda_bar()))
        .unwrap();
    let mu = spec.claim_mean_matrix() * x;
    let drift = mean_drift(&spec).unwrap();
    for k in 0..2 {
        assert!((mu[k] - drift[k]).abs() < 1e-12);
    }
    let rates = spec.stationary_rates().unwrap();
    assert!((rates[0] - 0.8174).abs() < 1e-4 && (rates[1] - 0.9048).abs() < 1e-4);
}

#[test]
fn unstable_models_are_rejected() {
    let text = BIVARIATE_RANDOM_TOML.replace("alpha = 2.0", "alpha = 0.2");
    let err = ModelConfig::from_toml_str(&text)
        .unwrap()
        .build()
        .unwrap_err();
    assert!(matches!(err, ModelError::Unstable { rho } if rho >= 1.0));
}

#[test]
fn scaling_marks_scales_branching_matrix() {
    let base = branching_matrix(&deterministic_marks());
    let k = 1.7;
    let text = BIVARIATE_DETERMINISTIC_TOML
        .replace("[0.5, 0.3]", &format!("[{}, {}]", 0.5 * k, 0.3 * k))
        .replace("[0.25, 0.4]", &format!("[{}, {}]", 0.25 * k, 0.4 * k));
    let scaled = branching_matrix(&ModelConfig::from_toml_str(&text).unwrap().build().unwrap());
    for (a, b) in scaled.iter().zip(base.iter()) {
        assert!((a - k * b).abs() < 1e-14);
    }
}

#[test]
fn stable_models_have_nonnegative_stationary_rates() {
    // random nonnegative 3×3 branching matrices scaled below ρ = 1
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let num = NumericsConfig::default();
    for _ in 0..200 {
        let h = DMatrix::from_fn(3, 3, |_, _| rng.gen::<f64>());
        let rho = spectral_radius(&h, &num).unwrap();
        let h = h * (0.95 * rng.gen::<f64>() / rho);
        assert!(check_stability(&h, &num).is_ok());
        let lam = DVector::from_fn(3, |_, _| rng.gen::<f64>());
        let x = (DMatrix::identity(3, 3) - &h).lu().solve(&lam).unwrap();
        assert!(x.iter().all(|v| *v >= 0.0));
    }
}

#[test]
fn configs_round_trip_through_text() {
    let spec = random_marks();
    let cfg = ModelConfig::from_spec(&spec);
    let back = ModelConfig::from_toml_str(&cfg.to_toml_string())
        .unwrap()
        .build()
        .unwrap();
    assert_eq!(branching_matrix(&back), branching_matrix(&spec));
    assert_eq!(back.premium(), spec.premium());
    let json = ModelConfig::from_json_str(&cfg.to_json_string()).unwrap();
    assert_eq!(json, cfg);
}

#[test]
fn claim_mgf_of_exponential_column() {
    // column 1 has means (2, 2.5), i.e. rates (0.5, 0.4): 0.5 / (0.5 − 0.1)
    let spec = random_marks();
    assert!((spec.claim(0).mgf(&[0.1, 0.0]).unwrap() - 1.25).abs() < 1e-15);
    assert!(spec.claim(0).mgf(&[0.5, 0.0]).is_none());
}

#[test]
fn tabulated_kernels_load_from_config() {
    let text = r#"
        dims = { d = 1, dstar = 1 }
        lambda_bar = [1.0]
        kernels = [[{ family = "tabulated", table = { step = 0.5, values = [1.0, 0.6, 0.2, 0.0], l1_norm = 0.65 } }]]
        marks = [{ family = "deterministic", params = [1.0] }]
        claims = [{ family = "deterministic", params = [1.0] }]
        premium = [4.0]
    "#;
    let spec = ModelConfig::from_toml_str(text).unwrap().build().unwrap();
    assert!((spec.kernel_norm(0, 0) - 0.65).abs() < 1e-12);
    assert!((validate_stability(&spec).unwrap() - 0.65).abs() < 1e-9);
}
