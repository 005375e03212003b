#![allow(dead_code)]

use compound_hawkes::model::{bivariate, DecayKernel, MarkRegime, ModelSpec, VectorLaw};

pub fn random_marks() -> ModelSpec {
    bivariate(MarkRegime::Random).unwrap()
}

pub fn deterministic_marks() -> ModelSpec {
    bivariate(MarkRegime::Deterministic).unwrap()
}

/// Univariate model with unit kernel mass, constant mark `mu` (so the
/// branching mean is `mu`), unit claims and the given premium.
pub fn univariate_unit(mu: f64, lambda_bar: f64, premium: f64) -> ModelSpec {
    ModelSpec::new(
        vec![lambda_bar],
        vec![vec![DecayKernel::exponential(1.0).unwrap()]],
        vec![VectorLaw::deterministic(vec![mu]).unwrap()],
        vec![VectorLaw::deterministic(vec![1.0]).unwrap()],
        vec![premium],
    )
    .unwrap()
}

/// `|a − b| ≤ tol · max(|b|, tiny)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}
