//! Model primitives under the original measure: dimensions, base rates,
//! kernels, mark and claim laws, premium rates, and the stability checks that
//! gate every other operation.

mod config;
mod kernel;
mod law;
pub mod presets;

pub use config::{
    DimsConfig, KernelConfig, KernelsConfig, LawConfig, LawFamily, ModelConfig, TableConfig,
};
pub use kernel::{DecayKernel, TabulatedKernel};
pub use law::{ClaimLaw, MarkLaw, VectorLaw};
pub use presets::{bivariate, MarkRegime, BIVARIATE_DETERMINISTIC_TOML, BIVARIATE_RANDOM_TOML};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::numerics::NumericsConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unstable: spectral radius {rho} >= 1")]
    Unstable { rho: f64 },
    #[error("power iteration did not converge after {iterations} iterations")]
    NonConvergent { iterations: usize },
    #[error("singular system I - H")]
    SingularSystem,
    #[error("component index {index} out of range (dimension {len})")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("config parse error: {0}")]
    Parse(String),
}

/// Number of Hawkes components `d` and compound components `dstar`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dimensions {
    pub d: usize,
    pub dstar: usize,
}

/// A validated, stable multivariate compound Hawkes model.
///
/// `kernels[i][j]` is the effect of a component-`j` event on the intensity of
/// component `i`. `marks[j]` is the law of the `d`-vector `B_j` attached to
/// component-`j` events and `claims[j]` the law of the `dstar`-vector `U_j`.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    dims: Dimensions,
    lambda_bar: Vec<f64>,
    kernels: Vec<Vec<DecayKernel>>,
    marks: Vec<MarkLaw>,
    claims: Vec<ClaimLaw>,
    premium: Vec<f64>,
    numerics: NumericsConfig,
    kernel_norms: Vec<Vec<f64>>,
    branching: DMatrix<f64>,
    rho: f64,
}

impl ModelSpec {
    /// Build and validate a model; fails with [`ModelError::Unstable`] when the
    /// branching matrix has spectral radius at least one.
    pub fn new(
        lambda_bar: Vec<f64>,
        kernels: Vec<Vec<DecayKernel>>,
        marks: Vec<MarkLaw>,
        claims: Vec<ClaimLaw>,
        premium: Vec<f64>,
    ) -> Result<Self, ModelError> {
        Self::with_numerics(
            lambda_bar,
            kernels,
            marks,
            claims,
            premium,
            NumericsConfig::default(),
        )
    }

    pub fn with_numerics(
        lambda_bar: Vec<f64>,
        kernels: Vec<Vec<DecayKernel>>,
        marks: Vec<MarkLaw>,
        claims: Vec<ClaimLaw>,
        premium: Vec<f64>,
        numerics: NumericsConfig,
    ) -> Result<Self, ModelError> {
        let d = lambda_bar.len();
        let dstar = premium.len();
        if d == 0 || dstar == 0 {
            return Err(ModelError::DimensionMismatch(
                "need at least one Hawkes and one compound component".into(),
            ));
        }
        if lambda_bar.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(ModelError::InvalidParameter(
                "base rates must be finite and nonnegative".into(),
            ));
        }
        if premium.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(ModelError::InvalidParameter(
                "premium rates must be finite and nonnegative".into(),
            ));
        }
        if kernels.len() != d || kernels.iter().any(|row| row.len() != d) {
            return Err(ModelError::DimensionMismatch(format!(
                "kernel matrix must be {d}x{d}"
            )));
        }
        if marks.len() != d || marks.iter().any(|m| m.dim() != d) {
            return Err(ModelError::DimensionMismatch(format!(
                "need {d} mark laws of dimension {d}"
            )));
        }
        if claims.len() != d || claims.iter().any(|c| c.dim() != dstar) {
            return Err(ModelError::DimensionMismatch(format!(
                "need {d} claim laws of dimension {dstar}"
            )));
        }
        let kernel_norms: Vec<Vec<f64>> = kernels
            .iter()
            .map(|row| row.iter().map(DecayKernel::l1_norm).collect())
            .collect();
        let mut spec = ModelSpec {
            dims: Dimensions { d, dstar },
            lambda_bar,
            kernels,
            marks,
            claims,
            premium,
            numerics,
            kernel_norms,
            branching: DMatrix::zeros(d, d),
            rho: 0.0,
        };
        spec.branching = compute_branching(&spec);
        spec.rho = spectral_radius(&spec.branching, &spec.numerics)?;
        if spec.rho >= 1.0 {
            return Err(ModelError::Unstable { rho: spec.rho });
        }
        Ok(spec)
    }

    pub fn dims(&self) -> Dimensions {
        self.dims
    }

    pub fn d(&self) -> usize {
        self.dims.d
    }

    pub fn dstar(&self) -> usize {
        self.dims.dstar
    }

    pub fn lambda_bar(&self) -> &[f64] {
        &self.lambda_bar
    }

    pub fn kernel(&self, i: usize, j: usize) -> &DecayKernel {
        &self.kernels[i][j]
    }

    pub fn kernels(&self) -> &[Vec<DecayKernel>] {
        &self.kernels
    }

    /// `c_ij`, the L1 norm of `g_ij`.
    pub fn kernel_norm(&self, i: usize, j: usize) -> f64 {
        self.kernel_norms[i][j]
    }

    pub fn mark(&self, j: usize) -> &MarkLaw {
        &self.marks[j]
    }

    pub fn marks(&self) -> &[MarkLaw] {
        &self.marks
    }

    pub fn claim(&self, j: usize) -> &ClaimLaw {
        &self.claims[j]
    }

    pub fn claims(&self) -> &[ClaimLaw] {
        &self.claims
    }

    pub fn premium(&self) -> &[f64] {
        &self.premium
    }

    pub fn numerics(&self) -> &NumericsConfig {
        &self.numerics
    }

    /// Same model with different solver tolerances.
    pub fn with_numerics_config(mut self, numerics: NumericsConfig) -> Self {
        self.numerics = numerics;
        self
    }

    /// Same model with a different premium vector.
    pub fn with_premium(&self, premium: Vec<f64>) -> Result<Self, ModelError> {
        Self::with_numerics(
            self.lambda_bar.clone(),
            self.kernels.clone(),
            self.marks.clone(),
            self.claims.clone(),
            premium,
            self.numerics,
        )
    }

    /// Same model with different base rates.
    pub fn with_lambda_bar(&self, lambda_bar: Vec<f64>) -> Result<Self, ModelError> {
        Self::with_numerics(
            lambda_bar,
            self.kernels.clone(),
            self.marks.clone(),
            self.claims.clone(),
            self.premium.clone(),
            self.numerics,
        )
    }

    /// Dense `dstar × d` matrix of claim means, column `j` being `E[U_j]`.
    pub fn claim_mean_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dims.dstar, self.dims.d);
        for (j, law) in self.claims.iter().enumerate() {
            for (i, v) in law.mean().into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Long-run event rates `(I − H)^{-1} λ̄`.
    pub fn stationary_rates(&self) -> Result<Vec<f64>, ModelError> {
        let d = self.dims.d;
        let a = DMatrix::identity(d, d) - &self.branching;
        let x = a
            .lu()
            .solve(&DVector::from_column_slice(&self.lambda_bar))
            .ok_or(ModelError::SingularSystem)?;
        Ok(x.iter().copied().collect())
    }
}

fn compute_branching(spec: &ModelSpec) -> DMatrix<f64> {
    let d = spec.dims.d;
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let mean = spec.marks[j].mean();
        for m in 0..d {
            h[(m, j)] = mean[m] * spec.kernel_norms[m][j];
        }
    }
    h
}

/// Branching matrix `H` with `H[m][j] = E[B_mj] · c_mj`.
pub fn branching_matrix(spec: &ModelSpec) -> DMatrix<f64> {
    spec.branching.clone()
}

/// Spectral radius of a nonnegative square matrix by power iteration on
/// `I + H`, which shares the Perron vector of `H` but has a strictly dominant
/// eigenvalue even when `H` is periodic.
pub fn spectral_radius(h: &DMatrix<f64>, numerics: &NumericsConfig) -> Result<f64, ModelError> {
    let d = h.nrows();
    let shifted = DMatrix::identity(d, d) + h;
    let mut v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let mut estimate = f64::NAN;
    for _ in 0..numerics.power_iter_max_iter {
        let w = &shifted * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = norm / v.norm();
        v = w / norm;
        if (next - estimate).abs() < numerics.power_iter_tol {
            return Ok((next - 1.0).max(0.0));
        }
        estimate = next;
    }
    Err(ModelError::NonConvergent {
        iterations: numerics.power_iter_max_iter,
    })
}

/// Returns `ρ(H)`; a constructed [`ModelSpec`] is always stable, so this only
/// reports the cached value.
pub fn validate_stability(spec: &ModelSpec) -> Result<f64, ModelError> {
    if spec.rho >= 1.0 {
        return Err(ModelError::Unstable { rho: spec.rho });
    }
    Ok(spec.rho)
}

/// Check a raw branching matrix against the stability requirement.
pub fn check_stability(h: &DMatrix<f64>, numerics: &NumericsConfig) -> Result<f64, ModelError> {
    let rho = spectral_radius(h, numerics)?;
    if rho >= 1.0 {
        Err(ModelError::Unstable { rho })
    } else {
        Ok(rho)
    }
}

/// Long-run claim drift `μ = E[U] (I − H)^{-1} λ̄`.
pub fn mean_drift(spec: &ModelSpec) -> Result<Vec<f64>, ModelError> {
    let rates = DVector::from_vec(spec.stationary_rates()?);
    Ok((spec.claim_mean_matrix() * rates).iter().copied().collect())
}

/// Net profit condition `r_i > μ_i` for compound component `i`.
pub fn validate_net_profit(spec: &ModelSpec, i: usize) -> Result<bool, ModelError> {
    if i >= spec.dstar() {
        return Err(ModelError::IndexOutOfRange {
            index: i,
            len: spec.dstar(),
        });
    }
    Ok(spec.premium[i] > mean_drift(spec)?[i])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn univariate(
        mark: f64,
        alpha: f64,
        lambda: f64,
        claim: f64,
        r: f64,
    ) -> Result<ModelSpec, ModelError> {
        ModelSpec::new(
            vec![lambda],
            vec![vec![DecayKernel::exponential(alpha)?]],
            vec![VectorLaw::deterministic(vec![mark])?],
            vec![VectorLaw::deterministic(vec![claim])?],
            vec![r],
        )
    }

    #[test]
    fn unit_mark_unit_rate_is_critical() {
        assert_eq!(
            univariate(1.0, 1.0, 1.0, 1.0, 2.0).unwrap_err(),
            ModelError::Unstable { rho: 1.0 }
        );
    }

    #[test]
    fn zero_marks_give_zero_branching() {
        let spec = univariate(0.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(branching_matrix(&spec)[(0, 0)], 0.0);
        assert_eq!(validate_stability(&spec).unwrap(), 0.0);
    }

    #[test]
    fn scalar_drift() {
        let spec = univariate(0.5, 1.0, 0.5, 2.0, 3.0).unwrap();
        assert!((mean_drift(&spec).unwrap()[0] - 2.0).abs() < 1e-15);
        assert!(validate_net_profit(&spec, 0).unwrap());
        let at_drift = spec.with_premium(vec![2.0]).unwrap();
        assert!(!validate_net_profit(&at_drift, 0).unwrap());
        assert!(matches!(
            validate_net_profit(&spec, 1),
            Err(ModelError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn periodic_matrix_radius() {
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let rho = spectral_radius(&h, &NumericsConfig::default()).unwrap();
        assert!((rho - 0.5).abs() < 1e-10);
    }
}
