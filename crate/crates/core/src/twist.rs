//! Exponential change of measure for a compound Hawkes model.
//!
//! Twisting by `θ*` (with `f = f(m_U(θ*))`) gives a model `Q` with
//!
//! * base rates `λ̄^Q_j = λ̄_j f_j`,
//! * kernels `g^Q_lj = g_lj f_l`,
//! * marks `B_j` tilted by `c̄^Q_j = (c_1j(f_1 − 1), …, c_dj(f_d − 1))`,
//! * claims `U_j` tilted by `θ*`,
//!
//! under which `Λ^Q(θ) = Λ(θ + θ*) − Λ(θ*)`.

use thiserror::Error;

use crate::model::{ModelError, ModelSpec};
use crate::transforms::{claim_mgf_vector, cumulant_value, solve_cluster_pgf};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistError {
    #[error("tilt leaves the mgf domain of the {law} law of component {component}")]
    TiltOutOfDomain { law: &'static str, component: usize },
    #[error("twist {theta:?} lies outside the domain of the limiting cumulant")]
    OutsideDomain { theta: Vec<f64> },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The twisted model together with the quantities reused by likelihood ratios.
#[derive(Debug, Clone)]
pub struct TwistedModel {
    /// Primitives under `Q`; same premium as the original model.
    pub base: ModelSpec,
    pub theta_star: Vec<f64>,
    /// `f_j(m_U(θ*))`.
    pub f_at_twist: Vec<f64>,
    /// `log m_{U_j}(θ*)`.
    pub log_mu_at_twist: Vec<f64>,
    /// `cbar_q[j][l] = c_lj (f_l − 1)`, the tilt applied to the mark of a
    /// component-`j` event.
    pub cbar_q: Vec<Vec<f64>>,
    /// Kernel scale factor `f_l` applied to every kernel into component `l`.
    pub scale: Vec<f64>,
    /// `log m_{B_j}(c̄^Q_j)`.
    pub log_mark_normalizer: Vec<f64>,
}

impl TwistedModel {
    pub fn build(spec: &ModelSpec, theta_star: &[f64]) -> Result<Self, TwistError> {
        let d = spec.d();
        let outside = || TwistError::OutsideDomain {
            theta: theta_star.to_vec(),
        };
        if theta_star.len() != spec.dstar() {
            return Err(ModelError::DimensionMismatch(format!(
                "twist has length {}, expected {}",
                theta_star.len(),
                spec.dstar()
            ))
            .into());
        }
        for (j, law) in spec.claims().iter().enumerate() {
            if !law.in_mgf_domain(theta_star) {
                return Err(TwistError::TiltOutOfDomain {
                    law: "claim",
                    component: j,
                });
            }
        }
        let z = claim_mgf_vector(spec, theta_star).map_err(|_| outside())?;
        let f = solve_cluster_pgf(spec, &z).map_err(|_| outside())?.f;

        let lambda_q: Vec<f64> = spec
            .lambda_bar()
            .iter()
            .zip(&f)
            .map(|(l, f)| l * f)
            .collect();
        let kernels_q = (0..d)
            .map(|l| (0..d).map(|j| spec.kernel(l, j).scaled(f[l])).collect())
            .collect();
        let cbar_q: Vec<Vec<f64>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|l| spec.kernel_norm(l, j) * (f[l] - 1.0))
                    .collect()
            })
            .collect();
        let mut marks_q = Vec::with_capacity(d);
        let mut log_mark_normalizer = Vec::with_capacity(d);
        for j in 0..d {
            let law = spec.mark(j);
            let lm = law.log_mgf(&cbar_q[j]).ok_or(TwistError::TiltOutOfDomain {
                law: "mark",
                component: j,
            })?;
            log_mark_normalizer.push(lm);
            marks_q.push(
                law.tilt(&cbar_q[j])
                    .map_err(|_| TwistError::TiltOutOfDomain {
                        law: "mark",
                        component: j,
                    })?,
            );
        }
        let claims_q = spec
            .claims()
            .iter()
            .map(|law| law.tilt(theta_star))
            .collect::<Result<Vec<_>, _>>()?;
        let base = ModelSpec::with_numerics(
            lambda_q,
            kernels_q,
            marks_q,
            claims_q,
            spec.premium().to_vec(),
            *spec.numerics(),
        )?;
        Ok(TwistedModel {
            base,
            theta_star: theta_star.to_vec(),
            log_mu_at_twist: z.iter().map(|v| v.ln()).collect(),
            scale: f.clone(),
            f_at_twist: f,
            cbar_q,
            log_mark_normalizer,
        })
    }
}

/// Shorthand for [`TwistedModel::build`].
pub fn build_twisted_model(
    spec: &ModelSpec,
    theta_star: &[f64],
) -> Result<TwistedModel, TwistError> {
    TwistedModel::build(spec, theta_star)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    /// Worst `|Λ^Q(θ) − (Λ(θ + θ*) − Λ(θ*))|` over evaluated grid points.
    pub max_abs_error: f64,
    pub evaluated: usize,
    /// Grid points where either side left its domain.
    pub skipped: Vec<Vec<f64>>,
}

/// Check `Λ^Q(θ) = Λ(θ + θ*) − Λ(θ*)` on a grid.
pub fn twist_consistency_check(
    spec: &ModelSpec,
    q: &TwistedModel,
    theta_grid: &[Vec<f64>],
) -> ConsistencyReport {
    let base = cumulant_value(spec, &q.theta_star);
    let mut report = ConsistencyReport {
        max_abs_error: 0.0,
        evaluated: 0,
        skipped: Vec::new(),
    };
    for theta in theta_grid {
        let shifted: Vec<f64> = theta
            .iter()
            .zip(&q.theta_star)
            .map(|(a, b)| a + b)
            .collect();
        let lhs = cumulant_value(&q.base, theta);
        let rhs = cumulant_value(spec, &shifted) - base;
        if lhs.is_finite() && rhs.is_finite() {
            report.max_abs_error = report.max_abs_error.max((lhs - rhs).abs());
            report.evaluated += 1;
        } else {
            report.skipped.push(theta.clone());
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecayKernel, VectorLaw};

    fn univariate() -> ModelSpec {
        ModelSpec::new(
            vec![1.0],
            vec![vec![DecayKernel::exponential(1.0).unwrap()]],
            vec![VectorLaw::deterministic(vec![0.5]).unwrap()],
            vec![VectorLaw::deterministic(vec![1.0]).unwrap()],
            vec![4.0],
        )
        .unwrap()
    }

    #[test]
    fn zero_twist_is_identity() {
        let spec = univariate();
        let q = TwistedModel::build(&spec, &[0.0]).unwrap();
        assert_eq!(q.base.lambda_bar(), spec.lambda_bar());
        assert_eq!(q.base.kernel(0, 0), spec.kernel(0, 0));
        assert_eq!(q.f_at_twist, vec![1.0]);
    }

    #[test]
    fn unit_mark_twist_scales_rate_and_kernel() {
        let spec = univariate();
        let q = TwistedModel::build(&spec, &[0.1]).unwrap();
        let f = q.f_at_twist[0];
        assert!(f > 1.0);
        assert!((q.base.lambda_bar()[0] - f).abs() < 1e-15);
        assert!((q.base.kernel_norm(0, 0) - f).abs() < 1e-15);
    }
}
