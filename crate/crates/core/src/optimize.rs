//! Root finding and convex conjugates: the Cramér root `θ*` of
//! `Ψ_i(θ) = Λ_i(θ) − r_i θ`, the Legendre transform `Λ*`, and the dominant
//! point of an orthant exceedance set.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{mean_drift, validate_net_profit, ModelError, ModelSpec};
use crate::transforms::{
    cumulant_value, embed, limiting_cumulant_with_gradient, marginal_cumulants,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error(
        "net profit condition fails for component {component}: premium {premium} <= drift {drift}"
    )]
    NetProfitViolated {
        component: usize,
        premium: f64,
        drift: f64,
    },
    #[error("Ψ stays negative on the whole domain of component {component}: no Cramér root")]
    HeavyTailOrNoRoot { component: usize },
    #[error("ascent reached the domain boundary without stationarity (gradient gap {gap:e})")]
    NoInteriorMaximizer { gap: f64 },
    #[error("target {target:?} is not a rare event: it lies below the drift {drift:?}")]
    InfeasibleRareEvent { target: Vec<f64>, drift: Vec<f64> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Twist vector matching a target mean, with its rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistSolution {
    pub theta: Vec<f64>,
    /// `∇Λ(θ)`; for exceedance problems this is the dominant point `a*`.
    pub target: Vec<f64>,
    /// `θᵀ target − Λ(θ)`.
    pub rate: f64,
    /// Components with `θ_k > 0`.
    pub active_set: Vec<usize>,
}

/// The positive root `θ*` of `Ψ_i`.
pub fn solve_theta_star(spec: &ModelSpec, i: usize) -> Result<f64, OptimizeError> {
    if !validate_net_profit(spec, i)? {
        return Err(OptimizeError::NetProfitViolated {
            component: i,
            premium: spec.premium()[i],
            drift: mean_drift(spec)?[i],
        });
    }
    let num = spec.numerics();
    let psi = |t: f64| marginal_cumulants(spec, i, t).1;
    let mut lo = 0.0;
    let mut hi = 1e-3;
    // geometric expansion until Ψ > 0 or the domain is left
    let mut expansions = 0;
    loop {
        let v = psi(hi);
        if v.is_infinite() {
            // largest in-domain θ between lo and hi, watching for Ψ > 0 on the way
            let mut out = hi;
            loop {
                if out - lo < num.bisection_tol {
                    return Err(OptimizeError::HeavyTailOrNoRoot { component: i });
                }
                let mid = 0.5 * (lo + out);
                let v = psi(mid);
                if v.is_infinite() {
                    out = mid;
                } else if v > 0.0 {
                    hi = mid;
                    break;
                } else {
                    lo = mid;
                }
            }
            break;
        }
        if v > 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 1100 {
            return Err(OptimizeError::HeavyTailOrNoRoot { component: i });
        }
    }
    while hi - lo >= num.bisection_tol {
        let mid = 0.5 * (lo + hi);
        if psi(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximize `θᵀa − Λ(θ)` over `θ` with `θ_k = 0` wherever `free[k]` is false.
///
/// Damped Newton on the free coordinates with a Hessian from central
/// differences of the analytic gradient; each step is halved until it stays
/// in the domain and does not decrease the objective.
pub fn maximize_dual(
    spec: &ModelSpec,
    a: &[f64],
    free: &[bool],
) -> Result<TwistSolution, OptimizeError> {
    let dstar = spec.dstar();
    if a.len() != dstar || free.len() != dstar {
        return Err(OptimizeError::InvalidInput(format!(
            "target and mask must have length {dstar}"
        )));
    }
    let num = spec.numerics();
    let idx: Vec<usize> = (0..dstar).filter(|k| free[*k]).collect();
    let mut theta = vec![0.0; dstar];
    let eval = |t: &[f64]| limiting_cumulant_with_gradient(spec, t);
    let objective =
        |t: &[f64], lam: f64| -> f64 { t.iter().zip(a).map(|(t, a)| t * a).sum::<f64>() - lam };
    let mut cur = eval(&theta);
    let gap_of = |g: &[f64]| idx.iter().map(|&k| (a[k] - g[k]).abs()).fold(0.0, f64::max);
    let mut grad = cur
        .gradient
        .clone()
        .ok_or(OptimizeError::NoInteriorMaximizer { gap: f64::NAN })?;
    let mut iterations = 0;
    while !idx.is_empty() && gap_of(&grad) > 1e-2 * num.newton_tol {
        if iterations >= num.newton_max_iter {
            break;
        }
        iterations += 1;
        let hess = reduced_hessian(spec, &theta, &idx);
        let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&k| a[k] - grad[k]));
        let dir = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => rhs.clone(), // fall back to gradient ascent
        };
        let f0 = objective(&theta, cur.value);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=num.max_halvings {
            let mut trial = theta.clone();
            for (n, &k) in idx.iter().enumerate() {
                trial[k] += t * dir[n];
            }
            let e = eval(&trial);
            if e.in_domain
                && e.gradient.is_some()
                && objective(&trial, e.value) >= f0 - 1e-14 * f0.abs().max(1.0)
            {
                theta = trial;
                grad = e.gradient.clone().unwrap();
                cur = e;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let gap = gap_of(&grad);
    if gap > num.newton_tol {
        return Err(OptimizeError::NoInteriorMaximizer { gap });
    }
    let mut target = grad.clone();
    for &k in &idx {
        target[k] = a[k];
    }
    let rate = objective(&theta, cur.value)
        + idx
            .iter()
            .map(|&k| theta[k] * (target[k] - a[k]))
            .sum::<f64>();
    let active_set = (0..dstar).filter(|&k| theta[k] > 0.0).collect();
    Ok(TwistSolution {
        theta,
        target,
        rate: rate.max(0.0),
        active_set,
    })
}

/// Hessian of `Λ` restricted to `idx`, by differences of the analytic gradient.
fn reduced_hessian(spec: &ModelSpec, theta: &[f64], idx: &[usize]) -> DMatrix<f64> {
    let n = idx.len();
    let mut h = DMatrix::zeros(n, n);
    let grad_at = |t: &[f64]| {
        let e = limiting_cumulant_with_gradient(spec, t);
        e.gradient
    };
    let base = grad_at(theta);
    for (c, &k) in idx.iter().enumerate() {
        let step = 1e-6 * theta[k].abs().max(1e-2);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[k] += step;
        dn[k] -= step;
        let col: Vec<f64> = match (grad_at(&up), grad_at(&dn)) {
            (Some(gu), Some(gd)) => idx
                .iter()
                .map(|&m| (gu[m] - gd[m]) / (2.0 * step))
                .collect(),
            (None, Some(gd)) if base.is_some() => {
                let b = base.as_ref().unwrap();
                idx.iter().map(|&m| (b[m] - gd[m]) / step).collect()
            }
            _ => idx
                .iter()
                .map(|&m| if m == k { 1.0 } else { 0.0 })
                .collect(),
        };
        for (r, v) in col.into_iter().enumerate() {
            h[(r, c)] = v;
        }
    }
    // symmetrize away difference noise
    let ht = h.transpose();
    (h + ht) * 0.5
}

/// `Λ*(x) = sup_θ (θᵀx − Λ(θ))` and its maximizer.
pub fn legendre_transform(spec: &ModelSpec, x: &[f64]) -> Result<TwistSolution, OptimizeError> {
    maximize_dual(spec, x, &vec![true; spec.dstar()])
}

/// Marginal rate `Λ_i*(x) = sup_θ (θx − Λ_i(θ))`; returns `(θ, Λ_i*(x))`.
pub fn marginal_legendre(spec: &ModelSpec, i: usize, x: f64) -> Result<(f64, f64), OptimizeError> {
    let dstar = spec.dstar();
    if i >= dstar {
        return Err(ModelError::IndexOutOfRange {
            index: i,
            len: dstar,
        }
        .into());
    }
    let mask: Vec<bool> = (0..dstar).map(|k| k == i).collect();
    let sol = maximize_dual(spec, &embed(dstar, i, x), &mask)?;
    Ok((
        sol.theta[i],
        sol.theta[i] * x - cumulant_value(spec, &sol.theta),
    ))
}

/// Dominant point of `{x ≥ a}` and its twist `θ(a*) ≥ 0`.
pub fn dominant_point(spec: &ModelSpec, a: &[f64]) -> Result<TwistSolution, OptimizeError> {
    let thresholds: Vec<Option<f64>> = a.iter().map(|v| Some(*v)).collect();
    dominant_point_partial(spec, &thresholds)
}

/// Dominant point of `{x_k ≥ a_k for every k with a threshold}`; coordinates
/// without a threshold are unconstrained and carry no twist.
pub fn dominant_point_partial(
    spec: &ModelSpec,
    thresholds: &[Option<f64>],
) -> Result<TwistSolution, OptimizeError> {
    let dstar = spec.dstar();
    if thresholds.len() != dstar {
        return Err(OptimizeError::InvalidInput(format!(
            "thresholds must have length {dstar}"
        )));
    }
    let drift = mean_drift(spec)?;
    let rare = thresholds
        .iter()
        .zip(&drift)
        .any(|(a, m)| matches!(a, Some(a) if a > m));
    let a: Vec<f64> = thresholds.iter().map(|t| t.unwrap_or(0.0)).collect();
    if !rare {
        return Err(OptimizeError::InfeasibleRareEvent { target: a, drift });
    }
    let constrained: Vec<bool> = thresholds.iter().map(Option::is_some).collect();
    let mut free = constrained.clone();
    let tol = spec.numerics().newton_tol;
    for _ in 0..=(1usize << dstar.min(16)) {
        let sol = maximize_dual(spec, &a, &free)?;
        let mut changed = false;
        for k in 0..dstar {
            if free[k] && sol.theta[k] < 0.0 {
                free[k] = false;
                changed = true;
            } else if !free[k] && constrained[k] && sol.target[k] < a[k] - tol {
                free[k] = true;
                changed = true;
            }
        }
        if !changed {
            return Ok(sol);
        }
    }
    Err(OptimizeError::NoInteriorMaximizer { gap: f64::NAN })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DecayKernel, VectorLaw};

    fn poisson_like(r: f64) -> ModelSpec {
        // no self-excitation: compound Poisson with unit claims, Λ(θ) = e^θ − 1
        ModelSpec::new(
            vec![1.0],
            vec![vec![DecayKernel::exponential(1.0).unwrap()]],
            vec![VectorLaw::deterministic(vec![0.0]).unwrap()],
            vec![VectorLaw::deterministic(vec![1.0]).unwrap()],
            vec![r],
        )
        .unwrap()
    }

    #[test]
    fn compound_poisson_root() {
        // e^θ − 1 = 2θ
        let t = solve_theta_star(&poisson_like(2.0), 0).unwrap();
        assert!((t.exp() - 1.0 - 2.0 * t).abs() < 1e-9);
    }

    #[test]
    fn net_profit_violation() {
        assert!(matches!(
            solve_theta_star(&poisson_like(0.5), 0),
            Err(OptimizeError::NetProfitViolated { .. })
        ));
    }

    #[test]
    fn poisson_legendre() {
        // Λ*(x) = x log x − x + 1
        let sol = legendre_transform(&poisson_like(2.0), &[3.0]).unwrap();
        assert!((sol.theta[0] - 3.0f64.ln()).abs() < 1e-9);
        assert!((sol.rate - (3.0 * 3.0f64.ln() - 2.0)).abs() < 1e-9);
    }
}
