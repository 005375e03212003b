//! Generating-function machinery: the cluster-size PGF fixed point, the
//! boundary of its domain, and the limiting cumulant `Λ` with its gradient.
//!
//! For a component-`j` immigrant the joint PGF `f_j(z)` of its cluster sizes
//! is the minimal solution of
//!
//! ```text
//! f_j(z) = z_j · m_{B_j}(c_{1j}(f_1 − 1), …, c_{dj}(f_d − 1)),
//! ```
//!
//! and `Λ(θ) = Σ_j λ̄_j (f_j(m_U(θ)) − 1)`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::model::{branching_matrix, spectral_radius, ModelSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("claim mgf infinite for columns {columns:?}")]
    OutOfMgfDomain { columns: Vec<usize> },
    #[error("z = {z:?} lies outside the PGF domain ({reason})")]
    OutsideDomain { z: Vec<f64>, reason: String },
    #[error("I - B̂ᵀ is near singular (condition number {cond:e})")]
    NearSingular { cond: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("mark mgf domain exceeded while solving the boundary system")]
    MarkMgfDomainExceeded,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Converged cluster PGF at `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct PgfSolution {
    pub z: Vec<f64>,
    pub f: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// A point `(ẑ, x̂)` on the boundary of the PGF domain, reached along the
/// Perron direction `r` of `B̂(ẑ)ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainBoundary {
    pub r: Vec<f64>,
    pub z_hat: Vec<f64>,
    pub x_hat: Vec<f64>,
    /// Sup-norm residual of the fixed-point equation at `(ẑ, x̂)`.
    pub fixed_point_residual: f64,
    /// Norm of `(I − B̂(ẑ)ᵀ) r` for `r` normalized to unit length.
    pub eigen_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CumulantEval {
    pub theta: Vec<f64>,
    /// `Λ(θ)`, or `+∞` outside the effective domain.
    pub value: f64,
    pub gradient: Option<Vec<f64>>,
    pub in_domain: bool,
}

/// `(m_{U_1}(θ), …, m_{U_d}(θ))`.
pub fn claim_mgf_vector(spec: &ModelSpec, theta: &[f64]) -> Result<Vec<f64>, TransformError> {
    check_len(theta, spec.dstar(), "theta")?;
    let mut out = Vec::with_capacity(spec.d());
    let mut bad = Vec::new();
    for (l, law) in spec.claims().iter().enumerate() {
        match law.mgf(theta) {
            Some(v) => out.push(v),
            None => {
                bad.push(l);
                out.push(f64::INFINITY);
            }
        }
    }
    if bad.is_empty() {
        Ok(out)
    } else {
        Err(TransformError::OutOfMgfDomain { columns: bad })
    }
}

fn check_len(v: &[f64], want: usize, what: &str) -> Result<(), TransformError> {
    if v.len() != want {
        return Err(TransformError::InvalidInput(format!(
            "{what} has length {}, expected {want}",
            v.len()
        )));
    }
    Ok(())
}

/// Mark-mgf argument `s_j(x) = (c_{1j}(x_1 − 1), …, c_{dj}(x_d − 1))`.
fn mark_argument(spec: &ModelSpec, j: usize, x: &[f64], s: &mut [f64]) {
    for (m, sm) in s.iter_mut().enumerate() {
        *sm = spec.kernel_norm(m, j) * (x[m] - 1.0);
    }
}

/// The fixed-point map `T(x)_j = z_j m_{B_j}(s_j(x))`; `None` when a mark mgf
/// is infinite.
fn pgf_map(spec: &ModelSpec, z: &[f64], x: &[f64], out: &mut [f64]) -> Option<()> {
    let mut s = vec![0.0; spec.d()];
    for j in 0..spec.d() {
        mark_argument(spec, j, x, &mut s);
        out[j] = z[j] * spec.mark(j).mgf(&s)?;
    }
    Some(())
}

/// `B̂(z)` at the point `x`: `B̂_mj = z_j c_mj ∂_m m_{B_j}(s_j(x))`. The
/// Jacobian of the fixed-point map is `B̂ᵀ`.
fn b_hat(spec: &ModelSpec, z: &[f64], x: &[f64]) -> Option<DMatrix<f64>> {
    let d = spec.d();
    let mut s = vec![0.0; d];
    let mut b = DMatrix::zeros(d, d);
    for j in 0..d {
        mark_argument(spec, j, x, &mut s);
        for m in 0..d {
            b[(m, j)] = z[j] * spec.kernel_norm(m, j) * spec.mark(j).mgf_partial(&s, m)?;
        }
    }
    Some(b)
}

/// Sup-norm residual `max_j |x_j − z_j m_{B_j}(s_j(x))|`.
pub fn pgf_residual(spec: &ModelSpec, z: &[f64], x: &[f64]) -> f64 {
    let mut t = vec![0.0; spec.d()];
    match pgf_map(spec, z, x, &mut t) {
        Some(()) => x
            .iter()
            .zip(&t)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    }
}

/// Minimal fixed point `f(z)` of the cluster PGF equation.
///
/// Iterates upward from `x = 0`. The map is increasing and convex, so Newton
/// steps `x ← x + (I − B̂ᵀ)^{-1}(T(x) − x)` from below stay below the minimal
/// fixed point and increase monotonically to it; they converge in a handful of
/// steps where plain substitution needs thousands near the domain boundary. A
/// step that would decrease some coordinate, a singular linearization, an
/// infinite mark mgf or a coordinate above the divergence guard can only occur
/// when no fixed point exists, and is reported as `OutsideDomain`.
pub fn solve_cluster_pgf(spec: &ModelSpec, z: &[f64]) -> Result<PgfSolution, TransformError> {
    let d = spec.d();
    check_len(z, d, "z")?;
    if z.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(TransformError::InvalidInput(format!(
            "z must be finite and nonnegative, got {z:?}"
        )));
    }
    if z.iter().all(|v| *v == 1.0) {
        return Ok(PgfSolution {
            z: z.to_vec(),
            f: vec![1.0; d],
            iterations: 0,
            converged: true,
        });
    }
    let num = spec.numerics();
    let outside = |reason: &str| TransformError::OutsideDomain {
        z: z.to_vec(),
        reason: reason.to_string(),
    };
    let mut x = vec![0.0; d];
    let mut t = vec![0.0; d];
    let identity = DMatrix::<f64>::identity(d, d);
    for iter in 1..=num.fixed_point_max_iter {
        pgf_map(spec, z, &x, &mut t).ok_or_else(|| outside("mark mgf infinite"))?;
        let rhs = DVector::from_iterator(d, x.iter().zip(&t).map(|(x, t)| (t - x).max(0.0)));
        let jac = b_hat(spec, z, &x).ok_or_else(|| outside("mark mgf infinite"))?;
        let step = (&identity - jac.transpose())
            .lu()
            .solve(&rhs)
            .ok_or_else(|| outside("singular linearization"))?;
        let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        if step.iter().any(|v| *v < -1e-9 * scale || !v.is_finite()) {
            return Err(outside("iteration left the monotone regime"));
        }
        let mut max_step = 0.0f64;
        for (xi, si) in x.iter_mut().zip(step.iter()) {
            let si = si.max(0.0);
            *xi += si;
            max_step = max_step.max(si);
        }
        if x.iter().any(|v| *v > num.divergence_guard) {
            return Err(outside("divergence guard exceeded"));
        }
        if max_step < num.fixed_point_tol * scale {
            let residual = pgf_residual(spec, z, &x);
            if residual < num.fixed_point_residual_tol {
                return Ok(PgfSolution {
                    z: z.to_vec(),
                    f: x,
                    iterations: iter,
                    converged: true,
                });
            }
            return Err(outside("stalled away from a fixed point"));
        }
    }
    Err(TransformError::NoConvergence {
        iterations: num.fixed_point_max_iter,
        residual: pgf_residual(spec, z, &x),
    })
}

/// `∂f_j/∂z_k = [(I − B̂ᵀ)^{-1} diag(f/z)]_{jk}`.
pub fn cluster_pgf_jacobian(
    spec: &ModelSpec,
    sol: &PgfSolution,
) -> Result<DMatrix<f64>, TransformError> {
    let d = spec.d();
    if sol.z.iter().any(|v| *v <= 0.0) {
        return Err(TransformError::InvalidInput(
            "jacobian needs z > 0 componentwise".into(),
        ));
    }
    let bh = b_hat(spec, &sol.z, &sol.f).ok_or_else(|| TransformError::OutsideDomain {
        z: sol.z.clone(),
        reason: "mark mgf infinite".into(),
    })?;
    let a = DMatrix::<f64>::identity(d, d) - bh.transpose();
    let cond = condition_number(&a);
    if !(cond <= spec.numerics().near_singular_cond) {
        return Err(TransformError::NearSingular { cond });
    }
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        sol.f.iter().zip(&sol.z).map(|(f, z)| f / z),
    ));
    a.lu().solve(&diag).ok_or(TransformError::NearSingular {
        cond: f64::INFINITY,
    })
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn out_of_domain(theta: &[f64]) -> CumulantEval {
    CumulantEval {
        theta: theta.to_vec(),
        value: f64::INFINITY,
        gradient: None,
        in_domain: false,
    }
}

/// `Λ(θ)`, with domain exit reported through `in_domain`.
pub fn limiting_cumulant(spec: &ModelSpec, theta: &[f64]) -> CumulantEval {
    match cumulant_with_pgf(spec, theta) {
        Some((value, _)) => CumulantEval {
            theta: theta.to_vec(),
            value,
            gradient: None,
            in_domain: true,
        },
        None => out_of_domain(theta),
    }
}

/// `Λ(θ)` and `∇Λ(θ)` in one solve; the gradient is `None` when the Jacobian
/// is refused as near singular.
pub fn limiting_cumulant_with_gradient(spec: &ModelSpec, theta: &[f64]) -> CumulantEval {
    match cumulant_with_pgf(spec, theta) {
        Some((value, sol)) => CumulantEval {
            theta: theta.to_vec(),
            value,
            gradient: gradient_from_solution(spec, theta, &sol).ok(),
            in_domain: true,
        },
        None => out_of_domain(theta),
    }
}

fn cumulant_with_pgf(spec: &ModelSpec, theta: &[f64]) -> Option<(f64, PgfSolution)> {
    if theta.len() != spec.dstar() {
        return None;
    }
    let z = claim_mgf_vector(spec, theta).ok()?;
    let sol = solve_cluster_pgf(spec, &z).ok()?;
    let value = spec
        .lambda_bar()
        .iter()
        .zip(&sol.f)
        .map(|(l, f)| l * (f - 1.0))
        .sum();
    Some((value, sol))
}

/// `Λ(θ)` or `+∞`.
pub fn cumulant_value(spec: &ModelSpec, theta: &[f64]) -> f64 {
    limiting_cumulant(spec, theta).value
}

/// `∇Λ(θ)` by the chain rule through the PGF Jacobian.
pub fn cumulant_gradient(spec: &ModelSpec, theta: &[f64]) -> Result<Vec<f64>, TransformError> {
    let z = claim_mgf_vector(spec, theta)?;
    let sol = solve_cluster_pgf(spec, &z)?;
    gradient_from_solution(spec, theta, &sol)
}

fn gradient_from_solution(
    spec: &ModelSpec,
    theta: &[f64],
    sol: &PgfSolution,
) -> Result<Vec<f64>, TransformError> {
    let jf = cluster_pgf_jacobian(spec, sol)?;
    let lambda = spec.lambda_bar();
    // w_k = Σ_j λ̄_j ∂f_j/∂z_k
    let w: Vec<f64> = (0..spec.d())
        .map(|k| (0..spec.d()).map(|j| lambda[j] * jf[(j, k)]).sum())
        .collect();
    let mut grad = vec![0.0; spec.dstar()];
    for (k, law) in spec.claims().iter().enumerate() {
        for (i, g) in grad.iter_mut().enumerate() {
            *g += w[k]
                * law
                    .mgf_partial(theta, i)
                    .expect("claim mgf finite in domain");
        }
    }
    Ok(grad)
}

/// Marginal cumulant `Λ_i(θ)` (θ placed in coordinate `i`) and
/// `Ψ_i(θ) = Λ_i(θ) − r_i θ`. Both are `+∞` outside the domain.
pub fn marginal_cumulants(spec: &ModelSpec, i: usize, theta: f64) -> (f64, f64) {
    let lam = cumulant_value(spec, &embed(spec.dstar(), i, theta));
    (lam, lam - spec.premium()[i] * theta)
}

/// Unit-coordinate embedding `θ e_i`.
pub fn embed(dstar: usize, i: usize, theta: f64) -> Vec<f64> {
    let mut v = vec![0.0; dstar];
    v[i] = theta;
    v
}

/// Solve for the boundary point `(ẑ, x̂)` of the PGF domain in direction `r`.
///
/// `x̂` solves `x_j Σ_k r_k c_kj ∂_k m_{B_j}(s_j(x)) = r_j m_{B_j}(s_j(x))`
/// by damped Newton; then `ẑ_j = r_j / Σ_k r_k c_kj ∂_k m_{B_j}(s_j(x̂))`.
pub fn domain_boundary(spec: &ModelSpec, r: &[f64]) -> Result<DomainBoundary, TransformError> {
    let d = spec.d();
    check_len(r, d, "r")?;
    if r.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(TransformError::InvalidInput(
            "boundary direction must be positive".into(),
        ));
    }
    let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r: Vec<f64> = r.iter().map(|v| v / rnorm).collect();
    let num = spec.numerics();
    let rho = spectral_radius(&branching_matrix(spec), num).unwrap_or(0.0);
    let start = if rho > 0.0 {
        1.0 + 0.5 * (1.0 / rho - 1.0)
    } else {
        2.0
    };
    let mut x = vec![start; d];
    let mut g = boundary_system(spec, &r, &x).ok_or(TransformError::MarkMgfDomainExceeded)?;
    let mut iterations = 0;
    while norm(&g) > num.newton_tol * 1e-2 {
        if iterations >= num.newton_max_iter {
            return Err(TransformError::NoConvergence {
                iterations,
                residual: norm(&g),
            });
        }
        iterations += 1;
        let jac = boundary_jacobian(spec, &r, &x).ok_or(TransformError::MarkMgfDomainExceeded)?;
        let step = jac.lu().solve(&DVector::from_column_slice(&g)).ok_or(
            TransformError::NoConvergence {
                iterations,
                residual: norm(&g),
            },
        )?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..=num.max_halvings {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(x, s)| x - t * s).collect();
            if let Some(gt) = boundary_system(spec, &r, &trial) {
                if norm(&gt) < norm(&g) || norm(&gt) <= num.newton_tol * 1e-2 {
                    x = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // no decrease possible: either stagnation at machine precision or a wall
            if boundary_system(
                spec,
                &r,
                &x.iter()
                    .zip(step.iter())
                    .map(|(x, s)| x - s)
                    .collect::<Vec<_>>(),
            )
            .is_none()
            {
                return Err(TransformError::MarkMgfDomainExceeded);
            }
            break;
        }
    }
    if norm(&g) > num.newton_tol {
        return Err(TransformError::NoConvergence {
            iterations,
            residual: norm(&g),
        });
    }
    let mut s = vec![0.0; d];
    let mut z_hat = vec![0.0; d];
    for j in 0..d {
        mark_argument(spec, j, &x, &mut s);
        let denom: f64 = (0..d)
            .map(|k| r[k] * spec.kernel_norm(k, j) * spec.mark(j).mgf_partial(&s, k).unwrap())
            .sum();
        z_hat[j] = r[j] / denom;
    }
    let fixed_point_residual = pgf_residual(spec, &z_hat, &x);
    let bh = b_hat(spec, &z_hat, &x).ok_or(TransformError::MarkMgfDomainExceeded)?;
    let rv = DVector::from_column_slice(&r);
    let eigen_residual = (&rv - bh.transpose() * &rv).norm();
    if x.iter().any(|v| *v <= 1.0) {
        return Err(TransformError::NoConvergence {
            iterations,
            residual: norm(&g),
        });
    }
    Ok(DomainBoundary {
        r,
        z_hat,
        x_hat: x,
        fixed_point_residual,
        eigen_residual,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `G_j(x) = x_j Σ_k r_k c_kj ∂_k m_j − r_j m_j`, evaluated at `s_j(x)`.
fn boundary_system(spec: &ModelSpec, r: &[f64], x: &[f64]) -> Option<Vec<f64>> {
    let d = spec.d();
    let mut s = vec![0.0; d];
    let mut g = vec![0.0; d];
    for j in 0..d {
        mark_argument(spec, j, x, &mut s);
        let law = spec.mark(j);
        let m = law.mgf(&s)?;
        let mut acc = 0.0;
        for k in 0..d {
            acc += r[k] * spec.kernel_norm(k, j) * law.mgf_partial(&s, k)?;
        }
        g[j] = x[j] * acc - r[j] * m;
    }
    Some(g)
}

fn boundary_jacobian(spec: &ModelSpec, r: &[f64], x: &[f64]) -> Option<DMatrix<f64>> {
    let d = spec.d();
    let mut s = vec![0.0; d];
    let mut jac = DMatrix::zeros(d, d);
    for j in 0..d {
        mark_argument(spec, j, x, &mut s);
        let law = spec.mark(j);
        let mut acc = 0.0;
        for k in 0..d {
            acc += r[k] * spec.kernel_norm(k, j) * law.mgf_partial(&s, k)?;
        }
        for l in 0..d {
            let c_lj = spec.kernel_norm(l, j);
            let mut second = 0.0;
            for k in 0..d {
                second += r[k] * spec.kernel_norm(k, j) * law.mgf_second_partial(&s, k, l)?;
            }
            jac[(j, l)] = x[j] * second * c_lj - r[j] * law.mgf_partial(&s, l)? * c_lj;
            if l == j {
                jac[(j, l)] += acc;
            }
        }
    }
    Some(jac)
}
