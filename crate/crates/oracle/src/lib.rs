//! Independent brute-force references for tests: Borel probabilities,
//! truncated-series cumulants, finite differences, grid Legendre transforms,
//! Lambert W, quadrature and a Kolmogorov–Smirnov test.
//!
//! This crate deliberately does not depend on the solver crate it checks.
//! Everything runs in double precision; series are summed with compensated
//! summation and truncated only once the remaining tail is provably below the
//! stated bound.

use statrs::function::gamma::ln_gamma;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("argument outside the oracle's domain: {0}")]
    DomainError(String),
    #[error("θ = {theta} is too close to the boundary log(ẑ) = {boundary}")]
    TooCloseToBoundary { theta: f64, boundary: f64 },
    #[error("stencil point {point:?} is outside the function's domain")]
    StencilOutOfDomain { point: Vec<f64> },
}

/// `P(S = n) = e^{−μn} (μn)^{n−1} / n!` for the Borel(μ) law.
pub fn borel_pmf(mu: f64, n: u64) -> Result<f64, OracleError> {
    if !(mu > 0.0 && mu < 1.0) || n == 0 {
        return Err(OracleError::DomainError(format!("mu = {mu}, n = {n}")));
    }
    let nf = n as f64;
    Ok((-mu * nf + (nf - 1.0) * (mu * nf).ln() - ln_gamma(nf + 1.0)).exp())
}

/// Univariate boundary `ẑ = e^{μ−1}/μ` for unit marks and branching mean `μ`.
pub fn univariate_z_hat(mu: f64) -> f64 {
    (mu - 1.0).exp() / mu
}

/// Univariate boundary `x̂ = 1/μ`.
pub fn univariate_x_hat(mu: f64) -> f64 {
    1.0 / mu
}

#[derive(Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// `λ̄ (Σ_n e^{θn} P(S = n) − 1)` for Borel(μ) cluster sizes, truncated once
/// the geometric tail bound falls below `1e-12`.
pub fn series_cumulant_univariate(
    mu: f64,
    lambda_bar: f64,
    theta: f64,
) -> Result<f64, OracleError> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(OracleError::DomainError(format!("mu = {mu}")));
    }
    let boundary = univariate_z_hat(mu).ln();
    if theta.exp() > 0.99 * univariate_z_hat(mu) {
        return Err(OracleError::TooCloseToBoundary { theta, boundary });
    }
    // consecutive-term ratios increase to q = e^θ μ e^{1−μ} < 1
    let q = theta.exp() * mu * (1.0 - mu).exp();
    let mut acc = Kahan::default();
    let mut n = 1u64;
    loop {
        let term = (theta * n as f64).exp() * borel_pmf(mu, n)?;
        acc.add(term);
        if n > 10 && term * q / (1.0 - q) < 1e-12 * 1e-2 {
            break;
        }
        n += 1;
    }
    Ok(lambda_bar * (acc.sum - 1.0))
}

/// Central differences `(f(x + h e_k) − f(x − h e_k)) / 2h`.
pub fn finite_diff_gradient<F: Fn(&[f64]) -> f64>(
    f: F,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, OracleError> {
    let mut grad = Vec::with_capacity(x.len());
    let mut p = x.to_vec();
    for k in 0..x.len() {
        p[k] = x[k] + h;
        let up = f(&p);
        if !up.is_finite() {
            return Err(OracleError::StencilOutOfDomain { point: p });
        }
        p[k] = x[k] - h;
        let dn = f(&p);
        if !dn.is_finite() {
            return Err(OracleError::StencilOutOfDomain { point: p });
        }
        p[k] = x[k];
        grad.push((up - dn) / (2.0 * h));
    }
    Ok(grad)
}

/// `max_{θ ∈ grid} (θ x − Λ(θ))` on `lo, lo + step, …, ≤ hi`, skipping
/// out-of-domain points. Returns `(value, argmax)`.
pub fn grid_legendre<F: Fn(f64) -> f64>(f: F, x: f64, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, lo);
    let n = ((hi - lo) / step).floor() as u64;
    for k in 0..=n {
        let t = lo + k as f64 * step;
        let v = f(t);
        if v.is_finite() && t * x - v > best.0 {
            best = (t * x - v, t);
        }
    }
    best
}

/// Principal branch `W_0(x)` for `x ≥ −1/e` by Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64, OracleError> {
    let branch = -(-1.0f64).exp();
    if x < branch {
        return Err(OracleError::DomainError(format!("W0 undefined at {x}")));
    }
    if x == branch {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        // expansion about the branch point
        let p = (2.0 * (1.0 + std::f64::consts::E * x)).sqrt();
        -1.0 + p - p * p / 3.0
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.8
    } else {
        x.ln() - x.ln().ln()
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let step = f / (ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0));
        w -= step;
        if step.abs() <= 1e-16 * w.abs().max(1e-300) {
            break;
        }
    }
    Ok(w)
}

/// Univariate PGF `f = z e^{μ(f−1)}` (unit marks) in closed form,
/// `f = −W_0(−μ z e^{−μ}) / μ`.
pub fn univariate_pgf_lambert(mu: f64, z: f64) -> Result<f64, OracleError> {
    Ok(-lambert_w0(-mu * z * (-mu).exp())? / mu)
}

/// Univariate PGF by damped substitution from 0.
pub fn univariate_pgf_picard(mu: f64, z: f64, iterations: usize, damping: f64) -> f64 {
    let mut f = 0.0f64;
    for _ in 0..iterations {
        let next = z * (mu * (f - 1.0)).exp();
        f = (1.0 - damping) * f + damping * next;
    }
    f
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Asymptotic Kolmogorov–Smirnov p-value of a sample against Exp(1).
pub fn ks_exp1_pvalue(samples: &[f64]) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut dmax: f64 = 0.0;
    for (k, x) in xs.iter().enumerate() {
        let cdf = 1.0 - (-x).exp();
        dmax = dmax.max((k as f64 + 1.0) / n - cdf).max(cdf - k as f64 / n);
    }
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * dmax;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0f64).powi(k - 1) * (-2.0 * kf * kf * lam * lam).exp();
        p += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

/// Total variation `½ Σ |p_k − q_k|` over a common finite support.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn borel_first_terms() {
        assert!((borel_pmf(0.5, 1).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((borel_pmf(0.5, 2).unwrap() - (-1.0f64).exp() / 2.0).abs() < 1e-15);
        assert!(borel_pmf(1.0, 1).is_err());
    }

    #[test]
    fn borel_mean() {
        let mean: f64 = (1..=500)
            .map(|n| n as f64 * borel_pmf(0.5, n).unwrap())
            .sum();
        assert!((mean - 2.0).abs() < 1e-6);
    }

    #[test]
    fn series_guard() {
        assert!(series_cumulant_univariate(0.5, 1.0, 0.0).unwrap().abs() < 1e-12);
        let b = univariate_z_hat(0.5).ln();
        assert!(matches!(
            series_cumulant_univariate(0.5, 1.0, b + 1e-3),
            Err(OracleError::TooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn lambert_identity() {
        for x in [-0.36, -0.2, 0.0, 0.5, 3.0, 40.0] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() < 1e-14 * x.abs().max(1.0));
        }
    }

    #[test]
    fn picard_matches_lambert() {
        let a = univariate_pgf_picard(0.5, 1.1, 500, 0.8);
        let b = univariate_pgf_lambert(0.5, 1.1).unwrap();
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn linear_gradient_exact() {
        let g = finite_diff_gradient(|x| 3.0 * x[0] - 2.0 * x[1], &[0.3, 0.7], 1e-6).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9 && (g[1] + 2.0).abs() < 1e-9);
        let wall = finite_diff_gradient(
            |x| if x[0] > 1.0 { f64::INFINITY } else { x[0] },
            &[1.0],
            1e-6,
        );
        assert!(matches!(wall, Err(OracleError::StencilOutOfDomain { .. })));
    }

    #[test]
    fn ks_accepts_exponential_quantiles() {
        let xs: Vec<f64> = (0..1000)
            .map(|k| -(1.0 - (k as f64 + 0.5) / 1000.0).ln())
            .collect();
        assert!(ks_exp1_pvalue(&xs) > 0.99);
    }
}
