//! Decay kernels `g_ij` and their integrals.

use super::ModelError;

/// Relative tolerance between a tabulated kernel's declared L1 norm and the
/// integral of its interpolant.
const L1_CONSISTENCY_RTOL: f64 = 1e-6;

/// A nonnegative, nonincreasing, integrable excitation kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum DecayKernel {
    /// `g(t) = scale * exp(-alpha t)`, with L1 norm `scale / alpha`.
    Exponential { alpha: f64, scale: f64 },
    /// Piecewise-linear interpolation of a sampled grid, zero past the last node.
    Tabulated(TabulatedKernel),
}

impl DecayKernel {
    /// Unit-amplitude exponential kernel `exp(-alpha t)`.
    pub fn exponential(alpha: f64) -> Result<Self, ModelError> {
        Self::scaled_exponential(alpha, 1.0)
    }

    pub fn scaled_exponential(alpha: f64, scale: f64) -> Result<Self, ModelError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "exponential kernel rate must be positive, got {alpha}"
            )));
        }
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "exponential kernel scale must be nonnegative, got {scale}"
            )));
        }
        Ok(DecayKernel::Exponential { alpha, scale })
    }

    pub fn l1_norm(&self) -> f64 {
        match self {
            DecayKernel::Exponential { alpha, scale } => scale / alpha,
            DecayKernel::Tabulated(tab) => tab.l1_norm,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            DecayKernel::Exponential { alpha, scale } => scale * (-alpha * t).exp(),
            DecayKernel::Tabulated(tab) => tab.value(t),
        }
    }

    /// `G(s) = ∫_0^s g(v) dv`.
    pub fn partial_integral(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            DecayKernel::Exponential { alpha, scale } => scale * (-(-alpha * s).exp_m1()) / alpha,
            DecayKernel::Tabulated(tab) => tab.partial_integral(s),
        }
    }

    /// The kernel multiplied by a nonnegative constant.
    pub fn scaled(&self, factor: f64) -> DecayKernel {
        match self {
            DecayKernel::Exponential { alpha, scale } => DecayKernel::Exponential {
                alpha: *alpha,
                scale: scale * factor,
            },
            DecayKernel::Tabulated(tab) => DecayKernel::Tabulated(tab.scaled(factor)),
        }
    }

    /// Time after which the kernel vanishes identically, if any.
    pub fn support_end(&self) -> f64 {
        match self {
            DecayKernel::Exponential { .. } => f64::INFINITY,
            DecayKernel::Tabulated(tab) => tab.support_end(),
        }
    }

    /// Draw a delay from the normalized density `g / c` by inversion, given a
    /// uniform variate in `[0, 1)`.
    pub fn sample_delay(&self, uniform: f64) -> f64 {
        match self {
            DecayKernel::Exponential { alpha, .. } => -(-uniform).ln_1p() / alpha,
            DecayKernel::Tabulated(tab) => tab.inverse_cdf(uniform),
        }
    }
}

/// Kernel samples `values[k] = g(k * step)` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    step: f64,
    values: Vec<f64>,
    l1_norm: f64,
    cumulative: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(step: f64, values: Vec<f64>, l1_norm: f64) -> Result<Self, ModelError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "tabulated kernel step must be positive, got {step}"
            )));
        }
        if values.len() < 2 {
            return Err(ModelError::InvalidParameter(
                "tabulated kernel needs at least two samples".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ModelError::InvalidParameter(
                "tabulated kernel samples must be finite and nonnegative".into(),
            ));
        }
        if let Some(k) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(ModelError::InvalidParameter(format!(
                "tabulated kernel increases between samples {k} and {}",
                k + 1
            )));
        }
        let cumulative = cumulative_integrals(step, &values);
        let integral = *cumulative.last().unwrap();
        if !(l1_norm.is_finite() && l1_norm >= 0.0)
            || (integral - l1_norm).abs() > L1_CONSISTENCY_RTOL * l1_norm.max(1e-300)
        {
            return Err(ModelError::InvalidParameter(format!(
                "declared L1 norm {l1_norm} does not match tabulated integral {integral}"
            )));
        }
        Ok(TabulatedKernel {
            step,
            values,
            l1_norm,
            cumulative,
        })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    fn support_end(&self) -> f64 {
        self.step * (self.values.len() - 1) as f64
    }

    fn value(&self, t: f64) -> f64 {
        let pos = t / self.step;
        let k = pos.floor() as usize;
        if k + 1 >= self.values.len() {
            return if t <= self.support_end() {
                *self.values.last().unwrap()
            } else {
                0.0
            };
        }
        let frac = pos - k as f64;
        self.values[k] + (self.values[k + 1] - self.values[k]) * frac
    }

    fn partial_integral(&self, s: f64) -> f64 {
        if s >= self.support_end() {
            return self.l1_norm;
        }
        let k = (s / self.step).floor() as usize;
        let x = s - k as f64 * self.step;
        self.cumulative[k] + simpson(|v| self.value(k as f64 * self.step + v), 0.0, x)
    }

    fn inverse_cdf(&self, uniform: f64) -> f64 {
        let target = uniform * self.l1_norm;
        let k = match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&target).unwrap())
        {
            Ok(k) => return k as f64 * self.step,
            Err(k) => k.saturating_sub(1).min(self.values.len() - 2),
        };
        let rem = target - self.cumulative[k];
        let g0 = self.values[k];
        let slope = (self.values[k + 1] - g0) / self.step;
        // g0 x + slope x^2 / 2 = rem, smallest nonnegative root
        let x = if slope.abs() < 1e-300 {
            rem / g0
        } else {
            let disc = (g0 * g0 + 2.0 * slope * rem).max(0.0);
            2.0 * rem / (g0 + disc.sqrt())
        };
        k as f64 * self.step + x.clamp(0.0, self.step)
    }

    fn scaled(&self, factor: f64) -> TabulatedKernel {
        TabulatedKernel {
            step: self.step,
            values: self.values.iter().map(|v| v * factor).collect(),
            l1_norm: self.l1_norm * factor,
            cumulative: self.cumulative.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Cumulative integrals of the interpolant at each grid node.
fn cumulative_integrals(step: f64, values: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        let (a, b) = (w[0], w[1]);
        acc += simpson(|v| a + (b - a) * v / step, 0.0, step);
        out.push(acc);
    }
    out
}

/// Adaptive Simpson quadrature to absolute tolerance 1e-10.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = rule(f, a, fa, m, fm);
        let (rm, frm, right) = rule(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = rule(&f, a, fa, b, fb);
    recurse(&f, a, fa, b, fb, whole, m, fm, 1e-10, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_norm_is_inverse_rate() {
        let k = DecayKernel::exponential(2.0).unwrap();
        assert_eq!(k.l1_norm(), 0.5);
        assert!((k.partial_integral(1.0) - (1.0 - (-2.0f64).exp()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn tabulated_rejects_increasing_samples() {
        let err = TabulatedKernel::new(0.5, vec![1.0, 0.5, 0.6, 0.0], 0.65).unwrap_err();
        assert!(matches!(err, ModelError::InvalidParameter(_)));
    }

    #[test]
    fn tabulated_rejects_inconsistent_norm() {
        assert!(TabulatedKernel::new(1.0, vec![1.0, 0.0], 0.7).is_err());
        assert!(TabulatedKernel::new(1.0, vec![1.0, 0.0], 0.5).is_ok());
    }

    #[test]
    fn tabulated_partial_integral_matches_trapezoid() {
        let tab = TabulatedKernel::new(0.5, vec![1.0, 0.6, 0.2, 0.0], 0.65).unwrap();
        let k = DecayKernel::Tabulated(tab);
        // first cell is linear from 1.0 to 0.6; integral to 0.25 is 0.25*(1+0.8)/2
        assert!((k.partial_integral(0.25) - 0.225).abs() < 1e-12);
        assert!((k.partial_integral(10.0) - 0.65).abs() < 1e-15);
        assert_eq!(k.value(2.0), 0.0);
    }

    #[test]
    fn tabulated_inverse_cdf_inverts_partial_integral() {
        let tab = TabulatedKernel::new(0.5, vec![1.0, 0.6, 0.2, 0.0], 0.65).unwrap();
        let k = DecayKernel::Tabulated(tab);
        for &u in &[0.0, 0.1, 0.37, 0.5, 0.9, 0.999] {
            let x = k.sample_delay(u);
            assert!(
                (k.partial_integral(x) / 0.65 - u).abs() < 1e-9,
                "u={u} x={x}"
            );
        }
    }
}
