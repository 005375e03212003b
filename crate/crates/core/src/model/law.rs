//! Vector-valued laws for event marks `B_j` and claims `U_j`.
//!
//! Both shipped families have independent coordinates, so moment generating
//! functions factorize and exponential tilts stay in the family.

use rand::Rng;
use rand_distr::Exp1;

use super::ModelError;

/// Law of a nonnegative random vector attached to each event.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorLaw {
    /// Point mass at the given vector.
    Deterministic(Vec<f64>),
    /// Independent exponential coordinates with the given rates.
    ExponentialIndependent(Vec<f64>),
}

/// Law of the mark vector `B_j` of a component-`j` event (length `d`).
pub type MarkLaw = VectorLaw;
/// Law of the claim vector `U_j` of a component-`j` event (length `dstar`).
pub type ClaimLaw = VectorLaw;

impl VectorLaw {
    pub fn deterministic(values: Vec<f64>) -> Result<Self, ModelError> {
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ModelError::InvalidParameter(format!(
                "deterministic law entries must be finite and nonnegative: {values:?}"
            )));
        }
        Ok(VectorLaw::Deterministic(values))
    }

    pub fn exponential(rates: Vec<f64>) -> Result<Self, ModelError> {
        if rates.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ModelError::InvalidParameter(format!(
                "exponential rates must be finite and positive: {rates:?}"
            )));
        }
        Ok(VectorLaw::ExponentialIndependent(rates))
    }

    /// Exponential law specified by its coordinate means.
    pub fn exponential_with_means(means: &[f64]) -> Result<Self, ModelError> {
        Self::exponential(means.iter().map(|m| 1.0 / m).collect())
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorLaw::Deterministic(v) | VectorLaw::ExponentialIndependent(v) => v.len(),
        }
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            VectorLaw::Deterministic(_) => "deterministic",
            VectorLaw::ExponentialIndependent(_) => "exponential",
        }
    }

    /// Raw parameter vector (values or rates).
    pub fn params(&self) -> &[f64] {
        match self {
            VectorLaw::Deterministic(v) | VectorLaw::ExponentialIndependent(v) => v,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            VectorLaw::Deterministic(b) => b.clone(),
            VectorLaw::ExponentialIndependent(g) => g.iter().map(|g| 1.0 / g).collect(),
        }
    }

    /// Whether the moment generating function is finite at `s`.
    pub fn in_mgf_domain(&self, s: &[f64]) -> bool {
        match self {
            VectorLaw::Deterministic(_) => s.iter().all(|x| x.is_finite()),
            VectorLaw::ExponentialIndependent(g) => g.iter().zip(s).all(|(g, s)| *s < *g),
        }
    }

    /// Coordinates at which the mgf is infinite.
    pub fn mgf_domain_violations(&self, s: &[f64]) -> Vec<usize> {
        match self {
            VectorLaw::Deterministic(_) => Vec::new(),
            VectorLaw::ExponentialIndependent(g) => g
                .iter()
                .zip(s)
                .enumerate()
                .filter(|(_, (g, s))| **s >= **g)
                .map(|(k, _)| k)
                .collect(),
        }
    }

    /// `log E[exp(sᵀX)]`, or `None` outside the domain.
    pub fn log_mgf(&self, s: &[f64]) -> Option<f64> {
        match self {
            VectorLaw::Deterministic(b) => Some(b.iter().zip(s).map(|(b, s)| b * s).sum()),
            VectorLaw::ExponentialIndependent(g) => {
                let mut acc = 0.0;
                for (g, s) in g.iter().zip(s) {
                    if *s >= *g {
                        return None;
                    }
                    acc -= (-s / g).ln_1p();
                }
                Some(acc)
            }
        }
    }

    pub fn mgf(&self, s: &[f64]) -> Option<f64> {
        self.log_mgf(s).map(f64::exp)
    }

    /// `∂ m(s) / ∂ s_k`.
    pub fn mgf_partial(&self, s: &[f64], k: usize) -> Option<f64> {
        let m = self.mgf(s)?;
        Some(m * self.dlog_mgf(s, k))
    }

    /// `∂² m(s) / ∂ s_k ∂ s_l`.
    pub fn mgf_second_partial(&self, s: &[f64], k: usize, l: usize) -> Option<f64> {
        let m = self.mgf(s)?;
        let cross = self.dlog_mgf(s, k) * self.dlog_mgf(s, l);
        let diag = match self {
            VectorLaw::Deterministic(_) => 0.0,
            VectorLaw::ExponentialIndependent(g) if k == l => 1.0 / (g[k] - s[k]).powi(2),
            VectorLaw::ExponentialIndependent(_) => 0.0,
        };
        Some(m * (cross + diag))
    }

    /// `∂ log m(s) / ∂ s_k`, the mean of coordinate `k` under the law tilted by `s`.
    fn dlog_mgf(&self, s: &[f64], k: usize) -> f64 {
        match self {
            VectorLaw::Deterministic(b) => b[k],
            VectorLaw::ExponentialIndependent(g) => 1.0 / (g[k] - s[k]),
        }
    }

    /// The exponentially tilted law with density `exp(sᵀx) / m(s)` relative to this one.
    pub fn tilt(&self, s: &[f64]) -> Result<VectorLaw, ModelError> {
        match self {
            VectorLaw::Deterministic(b) => Ok(VectorLaw::Deterministic(b.clone())),
            VectorLaw::ExponentialIndependent(g) => {
                if let Some(&k) = self.mgf_domain_violations(s).first() {
                    return Err(ModelError::InvalidParameter(format!(
                        "tilt argument {} reaches exponential rate {} in coordinate {k}",
                        s[k], g[k]
                    )));
                }
                Ok(VectorLaw::ExponentialIndependent(
                    g.iter().zip(s).map(|(g, s)| g - s).collect(),
                ))
            }
        }
    }

    /// `log dP/dQ (x)` where `Q` is this law tilted by `s`: `log m(s) − sᵀx`.
    pub fn log_density_ratio(&self, s: &[f64], x: &[f64]) -> Option<f64> {
        let lm = self.log_mgf(s)?;
        Some(lm - s.iter().zip(x).map(|(s, x)| s * x).sum::<f64>())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            VectorLaw::Deterministic(b) => out.copy_from_slice(b),
            VectorLaw::ExponentialIndependent(g) => {
                for (o, g) in out.iter_mut().zip(g) {
                    let e: f64 = rng.sample(Exp1);
                    *o = e / g;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mgf_at_zero_is_one() {
        let a = VectorLaw::exponential(vec![0.5, 0.4]).unwrap();
        let b = VectorLaw::deterministic(vec![0.5, 0.3]).unwrap();
        assert_eq!(a.mgf(&[0.0, 0.0]), Some(1.0));
        assert_eq!(b.mgf(&[0.0, 0.0]), Some(1.0));
    }

    #[test]
    fn exponential_mgf_and_pole() {
        let a = VectorLaw::exponential(vec![0.5, 0.4]).unwrap();
        assert!((a.mgf(&[0.1, 0.0]).unwrap() - 1.25).abs() < 1e-15);
        assert_eq!(a.mgf(&[0.5, 0.0]), None);
        assert_eq!(a.mgf_domain_violations(&[0.6, 0.4]), vec![0, 1]);
    }

    #[test]
    fn tilt_shifts_rates() {
        let a = VectorLaw::exponential(vec![0.5, 0.4]).unwrap();
        assert_eq!(
            a.tilt(&[0.082, 0.0]).unwrap(),
            VectorLaw::ExponentialIndependent(vec![0.5 - 0.082, 0.4])
        );
        assert!(a.tilt(&[0.5, 0.0]).is_err());
    }

    #[test]
    fn tilt_mgf_identity() {
        for law in [
            VectorLaw::exponential(vec![2.0, 3.3]).unwrap(),
            VectorLaw::deterministic(vec![0.5, 0.25]).unwrap(),
        ] {
            let s = [0.7, -0.4];
            let q = law.tilt(&s).unwrap();
            for v in [[0.1, 0.2], [-0.3, 1.1], [0.9, 0.0]] {
                let lhs = q.mgf(&v).unwrap() * law.mgf(&s).unwrap();
                let sum = [v[0] + s[0], v[1] + s[1]];
                assert!((lhs - law.mgf(&sum).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        let law = VectorLaw::exponential(vec![2.0, 3.3]).unwrap();
        let s = [0.4, -0.2];
        let h = 1e-6;
        for k in 0..2 {
            let mut up = s;
            let mut dn = s;
            up[k] += h;
            dn[k] -= h;
            let fd = (law.mgf(&up).unwrap() - law.mgf(&dn).unwrap()) / (2.0 * h);
            assert!((fd - law.mgf_partial(&s, k).unwrap()).abs() < 1e-8);
            for l in 0..2 {
                let fd2 = (law.mgf_partial(&up, l).unwrap() - law.mgf_partial(&dn, l).unwrap())
                    / (2.0 * h);
                assert!((fd2 - law.mgf_second_partial(&s, k, l).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn deterministic_density_ratio_is_zero_at_atom() {
        let law = VectorLaw::deterministic(vec![0.5, 0.25]).unwrap();
        let lr = law.log_density_ratio(&[0.3, 0.8], &[0.5, 0.25]).unwrap();
        assert!(lr.abs() < 1e-15);
    }
}
