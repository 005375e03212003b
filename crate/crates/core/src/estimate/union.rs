//! Union of two exceedance events, `{Z_1(t) ≥ a_1 t} ∪ {Z_2(t) ≥ a_2 t}`,
//! estimated from three separately twisted estimators.

use std::time::Instant;

use super::exceedance::estimate_exceedance_is_partial;
use super::{derive_seed, EstimateError, EstimatorResult, StoppingRule};
use crate::model::{mean_drift, ModelSpec};

/// How the three sub-estimates are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnionCombination {
    /// `P(A) + P(B) − P(A ∩ B)`.
    #[default]
    InclusionExclusion,
    /// `P(A) + P(B) + P(A ∩ B)`, the literal "add up the estimates" reading.
    PlainSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnionEstimate {
    pub estimate: f64,
    /// Standard error, with the three run sets treated as independent.
    pub std_err: f64,
    pub rel_std_err: f64,
    pub ci95: (f64, f64),
    pub combination: UnionCombination,
    /// `P(A)`, `P(B)`, `P(A ∩ B)`.
    pub parts: [EstimatorResult; 3],
    pub wall_time: f64,
}

impl UnionEstimate {
    /// Flatten into a single row; `variance` is scaled so that
    /// `sqrt(variance / runs)` is the union's standard error.
    pub fn as_result(&self) -> EstimatorResult {
        let runs: u64 = self.parts.iter().map(|p| p.runs).sum();
        EstimatorResult {
            method: "is-union".into(),
            estimate: self.estimate,
            variance: self.std_err.powi(2) * runs as f64,
            runs,
            rel_std_err: self.rel_std_err,
            ci95: self.ci95,
            wall_time: Some(self.wall_time),
            censored: 0,
            hits: self.parts.iter().map(|p| p.hits).sum(),
            bound: None,
            bound_violations: self.parts.iter().map(|p| p.bound_violations).sum(),
            theta: Vec::new(),
        }
    }
}

pub fn estimate_union(
    spec: &ModelSpec,
    a: &[f64],
    t: f64,
    rule: &StoppingRule,
    seed: u64,
    combination: UnionCombination,
) -> Result<UnionEstimate, EstimateError> {
    let started = Instant::now();
    if spec.dstar() != 2 || a.len() != 2 {
        return Err(EstimateError::InvalidInput(
            "union estimator is defined for two compound components".into(),
        ));
    }
    let drift = mean_drift(spec)?;
    for k in 0..2 {
        if a[k] <= drift[k] {
            return Err(EstimateError::NonRareSubEvent {
                component: k,
                threshold: a[k],
                drift: drift[k],
            });
        }
    }
    let events = [
        [Some(a[0]), None],
        [None, Some(a[1])],
        [Some(a[0]), Some(a[1])],
    ];
    let mut parts = Vec::with_capacity(3);
    for (n, ev) in events.iter().enumerate() {
        parts.push(estimate_exceedance_is_partial(
            spec,
            ev,
            t,
            rule,
            derive_seed(seed, n as u64 + 1),
        )?);
    }
    let parts: [EstimatorResult; 3] = parts.try_into().expect("three parts");
    let sign = match combination {
        UnionCombination::InclusionExclusion => -1.0,
        UnionCombination::PlainSum => 1.0,
    };
    let estimate = parts[0].estimate + parts[1].estimate + sign * parts[2].estimate;
    let std_err = parts
        .iter()
        .map(|p| p.std_err().powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(UnionEstimate {
        estimate,
        std_err,
        rel_std_err: if estimate > 0.0 {
            std_err / estimate
        } else {
            f64::INFINITY
        },
        ci95: (estimate - 1.96 * std_err, estimate + 1.96 * std_err),
        combination,
        parts,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
