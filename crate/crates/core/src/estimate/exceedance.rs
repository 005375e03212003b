//! Exceedance probability `P(Z(t) ≥ a t)` at a fixed horizon.

use std::time::Instant;

use super::{
    log_likelihood_ratio, run_estimator, EstimateError, EstimatorResult, RunOutput, RunSampler,
    StoppingRule,
};
use crate::model::ModelSpec;
use crate::optimize::{dominant_point_partial, TwistSolution};
use crate::simulate::{simulate_hawkes_with_options, RunRng, SimOptions};
use crate::twist::TwistedModel;

fn exceeds(z: &[f64], thresholds: &[Option<f64>], t: f64) -> bool {
    z.iter()
        .zip(thresholds)
        .all(|(z, a)| a.is_none_or(|a| *z >= a * t))
}

/// Importance sampler twisted by `θ(a*)`; returns `L_t · 1{Z(t) ≥ a t}`.
/// Coordinates with a `None` threshold are unconstrained.
pub struct ExceedanceIs {
    pub p_model: ModelSpec,
    pub twisted: TwistedModel,
    pub dominant: TwistSolution,
    pub thresholds: Vec<Option<f64>>,
    pub horizon: f64,
}

impl ExceedanceIs {
    pub fn new(
        spec: &ModelSpec,
        thresholds: &[Option<f64>],
        t: f64,
    ) -> Result<Self, EstimateError> {
        if !(t > 0.0) {
            return Err(EstimateError::InvalidInput(format!(
                "horizon must be positive, got {t}"
            )));
        }
        let dominant = dominant_point_partial(spec, thresholds)?;
        let twisted = TwistedModel::build(spec, &dominant.theta)?;
        Ok(ExceedanceIs {
            p_model: spec.clone(),
            twisted,
            dominant,
            thresholds: thresholds.to_vec(),
            horizon: t,
        })
    }

    /// Chernoff bound `e^{−Λ*(a*) t}`.
    pub fn bound(&self) -> f64 {
        (-self.dominant.rate * self.horizon).exp()
    }

    /// `(hit, log L_t)` of run `index`.
    pub fn run(&self, seed: u64, index: u64) -> Result<(bool, f64), EstimateError> {
        let mut rng = RunRng::new(seed, index);
        let path = simulate_hawkes_with_options(
            &self.twisted.base,
            self.horizon,
            &mut rng,
            SimOptions::default(),
        )?;
        let hit = exceeds(&path.compound, &self.thresholds, self.horizon);
        let log_lr = log_likelihood_ratio(&self.p_model, &self.twisted, &path, self.horizon).total;
        Ok((hit, log_lr))
    }
}

impl RunSampler for ExceedanceIs {
    fn sample(&self, seed: u64, index: u64) -> Result<RunOutput, EstimateError> {
        let (hit, log_lr) = self.run(seed, index)?;
        Ok(RunOutput {
            value: if hit { log_lr.exp() } else { 0.0 },
            hit,
            censored: false,
        })
    }
}

/// Plain Monte Carlo indicator of `Z(t) ≥ a t` under the original model.
pub struct ExceedanceMc {
    pub spec: ModelSpec,
    pub thresholds: Vec<Option<f64>>,
    pub horizon: f64,
}

impl RunSampler for ExceedanceMc {
    fn sample(&self, seed: u64, index: u64) -> Result<RunOutput, EstimateError> {
        let mut rng = RunRng::new(seed, index);
        let options = SimOptions {
            record: false,
            ..SimOptions::default()
        };
        let path = simulate_hawkes_with_options(&self.spec, self.horizon, &mut rng, options)?;
        let hit = exceeds(&path.compound, &self.thresholds, self.horizon);
        Ok(RunOutput {
            value: hit as u8 as f64,
            hit,
            censored: false,
        })
    }
}

fn check_target(spec: &ModelSpec, a: &[f64], t: f64) -> Result<(), EstimateError> {
    if a.len() != spec.dstar() {
        return Err(EstimateError::InvalidInput(format!(
            "target has length {}, expected {}",
            a.len(),
            spec.dstar()
        )));
    }
    if !(t > 0.0) {
        return Err(EstimateError::InvalidInput(format!(
            "horizon must be positive, got {t}"
        )));
    }
    Ok(())
}

pub fn estimate_exceedance_is(
    spec: &ModelSpec,
    a: &[f64],
    t: f64,
    rule: &StoppingRule,
    seed: u64,
) -> Result<EstimatorResult, EstimateError> {
    check_target(spec, a, t)?;
    let thresholds: Vec<Option<f64>> = a.iter().map(|v| Some(*v)).collect();
    estimate_exceedance_is_partial(spec, &thresholds, t, rule, seed)
}

/// Exceedance estimator for a subset of coordinates.
pub fn estimate_exceedance_is_partial(
    spec: &ModelSpec,
    thresholds: &[Option<f64>],
    t: f64,
    rule: &StoppingRule,
    seed: u64,
) -> Result<EstimatorResult, EstimateError> {
    let started = Instant::now();
    let sampler = ExceedanceIs::new(spec, thresholds, t)?;
    let theta = sampler.dominant.theta.clone();
    run_estimator(
        "is",
        &sampler,
        rule,
        seed,
        Some(sampler.bound()),
        theta,
        started,
    )
}

pub fn estimate_exceedance_mc(
    spec: &ModelSpec,
    a: &[f64],
    t: f64,
    rule: &StoppingRule,
    seed: u64,
) -> Result<EstimatorResult, EstimateError> {
    let started = Instant::now();
    check_target(spec, a, t)?;
    let sampler = ExceedanceMc {
        spec: spec.clone(),
        thresholds: a.iter().map(|v| Some(*v)).collect(),
        horizon: t,
    };
    run_estimator("mc", &sampler, rule, seed, None, Vec::new(), started)
}
