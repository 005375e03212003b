//! Ruin probability `P(sup_t Y_i(t) > u)` for `Y_i(t) = Z_i(t) − r_i t`.

use std::time::Instant;

use super::{
    log_likelihood_ratio, run_estimator, EstimateError, EstimatorResult, RunOutput, RunSampler,
    StoppingRule,
};
use crate::model::ModelSpec;
use crate::optimize::solve_theta_star;
use crate::simulate::{run_until_ruin, RuinOutcome, RunRng, SimError, SimOptions};
use crate::transforms::embed;
use crate::twist::TwistedModel;

/// Time cap for plain Monte Carlo ruin runs when none is given.
pub const DEFAULT_MC_HORIZON_CAP: f64 = 200.0;

/// Importance sampler: simulate under the `θ* e_i` twist until ruin and
/// return `L_{τ_u}`.
pub struct RuinIs {
    pub p_model: ModelSpec,
    pub twisted: TwistedModel,
    pub component: usize,
    pub level: f64,
    pub time_cap: f64,
}

impl RuinIs {
    pub fn new(spec: &ModelSpec, i: usize, u: f64) -> Result<Self, EstimateError> {
        if !(u > 0.0) {
            return Err(EstimateError::InvalidInput(format!(
                "level must be positive, got {u}"
            )));
        }
        let theta_star = solve_theta_star(spec, i)?;
        let twisted = TwistedModel::build(spec, &embed(spec.dstar(), i, theta_star))?;
        Ok(RuinIs {
            p_model: spec.clone(),
            twisted,
            component: i,
            level: u,
            time_cap: 1e6 / theta_star,
        })
    }

    pub fn theta_star(&self) -> f64 {
        self.twisted.theta_star[self.component]
    }

    /// Lundberg bound `e^{−θ* u}`.
    pub fn bound(&self) -> f64 {
        (-self.theta_star() * self.level).exp()
    }

    /// `log L_{τ_u}` of run `index`.
    pub fn log_lr(&self, seed: u64, index: u64) -> Result<f64, EstimateError> {
        let mut rng = RunRng::new(seed, index);
        match run_until_ruin(
            &self.twisted.base,
            self.component,
            self.level,
            self.time_cap,
            &mut rng,
            SimOptions::default(),
        )? {
            RuinOutcome::Ruined { tau, path } => {
                Ok(log_likelihood_ratio(&self.p_model, &self.twisted, &path, tau).total)
            }
            RuinOutcome::Censored { .. } => Err(SimError::TimeCap { cap: self.time_cap }.into()),
        }
    }
}

impl RunSampler for RuinIs {
    fn sample(&self, seed: u64, index: u64) -> Result<RunOutput, EstimateError> {
        Ok(RunOutput {
            value: self.log_lr(seed, index)?.exp(),
            hit: true,
            censored: false,
        })
    }
}

/// Plain Monte Carlo: simulate the original model up to a time cap and
/// record the ruin indicator; runs reaching the cap count as censored.
pub struct RuinMc {
    pub spec: ModelSpec,
    pub component: usize,
    pub level: f64,
    pub horizon_cap: f64,
}

impl RunSampler for RuinMc {
    fn sample(&self, seed: u64, index: u64) -> Result<RunOutput, EstimateError> {
        let mut rng = RunRng::new(seed, index);
        let options = SimOptions {
            record: false,
            ..SimOptions::default()
        };
        let hit = matches!(
            run_until_ruin(
                &self.spec,
                self.component,
                self.level,
                self.horizon_cap,
                &mut rng,
                options
            )?,
            RuinOutcome::Ruined { .. }
        );
        Ok(RunOutput {
            value: hit as u8 as f64,
            hit,
            censored: !hit,
        })
    }
}

pub fn estimate_ruin_is(
    spec: &ModelSpec,
    i: usize,
    u: f64,
    rule: &StoppingRule,
    seed: u64,
) -> Result<EstimatorResult, EstimateError> {
    let started = Instant::now();
    let sampler = RuinIs::new(spec, i, u)?;
    let theta = sampler.twisted.theta_star.clone();
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

pub fn estimate_ruin_mc(
    spec: &ModelSpec,
    i: usize,
    u: f64,
    rule: &StoppingRule,
    horizon_cap: f64,
    seed: u64,
) -> Result<EstimatorResult, EstimateError> {
    let started = Instant::now();
    if i >= spec.dstar() {
        return Err(EstimateError::InvalidInput(format!(
            "component {i} out of range"
        )));
    }
    if !(horizon_cap > 0.0) {
        return Err(EstimateError::InvalidInput(
            "horizon cap must be positive".into(),
        ));
    }
    let sampler = RuinMc {
        spec: spec.clone(),
        component: i,
        level: u,
        horizon_cap,
    };
    run_estimator("mc", &sampler, rule, seed, None, Vec::new(), started)
}
