//! Importance-sampling and plain Monte Carlo estimators for ruin and
//! exceedance probabilities, with sequential relative-error stopping.

mod exceedance;
mod likelihood;
mod ruin;
mod union;

pub use exceedance::{
    estimate_exceedance_is, estimate_exceedance_is_partial, estimate_exceedance_mc, ExceedanceIs,
    ExceedanceMc,
};
pub use likelihood::{log_likelihood_ratio, LikelihoodBreakdown};
pub use ruin::{estimate_ruin_is, estimate_ruin_mc, RuinIs, RuinMc, DEFAULT_MC_HORIZON_CAP};
pub use union::{estimate_union, UnionCombination, UnionEstimate};

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::model::ModelError;
use crate::optimize::OptimizeError;
use crate::simulate::SimError;
use crate::transforms::TransformError;
use crate::twist::TwistError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Optimize(#[from] OptimizeError),
    #[error(transparent)]
    Twist(#[from] TwistError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("run cap reached before the target precision ({} runs, rel. std. err. {:.3e})", .0.runs, .0.rel_std_err)]
    MaxRunsExceeded(Box<EstimatorResult>),
    #[error("no run hit the event in {} runs", .0.runs)]
    NoHits(Box<EstimatorResult>),
    #[error(
        "sub-event for component {component} is not rare (threshold {threshold} <= drift {drift})"
    )]
    NonRareSubEvent {
        component: usize,
        threshold: f64,
        drift: f64,
    },
    #[error("estimator result carries no wall time")]
    MissingTiming,
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Sequential stopping: stop at the first `n ≥ min_runs` with `ε_n < epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingRule {
    pub epsilon: f64,
    /// Runs dispatched to the worker pool at a time.
    pub batch: u64,
    pub min_runs: u64,
    pub max_runs: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            epsilon: 0.05,
            batch: 100,
            min_runs: 50,
            max_runs: 10_000_000,
        }
    }
}

impl StoppingRule {
    pub fn with_epsilon(epsilon: f64) -> Self {
        StoppingRule {
            epsilon,
            ..Self::default()
        }
    }

    /// Exactly `n` runs, no early stop.
    pub fn fixed_runs(n: u64) -> Self {
        StoppingRule {
            epsilon: 0.0,
            batch: 100,
            min_runs: n,
            max_runs: n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorResult {
    /// `"is"` or `"mc"`, possibly with a suffix naming the problem.
    pub method: String,
    pub estimate: f64,
    /// Sample variance (divisor `n`) of the per-run contributions.
    pub variance: f64,
    pub runs: u64,
    /// `ε_n = sqrt(variance) / (estimate sqrt(n))`; infinite when the estimate is 0.
    pub rel_std_err: f64,
    pub ci95: (f64, f64),
    pub wall_time: Option<f64>,
    /// Runs that hit the time cap without ruin (Monte Carlo ruin only).
    pub censored: u64,
    /// Runs in which the target event occurred.
    pub hits: u64,
    /// Pathwise bound on every contribution (Lundberg / Chernoff), if any.
    pub bound: Option<f64>,
    /// Runs whose contribution exceeded `bound · (1 + 1e-12)`.
    pub bound_violations: u64,
    /// Twist vector used (empty for Monte Carlo).
    pub theta: Vec<f64>,
}

impl EstimatorResult {
    pub fn std_err(&self) -> f64 {
        (self.variance / self.runs as f64).sqrt()
    }

    pub fn hit_rate(&self) -> f64 {
        self.hits as f64 / self.runs.max(1) as f64
    }
}

/// One run's contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutput {
    pub value: f64,
    pub hit: bool,
    pub censored: bool,
}

/// A family of i.i.d. runs; run `index` must depend only on `(seed, index)`.
pub trait RunSampler: Sync {
    fn sample(&self, seed: u64, index: u64) -> Result<RunOutput, EstimateError>;
}

/// Streaming mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn rel_std_err(&self) -> f64 {
        if self.mean > 0.0 {
            (self.variance() / self.n as f64).sqrt() / self.mean
        } else {
            f64::INFINITY
        }
    }
}

/// Contributions of runs `0..n` in run order.
pub fn collect_runs<S: RunSampler>(
    sampler: &S,
    seed: u64,
    n: u64,
) -> Result<Vec<RunOutput>, EstimateError> {
    (0..n)
        .into_par_iter()
        .map(|k| sampler.sample(seed, k))
        .collect()
}

/// Run batches in parallel and scan contributions in run order until the
/// stopping rule is met. The result depends only on `(sampler, seed, rule)`.
pub fn run_estimator<S: RunSampler>(
    method: &str,
    sampler: &S,
    rule: &StoppingRule,
    seed: u64,
    bound: Option<f64>,
    theta: Vec<f64>,
    started: Instant,
) -> Result<EstimatorResult, EstimateError> {
    if !(rule.epsilon >= 0.0) || rule.max_runs == 0 || rule.batch == 0 {
        return Err(EstimateError::InvalidInput(format!(
            "bad stopping rule {rule:?}"
        )));
    }
    let mut stats = Welford::default();
    let mut hits = 0;
    let mut censored = 0;
    let mut violations = 0;
    let mut next = 0u64;
    let limit = bound.map(|b| b * (1.0 + 1e-12));
    let finish = |stats: &Welford, hits, censored, violations| {
        let se = (stats.variance() / stats.n as f64).sqrt();
        EstimatorResult {
            method: method.to_string(),
            estimate: stats.mean,
            variance: stats.variance(),
            runs: stats.n,
            rel_std_err: stats.rel_std_err(),
            ci95: (stats.mean - 1.96 * se, stats.mean + 1.96 * se),
            wall_time: Some(started.elapsed().as_secs_f64()),
            censored,
            hits,
            bound,
            bound_violations: violations,
            theta: theta.clone(),
        }
    };
    while next < rule.max_runs {
        let end = (next + rule.batch).min(rule.max_runs);
        let outputs: Vec<Result<RunOutput, EstimateError>> = (next..end)
            .into_par_iter()
            .map(|k| sampler.sample(seed, k))
            .collect();
        for out in outputs {
            let out = out?;
            stats.push(out.value);
            hits += out.hit as u64;
            censored += out.censored as u64;
            if limit.is_some_and(|l| out.value > l) {
                violations += 1;
            }
            if stats.n >= rule.min_runs && hits > 0 && stats.rel_std_err() < rule.epsilon {
                return Ok(finish(&stats, hits, censored, violations));
            }
        }
        next = end;
    }
    let partial = finish(&stats, hits, censored, violations);
    if hits == 0 {
        Err(EstimateError::NoHits(Box::new(partial)))
    } else if rule.epsilon > 0.0 {
        Err(EstimateError::MaxRunsExceeded(Box::new(partial)))
    } else {
        Ok(partial)
    }
}

/// `κ = wall_time(MC) / wall_time(IS)`.
pub fn speedup_ratio(mc: &EstimatorResult, is_: &EstimatorResult) -> Result<f64, EstimateError> {
    match (mc.wall_time, is_.wall_time) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && b > 0.0 => Ok(a / b),
        _ => Err(EstimateError::MissingTiming),
    }
}

/// Decorrelated master seed for a sub-problem.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [0.1, 3.0, 2.5, 0.0, 7.25, 1e-3];
        let mut w = Welford::default();
        xs.iter().for_each(|x| w.push(*x));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!((w.mean - mean).abs() < 1e-15);
        assert!((w.variance() - var).abs() < 1e-13);
    }

    #[test]
    fn speedup_needs_timing() {
        let mut r = EstimatorResult {
            method: "mc".into(),
            estimate: 0.1,
            variance: 0.09,
            runs: 10,
            rel_std_err: 0.3,
            ci95: (0.0, 0.2),
            wall_time: Some(2.0),
            censored: 0,
            hits: 1,
            bound: None,
            bound_violations: 0,
            theta: vec![],
        };
        assert_eq!(speedup_ratio(&r, &r).unwrap(), 1.0);
        r.wall_time = None;
        assert_eq!(speedup_ratio(&r, &r), Err(EstimateError::MissingTiming));
    }
}
