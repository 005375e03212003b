//! Ogata thinning for marked multivariate Hawkes processes.
//!
//! Kernels are nonincreasing, so the total intensity at the current time
//! bounds the intensity until the next event. Exponential kernel pairs carry
//! a decaying excitation state updated in O(1) per event; tabulated pairs are
//! evaluated against a pruned event history.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::Exp1;

use super::{Event, PathSample, RunRng, SimError};
use crate::model::{DecayKernel, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Abort when more events than this are generated.
    pub event_cap: usize,
    /// Draw claim vectors (needed for `Z`).
    pub draw_claims: bool,
    /// Keep the full event log.
    pub record: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            event_cap: 10_000_000,
            draw_claims: true,
            record: true,
        }
    }
}

struct HistoryEvent {
    time: f64,
    component: usize,
    mark: Vec<f64>,
}

/// Streaming event generator. Each call to [`next_event`](Self::next_event)
/// produces the next event; its mark and claim are then available through
/// [`mark`](Self::mark) and [`claim`](Self::claim).
pub struct HawkesSimulator<'a, R: Rng> {
    spec: &'a ModelSpec,
    rng: R,
    options: SimOptions,
    t: f64,
    d: usize,
    /// `excitation[i * d + j]`: current contribution of past `j`-events to `λ_i`
    /// through an exponential kernel.
    excitation: Vec<f64>,
    /// Decay rate per pair; `None` marks a tabulated pair.
    alpha: Vec<Option<f64>>,
    /// Jump size `g_ij(0)` per exponential pair.
    jump: Vec<f64>,
    history: VecDeque<HistoryEvent>,
    has_tabulated: bool,
    memory: f64,
    lam: Vec<f64>,
    mark: Vec<f64>,
    claim: Vec<f64>,
    events: usize,
}

impl<'a, R: Rng> HawkesSimulator<'a, R> {
    pub fn new(spec: &'a ModelSpec, rng: R, options: SimOptions) -> Self {
        let d = spec.d();
        let mut alpha = Vec::with_capacity(d * d);
        let mut jump = Vec::with_capacity(d * d);
        let mut memory: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                match spec.kernel(i, j) {
                    DecayKernel::Exponential { alpha: a, scale } => {
                        alpha.push(Some(*a));
                        jump.push(*scale);
                    }
                    k @ DecayKernel::Tabulated(_) => {
                        alpha.push(None);
                        jump.push(0.0);
                        memory = memory.max(k.support_end());
                    }
                }
            }
        }
        HawkesSimulator {
            spec,
            rng,
            options,
            t: 0.0,
            d,
            excitation: vec![0.0; d * d],
            has_tabulated: alpha.iter().any(Option::is_none),
            alpha,
            jump,
            history: VecDeque::new(),
            memory,
            lam: vec![0.0; d],
            mark: vec![0.0; d],
            claim: vec![0.0; spec.dstar()],
            events: 0,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn mark(&self) -> &[f64] {
        &self.mark
    }

    pub fn claim(&self) -> &[f64] {
        &self.claim
    }

    pub fn into_rng(self) -> R {
        self.rng
    }

    /// Fill `self.lam` with the intensities at the current time; returns the total.
    fn intensities(&mut self) -> f64 {
        let d = self.d;
        let mut total = 0.0;
        for i in 0..d {
            let mut l = self.spec.lambda_bar()[i];
            for j in 0..d {
                l += self.excitation[i * d + j];
            }
            self.lam[i] = l;
        }
        if self.has_tabulated {
            let t = self.t;
            while self
                .history
                .front()
                .is_some_and(|e| t - e.time > self.memory)
            {
                self.history.pop_front();
            }
            for e in &self.history {
                for i in 0..d {
                    if self.alpha[i * d + e.component].is_none() {
                        self.lam[i] +=
                            e.mark[i] * self.spec.kernel(i, e.component).value(t - e.time);
                    }
                }
            }
        }
        for l in &self.lam {
            total += l;
        }
        total
    }

    fn advance(&mut self, dt: f64) {
        for (x, a) in self.excitation.iter_mut().zip(&self.alpha) {
            if let Some(a) = a {
                if *x != 0.0 {
                    *x *= (-a * dt).exp();
                }
            }
        }
        self.t += dt;
    }

    /// Time and component of the next event before `t_max`, or `None` (with
    /// the clock moved to `t_max`) if there is none.
    pub fn next_event(&mut self, t_max: f64) -> Result<Option<(f64, usize)>, SimError> {
        let mut bound = self.intensities();
        loop {
            if bound <= 0.0 {
                self.advance((t_max - self.t).max(0.0));
                return Ok(None);
            }
            let e: f64 = self.rng.sample(Exp1);
            let dt = e / bound;
            if self.t + dt > t_max {
                self.advance((t_max - self.t).max(0.0));
                return Ok(None);
            }
            self.advance(dt);
            let total = self.intensities();
            let u: f64 = self.rng.gen::<f64>() * bound;
            if u >= total {
                bound = total;
                continue;
            }
            // attribute the event to a component proportionally to λ_i
            let mut acc = 0.0;
            let mut comp = self.d - 1;
            for (i, l) in self.lam.iter().enumerate() {
                acc += l;
                if u < acc {
                    comp = i;
                    break;
                }
            }
            self.events += 1;
            if self.events > self.options.event_cap {
                return Err(SimError::ExplosionGuard {
                    cap: self.options.event_cap,
                });
            }
            self.spec.mark(comp).sample(&mut self.rng, &mut self.mark);
            if self.options.draw_claims {
                self.spec.claim(comp).sample(&mut self.rng, &mut self.claim);
            }
            let d = self.d;
            for i in 0..d {
                if self.alpha[i * d + comp].is_some() {
                    self.excitation[i * d + comp] += self.mark[i] * self.jump[i * d + comp];
                }
            }
            if self.has_tabulated {
                self.history.push_back(HistoryEvent {
                    time: self.t,
                    component: comp,
                    mark: self.mark.clone(),
                });
            }
            return Ok(Some((self.t, comp)));
        }
    }
}

/// Simulate on `[0, horizon]` with default options.
pub fn simulate_hawkes(
    spec: &ModelSpec,
    horizon: f64,
    rng: &mut RunRng,
) -> Result<PathSample, SimError> {
    simulate_hawkes_with_options(spec, horizon, rng, SimOptions::default())
}

pub fn simulate_hawkes_with_options(
    spec: &ModelSpec,
    horizon: f64,
    rng: &mut RunRng,
    options: SimOptions,
) -> Result<PathSample, SimError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(SimError::InvalidInput(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let seed = rng.record();
    let mut sim = HawkesSimulator::new(spec, &mut *rng, options);
    let mut path = PathSample::empty(spec.d(), spec.dstar(), horizon);
    path.seed = Some(seed);
    while let Some((time, component)) = sim.next_event(horizon)? {
        record_event(
            &mut path,
            time,
            component,
            sim.mark(),
            sim.claim(),
            options.record,
        );
    }
    Ok(path)
}

fn record_event(
    path: &mut PathSample,
    time: f64,
    component: usize,
    mark: &[f64],
    claim: &[f64],
    keep: bool,
) {
    path.counts[component] += 1;
    for (z, c) in path.compound.iter_mut().zip(claim) {
        *z += c;
    }
    if keep {
        path.events.push(Event {
            time,
            component,
            mark: mark.to_vec(),
            claim: claim.to_vec(),
        });
    }
}

/// Result of a run of the risk process `Y_i(t) = Z_i(t) − r_i t`.
#[derive(Debug, Clone, PartialEq)]
pub enum RuinOutcome {
    /// First time `Y_i > u`, with the path up to and including that event.
    Ruined { tau: f64, path: PathSample },
    /// No ruin on `[0, cap]`; the path covers the whole window.
    Censored { path: PathSample },
}

/// Simulate until `Y_i` exceeds `u` or the clock reaches `cap`. Ruin can only
/// happen at claim arrivals since `Y_i` decreases between events.
pub fn run_until_ruin(
    spec: &ModelSpec,
    i: usize,
    u: f64,
    cap: f64,
    rng: &mut RunRng,
    options: SimOptions,
) -> Result<RuinOutcome, SimError> {
    if i >= spec.dstar() {
        return Err(SimError::InvalidInput(format!(
            "component {i} out of range"
        )));
    }
    let r = spec.premium()[i];
    let seed = rng.record();
    let mut sim = HawkesSimulator::new(
        spec,
        &mut *rng,
        SimOptions {
            draw_claims: true,
            ..options
        },
    );
    let mut path = PathSample::empty(spec.d(), spec.dstar(), cap);
    path.seed = Some(seed);
    while let Some((time, component)) = sim.next_event(cap)? {
        record_event(
            &mut path,
            time,
            component,
            sim.mark(),
            sim.claim(),
            options.record,
        );
        if path.compound[i] - r * time > u {
            path.horizon = time;
            return Ok(RuinOutcome::Ruined { tau: time, path });
        }
    }
    Ok(RuinOutcome::Censored { path })
}

/// Simulate until ruin; reaching `cap` first is an error.
pub fn simulate_until_ruin(
    spec: &ModelSpec,
    i: usize,
    u: f64,
    rng: &mut RunRng,
    cap: f64,
) -> Result<(f64, PathSample), SimError> {
    match run_until_ruin(spec, i, u, cap, rng, SimOptions::default())? {
        RuinOutcome::Ruined { tau, path } => Ok((tau, path)),
        RuinOutcome::Censored { .. } => Err(SimError::TimeCap { cap }),
    }
}
