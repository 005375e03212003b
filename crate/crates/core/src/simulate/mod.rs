//! Exact path simulation of marked multivariate Hawkes processes (under any
//! measure — a twisted model is just another [`ModelSpec`]), the compound and
//! risk processes built on them, and standalone cluster simulation.

mod cluster;
mod compensator;
mod hawkes;
mod rng;

pub use cluster::{
    simulate_cluster, simulate_cluster_with_cap, simulate_hawkes_by_clusters, ClusterSample,
};
pub use compensator::{compensator, compensator_at_own_events, intensity};
pub use hawkes::{
    run_until_ruin, simulate_hawkes, simulate_hawkes_with_options, simulate_until_ruin,
    HawkesSimulator, RuinOutcome, SimOptions,
};
pub use rng::{RunRng, SeedRecord};

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("event count exceeded the explosion guard of {cap}")]
    ExplosionGuard { cap: usize },
    #[error("no ruin before the time cap {cap}")]
    TimeCap { cap: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// One event: time, emitting component, mark vector (length `d`) and claim
/// vector (length `dstar`).
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub component: usize,
    pub mark: Vec<f64>,
    pub claim: Vec<f64>,
}

/// A simulated trajectory on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub events: Vec<Event>,
    pub horizon: f64,
    pub seed: Option<SeedRecord>,
    /// `N_j(horizon)`.
    pub counts: Vec<u64>,
    /// `Z(horizon)`.
    pub compound: Vec<f64>,
}

impl PathSample {
    pub fn empty(d: usize, dstar: usize, horizon: f64) -> Self {
        PathSample {
            events: Vec::new(),
            horizon,
            seed: None,
            counts: vec![0; d],
            compound: vec![0.0; dstar],
        }
    }

    /// `Z(t)` for `t ≤ horizon`.
    pub fn compound_at(&self, t: f64) -> Vec<f64> {
        let mut z = vec![0.0; self.compound.len()];
        for e in self.events.iter().take_while(|e| e.time <= t) {
            for (z, c) in z.iter_mut().zip(&e.claim) {
                *z += c;
            }
        }
        z
    }

    /// `N(t)` for `t ≤ horizon`.
    pub fn counts_at(&self, t: f64) -> Vec<u64> {
        let mut n = vec![0; self.counts.len()];
        for e in self.events.iter().take_while(|e| e.time <= t) {
            n[e.component] += 1;
        }
        n
    }

    /// Write the event log as CSV: `time, component, mark_1..mark_d, claim_1..claim_dstar`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let d = self.counts.len();
        let dstar = self.compound.len();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string(), "component".to_string()];
        header.extend((1..=d).map(|k| format!("mark_{k}")));
        header.extend((1..=dstar).map(|k| format!("claim_{k}")));
        w.write_record(&header)?;
        for e in &self.events {
            let mut rec = vec![format!("{:.16e}", e.time), (e.component + 1).to_string()];
            rec.extend(e.mark.iter().map(|v| format!("{v:.16e}")));
            rec.extend(e.claim.iter().map(|v| format!("{v:.16e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}
