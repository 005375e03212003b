//! Branching (cluster) representation: Galton–Watson total progeny and a
//! timed cluster construction of the whole process.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use super::{Event, PathSample, RunRng, SimError};
use crate::model::ModelSpec;

const CLUSTER_EVENT_CAP: usize = 1_000_000;

/// Total progeny of one immigrant, counted per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSample {
    pub origin_component: usize,
    /// `S_{l←j}` for every `l`, immigrant included.
    pub total_counts: Vec<u64>,
    /// Number of generations, the immigrant being generation 0.
    pub generations: usize,
}

fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as u64
}

/// Generation-by-generation simulation of the cluster of a component-`j`
/// immigrant: an event of component `m` with mark `B` has
/// `Poisson(B_l c_lm)` children in component `l`.
pub fn simulate_cluster<R: Rng + ?Sized>(
    spec: &ModelSpec,
    j: usize,
    rng: &mut R,
) -> Result<ClusterSample, SimError> {
    simulate_cluster_with_cap(spec, j, rng, CLUSTER_EVENT_CAP)
}

pub fn simulate_cluster_with_cap<R: Rng + ?Sized>(
    spec: &ModelSpec,
    j: usize,
    rng: &mut R,
    cap: usize,
) -> Result<ClusterSample, SimError> {
    let d = spec.d();
    if j >= d {
        return Err(SimError::InvalidInput(format!(
            "component {j} out of range"
        )));
    }
    let mut total = vec![0u64; d];
    total[j] = 1;
    let mut generation = vec![0u64; d];
    generation[j] = 1;
    let mut generations = 0;
    let mut events: u64 = 1;
    let mut mark = vec![0.0; d];
    loop {
        let mut next = vec![0u64; d];
        for m in 0..d {
            for _ in 0..generation[m] {
                spec.mark(m).sample(rng, &mut mark);
                for l in 0..d {
                    next[l] += poisson(rng, mark[l] * spec.kernel_norm(l, m));
                }
            }
        }
        let born: u64 = next.iter().sum();
        if born == 0 {
            break;
        }
        generations += 1;
        events += born;
        if events as usize > cap {
            return Err(SimError::ExplosionGuard { cap });
        }
        for l in 0..d {
            total[l] += next[l];
        }
        generation = next;
    }
    Ok(ClusterSample {
        origin_component: j,
        total_counts: total,
        generations,
    })
}

/// The process on `[0, horizon]` built from clusters: immigrants of component
/// `j` arrive as a Poisson(`λ̄_j`) process drawn from stream `j`, and the
/// `k`-th immigrant's timed cluster uses its own stream. Raising `λ̄` with the
/// same seed only moves immigrants earlier, so event counts are monotone in
/// the base rates.
pub fn simulate_hawkes_by_clusters(
    spec: &ModelSpec,
    horizon: f64,
    master_seed: u64,
) -> Result<PathSample, SimError> {
    let d = spec.d() as u64;
    let mut path = PathSample::empty(spec.d(), spec.dstar(), horizon);
    for j in 0..spec.d() {
        let rate = spec.lambda_bar()[j];
        if rate <= 0.0 {
            continue;
        }
        let mut arrivals = RunRng::new(master_seed, j as u64);
        let mut acc = 0.0;
        let mut k: u64 = 0;
        loop {
            let e: f64 = arrivals.sample(Exp1);
            acc += e;
            let t0 = acc / rate;
            if t0 > horizon {
                break;
            }
            let mut rng = RunRng::new(master_seed, d + k * d + j as u64);
            timed_cluster(spec, j, t0, horizon, &mut rng, &mut path.events)?;
            k += 1;
        }
    }
    path.events.sort_by(|a, b| {
        a.time
            .total_cmp(&b.time)
            .then(a.component.cmp(&b.component))
    });
    for e in &path.events {
        path.counts[e.component] += 1;
        for (z, c) in path.compound.iter_mut().zip(&e.claim) {
            *z += c;
        }
    }
    Ok(path)
}

/// Append the events of a cluster rooted at `(t0, j)` that fall in `[0, horizon]`.
/// The whole cluster is generated regardless of the horizon so the random
/// stream is consumed identically for every immigrant time.
fn timed_cluster(
    spec: &ModelSpec,
    j: usize,
    t0: f64,
    horizon: f64,
    rng: &mut RunRng,
    out: &mut Vec<Event>,
) -> Result<(), SimError> {
    let d = spec.d();
    let mut queue = VecDeque::new();
    queue.push_back((0.0f64, j));
    let mut count = 0usize;
    while let Some((rel, m)) = queue.pop_front() {
        count += 1;
        if count > CLUSTER_EVENT_CAP {
            return Err(SimError::ExplosionGuard {
                cap: CLUSTER_EVENT_CAP,
            });
        }
        let mut mark = vec![0.0; d];
        let mut claim = vec![0.0; spec.dstar()];
        spec.mark(m).sample(rng, &mut mark);
        spec.claim(m).sample(rng, &mut claim);
        for l in 0..d {
            let kernel = spec.kernel(l, m);
            let n = poisson(rng, mark[l] * spec.kernel_norm(l, m));
            for _ in 0..n {
                let delay = kernel.sample_delay(rng.gen::<f64>());
                queue.push_back((rel + delay, l));
            }
        }
        if t0 + rel <= horizon {
            out.push(Event {
                time: t0 + rel,
                component: m,
                mark,
                claim,
            });
        }
    }
    Ok(())
}
