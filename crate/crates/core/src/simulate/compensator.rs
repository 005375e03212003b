//! Intensities and compensators `∫_0^t λ_j(s) ds` of a recorded path.

use super::PathSample;
use crate::model::{DecayKernel, ModelSpec};

/// `λ_j(s) = λ̄_j + Σ_{T < s} B_j g_{j,l}(s − T)` along the recorded events.
pub fn intensity(spec: &ModelSpec, path: &PathSample, j: usize, s: f64) -> f64 {
    spec.lambda_bar()[j]
        + path
            .events
            .iter()
            .take_while(|e| e.time < s)
            .map(|e| e.mark[j] * spec.kernel(j, e.component).value(s - e.time))
            .sum::<f64>()
}

/// `Λ_j(t) = λ̄_j t + Σ_{T ≤ t} B_j G_{j,l}(t − T)` with `G` the kernel's partial integral.
pub fn compensator(spec: &ModelSpec, path: &PathSample, j: usize, t: f64) -> f64 {
    spec.lambda_bar()[j] * t
        + path
            .events
            .iter()
            .take_while(|e| e.time <= t)
            .map(|e| e.mark[j] * spec.kernel(j, e.component).partial_integral(t - e.time))
            .sum::<f64>()
}

/// Compensator of component `j` at each of its own event times, computed in a
/// single pass for exponential kernels.
pub fn compensator_at_own_events(spec: &ModelSpec, path: &PathSample, j: usize) -> Vec<f64> {
    let d = spec.d();
    let exponential = (0..d).all(|l| matches!(spec.kernel(j, l), DecayKernel::Exponential { .. }));
    if !exponential {
        return path
            .events
            .iter()
            .filter(|e| e.component == j)
            .map(|e| compensator(spec, path, j, e.time))
            .collect();
    }
    // per emitting component l: total mark mass and its exponentially decayed part
    let mut mass = vec![0.0; d];
    let mut decayed = vec![0.0; d];
    let mut last = 0.0;
    let mut out = Vec::new();
    for e in &path.events {
        let dt = e.time - last;
        for l in 0..d {
            if let DecayKernel::Exponential { alpha, .. } = spec.kernel(j, l) {
                decayed[l] *= (-alpha * dt).exp();
            }
        }
        last = e.time;
        if e.component == j {
            let mut c = spec.lambda_bar()[j] * e.time;
            for l in 0..d {
                if let DecayKernel::Exponential { alpha, scale } = spec.kernel(j, l) {
                    c += scale / alpha * (mass[l] - decayed[l]);
                }
            }
            out.push(c);
        }
        mass[e.component] += e.mark[j];
        decayed[e.component] += e.mark[j];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::VectorLaw;
    use crate::simulate::Event;

    fn spec() -> ModelSpec {
        ModelSpec::new(
            vec![0.7],
            vec![vec![DecayKernel::exponential(2.0).unwrap()]],
            vec![VectorLaw::deterministic(vec![0.6]).unwrap()],
            vec![VectorLaw::deterministic(vec![1.0]).unwrap()],
            vec![1.0],
        )
        .unwrap()
    }

    fn path(times: &[f64]) -> PathSample {
        let mut p = PathSample::empty(1, 1, 10.0);
        for &t in times {
            p.events.push(Event {
                time: t,
                component: 0,
                mark: vec![0.6],
                claim: vec![1.0],
            });
        }
        p
    }

    #[test]
    fn empty_path_is_linear() {
        assert_eq!(compensator(&spec(), &path(&[]), 0, 3.0), 0.7 * 3.0);
    }

    #[test]
    fn single_event_closed_form() {
        let c = compensator(&spec(), &path(&[1.0]), 0, 2.5);
        let want = 0.7 * 2.5 + 0.6 * (1.0 - (-2.0f64 * 1.5).exp()) / 2.0;
        assert!((c - want).abs() < 1e-15);
    }

    #[test]
    fn single_pass_matches_direct() {
        let s = spec();
        let p = path(&[0.3, 0.5, 1.7, 1.71, 4.0]);
        let fast = compensator_at_own_events(&s, &p, 0);
        for (e, c) in p.events.iter().zip(fast) {
            assert!((c - compensator(&s, &p, 0, e.time)).abs() < 1e-12);
        }
    }
}
