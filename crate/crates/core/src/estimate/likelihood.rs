//! Log likelihood ratio `log dP/dQ` of a path simulated under a twisted model.

use crate::model::ModelSpec;
use crate::simulate::{compensator, PathSample};
use crate::twist::TwistedModel;

/// The four terms of `log L_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LikelihoodBreakdown {
    /// `−Σ_j (1 − f_j) Λ^P_j(t)`, compensators taken under the original model.
    pub log_compensator_term: f64,
    /// `−θ*ᵀ Z(t)`.
    pub log_claim_tilt_term: f64,
    /// `Σ_events [log m_{B_l}(c̄_l) − c̄_lᵀ B]`.
    pub log_mark_ratio_term: f64,
    /// `Σ_j N_j(t) [log m_{U_j}(θ*) − log f_j]`.
    pub log_count_term: f64,
    pub total: f64,
}

/// `log L_t` for a path sampled under `q`, using events up to time `t`.
pub fn log_likelihood_ratio(
    p_model: &ModelSpec,
    q: &TwistedModel,
    path: &PathSample,
    t: f64,
) -> LikelihoodBreakdown {
    let d = p_model.d();
    let mut claim = 0.0;
    let mut mark = 0.0;
    let mut counts = vec![0u64; d];
    for e in path.events.iter().take_while(|e| e.time <= t) {
        let l = e.component;
        counts[l] += 1;
        claim -= q
            .theta_star
            .iter()
            .zip(&e.claim)
            .map(|(a, b)| a * b)
            .sum::<f64>();
        mark += q.log_mark_normalizer[l]
            - q.cbar_q[l]
                .iter()
                .zip(&e.mark)
                .map(|(a, b)| a * b)
                .sum::<f64>();
    }
    let mut comp = 0.0;
    let mut count = 0.0;
    for j in 0..d {
        let f = q.f_at_twist[j];
        if f != 1.0 {
            comp -= (1.0 - f) * compensator(p_model, path, j, t);
        }
        count += counts[j] as f64 * (q.log_mu_at_twist[j] - f.ln());
    }
    LikelihoodBreakdown {
        log_compensator_term: comp,
        log_claim_tilt_term: claim,
        log_mark_ratio_term: mark,
        log_count_term: count,
        total: comp + claim + mark + count,
    }
}
