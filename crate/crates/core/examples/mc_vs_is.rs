//! Plain Monte Carlo against importance sampling at the same precision, with
//! the wall-clock speedup κ.

use compound_hawkes::estimate::{
    estimate_ruin_is, estimate_ruin_mc, speedup_ratio, StoppingRule, DEFAULT_MC_HORIZON_CAP,
};
use compound_hawkes::model::{bivariate, MarkRegime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let rule = StoppingRule::with_epsilon(0.05);
    for u in [1.0, 10.0, 30.0] {
        let is_ = estimate_ruin_is(&spec, 0, u, &rule, 5)?;
        let mc = estimate_ruin_mc(&spec, 0, u, &rule, DEFAULT_MC_HORIZON_CAP, 5)?;
        println!(
            "u={u:>4}: MC {:.3e} ({} runs), IS {:.3e} ({} runs), κ = {:.2}",
            mc.estimate,
            mc.runs,
            is_.estimate,
            is_.runs,
            speedup_ratio(&mc, &is_)?
        );
    }
    Ok(())
}
