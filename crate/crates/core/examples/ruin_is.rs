//! Importance-sampling ruin probabilities over a range of initial reserves.

use compound_hawkes::estimate::{estimate_ruin_is, StoppingRule};
use compound_hawkes::model::{bivariate, MarkRegime};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let rule = StoppingRule::with_epsilon(0.05);
    println!(
        "{:>6} {:>12} {:>12} {:>8} {:>8}",
        "u", "ψ(u)", "Lundberg", "ε", "runs"
    );
    for u in [1.0, 10.0, 50.0, 100.0, 200.0] {
        let r = estimate_ruin_is(&spec, 0, u, &rule, 7)?;
        println!(
            "{u:>6} {:>12.4e} {:>12.4e} {:>8.4} {:>8}",
            r.estimate,
            r.bound.unwrap(),
            r.rel_std_err,
            r.runs
        );
    }
    Ok(())
}
