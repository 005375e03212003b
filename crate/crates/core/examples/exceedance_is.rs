//! Exceedance probabilities P(Z(t) ≥ a t) with the dominating-point twist.

use compound_hawkes::estimate::{estimate_exceedance_is, StoppingRule};
use compound_hawkes::model::{bivariate, MarkRegime};
use compound_hawkes::optimize::dominant_point;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let a = [10.0, 12.0];
    let dp = dominant_point(&spec, &a)?;
    println!(
        "dominant point {:?}, twist θ = {:?}, rate Λ* = {:.6}",
        dp.target, dp.theta, dp.rate
    );
    let rule = StoppingRule::with_epsilon(0.05);
    println!("{:>5} {:>12} {:>12} {:>8}", "t", "q(t)", "Chernoff", "runs");
    for t in [1.0, 5.0, 10.0, 20.0, 50.0] {
        let r = estimate_exceedance_is(&spec, &a, t, &rule, 11)?;
        println!(
            "{t:>5} {:>12.4e} {:>12.4e} {:>8}",
            r.estimate,
            r.bound.unwrap(),
            r.runs
        );
    }
    Ok(())
}
