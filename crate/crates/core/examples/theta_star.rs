//! The adjustment coefficient θ* for each mark regime and the Lundberg
//! bound e^{−θ* u} it implies.

use compound_hawkes::model::{bivariate, MarkRegime};
use compound_hawkes::optimize::solve_theta_star;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for regime in [MarkRegime::Deterministic, MarkRegime::Random] {
        let spec = bivariate(regime)?;
        for i in 0..spec.dstar() {
            let t = solve_theta_star(&spec, i)?;
            let bounds: Vec<String> = [1.0, 10.0, 100.0]
                .iter()
                .map(|u| format!("ψ({u}) ≤ {:.3e}", (-t * u).exp()))
                .collect();
            println!(
                "{regime:?} component {}: θ* = {t:.6}; {}",
                i + 1,
                bounds.join(", ")
            );
        }
    }
    Ok(())
}
