//! The limiting cumulant Λ(θ), its gradient, and the edge of its domain
//! along a direction.

use compound_hawkes::model::{bivariate, MarkRegime};
use compound_hawkes::transforms::{cumulant_gradient, cumulant_value, domain_boundary};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    println!(
        "{:>8} {:>8} {:>12} {:>12} {:>12}",
        "θ1", "θ2", "Λ", "∂1Λ", "∂2Λ"
    );
    for theta in [
        [0.0, 0.0],
        [0.02, 0.0],
        [0.0, 0.02],
        [0.03, 0.02],
        [-0.1, -0.1],
    ] {
        let g = cumulant_gradient(&spec, &theta)?;
        println!(
            "{:>8.3} {:>8.3} {:>12.6} {:>12.6} {:>12.6}",
            theta[0],
            theta[1],
            cumulant_value(&spec, &theta),
            g[0],
            g[1]
        );
    }
    for dir in [[1.0, 1.0], [2.0, 1.0], [1.0, 2.0]] {
        let b = domain_boundary(&spec, &dir)?;
        println!(
            "boundary along {dir:?}: ẑ = {:?}, x̂ = {:?}",
            b.z_hat, b.x_hat
        );
    }
    Ok(())
}
