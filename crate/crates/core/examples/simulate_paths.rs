//! Simulate one seeded path by thinning and one by the cluster construction,
//! then print the counts and the head of the event log.

use compound_hawkes::model::{bivariate, MarkRegime};
use compound_hawkes::simulate::{simulate_hawkes, simulate_hawkes_by_clusters, RunRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let horizon = 100.0;
    let path = simulate_hawkes(&spec, horizon, &mut RunRng::new(42, 0))?;
    println!(
        "thinning:  N({horizon}) = {:?}, Z({horizon}) = {:.2?}",
        path.counts, path.compound
    );
    let clusters = simulate_hawkes_by_clusters(&spec, horizon, 42)?;
    println!(
        "clusters:  N({horizon}) = {:?}, Z({horizon}) = {:.2?}",
        clusters.counts, clusters.compound
    );
    println!("expected:  N/t ≈ {:.3?}", spec.stationary_rates()?);

    let mut csv = Vec::new();
    path.write_csv(&mut csv)?;
    for line in String::from_utf8(csv)?.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
