//! Total progeny of univariate clusters against the Borel law.

use compound_hawkes::model::{DecayKernel, ModelSpec, VectorLaw};
use compound_hawkes::simulate::{simulate_cluster, RunRng};

fn borel(mu: f64, n: u64) -> f64 {
    let n = n as f64;
    ((n - 1.0) * (mu * n).ln() - mu * n - (1..=n as u64).map(|k| (k as f64).ln()).sum::<f64>())
        .exp()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mu = 0.5;
    let spec = ModelSpec::new(
        vec![1.0],
        vec![vec![DecayKernel::exponential(1.0)?]],
        vec![VectorLaw::deterministic(vec![mu])?],
        vec![VectorLaw::deterministic(vec![1.0])?],
        vec![4.0],
    )?;
    let samples = 100_000;
    let mut counts = [0u64; 11];
    let mut rng = RunRng::new(1, 0);
    for _ in 0..samples {
        let s = simulate_cluster(&spec, 0, &mut rng)?.total_counts[0];
        if s <= 10 {
            counts[s as usize] += 1;
        }
    }
    println!("{:>3} {:>10} {:>10}", "n", "empirical", "Borel");
    for n in 1..=10 {
        println!(
            "{n:>3} {:>10.5} {:>10.5}",
            counts[n as usize] as f64 / samples as f64,
            borel(mu, n)
        );
    }
    Ok(())
}
