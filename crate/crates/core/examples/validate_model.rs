//! Load a model (the bundled bivariate one, or a TOML/JSON path given as the
//! first argument) and print its stability and drift summary.
//!
//! cargo run --example validate_model -- crates/core/configs/bivariate_deterministic.toml

use compound_hawkes::model::{
    bivariate, branching_matrix, mean_drift, spectral_radius, validate_net_profit, MarkRegime,
    ModelConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = match std::env::args().nth(1) {
        Some(path) => ModelConfig::from_path(path)?.build()?,
        None => bivariate(MarkRegime::Random)?,
    };
    let h = branching_matrix(&spec);
    println!("H = {h}");
    println!(
        "spectral radius  {:.6}",
        spectral_radius(&h, spec.numerics())?
    );
    println!("stationary rates {:?}", spec.stationary_rates()?);
    let drift = mean_drift(&spec)?;
    for i in 0..spec.dstar() {
        println!(
            "component {}: drift {:.4}, premium {:.4}, net profit {}",
            i + 1,
            drift[i],
            spec.premium()[i],
            validate_net_profit(&spec, i)?
        );
    }
    Ok(())
}
