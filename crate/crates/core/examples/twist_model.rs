//! Build the exponentially twisted model for the ruin problem of component 1
//! and print it as a config that `chawkes --config` accepts.

use compound_hawkes::model::{bivariate, mean_drift, MarkRegime, ModelConfig};
use compound_hawkes::optimize::solve_theta_star;
use compound_hawkes::transforms::embed;
use compound_hawkes::twist::{twist_consistency_check, TwistedModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = bivariate(MarkRegime::Random)?;
    let t = solve_theta_star(&spec, 0)?;
    let q = TwistedModel::build(&spec, &embed(2, 0, t))?;
    println!("θ* = {t:.6}, f(m_U(θ*)) = {:?}", q.f_at_twist);
    println!("drift under P {:?}", mean_drift(&spec)?);
    println!("drift under Q {:?}", mean_drift(&q.base)?);
    let grid: Vec<Vec<f64>> = (-2..=0)
        .flat_map(|a| (-2..=2).map(move |b| vec![0.01 * a as f64, 0.01 * b as f64]))
        .collect();
    let rep = twist_consistency_check(&spec, &q, &grid);
    println!(
        "Λ^Q(θ) = Λ(θ+θ*) − Λ(θ*): max error {:.2e} over {} points",
        rep.max_abs_error, rep.evaluated
    );
    println!("\n{}", ModelConfig::from_spec(&q.base).to_toml_string());
    Ok(())
}
