//! Solver tolerances and iteration caps shared by every numerical routine.

use serde::{Deserialize, Serialize};

/// Tolerances carried by a [`ModelSpec`](crate::model::ModelSpec) so that every
/// operation on the model uses the same numerical budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericsConfig {
    /// Sup-norm step below which the cluster PGF iteration stops.
    pub fixed_point_tol: f64,
    /// Largest admissible residual of an accepted fixed point.
    pub fixed_point_residual_tol: f64,
    /// Any fixed-point component above this value is treated as divergence.
    pub divergence_guard: f64,
    pub fixed_point_max_iter: usize,
    /// Gradient / residual tolerance for Newton-type solvers.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Step-halvings allowed while backtracking into the domain.
    pub max_halvings: usize,
    /// Condition number of `I − B̂ᵀ` above which the PGF Jacobian is refused.
    pub near_singular_cond: f64,
    /// Width of the final bracket in one-dimensional root finding.
    pub bisection_tol: f64,
    pub power_iter_tol: f64,
    pub power_iter_max_iter: usize,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            fixed_point_tol: 1e-12,
            fixed_point_residual_tol: 1e-10,
            divergence_guard: 1e8,
            fixed_point_max_iter: 1_000_000,
            newton_tol: 1e-10,
            newton_max_iter: 200,
            max_halvings: 60,
            near_singular_cond: 1e12,
            bisection_tol: 1e-10,
            power_iter_tol: 1e-12,
            power_iter_max_iter: 100_000,
        }
    }
}
