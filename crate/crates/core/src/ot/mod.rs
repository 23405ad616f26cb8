//! Discrete optimal transport between finitely supported measures.

mod cost;
mod measure;
mod network_simplex;
mod sinkhorn;

pub use cost::{cost_matrix, CostMatrix};
pub(crate) use cost::pairwise_cost;
pub use measure::{DiscreteMeasure, Point, RENORMALIZE_TOLERANCE};
pub use network_simplex::{
    solve_transport, solve_transport_with, SolverOptions, TransportPlan, TransportSolution,
};
pub use sinkhorn::{sinkhorn_transport, SinkhornOptions};

use crate::error::Result;

/// Default ground-cost exponent (quadratic cost).
pub const DEFAULT_EXPONENT: f64 = 2.0;

/// p-Wasserstein distance `(min <pi, C>)^(1/p)` computed exactly.
pub fn wasserstein(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<f64> {
    Ok(wasserstein_with_plan(mu, nu, p)?.0)
}

/// Like [`wasserstein`], also returning the optimal coupling.
pub fn wasserstein_with_plan(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<(f64, TransportSolution)> {
    let cost = cost_matrix(mu, nu, p)?;
    let a = mu.weights().to_vec();
    let b = nu.weights().to_vec();
    let solution = solve_transport(&a, &b, &cost)?;
    let distance = solution.cost.max(0.0).powf(1.0 / p);
    Ok((distance, solution))
}
