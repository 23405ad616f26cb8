use ndarray::{Array1, Array2};

use super::cost::CostMatrix;
use super::measure::normalize_marginal;
use super::network_simplex::{TransportPlan, TransportSolution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SinkhornOptions {
    pub epsilon: f64,
    pub max_iter: usize,
    /// L1 bound on the row-marginal violation.
    pub tol: f64,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-2,
            max_iter: 10_000,
            tol: 1e-9,
        }
    }
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Entropic transport via log-domain Sinkhorn scaling. The returned solution
/// is flagged `exact = false`; its cost is `<pi, C>` of the entropic plan.
pub fn sinkhorn_transport(
    a: &[f64],
    b: &[f64],
    cost: &CostMatrix,
    options: &SinkhornOptions,
) -> Result<TransportSolution> {
    let eps = options.epsilon;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {eps}")));
    }
    let a = normalize_marginal(a, "source marginal")?;
    let b = normalize_marginal(b, "target marginal")?;
    let (n, m) = (a.len(), b.len());
    if cost.nrows() != n || cost.ncols() != m {
        return Err(Error::ShapeMismatch(format!(
            "cost is {}x{} but marginals have lengths {n} and {m}",
            cost.nrows(),
            cost.ncols()
        )));
    }
    let c = cost.entries();
    let log_a: Vec<f64> = a.iter().map(|x| x.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|x| x.ln()).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];

    let plan_entry = |f: &[f64], g: &[f64], i: usize, j: usize| -> f64 {
        if a[i] == 0.0 || b[j] == 0.0 {
            0.0
        } else {
            ((f[i] + g[j] - c[[i, j]]) / eps).exp()
        }
    };

    let mut error = f64::INFINITY;
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        for i in 0..n {
            f[i] = if a[i] == 0.0 {
                0.0
            } else {
                eps * log_a[i]
                    - eps * log_sum_exp((0..m).filter(|&j| b[j] > 0.0).map(|j| (g[j] - c[[i, j]]) / eps))
            };
        }
        for j in 0..m {
            g[j] = if b[j] == 0.0 {
                0.0
            } else {
                eps * log_b[j]
                    - eps * log_sum_exp((0..n).filter(|&i| a[i] > 0.0).map(|i| (f[i] - c[[i, j]]) / eps))
            };
        }
        // Columns are exact after the g-update; measure the row violation.
        error = (0..n)
            .map(|i| ((0..m).map(|j| plan_entry(&f, &g, i, j)).sum::<f64>() - a[i]).abs())
            .sum();
        if error <= options.tol {
            break;
        }
    }
    if error > options.tol {
        return Err(Error::NonConvergence {
            iterations,
            marginal_error: error,
        });
    }

    let coupling = Array2::from_shape_fn((n, m), |(i, j)| plan_entry(&f, &g, i, j));
    let plan = TransportPlan::new(coupling, Array1::from(a), Array1::from(b));
    let total = plan.cost_under(c);
    Ok(TransportSolution {
        plan,
        cost: total,
        exact: false,
        iterations,
    })
}
