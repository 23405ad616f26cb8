use ndarray::{Array2, ArrayView1, ArrayView2};

use super::measure::DiscreteMeasure;
use crate::error::{Error, Result};

/// Ground-cost matrix `C[i][j] = ||x_i - y_j||^p`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Array2<f64>,
    p: f64,
}

impl CostMatrix {
    /// Wraps an arbitrary nonnegative cost matrix. `p` only records the
    /// exponent used to turn the optimal cost into a distance.
    pub fn from_entries(entries: Array2<f64>, p: f64) -> Result<Self> {
        check_exponent(p)?;
        if let Some(bad) = entries.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::NonFinite(format!("cost entry {bad}")));
        }
        Ok(Self { entries, p })
    }

    pub fn entries(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("exponent p must be positive, got {p}")))
    }
}

pub(crate) fn squared_distance(x: ArrayView1<'_, f64>, y: ArrayView1<'_, f64>) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Pairwise cost between the supports of `mu` and `nu`.
pub fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<CostMatrix> {
    check_exponent(p)?;
    if mu.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: nu.dim(),
        });
    }
    let entries = pairwise_cost(mu.support(), nu.support(), p);
    if entries.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("cost overflowed".into()));
    }
    Ok(CostMatrix { entries, p })
}

pub(crate) fn pairwise_cost(xs: ArrayView2<'_, f64>, ys: ArrayView2<'_, f64>, p: f64) -> Array2<f64> {
    let mut out = Array2::zeros((xs.nrows(), ys.nrows()));
    for (i, x) in xs.rows().into_iter().enumerate() {
        for (j, y) in ys.rows().into_iter().enumerate() {
            let sq = squared_distance(x, y);
            out[[i, j]] = if p == 2.0 {
                sq
            } else if p == 1.0 {
                sq.sqrt()
            } else {
                sq.sqrt().powf(p)
            };
        }
    }
    out
}
