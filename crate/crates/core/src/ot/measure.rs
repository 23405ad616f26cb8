use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Weight vectors whose total is off by at most this much are rescaled silently.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-6;

/// A point in embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("point coordinate {bad}")));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A finitely supported probability measure on R^d.
///
/// The support is stored row-major: row `i` is the location of atom `i`,
/// carrying mass `weights[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    support: Array2<f64>,
    weights: Array1<f64>,
}

impl DiscreteMeasure {
    pub fn new(support: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        let (n, d) = support.dim();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        if d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if weights.len() != n {
            return Err(Error::SizeMismatch(format!(
                "{n} support points but {} weights",
                weights.len()
            )));
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("support coordinate".into()));
        }
        let weights = Array1::from(normalize_marginal(&weights.to_vec(), "weights")?);
        Ok(Self { support, weights })
    }

    /// Uniform masses `1/n` on the rows of `support`.
    pub fn uniform(support: Array2<f64>) -> Result<Self> {
        let n = support.nrows();
        if n == 0 {
            return Err(Error::EmptyMeasure);
        }
        Self::new(support, Array1::from_elem(n, 1.0 / n as f64))
    }

    pub fn dirac(point: &[f64]) -> Result<Self> {
        let support = Array2::from_shape_vec((1, point.len()), point.to_vec())
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(support, Array1::from_elem(1, 1.0))
    }

    pub fn from_points(points: &[Point], weights: &[f64]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyMeasure)?;
        let d = first.dim();
        let mut flat = Vec::with_capacity(points.len() * d);
        for p in points {
            if p.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.dim(),
                });
            }
            flat.extend_from_slice(p.coords());
        }
        let support = Array2::from_shape_vec((points.len(), d), flat)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Self::new(support, Array1::from(weights.to_vec()))
    }

    pub fn len(&self) -> usize {
        self.support.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.support.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn support(&self) -> ArrayView2<'_, f64> {
        self.support.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.support.row(i)
    }

    pub fn into_parts(self) -> (Array2<f64>, Array1<f64>) {
        (self.support, self.weights)
    }
}

/// Checks that `w` lies on the probability simplex, rescaling away small drift.
pub(crate) fn normalize_marginal(w: &[f64], name: &str) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(Error::InfeasibleMarginals(format!("{name} is empty")));
    }
    if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InfeasibleMarginals(format!(
            "{name} contains invalid mass {bad}"
        )));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > RENORMALIZE_TOLERANCE {
        return Err(Error::InfeasibleMarginals(format!(
            "{name} sums to {total}, expected 1"
        )));
    }
    if total == 1.0 {
        Ok(w.to_vec())
    } else {
        Ok(w.iter().map(|x| x / total).collect())
    }
}
