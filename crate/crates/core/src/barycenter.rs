//! Free-support Wasserstein barycenters with fixed uniform masses.
//!
//! Alternates between exact transport from the current support to every
//! input measure and a barycentric-projection update of the support points.
//! Both steps can only lower `sum_l lambda_l W2^2(mu_l, barycenter)`, so the
//! objective trace is non-increasing.

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::ot::{pairwise_cost, solve_transport, CostMatrix, DiscreteMeasure, TransportPlan};

pub const DEFAULT_MAX_OUTER_ITER: usize = 50;
pub const DEFAULT_OBJECTIVE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitStrategy {
    /// `MeanOfInputs` when every input has `k` atoms, otherwise `FirstInput`.
    #[default]
    Auto,
    FirstInput,
    /// Index-wise mean of the input supports.
    MeanOfInputs,
    /// Explicit `k x d` starting support.
    Given(Array2<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarycenterConfig {
    pub support_size: usize,
    /// Aggregation weights over the inputs; `None` means uniform.
    pub weights: Option<Vec<f64>>,
    pub max_outer_iter: usize,
    pub objective_tol: f64,
    pub init: InitStrategy,
}

impl BarycenterConfig {
    pub fn new(support_size: usize) -> Self {
        Self {
            support_size,
            weights: None,
            max_outer_iter: DEFAULT_MAX_OUTER_ITER,
            objective_tol: DEFAULT_OBJECTIVE_TOL,
            init: InitStrategy::Auto,
        }
    }

    pub fn with_init(mut self, init: InitStrategy) -> Self {
        self.init = init;
        self
    }

    fn aggregation_weights(&self, count: usize) -> Result<Vec<f64>> {
        match &self.weights {
            None => Ok(vec![1.0 / count as f64; count]),
            Some(w) => {
                if w.len() != count {
                    return Err(Error::SizeMismatch(format!(
                        "{count} measures but {} aggregation weights",
                        w.len()
                    )));
                }
                if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                    return Err(Error::InvalidConfig("aggregation weights must be nonnegative".into()));
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidConfig(format!(
                        "aggregation weights sum to {total}, expected 1"
                    )));
                }
                Ok(w.clone())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.support_size == 0 {
            return Err(Error::InvalidConfig("support size must be positive".into()));
        }
        if self.max_outer_iter == 0 {
            return Err(Error::InvalidConfig("max_outer_iter must be positive".into()));
        }
        if !(self.objective_tol.is_finite() && self.objective_tol > 0.0) {
            return Err(Error::InvalidConfig("objective_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BarycenterResult {
    /// Support locations with masses `1/k`.
    pub measure: DiscreteMeasure,
    /// `sum_l lambda_l W2^2` evaluated at each outer iteration.
    pub objective_trace: Vec<f64>,
    /// `sum_l lambda_l W2` at the returned support; reported, not minimized.
    pub unsquared_objective: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

impl BarycenterResult {
    pub fn objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

fn check_shared_dimension(measures: &[DiscreteMeasure]) -> Result<usize> {
    let first = measures
        .first()
        .ok_or_else(|| Error::InvalidConfig("at least one input measure is required".into()))?;
    let d = first.dim();
    for m in measures {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
    }
    Ok(d)
}

/// Starting support for the barycenter iteration.
pub fn init_support(measures: &[DiscreteMeasure], config: &BarycenterConfig) -> Result<Array2<f64>> {
    let d = check_shared_dimension(measures)?;
    let k = config.support_size;
    let all_k = measures.iter().all(|m| m.len() == k);
    let strategy = match &config.init {
        InitStrategy::Auto if all_k => &InitStrategy::MeanOfInputs,
        InitStrategy::Auto => &InitStrategy::FirstInput,
        other => other,
    };
    match strategy {
        InitStrategy::FirstInput => {
            if measures[0].len() != k {
                return Err(Error::SizeMismatch(format!(
                    "first_input needs k = {} but k = {k}",
                    measures[0].len()
                )));
            }
            Ok(measures[0].support().to_owned())
        }
        InitStrategy::MeanOfInputs => {
            if !all_k {
                return Err(Error::SizeMismatch(format!(
                    "mean_of_inputs needs every input to have k = {k} atoms"
                )));
            }
            let mut mean = Array2::zeros((k, d));
            for m in measures {
                mean += &m.support();
            }
            mean /= measures.len() as f64;
            Ok(mean)
        }
        InitStrategy::Given(points) => {
            if points.dim() != (k, d) {
                return Err(Error::SizeMismatch(format!(
                    "given support is {:?}, expected ({k}, {d})",
                    points.dim()
                )));
            }
            if points.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("given support".into()));
            }
            Ok(points.clone())
        }
        InitStrategy::Auto => unreachable!(),
    }
}

/// Barycentric-projection step: each support point moves to the
/// `lambda`-weighted mean of where its mass is sent in every input.
pub fn update_locations(
    measures: &[DiscreteMeasure],
    plans: &[TransportPlan],
    lambda: &[f64],
    current: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    if plans.len() != measures.len() || lambda.len() != measures.len() {
        return Err(Error::SizeMismatch(format!(
            "{} measures, {} plans, {} weights",
            measures.len(),
            plans.len(),
            lambda.len()
        )));
    }
    let (k, d) = current.dim();
    let mut next = Array2::zeros((k, d));
    for ((measure, plan), &weight) in measures.iter().zip(plans).zip(lambda) {
        let pi = plan.coupling();
        if pi.dim() != (k, measure.len()) || measure.dim() != d {
            return Err(Error::ShapeMismatch(format!(
                "plan is {:?}, expected ({k}, {})",
                pi.dim(),
                measure.len()
            )));
        }
        let targets = measure.support();
        for i in 0..k {
            let row = pi.row(i);
            let mass: f64 = row.sum();
            let mut out = next.row_mut(i);
            if mass <= 0.0 {
                out.scaled_add(weight, &current.row(i));
                continue;
            }
            let source_mass = plan.source_marginal()[i];
            let scale = weight / if source_mass > 0.0 { source_mass } else { mass };
            for (j, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    out.scaled_add(scale * p, &targets.row(j));
                }
            }
        }
    }
    Ok(next)
}

struct Evaluation {
    plans: Vec<TransportPlan>,
    squared: f64,
    unsquared: f64,
}

fn evaluate(
    measures: &[DiscreteMeasure],
    lambda: &[f64],
    support: ArrayView2<'_, f64>,
    masses: &[f64],
) -> Result<Evaluation> {
    let mut plans = Vec::with_capacity(measures.len());
    let mut squared = 0.0;
    let mut unsquared = 0.0;
    for (measure, &weight) in measures.iter().zip(lambda) {
        let cost = CostMatrix::from_entries(pairwise_cost(support, measure.support(), 2.0), 2.0)?;
        let targets = measure.weights().to_vec();
        let solution = solve_transport(masses, &targets, &cost)?;
        let w2sq = solution.cost.max(0.0);
        squared += weight * w2sq;
        unsquared += weight * w2sq.sqrt();
        plans.push(solution.plan);
    }
    Ok(Evaluation {
        plans,
        squared,
        unsquared,
    })
}

/// Free-support barycenter of `measures` under `config`.
pub fn free_support_barycenter(
    measures: &[DiscreteMeasure],
    config: &BarycenterConfig,
) -> Result<BarycenterResult> {
    config.validate()?;
    check_shared_dimension(measures)?;
    let lambda = config.aggregation_weights(measures.len())?;
    let k = config.support_size;
    let masses = vec![1.0 / k as f64; k];
    let mut support = init_support(measures, config)?;

    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut unsquared;
    loop {
        let eval = evaluate(measures, &lambda, support.view(), &masses)?;
        unsquared = eval.unsquared;
        let objective = eval.squared;
        if let Some(&previous) = trace.last() {
            trace.push(objective);
            if (objective - previous).abs() <= config.objective_tol * previous.max(1.0) {
                converged = true;
                break;
            }
        } else {
            trace.push(objective);
            if objective == 0.0 {
                converged = true;
                break;
            }
        }
        if trace.len() == config.max_outer_iter {
            break;
        }
        support = update_locations(measures, &eval.plans, &lambda, support.view())?;
    }

    let measure = DiscreteMeasure::new(support, Array1::from(masses))?;
    Ok(BarycenterResult {
        measure,
        iterations_used: trace.len(),
        objective_trace: trace,
        unsquared_objective: unsquared,
        converged,
    })
}
