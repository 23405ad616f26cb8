//! The metric: aggregate each text's layer measures into a barycenter and
//! compare the two barycenters with an exact Wasserstein distance.
//!
//! Lower scores mean closer texts; identical inputs score zero.

mod output;

pub use output::{read_scores_csv, write_scores_csv, ScoreRow};

use ndarray::Array1;
use rayon::prelude::*;

use crate::barycenter::{
    free_support_barycenter, BarycenterConfig, BarycenterResult, InitStrategy, DEFAULT_MAX_OUTER_ITER,
    DEFAULT_OBJECTIVE_TOL,
};
use crate::embeddings::{build_measures, token_weights, IdfTable, LayeredEmbedding, Weighting};
use crate::error::{Error, Result};
use crate::ot::{wasserstein, DiscreteMeasure, DEFAULT_EXPONENT};

/// Masses placed on the barycenter support before the final distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FinalMass {
    #[default]
    Uniform,
    /// Token IDF masses; for sensitivity checks only.
    Idf,
}

/// How scores against several references collapse to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MultiReference {
    #[default]
    Min,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreConfig {
    pub p: f64,
    pub weighting: Weighting,
    /// `None` uses every layer, including the input embedding layer.
    pub layer_selection: Option<Vec<usize>>,
    /// Aggregation weights over the selected layers; `None` is uniform.
    pub layer_weights: Option<Vec<f64>>,
    pub max_outer_iter: usize,
    pub objective_tol: f64,
    pub final_mass: FinalMass,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            p: DEFAULT_EXPONENT,
            weighting: Weighting::Idf,
            layer_selection: None,
            layer_weights: None,
            max_outer_iter: DEFAULT_MAX_OUTER_ITER,
            objective_tol: DEFAULT_OBJECTIVE_TOL,
            final_mass: FinalMass::Uniform,
        }
    }
}

impl ScoreConfig {
    fn layers(&self, available: usize) -> Result<Vec<usize>> {
        match &self.layer_selection {
            None => Ok((0..available).collect()),
            Some(sel) if sel.is_empty() => Err(Error::InvalidConfig("layer selection is empty".into())),
            Some(sel) => {
                if let Some(bad) = sel.iter().find(|&&l| l >= available) {
                    return Err(Error::InvalidConfig(format!(
                        "layer {bad} out of range for {available} layers"
                    )));
                }
                Ok(sel.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideDiagnostics {
    /// Final `sum_l lambda_l W2^2` of the barycenter.
    pub objective: f64,
    pub unsquared_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl From<&BarycenterResult> for SideDiagnostics {
    fn from(r: &BarycenterResult) -> Self {
        Self {
            objective: r.objective(),
            unsquared_objective: r.unsquared_objective,
            iterations: r.iterations_used,
            converged: r.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub candidate_id: String,
    pub reference_id: String,
    pub score: f64,
    pub candidate: SideDiagnostics,
    pub reference: SideDiagnostics,
}

/// A text collapsed to its barycentric measure.
#[derive(Debug, Clone)]
pub struct TextBarycenter {
    pub text_id: String,
    pub measure: DiscreteMeasure,
    pub result: BarycenterResult,
}

/// Barycenter of the selected layer measures of one text.
pub fn text_barycenter(emb: &LayeredEmbedding, idf: &IdfTable, config: &ScoreConfig) -> Result<TextBarycenter> {
    let layers = config.layers(emb.num_layers())?;
    let bundle = build_measures(emb, idf, config.weighting)?;
    let measures = bundle.select(&layers)?;
    let bary_config = BarycenterConfig {
        support_size: emb.num_tokens(),
        weights: config.layer_weights.clone(),
        max_outer_iter: config.max_outer_iter,
        objective_tol: config.objective_tol,
        init: InitStrategy::Auto,
    };
    let result = free_support_barycenter(&measures, &bary_config)?;
    let measure = match config.final_mass {
        FinalMass::Uniform => result.measure.clone(),
        FinalMass::Idf => DiscreteMeasure::new(
            result.measure.support().to_owned(),
            Array1::from(token_weights(emb, idf, Weighting::Idf)),
        )?,
    };
    Ok(TextBarycenter {
        text_id: emb.text_id().to_owned(),
        measure,
        result,
    })
}

/// Wasserstein distance between two text barycenters.
pub fn score_barycenters(cand: &TextBarycenter, reference: &TextBarycenter, p: f64) -> Result<ScoreRecord> {
    let score = wasserstein(&cand.measure, &reference.measure, p)?;
    Ok(ScoreRecord {
        candidate_id: cand.text_id.clone(),
        reference_id: reference.text_id.clone(),
        score,
        candidate: (&cand.result).into(),
        reference: (&reference.result).into(),
    })
}

fn check_compatible(cand: &LayeredEmbedding, reference: &LayeredEmbedding) -> Result<()> {
    if cand.num_layers() != reference.num_layers() {
        return Err(Error::ShapeMismatch(format!(
            "{} has L={} but {} has L={}",
            cand.text_id(),
            cand.num_layers(),
            reference.text_id(),
            reference.num_layers()
        )));
    }
    if cand.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: cand.dim(),
            found: reference.dim(),
        });
    }
    Ok(())
}

pub fn bary_score(
    cand: &LayeredEmbedding,
    reference: &LayeredEmbedding,
    idf: &IdfTable,
    config: &ScoreConfig,
) -> Result<ScoreRecord> {
    check_compatible(cand, reference)?;
    let c = text_barycenter(cand, idf, config)?;
    let r = text_barycenter(reference, idf, config)?;
    score_barycenters(&c, &r, config.p)
}

/// Scores one candidate against several references. The reported
/// `reference_id` joins the ids with `|`; diagnostics are the closest match's.
pub fn bary_score_multi(
    cand: &LayeredEmbedding,
    references: &[&LayeredEmbedding],
    idf: &IdfTable,
    config: &ScoreConfig,
    reduction: MultiReference,
) -> Result<ScoreRecord> {
    if references.is_empty() {
        return Err(Error::InvalidConfig(format!("{} has no references", cand.text_id())));
    }
    for r in references {
        check_compatible(cand, r)?;
    }
    let c = text_barycenter(cand, idf, config)?;
    let mut records = Vec::with_capacity(references.len());
    for r in references {
        let r = text_barycenter(r, idf, config)?;
        records.push(score_barycenters(&c, &r, config.p)?);
    }
    let best = records
        .iter()
        .min_by(|a, b| a.score.total_cmp(&b.score))
        .expect("non-empty")
        .clone();
    let score = match reduction {
        MultiReference::Min => best.score,
        MultiReference::Mean => records.iter().map(|r| r.score).sum::<f64>() / records.len() as f64,
    };
    let reference_id = records
        .iter()
        .map(|r| r.reference_id.as_str())
        .collect::<Vec<_>>()
        .join("|");
    Ok(ScoreRecord {
        reference_id,
        score,
        ..best
    })
}

/// Runs `job(i)` for `0..len`, results in index order, on up to `workers` threads.
pub fn run_indexed<T, F>(len: usize, workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || len <= 1 {
        return Ok((0..len).map(job).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..len).into_par_iter().map(job).collect()))
}

/// Element-wise [`bary_score`] over aligned lists. A failing pair yields an
/// `Err` in its slot without aborting the others.
pub fn batch_score(
    cands: &[LayeredEmbedding],
    refs: &[LayeredEmbedding],
    idf: &IdfTable,
    config: &ScoreConfig,
    workers: usize,
) -> Result<Vec<Result<ScoreRecord>>> {
    if cands.len() != refs.len() {
        return Err(Error::SizeMismatch(format!(
            "{} candidates but {} references",
            cands.len(),
            refs.len()
        )));
    }
    run_indexed(cands.len(), workers, |i| bary_score(&cands[i], &refs[i], idf, config))
}
