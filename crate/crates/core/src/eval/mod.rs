//! Agreement between metric scores and human judgments.

mod correlation;
mod dataset;
mod williams;

pub use correlation::{
    average_ranks, kendall, kendall_pair_counts, pearson, spearman, Coefficient, PairCounts,
};
pub use dataset::{read_judgments, read_references, EvalDataset, Judgment};
pub use williams::{student_t_sf, williams_test, WilliamsOutcome};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    System,
    Text,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::System => "system",
            Level::Text => "text",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system" => Ok(Level::System),
            "text" => Ok(Level::Text),
            other => Err(Error::InvalidConfig(format!("unknown level {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub coefficient: Coefficient,
    pub level: Level,
    pub value: f64,
    pub n_effective: usize,
}

fn check_grid(dataset: &EvalDataset, metric: &Array2<f64>) -> Result<()> {
    if metric.dim() != dataset.human_scores().dim() {
        return Err(Error::ShapeMismatch(format!(
            "metric grid is {:?}, dataset is {:?}",
            metric.dim(),
            dataset.human_scores().dim()
        )));
    }
    Ok(())
}

/// Correlation between per-system means of metric and human scores.
pub fn system_level(dataset: &EvalDataset, metric: &Array2<f64>, coefficient: Coefficient) -> Result<CorrelationReport> {
    check_grid(dataset, metric)?;
    let m = metric.mean_axis(Axis(0)).expect("non-empty grid");
    let h = dataset.human_scores().mean_axis(Axis(0)).expect("non-empty grid");
    let value = coefficient.apply(m.as_slice().unwrap(), h.as_slice().unwrap())?;
    Ok(CorrelationReport {
        coefficient,
        level: Level::System,
        value,
        n_effective: dataset.num_systems(),
    })
}

/// Mean over texts of the correlation across systems. Rows where either
/// side is constant are skipped and excluded from `n_effective`.
pub fn text_level(dataset: &EvalDataset, metric: &Array2<f64>, coefficient: Coefficient) -> Result<CorrelationReport> {
    check_grid(dataset, metric)?;
    if dataset.num_systems() < 2 {
        return Err(Error::DegenerateInput("text level needs at least 2 systems".into()));
    }
    let human = dataset.human_scores();
    let mut total = 0.0;
    let mut used = 0usize;
    for (i, (m_row, h_row)) in metric.rows().into_iter().zip(human.rows()).enumerate() {
        match coefficient.apply(&m_row.to_vec(), &h_row.to_vec()) {
            Ok(v) => {
                total += v;
                used += 1;
            }
            Err(Error::DegenerateInput(why)) => {
                log::warn!("text {} skipped: {why}", dataset.text_ids()[i]);
            }
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(Error::AllRowsDegenerate);
    }
    let skipped = dataset.num_texts() - used;
    if skipped > 0 {
        log::warn!("{skipped} of {} texts excluded from the text-level mean", dataset.num_texts());
    }
    Ok(CorrelationReport {
        coefficient,
        level: Level::Text,
        value: total / used as f64,
        n_effective: used,
    })
}

pub fn correlate(
    dataset: &EvalDataset,
    metric: &Array2<f64>,
    level: Level,
    coefficient: Coefficient,
) -> Result<CorrelationReport> {
    match level {
        Level::System => system_level(dataset, metric, coefficient),
        Level::Text => text_level(dataset, metric, coefficient),
    }
}

/// Reports for every `(level, coefficient)` pair. Distance-like scores are
/// negated first so a good metric correlates positively with human scores;
/// `absolute` reports magnitudes only.
pub fn evaluate(
    dataset: &EvalDataset,
    distances: &Array2<f64>,
    levels: &[Level],
    coefficients: &[Coefficient],
    absolute: bool,
) -> Result<Vec<CorrelationReport>> {
    let oriented = distances.mapv(|v| -v);
    let mut out = Vec::with_capacity(levels.len() * coefficients.len());
    for &level in levels {
        for &coefficient in coefficients {
            let mut report = correlate(dataset, &oriented, level, coefficient)?;
            if absolute {
                report.value = report.value.abs();
            }
            out.push(report);
        }
    }
    Ok(out)
}
