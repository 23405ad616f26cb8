use std::io::{Read, Write};

use serde::Deserialize;

use super::ScoreRecord;
use crate::error::{Error, Result};

const BASE_HEADER: [&str; 3] = ["candidate_id", "reference_id", "score"];
const DIAGNOSTIC_HEADER: [&str; 8] = [
    "candidate_objective",
    "candidate_unsquared_objective",
    "candidate_iterations",
    "candidate_converged",
    "reference_objective",
    "reference_unsquared_objective",
    "reference_iterations",
    "reference_converged",
];

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// `candidate_id,reference_id,score[,diagnostics...]`, one row per record.
pub fn write_scores_csv<W: Write>(writer: W, records: &[ScoreRecord], diagnostics: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = BASE_HEADER.to_vec();
    if diagnostics {
        header.extend(DIAGNOSTIC_HEADER);
    }
    out.write_record(&header).map_err(csv_error)?;
    for r in records {
        let mut row = vec![r.candidate_id.clone(), r.reference_id.clone(), r.score.to_string()];
        if diagnostics {
            for side in [&r.candidate, &r.reference] {
                row.push(side.objective.to_string());
                row.push(side.unsquared_objective.to_string());
                row.push(side.iterations.to_string());
                row.push(side.converged.to_string());
            }
        }
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// The columns every score file carries; extra columns are ignored.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ScoreRow {
    pub candidate_id: String,
    pub reference_id: String,
    pub score: f64,
}

pub fn read_scores_csv<R: Read>(reader: R) -> Result<Vec<ScoreRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        let row: ScoreRow = row.map_err(csv_error)?;
        if !row.score.is_finite() {
            return Err(Error::NonFinite(format!("score for {}", row.candidate_id)));
        }
        rows.push(row);
    }
    Ok(rows)
}
