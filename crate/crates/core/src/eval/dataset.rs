use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Read};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::baryscore::ScoreRow;
use crate::error::{Error, Result};

/// One human judgment: a system's output for a text and its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Judgment {
    pub text_id: String,
    pub system_id: String,
    pub candidate_id: String,
    pub human_score: f64,
}

/// Complete `N x S` grid of candidates and human scores.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalDataset {
    text_ids: Vec<String>,
    system_ids: Vec<String>,
    candidates: Vec<Vec<String>>,
    human: Array2<f64>,
    references: BTreeMap<String, Vec<String>>,
}

impl EvalDataset {
    /// Texts and systems keep their order of first appearance.
    pub fn from_judgments(judgments: &[Judgment], references: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut text_index: HashMap<&str, usize> = HashMap::new();
        let mut system_index: HashMap<&str, usize> = HashMap::new();
        let mut text_ids = Vec::new();
        let mut system_ids = Vec::new();
        for j in judgments {
            if !text_index.contains_key(j.text_id.as_str()) {
                text_index.insert(&j.text_id, text_ids.len());
                text_ids.push(j.text_id.clone());
            }
            if !system_index.contains_key(j.system_id.as_str()) {
                system_index.insert(&j.system_id, system_ids.len());
                system_ids.push(j.system_id.clone());
            }
        }
        if text_ids.is_empty() {
            return Err(Error::InvalidConfig("dataset has no judgments".into()));
        }
        let (n, s) = (text_ids.len(), system_ids.len());
        let mut candidates = vec![vec![String::new(); s]; n];
        let mut human = Array2::from_elem((n, s), f64::NAN);
        let mut filled = vec![vec![false; s]; n];
        for j in judgments {
            let (ti, si) = (text_index[j.text_id.as_str()], system_index[j.system_id.as_str()]);
            if filled[ti][si] {
                return Err(Error::InvalidConfig(format!(
                    "duplicate judgment for ({}, {})",
                    j.text_id, j.system_id
                )));
            }
            if !j.human_score.is_finite() {
                return Err(Error::NonFinite(format!("human score for {}", j.candidate_id)));
            }
            filled[ti][si] = true;
            candidates[ti][si] = j.candidate_id.clone();
            human[[ti, si]] = j.human_score;
        }
        let mut missing = Vec::new();
        for (ti, row) in filled.iter().enumerate() {
            for (si, &ok) in row.iter().enumerate() {
                if !ok {
                    missing.push((text_ids[ti].clone(), system_ids[si].clone()));
                }
            }
        }
        if !missing.is_empty() {
            return Err(Error::IncompleteGrid { missing });
        }
        Ok(Self {
            text_ids,
            system_ids,
            candidates,
            human,
            references,
        })
    }

    pub fn text_ids(&self) -> &[String] {
        &self.text_ids
    }

    pub fn system_ids(&self) -> &[String] {
        &self.system_ids
    }

    pub fn num_texts(&self) -> usize {
        self.text_ids.len()
    }

    pub fn num_systems(&self) -> usize {
        self.system_ids.len()
    }

    pub fn candidate(&self, text: usize, system: usize) -> &str {
        &self.candidates[text][system]
    }

    pub fn human_scores(&self) -> &Array2<f64> {
        &self.human
    }

    pub fn references(&self, text_id: &str) -> Option<&[String]> {
        self.references.get(text_id).map(Vec::as_slice)
    }

    /// Metric grid aligned to this dataset. When a candidate has several
    /// score rows, rows against the text's listed references are kept and
    /// the smallest (best) distance wins.
    pub fn metric_grid(&self, scores: &[ScoreRow]) -> Result<Array2<f64>> {
        let mut by_candidate: HashMap<&str, Vec<&ScoreRow>> = HashMap::new();
        for row in scores {
            by_candidate.entry(row.candidate_id.as_str()).or_default().push(row);
        }
        let mut grid = Array2::zeros(self.human.dim());
        let mut missing = Vec::new();
        for (ti, text_id) in self.text_ids.iter().enumerate() {
            let refs: Option<HashSet<&str>> = self
                .references
                .get(text_id)
                .map(|r| r.iter().map(String::as_str).collect());
            for (si, system_id) in self.system_ids.iter().enumerate() {
                let rows = by_candidate.get(self.candidates[ti][si].as_str());
                let best = rows.into_iter().flatten().filter(|row| match &refs {
                    None => true,
                    Some(refs) => row.reference_id.split('|').any(|r| refs.contains(r)),
                });
                match best.map(|r| r.score).min_by(f64::total_cmp) {
                    Some(v) => grid[[ti, si]] = v,
                    None => missing.push((text_id.clone(), system_id.clone())),
                }
            }
        }
        if missing.is_empty() {
            Ok(grid)
        } else {
            Err(Error::MissingScores { missing })
        }
    }
}

/// One JSON judgment object per line.
pub fn read_judgments<R: BufRead>(reader: R) -> Result<Vec<Judgment>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let j: Judgment = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(j);
    }
    Ok(out)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

/// JSON object mapping `text_id` to a reference id or a list of them.
pub fn read_references<R: Read>(reader: R) -> Result<BTreeMap<String, Vec<String>>> {
    let raw: BTreeMap<String, OneOrMany> = serde_json::from_reader(reader).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    Ok(raw
        .into_iter()
        .map(|(k, v)| {
            let ids = match v {
                OneOrMany::One(s) => vec![s],
                OneOrMany::Many(v) => v,
            };
            (k, ids)
        })
        .collect())
}
