use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothed inverse document frequencies: `ln((1 + N) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdfTable {
    doc_count: usize,
    entries: BTreeMap<String, f64>,
    default_idf: f64,
}

impl IdfTable {
    pub fn from_entries(doc_count: usize, entries: BTreeMap<String, f64>, default_idf: f64) -> Result<Self> {
        if doc_count == 0 {
            return Err(Error::EmptyCorpus);
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(default_idf) || entries.values().any(|&v| !positive(v)) {
            return Err(Error::InvalidConfig("idf values must be positive".into()));
        }
        Ok(Self {
            doc_count,
            entries,
            default_idf,
        })
    }

    /// A table where every token has weight 1 (only the default applies).
    pub fn flat() -> Self {
        Self {
            doc_count: 1,
            entries: BTreeMap::new(),
            default_idf: 1.0,
        }
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn default_idf(&self) -> f64 {
        self.default_idf
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn idf(&self, token: &str) -> f64 {
        self.entries.get(token).copied().unwrap_or(self.default_idf)
    }

    pub fn get(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }
}

fn smoothed(doc_count: usize, df: usize) -> f64 {
    ((1.0 + doc_count as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Document frequencies over `documents`; repeated tokens count once per document.
pub fn compute_idf<D, T>(documents: &[D]) -> Result<IdfTable>
where
    D: AsRef<[T]>,
    T: AsRef<str>,
{
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        let unique: HashSet<&str> = doc.as_ref().iter().map(|t| t.as_ref()).collect();
        for token in unique {
            *df.entry(token.to_owned()).or_default() += 1;
        }
    }
    let n = documents.len();
    let entries = df.into_iter().map(|(t, c)| (t, smoothed(n, c))).collect();
    Ok(IdfTable {
        doc_count: n,
        entries,
        default_idf: smoothed(n, 0),
    })
}
