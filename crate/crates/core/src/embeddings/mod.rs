//! Per-layer token embeddings and the empirical measures built from them.

mod bundle;
mod idf;

pub use bundle::{
    load_bundle, read_bundle, validate_bundle, write_bundle, BundleHeader, ValidationReport,
    Violation, FORMAT_VERSION,
};
pub use idf::{compute_idf, IdfTable};

use ndarray::{Array1, Array3, ArrayView2};

use crate::error::{Error, Result};
use crate::ot::DiscreteMeasure;

/// One text's tokens with an `L x n x d` tensor of hidden states.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredEmbedding {
    text_id: String,
    tokens: Vec<String>,
    tensor: Array3<f64>,
}

impl LayeredEmbedding {
    pub fn new(text_id: impl Into<String>, tokens: Vec<String>, tensor: Array3<f64>) -> Result<Self> {
        let text_id = text_id.into();
        let (layers, n, d) = tensor.dim();
        if n == 0 || tokens.is_empty() {
            return Err(Error::EmptyText(text_id));
        }
        if layers == 0 || d == 0 {
            return Err(Error::ShapeMismatch(format!(
                "{text_id}: tensor has shape {:?}",
                tensor.dim()
            )));
        }
        if tokens.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{text_id}: {} tokens but {n} rows per layer",
                tokens.len()
            )));
        }
        if tensor.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{text_id}: embedding value")));
        }
        Ok(Self {
            text_id,
            tokens,
            tensor,
        })
    }

    pub fn text_id(&self) -> &str {
        &self.text_id
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tensor(&self) -> &Array3<f64> {
        &self.tensor
    }

    pub fn num_layers(&self) -> usize {
        self.tensor.dim().0
    }

    pub fn num_tokens(&self) -> usize {
        self.tensor.dim().1
    }

    pub fn dim(&self) -> usize {
        self.tensor.dim().2
    }

    pub fn layer(&self, index: usize) -> ArrayView2<'_, f64> {
        self.tensor.index_axis(ndarray::Axis(0), index)
    }
}

/// How token masses of a layer measure are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Idf,
    Uniform,
}

/// The `L` layer measures of one text. Every layer carries the same masses.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureBundle {
    measures: Vec<DiscreteMeasure>,
}

impl MeasureBundle {
    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn weights(&self) -> Vec<f64> {
        self.measures[0].weights().to_vec()
    }

    pub fn into_measures(self) -> Vec<DiscreteMeasure> {
        self.measures
    }

    /// Keeps only the listed layers, in the given order.
    pub fn select(&self, layers: &[usize]) -> Result<Vec<DiscreteMeasure>> {
        layers
            .iter()
            .map(|&l| {
                self.measures.get(l).cloned().ok_or_else(|| {
                    Error::InvalidConfig(format!(
                        "layer {l} out of range for {} layers",
                        self.measures.len()
                    ))
                })
            })
            .collect()
    }
}

/// Token masses for `emb` under `weighting`, normalized to sum to one.
pub fn token_weights(emb: &LayeredEmbedding, idf: &IdfTable, weighting: Weighting) -> Vec<f64> {
    let n = emb.num_tokens();
    match weighting {
        Weighting::Uniform => vec![1.0 / n as f64; n],
        Weighting::Idf => {
            let raw: Vec<f64> = emb.tokens().iter().map(|t| idf.idf(t)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        }
    }
}

/// Builds one measure per layer; every token is kept.
pub fn build_measures(emb: &LayeredEmbedding, idf: &IdfTable, weighting: Weighting) -> Result<MeasureBundle> {
    let weights = Array1::from(token_weights(emb, idf, weighting));
    let measures = (0..emb.num_layers())
        .map(|l| DiscreteMeasure::new(emb.layer(l).to_owned(), weights.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureBundle { measures })
}
