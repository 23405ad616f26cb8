//! Text-similarity scoring with Wasserstein barycenters of contextual
//! embedding layers.
//!
//! A text is embedded by every layer of an encoder. Each layer gives an
//! empirical measure over token vectors; the layer measures of a text are
//! merged into a single free-support barycenter and two texts are compared
//! by the exact 2-Wasserstein distance between their barycenters.
//!
//! Modules:
//! - [`ot`]: exact (network simplex) and entropic transport, distances.
//! - [`barycenter`]: free-support barycenters with uniform masses.
//! - [`embeddings`]: bundle I/O, IDF tables, layer measures.
//! - [`baryscore`]: the metric, batch scoring and score files.
//! - [`eval`]: system/text level correlations and Williams' test.

pub mod barycenter;
pub mod baryscore;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod ot;

pub use barycenter::{free_support_barycenter, BarycenterConfig, BarycenterResult, InitStrategy};
pub use baryscore::{bary_score, batch_score, ScoreConfig, ScoreRecord};
pub use embeddings::{IdfTable, LayeredEmbedding, Weighting};
pub use error::{Error, Result};
pub use ot::{wasserstein, CostMatrix, DiscreteMeasure, Point, TransportPlan};
