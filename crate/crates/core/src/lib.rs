//! Decision-support engine for forest-fire management.
//!
//! The crate is organised by pipeline stage:
//!
//! * [`ingest`]: the 13-column weather dataset, preprocessing transforms and
//!   correlation analysis.
//! * [`fwi`]: the Canadian Fire Weather Index chain and danger classification.
//! * [`rules`]: a Horn-clause rule language with forward-chaining evaluation.
//! * [`stream`]: count-based micro-batching, per-batch alerting and
//!   checkpoint/resume.
//! * [`semweb`]: RDF conversion, N-Triples/RDF-XML output and a SPARQL subset.
//! * [`metrics`]: ontology schema metrics and quality scores.
//! * [`retrieval`]: hashed n-gram embeddings, cosine top-k search and
//!   token-overlap precision/recall/F-measure.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar type for the common case.

pub mod fwi;
pub mod ingest;
pub mod metrics;
pub mod retrieval;
pub mod rules;
pub mod scalar;
pub mod semweb;
pub mod stream;

pub use scalar::Scalar;

pub type Dataset = ingest::Dataset<f64>;
pub type Dataset32 = ingest::Dataset<f32>;
pub type WeatherRecord = ingest::WeatherRecord<f64>;
pub type NormParams = ingest::NormParams<f64>;
pub type CorrelationMatrix = ingest::CorrelationMatrix<f64>;

pub type FwiInputs = fwi::FwiInputs<f64>;
pub type FwiCodes = fwi::FwiCodes<f64>;
pub type FwiCodes32 = fwi::FwiCodes<f32>;
pub type ClassBands = fwi::ClassBands<f64>;

pub type SchemaMetrics = metrics::SchemaMetrics<f64>;

pub type EmbeddingVector = retrieval::EmbeddingVector<f64>;
pub type EmbeddingVector32 = retrieval::EmbeddingVector<f32>;
pub type VectorIndex = retrieval::VectorIndex<f64>;
pub type EvalScores = retrieval::EvalScores<f64>;
