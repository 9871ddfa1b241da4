//! knowflow: batch analysis toolkit for grant/publication corpora.
//!
//! The library is organized as a pipeline of independent stages:
//!
//! - [`corpus`] — ingest and validate project/publication records (CSV or JSONL)
//! - [`textprep`] — abstract normalization, TF-IDF, and per-cluster keyword weights
//! - [`embed`] — pluggable document embedding providers plus PCA and
//!   neighbor-graph dimensionality reduction
//! - [`cluster`] — k-means++ seeding and Lloyd iteration with silhouette sweeps
//! - [`netgraph`] — keyword co-occurrence networks and GraphML/JSON/DOT export
//! - [`xsim`] — cross-disciplinary weighted/max similarity scoring
//! - [`twfe`] — two-way fixed-effects panel regression with clustered
//!   standard errors and publication-style tables
//!
//! Every stage is deterministic: all randomness flows from explicit seeds and
//! all aggregations reduce in a fixed order, so equal inputs produce
//! byte-identical outputs.

pub mod cluster;
pub mod corpus;
pub mod embed;
pub mod netgraph;
pub mod textprep;
pub mod twfe;
pub mod xsim;
