//! Document embeddings via pluggable providers, plus dimensionality
//! reduction for clustering and 2-D visualization.
//!
//! Embedding models are out-of-process by design: a provider either reads a
//! precomputed embedding file, calls a remote HTTP service, or derives a
//! deterministic test-grade vector by hashing tokens. Every provider returns
//! one L2-normalized vector of the configured dimension per input document,
//! in input order.

mod neighbor;
mod pca;
mod provider;

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use neighbor::{reduce_neighbor, NeighborParams};
pub use pca::{reduce_pca, PcaModel, PcaReduction};
pub use provider::{
    load_embedding_file, write_embedding_file_binary, write_embedding_file_jsonl,
};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("no embedding for doc {0}")]
    MissingEmbedding(String),
    #[error("doc {0} has no tokens to embed")]
    EmptyDocument(String),
    #[error("embedding for doc {0} has zero norm")]
    ZeroVector(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("remote embedder at {endpoint} unavailable after {attempts} attempts: {reason}")]
    RemoteUnavailable {
        endpoint: String,
        attempts: u32,
        reason: String,
    },
    #[error("remote embedder at {endpoint} rejected the request with status {status}")]
    RemoteRejected { endpoint: String, status: u16 },
    #[error("remote embedder at {endpoint} broke protocol: {reason}")]
    RemoteProtocol { endpoint: String, reason: String },
    #[error("invalid provider config: {0}")]
    InvalidConfig(String),
    #[error("embedding file {path}: {reason}")]
    FileFormat { path: String, reason: String },
    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// One document embedding. All vectors in a batch share the same dimension
/// and have positive L2 norm after provider post-normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub doc_id: String,
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Which embedding backend to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    PrecomputedFile,
    DeterministicHash,
    RemoteHttp,
}

/// Provider configuration. `endpoint` is required exactly for the remote
/// provider, `path` exactly for the precomputed-file provider, and `seed`
/// only drives the hash provider.
#[derive(Debug, Clone)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub dim: usize,
    pub endpoint: Option<String>,
    pub path: Option<PathBuf>,
    pub timeout: Duration,
    pub batch_size: usize,
    pub seed: u64,
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dim == 0 {
            return Err(EmbedError::InvalidConfig("dim must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(EmbedError::InvalidConfig(
                "batch_size must be positive".into(),
            ));
        }
        match self.kind {
            ProviderKind::RemoteHttp if self.endpoint.is_none() => Err(
                EmbedError::InvalidConfig("remote_http requires an endpoint".into()),
            ),
            ProviderKind::PrecomputedFile if self.path.is_none() => Err(
                EmbedError::InvalidConfig("precomputed_file requires a path".into()),
            ),
            _ => {
                if self.kind != ProviderKind::RemoteHttp && self.endpoint.is_some() {
                    return Err(EmbedError::InvalidConfig(
                        "endpoint is only valid for remote_http".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// One document presented to a provider: the hash provider consumes
/// `tokens`, the remote provider `text`, and the precomputed provider only
/// the id.
#[derive(Debug, Clone)]
pub struct DocumentInput {
    pub doc_id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl DocumentInput {
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        tokens: Vec<String>,
    ) -> Self {
        DocumentInput {
            doc_id: doc_id.into(),
            text: text.into(),
            tokens,
        }
    }
}

/// Embed a batch of documents with the configured provider. Returns one
/// unit-norm vector per input, in input order.
pub fn embed_batch(
    docs: &[DocumentInput],
    config: &ProviderConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    config.validate()?;
    match config.kind {
        ProviderKind::DeterministicHash => provider::hash_embed_batch(docs, config),
        ProviderKind::PrecomputedFile => provider::precomputed_embed_batch(docs, config),
        ProviderKind::RemoteHttp => provider::remote_embed_batch(docs, config),
    }
}

/// Scale a vector to unit L2 norm in place; errors if the norm is zero.
pub(crate) fn normalize_in_place(doc_id: &str, values: &mut [f64]) -> Result<(), EmbedError> {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(EmbedError::ZeroVector(doc_id.to_string()));
    }
    for v in values.iter_mut() {
        *v /= norm;
    }
    Ok(())
}
