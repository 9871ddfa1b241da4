//! Embedding providers: seeded token hashing, precomputed files, remote HTTP.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Duration;

use serde::Deserialize;

use super::{
    normalize_in_place, DocumentInput, EmbedError, EmbeddingVector, ProviderConfig,
};

const BINARY_MAGIC: &[u8; 8] = b"KFEMB01\0";
const MAX_ATTEMPTS: u32 = 3;
const BACKOFF_BASE_MS: u64 = 100;

/// Seeded 64-bit token hash: FNV-1a with the seed folded into the offset
/// basis, finished with a splitmix64 mix. Frozen so ports in other languages
/// can reproduce the draw.
fn token_hash(token: &str, seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325_u64 ^ seed;
    for b in token.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(h)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash provider: each token lands in bucket `hash % dim` with sign taken
/// from the hash's top bit; token contributions are summed and the result is
/// L2-normalized. Equal token multisets therefore give equal vectors.
pub(super) fn hash_embed_batch(
    docs: &[DocumentInput],
    config: &ProviderConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        if doc.tokens.is_empty() {
            return Err(EmbedError::EmptyDocument(doc.doc_id.clone()));
        }
        let mut values = vec![0.0_f64; config.dim];
        for token in &doc.tokens {
            let h = token_hash(token, config.seed);
            let bucket = (h % config.dim as u64) as usize;
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            values[bucket] += sign;
        }
        normalize_in_place(&doc.doc_id, &mut values)?;
        out.push(EmbeddingVector {
            doc_id: doc.doc_id.clone(),
            values,
        });
    }
    Ok(out)
}

pub(super) fn precomputed_embed_batch(
    docs: &[DocumentInput],
    config: &ProviderConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let path = config.path.as_ref().expect("validated");
    let table = load_embedding_file(path, config.dim)?;
    let mut out = Vec::with_capacity(docs.len());
    for doc in docs {
        let mut values = table
            .get(&doc.doc_id)
            .ok_or_else(|| EmbedError::MissingEmbedding(doc.doc_id.clone()))?
            .clone();
        normalize_in_place(&doc.doc_id, &mut values)?;
        out.push(EmbeddingVector {
            doc_id: doc.doc_id.clone(),
            values,
        });
    }
    Ok(out)
}

/// Load a precomputed embedding file, either JSONL
/// (`{"doc_id": ..., "values": [...]}` per line) or the binary layout
/// (magic `KFEMB01\0`, little-endian u32 dim and count, then
/// length-prefixed UTF-8 ids with f32 values). The format is sniffed from
/// the magic bytes. Vectors are returned unnormalized.
pub fn load_embedding_file(
    path: &Path,
    expected_dim: usize,
) -> Result<HashMap<String, Vec<f64>>, EmbedError> {
    let bytes = std::fs::read(path)?;
    if bytes.len() >= BINARY_MAGIC.len() && &bytes[..BINARY_MAGIC.len()] == BINARY_MAGIC {
        parse_binary(path, &bytes, expected_dim)
    } else {
        parse_jsonl(path, &bytes, expected_dim)
    }
}

#[derive(Deserialize)]
struct JsonlRow {
    doc_id: String,
    values: Vec<f64>,
}

fn parse_jsonl(
    path: &Path,
    bytes: &[u8],
    expected_dim: usize,
) -> Result<HashMap<String, Vec<f64>>, EmbedError> {
    let text = std::str::from_utf8(bytes).map_err(|e| EmbedError::FileFormat {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut table = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonlRow = serde_json::from_str(line).map_err(|e| EmbedError::FileFormat {
            path: path.display().to_string(),
            reason: format!("line {}: {}", i + 1, e),
        })?;
        if row.values.len() != expected_dim {
            return Err(EmbedError::DimensionMismatch {
                expected: expected_dim,
                got: row.values.len(),
            });
        }
        table.insert(row.doc_id, row.values);
    }
    Ok(table)
}

fn parse_binary(
    path: &Path,
    bytes: &[u8],
    expected_dim: usize,
) -> Result<HashMap<String, Vec<f64>>, EmbedError> {
    let bad = |reason: &str| EmbedError::FileFormat {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut cursor = &bytes[BINARY_MAGIC.len()..];
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |cursor: &mut &[u8]| -> Result<u32, EmbedError> {
        cursor
            .read_exact(&mut u32_buf)
            .map_err(|_| bad("truncated header"))?;
        Ok(u32::from_le_bytes(u32_buf))
    };
    let dim = read_u32(&mut cursor)? as usize;
    let count = read_u32(&mut cursor)? as usize;
    if dim != expected_dim {
        return Err(EmbedError::DimensionMismatch {
            expected: expected_dim,
            got: dim,
        });
    }
    let mut table = HashMap::with_capacity(count);
    for _ in 0..count {
        let id_len = read_u32(&mut cursor)? as usize;
        if cursor.len() < id_len {
            return Err(bad("truncated id"));
        }
        let id = std::str::from_utf8(&cursor[..id_len])
            .map_err(|_| bad("id is not UTF-8"))?
            .to_string();
        cursor = &cursor[id_len..];
        if cursor.len() < dim * 4 {
            return Err(bad("truncated vector"));
        }
        let mut values = Vec::with_capacity(dim);
        for chunk in cursor[..dim * 4].chunks_exact(4) {
            values.push(f64::from(f32::from_le_bytes([
                chunk[0], chunk[1], chunk[2], chunk[3],
            ])));
        }
        cursor = &cursor[dim * 4..];
        table.insert(id, values);
    }
    Ok(table)
}

/// Write embeddings as JSONL, one object per line, in the given order.
pub fn write_embedding_file_jsonl<W: Write>(
    vectors: &[EmbeddingVector],
    mut out: W,
) -> std::io::Result<()> {
    for v in vectors {
        serde_json::to_writer(&mut out, v)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Write embeddings in the binary layout (f32 values).
pub fn write_embedding_file_binary<W: Write>(
    vectors: &[EmbeddingVector],
    dim: usize,
    mut out: W,
) -> std::io::Result<()> {
    out.write_all(BINARY_MAGIC)?;
    out.write_all(&(dim as u32).to_le_bytes())?;
    out.write_all(&(vectors.len() as u32).to_le_bytes())?;
    for v in vectors {
        out.write_all(&(v.doc_id.len() as u32).to_le_bytes())?;
        out.write_all(v.doc_id.as_bytes())?;
        for x in &v.values {
            out.write_all(&(*x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct RemoteRequest<'a> {
    texts: Vec<&'a str>,
}

#[derive(Deserialize)]
struct RemoteResponse {
    vectors: Vec<Vec<f64>>,
}

/// Remote provider: POST `{"texts": [...]}` per sub-batch, expect
/// `{"vectors": [[...]]}`. 5xx responses and transport errors are retried up
/// to three attempts with exponential backoff; 4xx responses fail fast.
pub(super) fn remote_embed_batch(
    docs: &[DocumentInput],
    config: &ProviderConfig,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let endpoint = config.endpoint.as_ref().expect("validated");
    let client = reqwest::blocking::Client::builder()
        .timeout(config.timeout)
        .build()
        .map_err(|e| EmbedError::InvalidConfig(e.to_string()))?;

    let mut out = Vec::with_capacity(docs.len());
    for chunk in docs.chunks(config.batch_size) {
        let body = RemoteRequest {
            texts: chunk.iter().map(|d| d.text.as_str()).collect(),
        };
        let response = post_with_retry(&client, endpoint, &body)?;
        if response.vectors.len() != chunk.len() {
            return Err(EmbedError::RemoteProtocol {
                endpoint: endpoint.clone(),
                reason: format!(
                    "sent {} texts, got {} vectors",
                    chunk.len(),
                    response.vectors.len()
                ),
            });
        }
        for (doc, mut values) in chunk.iter().zip(response.vectors) {
            if values.len() != config.dim {
                return Err(EmbedError::DimensionMismatch {
                    expected: config.dim,
                    got: values.len(),
                });
            }
            normalize_in_place(&doc.doc_id, &mut values)?;
            out.push(EmbeddingVector {
                doc_id: doc.doc_id.clone(),
                values,
            });
        }
    }
    Ok(out)
}

fn post_with_retry(
    client: &reqwest::blocking::Client,
    endpoint: &str,
    body: &RemoteRequest<'_>,
) -> Result<RemoteResponse, EmbedError> {
    let mut last_reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(BACKOFF_BASE_MS << (attempt - 1)));
        }
        match client.post(endpoint).json(body).send() {
            Ok(resp) => {
                let status = resp.status();
                if status.is_success() {
                    return resp.json().map_err(|e| EmbedError::RemoteProtocol {
                        endpoint: endpoint.to_string(),
                        reason: e.to_string(),
                    });
                }
                if status.is_client_error() {
                    return Err(EmbedError::RemoteRejected {
                        endpoint: endpoint.to_string(),
                        status: status.as_u16(),
                    });
                }
                last_reason = format!("status {status}");
            }
            Err(e) => last_reason = e.to_string(),
        }
    }
    Err(EmbedError::RemoteUnavailable {
        endpoint: endpoint.to_string(),
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_batch, ProviderKind};

    fn hash_config(dim: usize, seed: u64) -> ProviderConfig {
        ProviderConfig {
            kind: ProviderKind::DeterministicHash,
            dim,
            endpoint: None,
            path: None,
            timeout: Duration::from_secs(5),
            batch_size: 8,
            seed,
        }
    }

    fn doc(id: &str, tokens: &[&str]) -> DocumentInput {
        DocumentInput::new(id, tokens.join(" "), tokens.iter().map(|t| t.to_string()).collect())
    }

    #[test]
    fn hash_provider_is_deterministic() {
        let docs = vec![doc("a", &["art", "gan", "paint"])];
        let one = embed_batch(&docs, &hash_config(16, 7)).unwrap();
        let two = embed_batch(&docs, &hash_config(16, 7)).unwrap();
        assert_eq!(one, two);
        // Different seeds give different vectors.
        let three = embed_batch(&docs, &hash_config(16, 8)).unwrap();
        assert_ne!(one, three);
    }

    #[test]
    fn hash_provider_equal_multisets_equal_vectors() {
        let a = embed_batch(&[doc("a", &["x", "y", "x"])], &hash_config(8, 1)).unwrap();
        let b = embed_batch(&[doc("b", &["y", "x", "x"])], &hash_config(8, 1)).unwrap();
        assert_eq!(a[0].values, b[0].values);
    }

    #[test]
    fn hash_provider_rejects_empty_docs() {
        let err = embed_batch(&[doc("a", &[])], &hash_config(8, 1)).unwrap_err();
        assert!(matches!(err, EmbedError::EmptyDocument(id) if id == "a"));
    }

    #[test]
    fn hash_provider_outputs_unit_norm() {
        let docs = vec![doc("a", &["art"]), doc("b", &["a", "b", "c", "d", "e"])];
        for v in embed_batch(&docs, &hash_config(4, 3)).unwrap() {
            assert!((v.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn precomputed_jsonl_round_trip_matches_hand_normalization() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        let raw = vec![
            EmbeddingVector { doc_id: "a".into(), values: vec![3.0, 4.0] },
            EmbeddingVector { doc_id: "b".into(), values: vec![0.0, 2.0] },
            EmbeddingVector { doc_id: "c".into(), values: vec![-1.0, 1.0] },
        ];
        let mut f = std::fs::File::create(&path).unwrap();
        write_embedding_file_jsonl(&raw, &mut f).unwrap();
        drop(f);

        let config = ProviderConfig {
            kind: ProviderKind::PrecomputedFile,
            dim: 2,
            endpoint: None,
            path: Some(path),
            timeout: Duration::from_secs(5),
            batch_size: 8,
            seed: 0,
        };
        let docs = vec![doc("a", &["_"]), doc("b", &["_"]), doc("c", &["_"])];
        let got = embed_batch(&docs, &config).unwrap();
        // Hand-normalized expectations: (3,4)/5, (0,1), (-1,1)/sqrt(2).
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [vec![0.6, 0.8], vec![0.0, 1.0], vec![-s, s]];
        for (v, w) in got.iter().zip(&want) {
            for (a, b) in v.values.iter().zip(w) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn precomputed_missing_id() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.jsonl");
        std::fs::write(&path, "{\"doc_id\":\"a\",\"values\":[1.0,0.0]}\n").unwrap();
        let config = ProviderConfig {
            kind: ProviderKind::PrecomputedFile,
            dim: 2,
            endpoint: None,
            path: Some(path),
            timeout: Duration::from_secs(5),
            batch_size: 8,
            seed: 0,
        };
        let err = embed_batch(&[doc("zz", &["_"])], &config).unwrap_err();
        assert!(matches!(err, EmbedError::MissingEmbedding(id) if id == "zz"));
    }

    #[test]
    fn binary_format_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let vectors = vec![
            EmbeddingVector { doc_id: "p-1".into(), values: vec![1.0, -2.5, 0.25] },
            EmbeddingVector { doc_id: "p-2".into(), values: vec![0.5, 0.5, 0.5] },
        ];
        let mut f = std::fs::File::create(&path).unwrap();
        write_embedding_file_binary(&vectors, 3, &mut f).unwrap();
        drop(f);
        let table = load_embedding_file(&path, 3).unwrap();
        assert_eq!(table.len(), 2);
        // Values survive the f32 round trip exactly for these inputs.
        assert_eq!(table["p-1"], vec![1.0, -2.5, 0.25]);
        assert_eq!(table["p-2"], vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn binary_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.bin");
        let vectors = vec![EmbeddingVector { doc_id: "a".into(), values: vec![1.0, 0.0] }];
        let mut f = std::fs::File::create(&path).unwrap();
        write_embedding_file_binary(&vectors, 2, &mut f).unwrap();
        drop(f);
        let err = load_embedding_file(&path, 3).unwrap_err();
        assert!(matches!(
            err,
            EmbedError::DimensionMismatch { expected: 3, got: 2 }
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = hash_config(8, 1);
        c.endpoint = Some("http://x".into());
        assert!(matches!(c.validate(), Err(EmbedError::InvalidConfig(_))));

        let c = ProviderConfig {
            kind: ProviderKind::RemoteHttp,
            dim: 8,
            endpoint: None,
            path: None,
            timeout: Duration::from_secs(1),
            batch_size: 4,
            seed: 0,
        };
        assert!(matches!(c.validate(), Err(EmbedError::InvalidConfig(_))));
    }
}
