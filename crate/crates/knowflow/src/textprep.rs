//! Abstract normalization, TF-IDF weighting, and per-cluster keyword tables.
//!
//! Normalization applies a fixed pipeline: lowercase, replace Unicode
//! punctuation with spaces, split on whitespace, drop stopwords, then a
//! rule-table suffix stemmer (see [`stem`]). Tokens shorter than two
//! characters, and tokens that stem onto a stopword, are dropped last; this
//! makes `normalize` idempotent on its own output.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{self, Write};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextprepError {
    #[error("cannot fit tf-idf on an empty corpus")]
    EmptyCorpus,
    #[error("duplicate doc id: {0}")]
    DuplicateDocId(String),
    #[error("cluster {0} has no documents")]
    EmptyCluster(usize),
    #[error("doc {0} has no cluster assignment")]
    MissingAssignment(String),
}

/// A document reduced to its normalized token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenDoc {
    pub doc_id: String,
    pub tokens: Vec<String>,
}

/// One keyword with its tf-idf weight. Lists of keywords are sorted by
/// descending weight with ties broken lexicographically by token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordWeight {
    pub token: String,
    pub weight: f64,
}

/// Sparse tf-idf model over a document collection.
///
/// `weights` holds one sparse row per document, aligned with `doc_ids`;
/// entries are `(column, tf * ln(N / df))` sorted by column. Tokens present
/// in every document keep a vocabulary slot with weight zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TfidfModel {
    pub doc_ids: Vec<String>,
    /// token -> column index; columns are assigned in lexicographic token order.
    pub vocabulary: BTreeMap<String, usize>,
    pub doc_freq: BTreeMap<String, usize>,
    pub n_docs: usize,
    pub weights: Vec<Vec<(usize, f64)>>,
    /// Raw per-document term counts, same layout as `weights`.
    counts: Vec<Vec<(usize, u64)>>,
    tokens_by_column: Vec<String>,
}

impl TfidfModel {
    /// Token for a vocabulary column.
    pub fn token_of(&self, column: usize) -> &str {
        &self.tokens_by_column[column]
    }

    /// Raw term counts for a document row, `(column, count)` sorted by column.
    pub fn term_counts(&self, row: usize) -> &[(usize, u64)] {
        &self.counts[row]
    }
}

fn punct_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{P}").expect("valid punctuation class"))
}

/// Normalize raw text into tokens: lowercase, punctuation to spaces,
/// whitespace split, stopword removal, suffix stemming, then dropping tokens
/// shorter than 2 characters or stemmed onto a stopword.
pub fn normalize(text: &str, stopwords: &HashSet<String>) -> Vec<String> {
    let lower = text.to_lowercase();
    let no_punct = punct_regex().replace_all(&lower, " ");
    no_punct
        .split_whitespace()
        .filter(|t| !stopwords.contains(*t))
        .map(|t| stem(t))
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .collect()
}

/// Rule-table suffix stemmer, applied until no rule fires. Rules are checked
/// in order and the first match wins:
///
/// 1. `-sses` -> `-ss`
/// 2. `-ies`  -> `-y` (stem non-empty)
/// 3. `-ing`  -> drop, stem length >= 3, then undouble a trailing doubled
///    consonant other than `l`, `s`, `z`
/// 4. `-ed`   -> drop, same stem-length and undoubling rule
/// 5. `-ly`   -> drop, stem length >= 3
/// 6. `-s`    -> drop when the stem has length >= 2 and does not end in `s`
pub fn stem(token: &str) -> String {
    let mut current = token.to_string();
    loop {
        match stem_pass(&current) {
            Some(next) if next != current => current = next,
            _ => return current,
        }
    }
}

fn stem_pass(token: &str) -> Option<String> {
    if let Some(stem) = token.strip_suffix("sses") {
        return Some(format!("{stem}ss"));
    }
    if let Some(stem) = token.strip_suffix("ies") {
        if !stem.is_empty() {
            return Some(format!("{stem}y"));
        }
    }
    for suffix in ["ing", "ed"] {
        if let Some(stem) = token.strip_suffix(suffix) {
            if stem.chars().count() >= 3 {
                return Some(undouble(stem));
            }
        }
    }
    if let Some(stem) = token.strip_suffix("ly") {
        if stem.chars().count() >= 3 {
            return Some(stem.to_string());
        }
    }
    if let Some(stem) = token.strip_suffix('s') {
        if stem.chars().count() >= 2 && !stem.ends_with('s') {
            return Some(stem.to_string());
        }
    }
    None
}

fn undouble(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    if chars.len() >= 2 {
        let last = chars[chars.len() - 1];
        if last == chars[chars.len() - 2]
            && last.is_alphabetic()
            && !"aeioulsz".contains(last)
        {
            return chars[..chars.len() - 1].iter().collect();
        }
    }
    stem.to_string()
}

/// Read a stopword file: one token per line, UTF-8, blank lines ignored.
pub fn load_stopwords(path: &Path) -> io::Result<HashSet<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_stopwords(&text))
}

/// The bundled default English stopword list.
pub fn default_stopwords() -> HashSet<String> {
    parse_stopwords(include_str!("stopwords_en.txt"))
}

fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// Fit a tf-idf model: tf is the raw in-document count, idf is `ln(N / df)`,
/// with no smoothing.
pub fn fit_tfidf(docs: &[TokenDoc]) -> Result<TfidfModel, TextprepError> {
    if docs.is_empty() {
        return Err(TextprepError::EmptyCorpus);
    }
    let mut seen = HashSet::new();
    for d in docs {
        if !seen.insert(d.doc_id.as_str()) {
            return Err(TextprepError::DuplicateDocId(d.doc_id.clone()));
        }
    }

    let n_docs = docs.len();
    let mut per_doc: Vec<HashMap<&str, u64>> = Vec::with_capacity(n_docs);
    for d in docs {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        for t in &d.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        per_doc.push(counts);
    }

    let mut doc_freq: BTreeMap<String, usize> = BTreeMap::new();
    for counts in &per_doc {
        for token in counts.keys() {
            *doc_freq.entry((*token).to_string()).or_insert(0) += 1;
        }
    }
    let vocabulary: BTreeMap<String, usize> = doc_freq
        .keys()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();
    let tokens_by_column: Vec<String> = doc_freq.keys().cloned().collect();

    let idf: Vec<f64> = tokens_by_column
        .iter()
        .map(|t| (n_docs as f64 / doc_freq[t] as f64).ln())
        .collect();

    let mut counts_rows = Vec::with_capacity(n_docs);
    let mut weight_rows = Vec::with_capacity(n_docs);
    for doc_counts in &per_doc {
        let mut row: Vec<(usize, u64)> = doc_counts
            .iter()
            .map(|(t, c)| (vocabulary[*t], *c))
            .collect();
        row.sort_unstable_by_key(|(col, _)| *col);
        let weights: Vec<(usize, f64)> = row
            .iter()
            .map(|&(col, c)| (col, c as f64 * idf[col]))
            .collect();
        counts_rows.push(row);
        weight_rows.push(weights);
    }

    Ok(TfidfModel {
        doc_ids: docs.iter().map(|d| d.doc_id.clone()).collect(),
        vocabulary,
        doc_freq,
        n_docs,
        weights: weight_rows,
        counts: counts_rows,
        tokens_by_column,
    })
}

/// Class-based keyword weights: each cluster's concatenated token multiset is
/// one pseudo-document and tf-idf is recomputed over the cluster count.
/// Returns the `top_n` keywords per cluster, sorted by descending weight and
/// then token.
///
/// Cluster ids are expected to be dense `0..=max`; a gap means an empty
/// cluster and is an error. Assignments for doc ids not in the model are
/// ignored, so a corpus-wide assignment map can be reused for a slice model.
pub fn cluster_keywords(
    model: &TfidfModel,
    assignment: &BTreeMap<String, usize>,
    top_n: usize,
) -> Result<BTreeMap<usize, Vec<KeywordWeight>>, TextprepError> {
    let mut cluster_of_row = Vec::with_capacity(model.doc_ids.len());
    let mut max_cluster = 0usize;
    for id in &model.doc_ids {
        let c = *assignment
            .get(id)
            .ok_or_else(|| TextprepError::MissingAssignment(id.clone()))?;
        max_cluster = max_cluster.max(c);
        cluster_of_row.push(c);
    }

    let n_clusters = max_cluster + 1;
    let mut pseudo: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); n_clusters];
    for (row, &c) in cluster_of_row.iter().enumerate() {
        for &(col, count) in model.term_counts(row) {
            *pseudo[c].entry(col).or_insert(0) += count;
        }
    }
    // A gap in the cluster ids, or a cluster whose documents carry no
    // tokens, leaves an empty pseudo-document.
    if let Some(empty) = pseudo.iter().position(|p| p.is_empty()) {
        return Err(TextprepError::EmptyCluster(empty));
    }

    let mut cluster_df: HashMap<usize, usize> = HashMap::new();
    for p in &pseudo {
        for col in p.keys() {
            *cluster_df.entry(*col).or_insert(0) += 1;
        }
    }

    let mut out = BTreeMap::new();
    for (c, p) in pseudo.iter().enumerate() {
        let mut kws: Vec<KeywordWeight> = p
            .iter()
            .map(|(&col, &tf)| {
                let idf = (n_clusters as f64 / cluster_df[&col] as f64).ln();
                KeywordWeight {
                    token: model.token_of(col).to_string(),
                    weight: tf as f64 * idf,
                }
            })
            .collect();
        kws.sort_by(|a, b| {
            b.weight
                .total_cmp(&a.weight)
                .then_with(|| a.token.cmp(&b.token))
        });
        kws.truncate(top_n);
        out.insert(c, kws);
    }
    Ok(out)
}

/// Write a keyword table as CSV `cluster,rank,token,weight` with weights at
/// six decimal places.
pub fn write_keyword_table<W: Write>(
    keywords: &BTreeMap<usize, Vec<KeywordWeight>>,
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "cluster,rank,token,weight")?;
    for (cluster, kws) in keywords {
        for (i, kw) in kws.iter().enumerate() {
            writeln!(out, "{},{},{},{:.6}", cluster, i + 1, kw.token, kw.weight)?;
        }
    }
    Ok(())
}
