//! Cross-disciplinary similarity scoring for art projects.
//!
//! For one art project against the discipline groups it does not belong to:
//! the per-discipline mean is the average cosine similarity to that
//! discipline's projects, the weighted similarity is the sum of those means
//! (equivalently a flat sum of cosines weighted by the inverse discipline
//! size), and the max similarity is the largest mean. Negative cosines
//! propagate unclamped.

use std::collections::BTreeMap;
use std::io::Write;

use thiserror::Error;

use crate::embed::EmbeddingVector;

#[derive(Debug, Error)]
pub enum XsimError {
    #[error("zero-norm vector for {0}")]
    ZeroVector(String),
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("no discipline groups to compare against")]
    NoGroups,
    #[error("discipline {0} has no members")]
    EmptyGroup(String),
    #[error("no embedding for doc {0}")]
    MissingEmbedding(String),
}

/// All non-art projects of one discipline, as embedding vectors.
#[derive(Debug, Clone)]
pub struct DisciplineGroup {
    pub discipline_id: String,
    pub members: Vec<EmbeddingVector>,
}

impl DisciplineGroup {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Similarity metrics for one art project.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityRow {
    pub art_project_id: String,
    pub weighted: f64,
    pub max: f64,
    pub argmax_discipline: String,
    pub per_discipline_mean: BTreeMap<String, f64>,
}

/// An art project to score: its id and the discipline it belongs to (which
/// is excluded from its comparison groups).
#[derive(Debug, Clone)]
pub struct ArtProjectRef {
    pub project_id: String,
    pub discipline: String,
}

/// Cosine similarity: dot(a, b) / (|a| |b|). Both vectors must share a
/// dimension and have positive norm.
pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64, XsimError> {
    if a.len() != b.len() {
        return Err(XsimError::DimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na <= 0.0 || nb <= 0.0 {
        return Err(XsimError::ZeroVector("cosine operand".into()));
    }
    Ok(dot / (na * nb))
}

/// Score one art project against discipline groups. The caller excludes the
/// project's own discipline. Argmax ties break toward the lexicographically
/// smallest discipline id.
pub fn similarity_row(
    art_vec: &EmbeddingVector,
    groups: &[DisciplineGroup],
) -> Result<SimilarityRow, XsimError> {
    if groups.is_empty() {
        return Err(XsimError::NoGroups);
    }
    let mut per_discipline_mean = BTreeMap::new();
    for group in groups {
        if group.members.is_empty() {
            return Err(XsimError::EmptyGroup(group.discipline_id.clone()));
        }
        let mut sum = 0.0;
        for member in &group.members {
            sum += cosine(&art_vec.values, &member.values).map_err(|e| match e {
                XsimError::ZeroVector(_) => XsimError::ZeroVector(member.doc_id.clone()),
                other => other,
            })?;
        }
        per_discipline_mean.insert(
            group.discipline_id.clone(),
            sum / group.members.len() as f64,
        );
    }
    let weighted = per_discipline_mean.values().sum();
    // BTreeMap iterates in ascending id order, so strict improvement keeps
    // the smallest id on ties.
    let (argmax_discipline, max) = per_discipline_mean
        .iter()
        .fold((String::new(), f64::NEG_INFINITY), |best, (id, &m)| {
            if m > best.1 {
                (id.clone(), m)
            } else {
                best
            }
        });
    Ok(SimilarityRow {
        art_project_id: art_vec.doc_id.clone(),
        weighted,
        max,
        argmax_discipline,
        per_discipline_mean,
    })
}

/// Score every art project, excluding each project's own discipline from its
/// groups. Rows are ordered by project id.
pub fn similarity_table(
    art_projects: &[ArtProjectRef],
    embeddings: &BTreeMap<String, EmbeddingVector>,
    groups: &[DisciplineGroup],
) -> Result<Vec<SimilarityRow>, XsimError> {
    let mut rows = Vec::with_capacity(art_projects.len());
    for project in art_projects {
        let vec = embeddings
            .get(&project.project_id)
            .ok_or_else(|| XsimError::MissingEmbedding(project.project_id.clone()))?;
        let others: Vec<DisciplineGroup> = groups
            .iter()
            .filter(|g| g.discipline_id != project.discipline)
            .cloned()
            .collect();
        rows.push(similarity_row(vec, &others)?);
    }
    rows.sort_by(|a, b| a.art_project_id.cmp(&b.art_project_id));
    Ok(rows)
}

/// Write the similarity table as CSV with one mean column per discipline
/// (union over rows, sorted); a project's excluded discipline leaves an
/// empty cell. Reals are printed at six decimal places.
pub fn write_similarity_csv<W: Write>(
    rows: &[SimilarityRow],
    mut out: W,
) -> std::io::Result<()> {
    let mut disciplines: Vec<String> = rows
        .iter()
        .flat_map(|r| r.per_discipline_mean.keys().cloned())
        .collect();
    disciplines.sort();
    disciplines.dedup();

    write!(out, "art_project_id,weighted,max,argmax_discipline")?;
    for d in &disciplines {
        write!(out, ",mean_{d}")?;
    }
    writeln!(out)?;
    for row in rows {
        write!(
            out,
            "{},{:.6},{:.6},{}",
            row.art_project_id, row.weighted, row.max, row.argmax_discipline
        )?;
        for d in &disciplines {
            match row.per_discipline_mean.get(d) {
                Some(m) => write!(out, ",{m:.6}")?,
                None => write!(out, ",")?,
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
