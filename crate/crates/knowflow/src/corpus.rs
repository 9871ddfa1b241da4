//! Corpus ingestion: grant projects, publications, and the discipline index.
//!
//! Records are validated at load time; a row that fails validation aborts the
//! load with a row-addressed error rather than being silently skipped, because
//! dropped rows would corrupt every downstream per-discipline count.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("input file not found: {0}")]
    MissingFile(String),
    #[error("row {row}, column {column}: {reason}")]
    SchemaViolation {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("duplicate id: {0}")]
    DuplicateId(String),
    #[error("unsupported format for {0}: expected .csv or .jsonl")]
    UnknownFormat(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Serialization format for corpus files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl Format {
    /// Infer the format from a file extension.
    pub fn from_path(path: &Path) -> Result<Self, CorpusError> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(Format::Csv),
            Some("jsonl") => Ok(Format::Jsonl),
            _ => Err(CorpusError::UnknownFormat(path.display().to_string())),
        }
    }
}

/// Principal-investigator gender. Unknown is kept as its own value rather
/// than dropped so panel rows are never silently lost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    F,
    M,
    #[serde(rename = "unknown")]
    Unknown,
}

/// One funded research project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub title: String,
    #[serde(rename = "abstract")]
    pub abstract_text: String,
    pub discipline: String,
    pub directorate: String,
    pub pi_id: String,
    pub pi_gender: Gender,
    pub start_year: i32,
    pub end_year: i32,
    pub awarded_amount: f64,
    pub is_art: bool,
    pub is_ai: bool,
}

/// One journal article by a project PI, with field/affiliation aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub scholar_id: String,
    pub year: i32,
    pub citation_count: u64,
    pub cite_score: f64,
    pub field_id: String,
    pub affiliation_id: String,
    pub field_paper_count: u64,
    pub field_citation_count: u64,
    pub affiliation_paper_count: u64,
    pub affiliation_citation_count: u64,
}

/// A validated corpus. Iteration order of `projects` and `publications` is
/// the ingestion order; the discipline index partitions project ids.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub projects: Vec<ProjectRecord>,
    pub publications: Vec<PublicationRecord>,
    pub discipline_index: BTreeMap<String, Vec<String>>,
}

/// The art / AI-art / non-art split of a corpus.
///
/// `art` holds projects flagged as art without the AI flag, `ai_art` holds
/// projects carrying both flags, and everything else (including AI-only
/// projects) is `non_art`. The three lists cover every project exactly once.
#[derive(Debug)]
pub struct Partition<'a> {
    pub art: Vec<&'a ProjectRecord>,
    pub ai_art: Vec<&'a ProjectRecord>,
    pub non_art: Vec<&'a ProjectRecord>,
}

impl Corpus {
    /// Build a corpus from already-parsed records, running full validation.
    pub fn from_parts(
        projects: Vec<ProjectRecord>,
        publications: Vec<PublicationRecord>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, p) in projects.iter().enumerate() {
            validate_project(i + 1, p)?;
            if !seen.insert(p.project_id.clone()) {
                return Err(CorpusError::DuplicateId(p.project_id.clone()));
            }
        }
        let mut seen = HashSet::new();
        for (i, p) in publications.iter().enumerate() {
            validate_publication(i + 1, p)?;
            if !seen.insert(p.pub_id.clone()) {
                return Err(CorpusError::DuplicateId(p.pub_id.clone()));
            }
        }
        let mut discipline_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for p in &projects {
            discipline_index
                .entry(p.discipline.clone())
                .or_default()
                .push(p.project_id.clone());
        }
        Ok(Corpus {
            projects,
            publications,
            discipline_index,
        })
    }

    /// Load and validate the project table from a CSV or JSONL file.
    pub fn load_projects(path: &Path, format: Format) -> Result<Self, CorpusError> {
        let projects: Vec<ProjectRecord> = read_records(path, format)?;
        Self::from_parts(projects, Vec::new())
    }

    /// Load and validate the publication table, attaching it to this corpus.
    pub fn load_publications(&mut self, path: &Path, format: Format) -> Result<(), CorpusError> {
        let publications: Vec<PublicationRecord> = read_records(path, format)?;
        let rebuilt = Self::from_parts(std::mem::take(&mut self.projects), publications)?;
        *self = rebuilt;
        Ok(())
    }

    /// Split projects into art, AI-art, and non-art lists by flag semantics:
    /// art = is_art ∧ ¬is_ai, ai_art = is_art ∧ is_ai, non_art = ¬is_art.
    pub fn partition(&self) -> Partition<'_> {
        let mut part = Partition {
            art: Vec::new(),
            ai_art: Vec::new(),
            non_art: Vec::new(),
        };
        for p in &self.projects {
            match (p.is_art, p.is_ai) {
                (true, false) => part.art.push(p),
                (true, true) => part.ai_art.push(p),
                (false, _) => part.non_art.push(p),
            }
        }
        part
    }

    /// Write the project table to `path` in the given format.
    pub fn save_projects(&self, path: &Path, format: Format) -> Result<(), CorpusError> {
        write_records(&self.projects, path, format)
    }

    /// Write the publication table to `path` in the given format.
    pub fn save_publications(&self, path: &Path, format: Format) -> Result<(), CorpusError> {
        write_records(&self.publications, path, format)
    }
}

fn validate_project(row: usize, p: &ProjectRecord) -> Result<(), CorpusError> {
    let fail = |column: &str, reason: String| {
        Err(CorpusError::SchemaViolation {
            row,
            column: column.to_string(),
            reason,
        })
    };
    if p.project_id.trim().is_empty() {
        return fail("project_id", "empty id".into());
    }
    if p.abstract_text.trim().is_empty() {
        return fail("abstract", "empty after whitespace trimming".into());
    }
    if p.start_year > p.end_year {
        return fail(
            "start_year",
            format!("start_year {} > end_year {}", p.start_year, p.end_year),
        );
    }
    if !(p.awarded_amount >= 0.0 && p.awarded_amount.is_finite()) {
        return fail(
            "awarded_amount",
            format!("must be a finite nonnegative number, got {}", p.awarded_amount),
        );
    }
    Ok(())
}

fn validate_publication(row: usize, p: &PublicationRecord) -> Result<(), CorpusError> {
    let fail = |column: &str, reason: String| {
        Err(CorpusError::SchemaViolation {
            row,
            column: column.to_string(),
            reason,
        })
    };
    if p.pub_id.trim().is_empty() {
        return fail("pub_id", "empty id".into());
    }
    if !(1900..=2100).contains(&p.year) {
        return fail("year", format!("year {} outside [1900, 2100]", p.year));
    }
    if !(p.cite_score >= 0.0 && p.cite_score.is_finite()) {
        return fail(
            "cite_score",
            format!("must be a finite nonnegative number, got {}", p.cite_score),
        );
    }
    Ok(())
}

fn read_records<T: serde::de::DeserializeOwned>(
    path: &Path,
    format: Format,
) -> Result<Vec<T>, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::MissingFile(path.display().to_string()));
    }
    match format {
        Format::Csv => {
            let mut reader = csv::Reader::from_path(path)?;
            let headers: Vec<String> = reader
                .headers()?
                .iter()
                .map(|h| h.to_string())
                .collect();
            let mut out = Vec::new();
            for (i, rec) in reader.deserialize::<T>().enumerate() {
                match rec {
                    Ok(r) => out.push(r),
                    Err(e) => return Err(csv_schema_error(i + 1, &headers, e)),
                }
            }
            Ok(out)
        }
        Format::Jsonl => {
            let reader = BufReader::new(File::open(path)?);
            let mut out = Vec::new();
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: T = serde_json::from_str(&line).map_err(|e| {
                    CorpusError::SchemaViolation {
                        row: i + 1,
                        column: String::new(),
                        reason: e.to_string(),
                    }
                })?;
                out.push(rec);
            }
            Ok(out)
        }
    }
}

/// Map a csv deserialize error to a row/column-addressed schema violation.
fn csv_schema_error(row: usize, headers: &[String], e: csv::Error) -> CorpusError {
    let column = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err
            .field()
            .and_then(|ix| headers.get(ix as usize))
            .cloned()
            .unwrap_or_default(),
        _ => String::new(),
    };
    CorpusError::SchemaViolation {
        row,
        column,
        reason: e.to_string(),
    }
}

fn write_records<T: Serialize>(
    records: &[T],
    path: &Path,
    format: Format,
) -> Result<(), CorpusError> {
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_path(path)?;
            for r in records {
                writer.serialize(r)?;
            }
            writer.flush()?;
        }
        Format::Jsonl => {
            let mut out = BufWriter::new(File::create(path)?);
            for r in records {
                let line = serde_json::to_string(r).expect("record serializes");
                out.write_all(line.as_bytes())?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}
