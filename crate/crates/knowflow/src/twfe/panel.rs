//! Scholar-year panel construction from publication and project records.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{PanelObservation, TwfeError};
use crate::corpus::{Gender, ProjectRecord, PublicationRecord};

/// The canonical covariate set produced by [`build_panel`], in design order.
pub const COVARIATE_NAMES: [&str; 10] = [
    "amount",
    "initial_performance",
    "career",
    "gender",
    "field_citation",
    "field_paper",
    "affiliation_paper",
    "affiliation_citation",
    "training",
    "imitation",
];

/// Outcome metric a panel is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    Publications,
    Citations,
    CiteScore,
}

impl OutcomeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeKind::Publications => "publications",
            OutcomeKind::Citations => "citations",
            OutcomeKind::CiteScore => "cite_score",
        }
    }
}

/// How to aggregate CiteScore over a scholar-year's publications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiteScoreAgg {
    Mean,
    Max,
}

#[derive(Debug, Clone)]
pub struct PanelOptions {
    /// Inclusive year range of the panel.
    pub window: (i32, i32),
    pub outcome: OutcomeKind,
    pub cite_score_agg: CiteScoreAgg,
}

/// Warning attached to a build rather than failing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PanelWarning {
    pub scholar_id: String,
    pub message: String,
}

/// Build one row per (scholar, year) over the window, for every scholar with
/// at least one publication record.
///
/// Outcomes aggregate that scholar-year's publications: count, citation sum,
/// or mean/max CiteScore (zero when the scholar published nothing that
/// year). `art` switches on at the scholar's first art project start year
/// and stays on; `ai` likewise for art projects carrying the AI flag.
///
/// Covariates:
/// - `amount`: summed awarded amount of the scholar's projects started by t
/// - `initial_performance`: mean outcome over the three years before the
///   scholar's first art year (window start for untreated scholars), with
///   publication-free years counting as zero; scholars with no publications
///   at all before that reference year get a [`PanelWarning`]
/// - `career`: years since the scholar's first publication
/// - `gender`: from the scholar's first project (F = 1, M = 0,
///   unknown = 0.5; 0.5 when the scholar has no project)
/// - `field_*` / `affiliation_*`: mean of the per-publication aggregates
///   over that scholar-year's publications, zero when none
/// - `training`: art projects started by t whose PI sits at the scholar's
///   modal affiliation (the most frequent, ties lexicographic)
/// - `imitation`: distinct other scholars at the same modal affiliation with
///   an art project started by t
pub fn build_panel(
    publications: &[PublicationRecord],
    projects: &[ProjectRecord],
    options: &PanelOptions,
) -> Result<(Vec<PanelObservation>, Vec<PanelWarning>), TwfeError> {
    let (start, end) = options.window;
    if start > end {
        return Err(TwfeError::InvalidPanel(format!(
            "window start {start} after end {end}"
        )));
    }
    let scholars: BTreeSet<&str> = publications.iter().map(|p| p.scholar_id.as_str()).collect();
    if scholars.is_empty() {
        return Err(TwfeError::EmptyPanel);
    }

    let mut pubs_by_scholar: HashMap<&str, Vec<&PublicationRecord>> = HashMap::new();
    for p in publications {
        pubs_by_scholar.entry(p.scholar_id.as_str()).or_default().push(p);
    }
    let mut projects_by_pi: HashMap<&str, Vec<&ProjectRecord>> = HashMap::new();
    for p in projects {
        projects_by_pi.entry(p.pi_id.as_str()).or_default().push(p);
    }

    let modal_affiliation: HashMap<&str, String> = scholars
        .iter()
        .map(|&s| (s, modal_affiliation_of(&pubs_by_scholar[s])))
        .collect();

    // Art projects mapped to their PI's modal affiliation (PIs without
    // publications have no affiliation and contribute nothing here).
    let art_projects: Vec<(&ProjectRecord, Option<&String>)> = projects
        .iter()
        .filter(|p| p.is_art)
        .map(|p| (p, modal_affiliation.get(p.pi_id.as_str())))
        .collect();

    let mut rows = Vec::new();
    let mut warnings = Vec::new();

    for &scholar in &scholars {
        let pubs = &pubs_by_scholar[scholar];
        let own_projects = projects_by_pi.get(scholar).map(Vec::as_slice).unwrap_or(&[]);

        let art_year = own_projects
            .iter()
            .filter(|p| p.is_art)
            .map(|p| p.start_year)
            .min();
        let ai_year = own_projects
            .iter()
            .filter(|p| p.is_art && p.is_ai)
            .map(|p| p.start_year)
            .min();
        let first_pub_year = pubs.iter().map(|p| p.year).min().expect("nonempty");
        let gender = own_projects
            .first()
            .map(|p| match p.pi_gender {
                Gender::F => 1.0,
                Gender::M => 0.0,
                Gender::Unknown => 0.5,
            })
            .unwrap_or(0.5);

        // Initial performance over the three years before the reference
        // year, publication-free years counting as zero outcome.
        let reference_year = art_year.unwrap_or(start);
        let initial_performance = ((reference_year - 3)..reference_year)
            .map(|y| outcome_for_year(pubs, y, options))
            .sum::<f64>()
            / 3.0;
        if !pubs.iter().any(|p| p.year < reference_year) {
            warnings.push(PanelWarning {
                scholar_id: scholar.to_string(),
                message: format!(
                    "no publications before reference year {reference_year}; \
                     initial_performance computed from an empty pre-period"
                ),
            });
        }

        let own_affiliation = &modal_affiliation[scholar];

        for year in start..=end {
            let outcome = outcome_for_year(pubs, year, options);
            let art = art_year.is_some_and(|y| y <= year);
            let ai = ai_year.is_some_and(|y| y <= year);
            let year_pubs: Vec<&&PublicationRecord> =
                pubs.iter().filter(|p| p.year == year).collect();

            let mean_of = |f: &dyn Fn(&PublicationRecord) -> f64| -> f64 {
                if year_pubs.is_empty() {
                    0.0
                } else {
                    year_pubs.iter().map(|p| f(p)).sum::<f64>() / year_pubs.len() as f64
                }
            };

            let amount: f64 = own_projects
                .iter()
                .filter(|p| p.start_year <= year)
                .map(|p| p.awarded_amount)
                .sum();

            let training = art_projects
                .iter()
                .filter(|(p, affil)| {
                    p.start_year <= year && *affil == Some(own_affiliation)
                })
                .count() as f64;
            let imitation = art_projects
                .iter()
                .filter(|(p, affil)| {
                    p.start_year <= year
                        && p.pi_id != scholar
                        && *affil == Some(own_affiliation)
                })
                .map(|(p, _)| p.pi_id.as_str())
                .collect::<BTreeSet<_>>()
                .len() as f64;

            let mut covariates = BTreeMap::new();
            covariates.insert("amount".to_string(), amount);
            covariates.insert("initial_performance".to_string(), initial_performance);
            covariates.insert("career".to_string(), f64::from(year - first_pub_year));
            covariates.insert("gender".to_string(), gender);
            covariates.insert(
                "field_citation".to_string(),
                mean_of(&|p| p.field_citation_count as f64),
            );
            covariates.insert(
                "field_paper".to_string(),
                mean_of(&|p| p.field_paper_count as f64),
            );
            covariates.insert(
                "affiliation_paper".to_string(),
                mean_of(&|p| p.affiliation_paper_count as f64),
            );
            covariates.insert(
                "affiliation_citation".to_string(),
                mean_of(&|p| p.affiliation_citation_count as f64),
            );
            covariates.insert("training".to_string(), training);
            covariates.insert("imitation".to_string(), imitation);

            let ai_value = if ai { 1.0 } else { 0.0 };
            let art_value = if art { 1.0 } else { 0.0 };
            rows.push(PanelObservation {
                scholar_id: scholar.to_string(),
                year,
                outcome,
                ai: ai_value,
                art: art_value,
                interaction: ai_value * art_value,
                covariates,
            });
        }
    }
    Ok((rows, warnings))
}

fn outcome_for_year(
    pubs: &[&PublicationRecord],
    year: i32,
    options: &PanelOptions,
) -> f64 {
    let in_year = pubs.iter().filter(|p| p.year == year);
    match options.outcome {
        OutcomeKind::Publications => in_year.count() as f64,
        OutcomeKind::Citations => in_year.map(|p| p.citation_count as f64).sum(),
        OutcomeKind::CiteScore => {
            let scores: Vec<f64> = in_year.map(|p| p.cite_score).collect();
            if scores.is_empty() {
                0.0
            } else {
                match options.cite_score_agg {
                    CiteScoreAgg::Mean => scores.iter().sum::<f64>() / scores.len() as f64,
                    CiteScoreAgg::Max => scores.iter().fold(f64::MIN, |a, &b| a.max(b)),
                }
            }
        }
    }
}

fn modal_affiliation_of(pubs: &[&PublicationRecord]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in pubs {
        *counts.entry(p.affiliation_id.as_str()).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(a, _)| a.to_string())
        .unwrap_or_default()
}

/// Write a panel as CSV: `scholar_id,year,outcome,ai,art,interaction` plus
/// one column per covariate (sorted by name).
pub fn write_panel_csv<W: Write>(
    panel: &[PanelObservation],
    mut out: W,
) -> Result<(), TwfeError> {
    let covariate_names: Vec<&String> = panel
        .first()
        .map(|r| r.covariates.keys().collect())
        .unwrap_or_default();
    write!(out, "scholar_id,year,outcome,ai,art,interaction")?;
    for name in &covariate_names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for row in panel {
        write!(
            out,
            "{},{},{},{},{},{}",
            row.scholar_id, row.year, row.outcome, row.ai, row.art, row.interaction
        )?;
        for name in &covariate_names {
            let v = row.covariates.get(*name).ok_or_else(|| {
                TwfeError::Csv(format!(
                    "row {}/{} missing covariate {name}",
                    row.scholar_id, row.year
                ))
            })?;
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read a panel written by [`write_panel_csv`].
pub fn read_panel_csv<R: BufRead>(reader: R) -> Result<Vec<PanelObservation>, TwfeError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| TwfeError::Csv("empty file".into()))?
        .map_err(TwfeError::Io)?;
    let columns: Vec<String> = header.split(',').map(str::to_string).collect();
    if columns.len() < 6
        || columns[..6] != ["scholar_id", "year", "outcome", "ai", "art", "interaction"]
    {
        return Err(TwfeError::Csv(format!("unexpected header {header:?}")));
    }
    let mut panel = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(TwfeError::Io)?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(TwfeError::Csv(format!(
                "row {}: {} fields, expected {}",
                i + 1,
                fields.len(),
                columns.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, TwfeError> {
            s.parse()
                .map_err(|e| TwfeError::Csv(format!("row {}: {e}", i + 1)))
        };
        let mut covariates = BTreeMap::new();
        for (name, value) in columns[6..].iter().zip(&fields[6..]) {
            covariates.insert(name.clone(), parse(value)?);
        }
        panel.push(PanelObservation {
            scholar_id: fields[0].to_string(),
            year: fields[1]
                .parse()
                .map_err(|e| TwfeError::Csv(format!("row {}: {e}", i + 1)))?,
            outcome: parse(fields[2])?,
            ai: parse(fields[3])?,
            art: parse(fields[4])?,
            interaction: parse(fields[5])?,
            covariates,
        });
    }
    Ok(panel)
}
