//! Two-way fixed-effects panel regression on a scholar-year panel.
//!
//! The estimator is the within transformation (iterated two-way demeaning,
//! which handles unbalanced panels) followed by OLS through a column-pivoted
//! orthogonal decomposition that drops collinear columns, with
//! cluster-robust standard errors and publication-style table rendering.

mod ols;
mod panel;
mod render;
mod within;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ols::fit;
pub use panel::{
    build_panel, read_panel_csv, write_panel_csv, CiteScoreAgg, OutcomeKind, PanelOptions,
    PanelWarning, COVARIATE_NAMES,
};
pub use render::{render_table, write_result_csv, write_result_metadata};
pub use within::{within_transform, DemeanedDesign};

/// Design-column names for the treatment terms, in design order.
pub const INTERACTION_COL: &str = "ai_x_art";
pub const AI_COL: &str = "ai";
pub const ART_COL: &str = "art";

#[derive(Debug, Error)]
pub enum TwfeError {
    #[error("panel is empty")]
    EmptyPanel,
    #[error("invalid panel: {0}")]
    InvalidPanel(String),
    #[error("degenerate panel: {0}")]
    DegeneratePanel(String),
    #[error("need at least 2 clusters for clustered standard errors, found {found}")]
    TooFewClusters { found: usize },
    #[error("design has no usable columns after collinearity filtering")]
    RankZero,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("panel csv: {0}")]
    Csv(String),
}

/// One scholar-year row. `outcome` is whichever metric the panel was built
/// for; `ai` and `art` are absorbing 0/1 treatment indicators and
/// `interaction` is exactly their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelObservation {
    pub scholar_id: String,
    pub year: i32,
    pub outcome: f64,
    pub ai: f64,
    pub art: f64,
    pub interaction: f64,
    pub covariates: BTreeMap<String, f64>,
}

/// Which variance estimator clusters the scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterBy {
    Scholar,
    None,
}

/// Regression request: outcome label, covariate subset (the treatment terms
/// are always included), variance estimator, and demeaning controls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionSpec {
    pub outcome_name: String,
    pub covariate_names: Vec<String>,
    pub cluster_by: ClusterBy,
    pub demean_tol: f64,
    pub demean_max_sweeps: usize,
    /// Optionally z-score covariate columns before demeaning (treatment
    /// indicators are never standardized). Off by default.
    pub zscore_covariates: bool,
}

impl RegressionSpec {
    pub fn new(outcome_name: impl Into<String>, covariate_names: Vec<String>) -> Self {
        RegressionSpec {
            outcome_name: outcome_name.into(),
            covariate_names,
            cluster_by: ClusterBy::Scholar,
            demean_tol: 1e-10,
            demean_max_sweeps: 1000,
            zscore_covariates: false,
        }
    }

    /// Design column names in order: interaction, ai, art, covariates.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![
            INTERACTION_COL.to_string(),
            AI_COL.to_string(),
            ART_COL.to_string(),
        ];
        names.extend(self.covariate_names.iter().cloned());
        names
    }
}

/// Fitted coefficients and inference. Scholar and year effects are absorbed
/// by the within transformation (`fe_absorbed`), so no constant is reported.
/// Every requested column lands either in `coefficients` or in
/// `dropped_columns`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionResult {
    pub outcome_name: String,
    pub coefficients: BTreeMap<String, f64>,
    pub std_errors: BTreeMap<String, f64>,
    pub t_stats: BTreeMap<String, f64>,
    pub p_values: BTreeMap<String, f64>,
    pub stars: BTreeMap<String, String>,
    pub r_squared: f64,
    pub n_obs: usize,
    pub n_entities: usize,
    pub n_times: usize,
    pub dropped_columns: Vec<String>,
    pub fe_absorbed: bool,
    /// Requested column order, for rendering.
    pub column_order: Vec<String>,
}

/// Significance stars: `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn stars_for(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_thresholds() {
        assert_eq!(stars_for(0.0005), "***");
        assert_eq!(stars_for(0.005), "**");
        assert_eq!(stars_for(0.03), "*");
        assert_eq!(stars_for(0.05), "");
        assert_eq!(stars_for(0.5), "");
        // Boundary values fall to the weaker side.
        assert_eq!(stars_for(0.001), "**");
        assert_eq!(stars_for(0.01), "*");
    }
}
