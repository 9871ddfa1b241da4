//! Publication-style rendering of regression results: coefficients at three
//! decimals with significance stars, standard errors parenthesized beneath.

use std::io::Write;

use super::{RegressionResult, TwfeError, AI_COL, ART_COL, INTERACTION_COL};

/// Display label for a design column: the treatment terms get their
/// conventional names, snake_case covariates become sentence case.
pub fn display_name(column: &str) -> String {
    match column {
        INTERACTION_COL => "AI × Art".to_string(),
        AI_COL => "AI".to_string(),
        ART_COL => "Art".to_string(),
        other => {
            let spaced = other.replace('_', " ");
            let mut chars = spaced.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
                None => spaced,
            }
        }
    }
}

/// Render results side by side, one column per outcome: starred coefficient
/// on top, parenthesized standard error beneath, then R-squared,
/// observation counts, and any dropped columns. Dropped cells print as "--".
pub fn render_table(results: &[RegressionResult]) -> String {
    let mut terms: Vec<String> = Vec::new();
    for r in results {
        for name in &r.column_order {
            if !terms.contains(name) {
                terms.push(name.clone());
            }
        }
    }

    let label_width = terms
        .iter()
        .map(|t| display_name(t).len())
        .chain(["Variable".len(), "R-squared".len(), "Observations".len()])
        .max()
        .unwrap_or(8)
        + 2;
    let col_width = results
        .iter()
        .map(|r| r.outcome_name.len() + 2)
        .max()
        .unwrap_or(12)
        .max(14);

    let mut out = String::new();
    let pad = |s: &str, w: usize| format!("{s:<w$}");
    out.push_str(&pad("Variable", label_width));
    for r in results {
        out.push_str(&pad(&r.outcome_name, col_width));
    }
    out.push('\n');
    out.push_str(&"-".repeat(label_width + col_width * results.len()));
    out.push('\n');

    for term in &terms {
        let mut coef_line = pad(&display_name(term), label_width);
        let mut se_line = pad("", label_width);
        let mut any_se = false;
        for r in results {
            match r.coefficients.get(term) {
                Some(b) => {
                    coef_line.push_str(&pad(&format!("{b:.3}{}", r.stars[term]), col_width));
                    se_line.push_str(&pad(&format!("({:.3})", r.std_errors[term]), col_width));
                    any_se = true;
                }
                None if r.dropped_columns.contains(term) => {
                    coef_line.push_str(&pad("--", col_width));
                    se_line.push_str(&pad("", col_width));
                }
                None => {
                    coef_line.push_str(&pad("", col_width));
                    se_line.push_str(&pad("", col_width));
                }
            }
        }
        out.push_str(coef_line.trim_end());
        out.push('\n');
        if any_se {
            out.push_str(se_line.trim_end());
            out.push('\n');
        }
    }

    out.push_str(&pad("R-squared", label_width));
    for r in results {
        out.push_str(&pad(&format!("{:.3}", r.r_squared), col_width));
    }
    out.push('\n');
    out.push_str(&pad("Observations", label_width));
    for r in results {
        out.push_str(&pad(&r.n_obs.to_string(), col_width));
    }
    out.push('\n');
    out.push_str("Note: *** p < 0.001, ** p < 0.01, * p < 0.05. ");
    out.push_str("Scholar and year fixed effects absorbed.\n");
    let dropped: Vec<String> = results
        .iter()
        .flat_map(|r| {
            r.dropped_columns
                .iter()
                .map(|c| format!("{} ({})", display_name(c), r.outcome_name))
        })
        .collect();
    if !dropped.is_empty() {
        out.push_str(&format!("Dropped for collinearity: {}.\n", dropped.join(", ")));
    }
    out
}

/// Write one result as CSV: `term,coef,se,t,p,stars`, one row per estimated
/// term in design order, then one `dropped` row per removed column.
pub fn write_result_csv<W: Write>(
    result: &RegressionResult,
    mut out: W,
) -> Result<(), TwfeError> {
    writeln!(out, "term,coef,se,t,p,stars")?;
    for term in &result.column_order {
        if let Some(b) = result.coefficients.get(term) {
            writeln!(
                out,
                "{term},{b:.6},{:.6},{:.6},{:.6},{}",
                result.std_errors[term],
                result.t_stats[term],
                result.p_values[term],
                result.stars[term]
            )?;
        } else {
            writeln!(out, "{term},dropped,,,,")?;
        }
    }
    Ok(())
}

/// Sidecar metadata for one result.
pub fn write_result_metadata<W: Write>(
    result: &RegressionResult,
    mut out: W,
) -> Result<(), TwfeError> {
    #[derive(serde::Serialize)]
    struct Metadata<'a> {
        outcome: &'a str,
        n_obs: usize,
        n_entities: usize,
        n_times: usize,
        r_squared: f64,
        dropped_columns: &'a [String],
        fe_absorbed: bool,
    }
    let meta = Metadata {
        outcome: &result.outcome_name,
        n_obs: result.n_obs,
        n_entities: result.n_entities,
        n_times: result.n_times,
        r_squared: result.r_squared,
        dropped_columns: &result.dropped_columns,
        fe_absorbed: result.fe_absorbed,
    };
    serde_json::to_writer_pretty(&mut out, &meta)
        .map_err(|e| TwfeError::Numeric(format!("metadata serialization: {e}")))?;
    writeln!(out)?;
    Ok(())
}
