//! Two-way within transformation by alternating demeaning.

use std::collections::{BTreeMap, BTreeSet};

use super::{PanelObservation, RegressionSpec, TwfeError};

/// The demeaned outcome and design, plus the panel's index structure.
/// Columns listed in `no_variation` demeaned to all-zeros (they are
/// absorbed by the fixed effects and will be dropped by the fit).
#[derive(Debug, Clone)]
pub struct DemeanedDesign {
    pub y: Vec<f64>,
    /// Column-major design: `x[c][r]`.
    pub x: Vec<Vec<f64>>,
    pub column_names: Vec<String>,
    pub entity_of_row: Vec<usize>,
    pub time_of_row: Vec<usize>,
    pub n_entities: usize,
    pub n_times: usize,
    pub sweeps: usize,
    pub no_variation: Vec<String>,
}

pub(super) fn validate_panel(panel: &[PanelObservation]) -> Result<(), TwfeError> {
    if panel.is_empty() {
        return Err(TwfeError::EmptyPanel);
    }
    let mut seen = BTreeSet::new();
    for row in panel {
        if !seen.insert((row.scholar_id.as_str(), row.year)) {
            return Err(TwfeError::InvalidPanel(format!(
                "duplicate (scholar, year) = ({}, {})",
                row.scholar_id, row.year
            )));
        }
        for (name, v) in [("ai", row.ai), ("art", row.art)] {
            if v != 0.0 && v != 1.0 {
                return Err(TwfeError::InvalidPanel(format!(
                    "{name} indicator for ({}, {}) is {v}, not 0/1",
                    row.scholar_id, row.year
                )));
            }
        }
        if row.interaction != row.ai * row.art {
            return Err(TwfeError::InvalidPanel(format!(
                "interaction for ({}, {}) is not ai*art",
                row.scholar_id, row.year
            )));
        }
    }
    Ok(())
}

/// Demean the outcome and every design column by entity and then by time,
/// sweeping until the largest per-cell change falls below `spec.demean_tol`
/// (or `spec.demean_max_sweeps` is reached; the iteration converges for any
/// finite panel). On a balanced panel one sweep is exact.
pub fn within_transform(
    panel: &[PanelObservation],
    spec: &RegressionSpec,
) -> Result<DemeanedDesign, TwfeError> {
    validate_panel(panel)?;

    let entities: BTreeSet<&str> = panel.iter().map(|r| r.scholar_id.as_str()).collect();
    let times: BTreeSet<i32> = panel.iter().map(|r| r.year).collect();
    if entities.len() < 2 {
        return Err(TwfeError::DegeneratePanel(format!(
            "need at least 2 entities, got {}",
            entities.len()
        )));
    }
    if times.len() < 2 {
        return Err(TwfeError::DegeneratePanel(format!(
            "need at least 2 time periods, got {}",
            times.len()
        )));
    }
    let entity_index: BTreeMap<&str, usize> =
        entities.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let time_index: BTreeMap<i32, usize> =
        times.iter().enumerate().map(|(i, &t)| (t, i)).collect();

    let column_names = spec.column_names();
    let n = panel.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(column_names.len() + 1);
    columns.push(panel.iter().map(|r| r.outcome).collect());
    columns.push(panel.iter().map(|r| r.interaction).collect());
    columns.push(panel.iter().map(|r| r.ai).collect());
    columns.push(panel.iter().map(|r| r.art).collect());
    for name in &spec.covariate_names {
        let col = panel
            .iter()
            .map(|r| {
                r.covariates.get(name).copied().ok_or_else(|| {
                    TwfeError::InvalidPanel(format!(
                        "row ({}, {}) missing covariate {name}",
                        r.scholar_id, r.year
                    ))
                })
            })
            .collect::<Result<Vec<f64>, TwfeError>>()?;
        columns.push(col);
    }

    if spec.zscore_covariates {
        // Treatment terms (first three design columns) and the outcome stay
        // on their original scale; zero-variance columns are left alone.
        for col in columns.iter_mut().skip(4) {
            let mean = col.iter().sum::<f64>() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            if var > 0.0 {
                let sd = var.sqrt();
                for v in col.iter_mut() {
                    *v = (*v - mean) / sd;
                }
            }
        }
    }

    let entity_of_row: Vec<usize> = panel
        .iter()
        .map(|r| entity_index[r.scholar_id.as_str()])
        .collect();
    let time_of_row: Vec<usize> = panel.iter().map(|r| time_index[&r.year]).collect();
    let mut entity_counts = vec![0usize; entities.len()];
    let mut time_counts = vec![0usize; times.len()];
    for r in 0..n {
        entity_counts[entity_of_row[r]] += 1;
        time_counts[time_of_row[r]] += 1;
    }

    let mut sweeps = 0;
    for _ in 0..spec.demean_max_sweeps {
        sweeps += 1;
        let mut max_change = 0.0_f64;
        for col in &mut columns {
            let mut means = vec![0.0_f64; entity_counts.len()];
            for (r, v) in col.iter().enumerate() {
                means[entity_of_row[r]] += v;
            }
            for (m, &c) in means.iter_mut().zip(&entity_counts) {
                *m /= c as f64;
            }
            for (r, v) in col.iter_mut().enumerate() {
                let next = *v - means[entity_of_row[r]];
                max_change = max_change.max((next - *v).abs());
                *v = next;
            }

            let mut means = vec![0.0_f64; time_counts.len()];
            for (r, v) in col.iter().enumerate() {
                means[time_of_row[r]] += v;
            }
            for (m, &c) in means.iter_mut().zip(&time_counts) {
                *m /= c as f64;
            }
            for (r, v) in col.iter_mut().enumerate() {
                let next = *v - means[time_of_row[r]];
                max_change = max_change.max((next - *v).abs());
                *v = next;
            }
        }
        if max_change < spec.demean_tol {
            break;
        }
    }

    let y = columns.remove(0);
    let no_variation = column_names
        .iter()
        .zip(&columns)
        .filter(|(_, col)| col.iter().all(|v| v.abs() <= spec.demean_tol))
        .map(|(name, _)| name.clone())
        .collect();

    Ok(DemeanedDesign {
        y,
        x: columns,
        column_names,
        entity_of_row,
        time_of_row,
        n_entities: entities.len(),
        n_times: times.len(),
        sweeps,
        no_variation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn obs(scholar: &str, year: i32, outcome: f64, extra: &[(&str, f64)]) -> PanelObservation {
        PanelObservation {
            scholar_id: scholar.to_string(),
            year,
            outcome,
            ai: 0.0,
            art: 0.0,
            interaction: 0.0,
            covariates: extra
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect::<BTreeMap<_, _>>(),
        }
    }

    fn spec(covariates: &[&str]) -> RegressionSpec {
        RegressionSpec::new("outcome", covariates.iter().map(|c| c.to_string()).collect())
    }

    #[test]
    fn balanced_panel_converges_in_two_sweeps() {
        // Second sweep only confirms: every change is below tol.
        let mut panel = Vec::new();
        for (i, s) in ["A", "B", "C"].iter().enumerate() {
            for (t, year) in (2000..2004).enumerate() {
                let y = (i as f64) * 10.0 + (t as f64) * 2.0 + (i as f64 * t as f64) * 0.1;
                panel.push(obs(s, year, y, &[("w", (i + t) as f64)]));
            }
        }
        let out = within_transform(&panel, &spec(&["w"])).unwrap();
        assert!(out.sweeps <= 2, "balanced panel took {} sweeps", out.sweeps);
        // Entity and time means of the demeaned outcome are zero.
        for e in 0..out.n_entities {
            let rows: Vec<usize> = (0..panel.len())
                .filter(|&r| out.entity_of_row[r] == e)
                .collect();
            let mean: f64 = rows.iter().map(|&r| out.y[r]).sum::<f64>() / rows.len() as f64;
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_outcome_demeans_to_zero() {
        let panel: Vec<PanelObservation> = ["A", "B"]
            .iter()
            .flat_map(|s| (2000..2003).map(move |y| obs(s, y, 7.5, &[])))
            .collect();
        let out = within_transform(&panel, &spec(&[])).unwrap();
        assert!(out.y.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn constant_covariate_is_flagged_no_variation() {
        let panel: Vec<PanelObservation> = ["A", "B"]
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                (2000..2003).map(move |y| {
                    obs(s, y, (i as f64) + f64::from(y), &[("fixed", 3.0), ("moving", f64::from(y) * (i as f64 + 1.0))])
                })
            })
            .collect();
        let out = within_transform(&panel, &spec(&["fixed", "moving"])).unwrap();
        assert!(out.no_variation.contains(&"fixed".to_string()));
        assert!(!out.no_variation.contains(&"moving".to_string()));
    }

    #[test]
    fn unbalanced_panel_matches_dummy_projection_oracle() {
        // 5 entities x 4 periods with 3 gaps. The oracle regresses each
        // column on the full entity+time dummy set and compares residuals.
        let mut panel = Vec::new();
        let gaps = [("E0", 2001), ("E2", 2003), ("E4", 2000)];
        let mut v = 0.3_f64;
        for i in 0..5 {
            let s = format!("E{i}");
            for year in 2000..2004 {
                if gaps.contains(&(s.as_str(), year)) {
                    continue;
                }
                v = (v * 73.0 + 1.7).rem_euclid(10.0); // deterministic filler
                panel.push(obs(&s, year, v, &[("w", (v * 1.3).sin() * 5.0)]));
            }
        }
        let out = within_transform(&panel, &spec(&["w"])).unwrap();

        // Dummy-projection oracle via normal equations on [1, entity dummies
        // (skip first), time dummies (skip first)].
        let n = panel.len();
        let entities: Vec<String> = {
            let mut e: Vec<String> = panel.iter().map(|r| r.scholar_id.clone()).collect();
            e.sort();
            e.dedup();
            e
        };
        let years: Vec<i32> = {
            let mut t: Vec<i32> = panel.iter().map(|r| r.year).collect();
            t.sort_unstable();
            t.dedup();
            t
        };
        let p = 1 + (entities.len() - 1) + (years.len() - 1);
        let mut design = nalgebra::DMatrix::zeros(n, p);
        for (r, row) in panel.iter().enumerate() {
            design[(r, 0)] = 1.0;
            let e = entities.iter().position(|x| *x == row.scholar_id).unwrap();
            if e > 0 {
                design[(r, e)] = 1.0;
            }
            let t = years.iter().position(|x| *x == row.year).unwrap();
            if t > 0 {
                design[(r, entities.len() - 1 + t)] = 1.0;
            }
        }
        let residualize = |values: &[f64]| -> Vec<f64> {
            let b = nalgebra::DVector::from_column_slice(values);
            let beta = (design.transpose() * &design)
                .try_inverse()
                .unwrap()
                * design.transpose()
                * &b;
            let fitted = &design * beta;
            (0..n).map(|r| values[r] - fitted[r]).collect()
        };

        for (mine, raw) in [
            (&out.y, panel.iter().map(|r| r.outcome).collect::<Vec<f64>>()),
            (
                &out.x[out.column_names.iter().position(|c| c == "w").unwrap()],
                panel.iter().map(|r| r.covariates["w"]).collect::<Vec<f64>>(),
            ),
        ] {
            let oracle = residualize(&raw);
            for (a, b) in mine.iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-8, "demeaned {a} vs oracle {b}");
            }
        }
    }

    #[test]
    fn demeaning_is_idempotent() {
        let mut panel = Vec::new();
        let mut v = 0.9_f64;
        for i in 0..4 {
            for year in 2000..2004 {
                if (i + year) % 7 == 0 {
                    continue; // unbalanced
                }
                v = (v * 31.0 + 0.77).rem_euclid(4.0);
                panel.push(obs(&format!("E{i}"), year, v, &[]));
            }
        }
        let s = spec(&[]);
        let once = within_transform(&panel, &s).unwrap();
        let repanel: Vec<PanelObservation> = panel
            .iter()
            .zip(&once.y)
            .map(|(r, &y)| PanelObservation {
                outcome: y,
                ..r.clone()
            })
            .collect();
        let twice = within_transform(&repanel, &s).unwrap();
        for (a, b) in once.y.iter().zip(&twice.y) {
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_panels_rejected() {
        let one_entity: Vec<PanelObservation> =
            (2000..2004).map(|y| obs("A", y, 1.0, &[])).collect();
        assert!(matches!(
            within_transform(&one_entity, &spec(&[])),
            Err(TwfeError::DegeneratePanel(_))
        ));
        let one_year = vec![obs("A", 2000, 1.0, &[]), obs("B", 2000, 2.0, &[])];
        assert!(matches!(
            within_transform(&one_year, &spec(&[])),
            Err(TwfeError::DegeneratePanel(_))
        ));
        assert!(matches!(
            within_transform(&[], &spec(&[])),
            Err(TwfeError::EmptyPanel)
        ));
    }

    #[test]
    fn invalid_rows_rejected() {
        let mut bad = vec![obs("A", 2000, 1.0, &[]), obs("A", 2000, 2.0, &[])];
        assert!(matches!(
            within_transform(&bad, &spec(&[])),
            Err(TwfeError::InvalidPanel(_))
        ));
        bad = vec![obs("A", 2000, 1.0, &[]), obs("B", 2001, 2.0, &[])];
        bad[0].ai = 0.5;
        assert!(matches!(
            within_transform(&bad, &spec(&[])),
            Err(TwfeError::InvalidPanel(_))
        ));
        bad = vec![obs("A", 2000, 1.0, &[]), obs("B", 2001, 2.0, &[])];
        bad[0].ai = 1.0;
        bad[0].art = 1.0;
        bad[0].interaction = 0.0;
        assert!(matches!(
            within_transform(&bad, &spec(&[])),
            Err(TwfeError::InvalidPanel(_))
        ));
    }
}
