//! OLS on the within-transformed design: column-pivoted orthogonal
//! decomposition for collinearity handling, cluster-robust or classical
//! standard errors, and t-based p-values.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::within::within_transform;
use super::{
    stars_for, ClusterBy, PanelObservation, RegressionResult, RegressionSpec, TwfeError,
};

/// Relative pivot threshold: a column whose pivot falls below this fraction
/// of the leading pivot is treated as collinear and dropped.
const PIVOT_RTOL: f64 = 1e-10;

/// Fit the two-way fixed-effects model: within-transform, drop collinear
/// columns by pivot size, OLS on the survivors, then standard errors
/// clustered by scholar (or classical when `cluster_by` is `None`).
pub fn fit(
    panel: &[PanelObservation],
    spec: &RegressionSpec,
) -> Result<RegressionResult, TwfeError> {
    let design = within_transform(panel, spec)?;
    let n = design.y.len();
    let p = design.x.len();
    if p == 0 {
        return Err(TwfeError::RankZero);
    }

    let x_full = DMatrix::from_fn(n, p, |r, c| design.x[c][r]);
    let (kept, dropped) = select_columns(&x_full)?;
    let k = kept.len();

    let x = DMatrix::from_fn(n, k, |r, c| design.x[kept[c]][r]);
    let y = DVector::from_column_slice(&design.y);

    // Thin QR on the kept columns; back-substitution for the coefficients.
    let qr = x.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| TwfeError::Numeric("upper-triangular solve failed".into()))?;

    let fitted = &x * &beta;
    let residuals = &y - &fitted;
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let tss: f64 = design.y.iter().map(|v| v * v).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };

    let r_inv = r
        .try_inverse()
        .ok_or_else(|| TwfeError::Numeric("R is singular after pivot filtering".into()))?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let (cov, dof) = match spec.cluster_by {
        ClusterBy::Scholar => {
            let g = design.n_entities;
            if g < 2 {
                return Err(TwfeError::TooFewClusters { found: g });
            }
            let cov = clustered_covariance(&x, &residuals, &design.entity_of_row, g, &xtx_inv);
            (cov, (g - 1) as f64)
        }
        ClusterBy::None => {
            let dof = (n.saturating_sub(k)).max(1) as f64;
            let sigma2 = rss / dof;
            (&xtx_inv * sigma2, dof)
        }
    };

    let t_dist = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| TwfeError::Numeric(format!("t distribution: {e}")))?;

    let mut coefficients = BTreeMap::new();
    let mut std_errors = BTreeMap::new();
    let mut t_stats = BTreeMap::new();
    let mut p_values = BTreeMap::new();
    let mut stars = BTreeMap::new();
    for (c, &col) in kept.iter().enumerate() {
        let name = design.column_names[col].clone();
        let b = beta[c];
        let se = cov[(c, c)].max(0.0).sqrt();
        let t = if se > 0.0 {
            b / se
        } else if b == 0.0 {
            0.0
        } else {
            f64::INFINITY * b.signum()
        };
        let pv = 2.0 * (1.0 - t_dist.cdf(t.abs()));
        stars.insert(name.clone(), stars_for(pv).to_string());
        coefficients.insert(name.clone(), b);
        std_errors.insert(name.clone(), se);
        t_stats.insert(name.clone(), t);
        p_values.insert(name, pv);
    }

    Ok(RegressionResult {
        outcome_name: spec.outcome_name.clone(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        stars,
        r_squared,
        n_obs: n,
        n_entities: design.n_entities,
        n_times: design.n_times,
        dropped_columns: dropped
            .into_iter()
            .map(|c| design.column_names[c].clone())
            .collect(),
        fe_absorbed: true,
        column_order: design.column_names.clone(),
    })
}

/// Cluster-robust sandwich covariance with the standard finite-cluster
/// correction `G/(G-1) * (N-1)/(N-K)`: the meat sums the outer products of
/// per-cluster score vectors.
pub(super) fn clustered_covariance(
    x: &DMatrix<f64>,
    residuals: &DVector<f64>,
    cluster_of_row: &[usize],
    n_clusters: usize,
    xtx_inv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = x.nrows();
    let k = x.ncols();
    let mut scores: Vec<DVector<f64>> = vec![DVector::zeros(k); n_clusters];
    for row in 0..n {
        let e = residuals[row];
        let cluster = cluster_of_row[row];
        for c in 0..k {
            scores[cluster][c] += x[(row, c)] * e;
        }
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in &scores {
        meat += s * s.transpose();
    }
    let g_f = n_clusters as f64;
    let n_f = n as f64;
    let k_f = k as f64;
    let correction = if n_f > k_f {
        (g_f / (g_f - 1.0)) * ((n_f - 1.0) / (n_f - k_f))
    } else {
        g_f / (g_f - 1.0)
    };
    xtx_inv * meat * xtx_inv * correction
}

/// Businger-Golub column-pivoted Householder QR, used only for rank
/// detection: returns the design-order indices of the independent columns
/// and of the dropped ones. A column is dropped when its pivot magnitude
/// falls below `PIVOT_RTOL` times the leading pivot.
fn select_columns(x: &DMatrix<f64>) -> Result<(Vec<usize>, Vec<usize>), TwfeError> {
    let n = x.nrows();
    let p = x.ncols();
    let mut a = x.clone();
    let mut perm: Vec<usize> = (0..p).collect();
    let steps = n.min(p);
    let mut pivots = Vec::with_capacity(steps);

    for j in 0..steps {
        // Pivot: remaining column with the largest trailing norm (ties keep
        // the earliest design column).
        let mut best = j;
        let mut best_norm = trailing_norm_sq(&a, j, j);
        for c in (j + 1)..p {
            let norm = trailing_norm_sq(&a, j, c);
            if norm > best_norm {
                best_norm = norm;
                best = c;
            }
        }
        if best != j {
            a.swap_columns(j, best);
            perm.swap(j, best);
        }

        let pivot = best_norm.sqrt();
        pivots.push(pivot);
        if pivot == 0.0 {
            break;
        }

        // Householder reflector for column j, applied to the trailing block.
        let mut v: Vec<f64> = (j..n).map(|r| a[(r, j)]).collect();
        let alpha = -v[0].signum() * pivot;
        v[0] -= alpha;
        let v_norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if v_norm_sq == 0.0 {
            continue;
        }
        for c in j..p {
            let dot: f64 = (j..n).map(|r| v[r - j] * a[(r, c)]).sum();
            let scale = 2.0 * dot / v_norm_sq;
            for r in j..n {
                a[(r, c)] -= scale * v[r - j];
            }
        }
    }

    let leading = pivots.first().copied().unwrap_or(0.0);
    if leading == 0.0 {
        return Err(TwfeError::RankZero);
    }
    let rank = pivots
        .iter()
        .take_while(|&&pv| pv > PIVOT_RTOL * leading)
        .count();

    let mut kept: Vec<usize> = perm[..rank].to_vec();
    kept.sort_unstable();
    let mut dropped: Vec<usize> = perm[rank..].to_vec();
    dropped.sort_unstable();
    Ok((kept, dropped))
}

fn trailing_norm_sq(a: &DMatrix<f64>, from_row: usize, col: usize) -> f64 {
    (from_row..a.nrows()).map(|r| a[(r, col)] * a[(r, col)]).sum()
}
