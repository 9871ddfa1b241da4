//! K-means++ seeding and Lloyd iteration over reduced embedding vectors.
//!
//! All randomness flows from an explicit 64-bit seed through ChaCha8, so a
//! fitted model is bit-reproducible and cross-language ports can match draws
//! by porting the generator. Distances are squared Euclidean.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("need at least {needed} distinct points, got {got}")]
    TooFewDistinctPoints { needed: usize, got: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("points must share one dimension")]
    DimensionMismatch,
    #[error("ids and points must align: {ids} ids vs {points} points")]
    IdMismatch { ids: usize, points: usize },
}

/// Iteration controls for [`fit`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitParams {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FitParams {
    fn default() -> Self {
        FitParams {
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

/// A fitted clustering: centroids, assignment in input order, and the sum of
/// squared distances to assigned centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    pub assignment: Vec<Assignment>,
    pub inertia: f64,
    pub iterations_run: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub doc_id: String,
    pub cluster: usize,
}

impl ClusterModel {
    /// Assignment as a map keyed by doc id.
    pub fn assignment_map(&self) -> BTreeMap<String, usize> {
        self.assignment
            .iter()
            .map(|a| (a.doc_id.clone(), a.cluster))
            .collect()
    }

    /// Per-input cluster labels in input order.
    pub fn labels(&self) -> Vec<usize> {
        self.assignment.iter().map(|a| a.cluster).collect()
    }

    /// The model summary serialized as JSON (assignment excluded; it has its
    /// own CSV export).
    pub fn to_model_json(&self) -> String {
        #[derive(Serialize)]
        struct ModelJson<'a> {
            k: usize,
            seed: u64,
            centroids: &'a [Vec<f64>],
            inertia: f64,
            iterations_run: usize,
        }
        serde_json::to_string_pretty(&ModelJson {
            k: self.k,
            seed: self.seed,
            centroids: &self.centroids,
            inertia: self.inertia,
            iterations_run: self.iterations_run,
        })
        .expect("model serializes")
    }

    /// Write the assignment as CSV `doc_id,cluster`.
    pub fn write_assignment_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "doc_id,cluster")?;
        for a in &self.assignment {
            writeln!(out, "{},{}", a.doc_id, a.cluster)?;
        }
        Ok(())
    }
}

fn validate(points: &[Vec<f64>], k: usize) -> Result<(), ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    let dim = points.first().map(|p| p.len()).unwrap_or(0);
    if points.iter().any(|p| p.len() != dim) {
        return Err(ClusterError::DimensionMismatch);
    }
    let distinct: HashSet<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|x| x.to_bits()).collect())
        .collect();
    if distinct.len() < k {
        return Err(ClusterError::TooFewDistinctPoints {
            needed: k,
            got: distinct.len(),
        });
    }
    Ok(())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// K-means++ seeding: the first centroid is uniform over the points, each
/// subsequent one drawn with probability proportional to the squared
/// distance to the nearest already-chosen centroid.
pub fn seed_kmeanspp(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, ClusterError> {
    validate(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(seed_with_rng(points, k, &mut rng))
}

fn seed_with_rng(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let first = rng.random_range(0..n);
    let mut centroids = vec![points[first].clone()];
    let mut dist_sq: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();

    while centroids.len() < k {
        // Distinct-point validation guarantees positive mass remains.
        let total: f64 = dist_sq.iter().sum();
        let draw = rng.random_range(0.0..total);
        let mut acc = 0.0;
        let mut chosen = n - 1;
        for (i, d) in dist_sq.iter().enumerate() {
            acc += d;
            if draw < acc {
                chosen = i;
                break;
            }
        }
        centroids.push(points[chosen].clone());
        for (i, p) in points.iter().enumerate() {
            let d = squared_distance(p, centroids.last().unwrap());
            if d < dist_sq[i] {
                dist_sq[i] = d;
            }
        }
    }
    centroids
}

/// Lloyd iteration from a k-means++ seeding. Assignment ties break toward
/// the lowest cluster index; an empty cluster is reseeded to the point
/// farthest from its assigned centroid; iteration stops when the largest
/// centroid shift drops below `tol` or after `max_iter` rounds.
pub fn fit(
    ids: &[String],
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    params: FitParams,
) -> Result<ClusterModel, ClusterError> {
    if ids.len() != points.len() {
        return Err(ClusterError::IdMismatch {
            ids: ids.len(),
            points: points.len(),
        });
    }
    validate(points, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_with_rng(points, k, &mut rng);
    let n = points.len();
    let dim = points[0].len();
    let mut labels = vec![0usize; n];
    let mut iterations_run = 0;

    for _ in 0..params.max_iter {
        iterations_run += 1;
        assign(points, &centroids, &mut labels);

        // Reseed empty clusters to the point currently farthest from its
        // centroid, repeating until every cluster is occupied.
        loop {
            let mut counts = vec![0usize; k];
            for &l in &labels {
                counts[l] += 1;
            }
            let Some(empty) = counts.iter().position(|&c| c == 0) else {
                break;
            };
            let farthest = (0..n)
                .max_by(|&a, &b| {
                    squared_distance(&points[a], &centroids[labels[a]])
                        .total_cmp(&squared_distance(&points[b], &centroids[labels[b]]))
                })
                .expect("nonempty points");
            centroids[empty] = points[farthest].clone();
            labels[farthest] = empty;
        }

        // Centroid update in fixed index order.
        let mut sums = vec![vec![0.0_f64; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        let mut max_shift = 0.0_f64;
        for c in 0..k {
            for s in &mut sums[c] {
                *s /= counts[c] as f64;
            }
            max_shift = max_shift.max(squared_distance(&sums[c], &centroids[c]).sqrt());
            centroids[c] = std::mem::take(&mut sums[c]);
        }
        if max_shift < params.tol {
            break;
        }
    }
    assign(points, &centroids, &mut labels);

    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l]))
        .sum();

    Ok(ClusterModel {
        k,
        seed,
        centroids,
        assignment: ids
            .iter()
            .zip(&labels)
            .map(|(id, &cluster)| Assignment {
                doc_id: id.clone(),
                cluster,
            })
            .collect(),
        inertia,
        iterations_run,
    })
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], labels: &mut [usize]) {
    for (i, p) in points.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = squared_distance(p, &centroids[0]);
        for (c, centroid) in centroids.iter().enumerate().skip(1) {
            let d = squared_distance(p, centroid);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
    }
}

/// One fitted model per requested k plus its mean silhouette. The
/// silhouette-maximizing k is reported, never auto-selected.
#[derive(Debug, Clone)]
pub struct SweepReport {
    pub results: BTreeMap<usize, (ClusterModel, f64)>,
    pub best_k: usize,
}

/// Fit each k in `k_values` and score it with the mean silhouette
/// coefficient.
pub fn sweep_k(
    ids: &[String],
    points: &[Vec<f64>],
    k_values: &[usize],
    seed: u64,
    params: FitParams,
) -> Result<SweepReport, ClusterError> {
    let mut results = BTreeMap::new();
    for &k in k_values {
        let model = fit(ids, points, k, seed, params)?;
        let sil = mean_silhouette(points, &model.labels());
        results.insert(k, (model, sil));
    }
    let best_k = results
        .iter()
        .max_by(|a, b| (a.1).1.total_cmp(&(b.1).1).then_with(|| b.0.cmp(a.0)))
        .map(|(k, _)| *k)
        .expect("at least one k");
    Ok(SweepReport { results, best_k })
}

/// Mean silhouette coefficient over all points, using Euclidean distance.
/// Points in singleton clusters score 0 by convention.
pub fn mean_silhouette(points: &[Vec<f64>], labels: &[usize]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let k = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    let mut total = 0.0;
    for i in 0..n {
        let own = labels[i];
        let mut sums = vec![0.0_f64; k];
        let mut counts = vec![0usize; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j]] += squared_distance(&points[i], &points[j]).sqrt();
            counts[labels[j]] += 1;
        }
        if counts[own] == 0 {
            continue; // singleton cluster: contributes 0
        }
        let a = sums[own] / counts[own] as f64;
        let mut b = f64::INFINITY;
        for c in 0..k {
            if c != own && counts[c] > 0 {
                b = b.min(sums[c] / counts[c] as f64);
            }
        }
        if b.is_finite() {
            let denom = a.max(b);
            if denom > 0.0 {
                total += (b - a) / denom;
            }
        }
    }
    total / n as f64
}

/// Adjusted Rand Index between two labelings of the same points; 1.0 means
/// identical partitions up to relabeling, around 0.0 is chance level.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must align");
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let choose2 = |x: u64| -> f64 { (x * x.saturating_sub(1)) as f64 / 2.0 };
    let sum_ij: f64 = table.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_a: f64 = table
        .iter()
        .map(|row| choose2(row.iter().sum::<u64>()))
        .sum();
    let sum_b: f64 = (0..kb)
        .map(|j| choose2(table.iter().map(|row| row[j]).sum::<u64>()))
        .sum();
    let total = choose2(n as u64);
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    if (max_index - expected).abs() < 1e-15 {
        return 1.0; // both partitions trivial
    }
    (sum_ij - expected) / (max_index - expected)
}
