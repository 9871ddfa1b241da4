//! Neighbor-graph layout reduction to 2 or 3 dimensions.
//!
//! A deliberately simplified variant of the fuzzy k-NN manifold layout:
//! exact k-nearest neighbors instead of an approximate index, PCA
//! initialization instead of a spectral embedding, the curve parameters
//! frozen at a = b = 1, and a linearly decaying learning rate. Given a seed
//! the output is bit-reproducible.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{reduce_pca, EmbedError, EmbeddingVector};

const NEGATIVE_SAMPLES: usize = 5;
const INITIAL_LEARNING_RATE: f64 = 1.0;
const GRAD_CLIP: f64 = 4.0;
const REPULSION_EPS: f64 = 1e-3;

/// Parameters for [`reduce_neighbor`]. `target_dim` must be 2 or 3 and
/// `n_neighbors` must be below the number of points.
#[derive(Debug, Clone, Copy)]
pub struct NeighborParams {
    pub target_dim: usize,
    pub n_neighbors: usize,
    pub epochs: usize,
    pub seed: u64,
}

/// Reduce vectors to a low-dimensional layout that preserves neighbor
/// structure. With zero epochs the output equals the PCA initialization.
pub fn reduce_neighbor(
    vectors: &[EmbeddingVector],
    params: &NeighborParams,
) -> Result<Vec<EmbeddingVector>, EmbedError> {
    let n = vectors.len();
    if !(params.target_dim == 2 || params.target_dim == 3) {
        return Err(EmbedError::InvalidConfig(format!(
            "target_dim must be 2 or 3, got {}",
            params.target_dim
        )));
    }
    if params.n_neighbors == 0 {
        return Err(EmbedError::InvalidConfig("n_neighbors must be positive".into()));
    }
    if params.n_neighbors >= n || n < params.target_dim + 1 {
        return Err(EmbedError::TooFewPoints {
            needed: (params.n_neighbors + 1).max(params.target_dim + 1),
            got: n,
        });
    }

    // Exact k-NN on Euclidean distance, ties broken by index.
    let knn = nearest_neighbors(vectors, params.n_neighbors);

    // Local connectivity: rho is the nearest-neighbor distance; sigma is
    // solved so the smoothed neighbor weights sum to log2(k).
    let target = (params.n_neighbors as f64).log2();
    let mut directed: Vec<(usize, usize, f64)> = Vec::with_capacity(n * params.n_neighbors);
    for (i, neighbors) in knn.iter().enumerate() {
        let rho = neighbors[0].1;
        let sigma = solve_sigma(neighbors, rho, target);
        for &(j, d) in neighbors {
            let w = (-((d - rho).max(0.0)) / sigma).exp();
            directed.push((i, j, w));
        }
    }

    // Symmetrize: w_union = w_ij + w_ji - w_ij * w_ji over unordered pairs.
    let mut directed_map = std::collections::HashMap::with_capacity(directed.len());
    for &(i, j, w) in &directed {
        directed_map.insert((i, j), w);
    }
    let mut edge_map = std::collections::BTreeMap::new();
    for &(i, j, _) in &directed {
        let key = (i.min(j), i.max(j));
        if edge_map.contains_key(&key) {
            continue;
        }
        let a = *directed_map.get(&(key.0, key.1)).unwrap_or(&0.0);
        let b = *directed_map.get(&(key.1, key.0)).unwrap_or(&0.0);
        edge_map.insert(key, a + b - a * b);
    }
    let edges: Vec<(usize, usize, f64)> = edge_map
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .map(|((i, j), w)| (i, j, w))
        .collect();

    // Layout initialized from PCA; zero epochs returns it untouched.
    let init = reduce_pca(vectors, params.target_dim)?;
    let mut layout: Vec<Vec<f64>> = init.projections.iter().map(|p| p.values.clone()).collect();

    if params.epochs > 0 && !edges.is_empty() {
        optimize(&mut layout, &edges, n, params);
    }

    Ok(vectors
        .iter()
        .zip(layout)
        .map(|(v, values)| EmbeddingVector {
            doc_id: v.doc_id.clone(),
            values,
        })
        .collect())
}

fn nearest_neighbors(vectors: &[EmbeddingVector], k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = vectors.len();
    let mut knn = Vec::with_capacity(n);
    for i in 0..n {
        let mut dists: Vec<(usize, f64)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (j, euclidean(&vectors[i].values, &vectors[j].values)))
            .collect();
        dists.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        dists.truncate(k);
        knn.push(dists);
    }
    knn
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Binary search for sigma such that
/// `sum_j exp(-max(0, d_j - rho) / sigma) = target` within 1e-5. The sum is
/// increasing in sigma; if even a tiny sigma overshoots (all neighbors tied
/// at rho) the smallest sigma is used.
fn solve_sigma(neighbors: &[(usize, f64)], rho: f64, target: f64) -> f64 {
    let weight_sum = |sigma: f64| -> f64 {
        neighbors
            .iter()
            .map(|&(_, d)| (-((d - rho).max(0.0)) / sigma).exp())
            .sum()
    };
    let mut lo = 1e-12;
    if weight_sum(lo) >= target {
        return lo;
    }
    let mut hi = 1.0;
    let mut grow = 0;
    while weight_sum(hi) < target && grow < 64 {
        hi *= 2.0;
        grow += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = weight_sum(mid);
        if (s - target).abs() <= 1e-5 {
            return mid;
        }
        if s < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stochastic layout optimization on the fuzzy cross-entropy with negative
/// sampling. Edges are visited on the usual epochs-per-sample schedule (an
/// edge of weight w fires every w_max / w epochs); both endpoints move on
/// attraction, only the head moves on repulsion. With the curve frozen at
/// a = b = 1 the attraction coefficient is -2 / (1 + d^2) and the repulsion
/// coefficient 2 / ((eps + d^2)(1 + d^2)).
fn optimize(
    layout: &mut [Vec<f64>],
    edges: &[(usize, usize, f64)],
    n: usize,
    params: &NeighborParams,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let w_max = edges.iter().map(|e| e.2).fold(f64::MIN, f64::max);
    let epochs_per_sample: Vec<f64> = edges.iter().map(|e| w_max / e.2).collect();
    let mut next_sample: Vec<f64> = epochs_per_sample.clone();
    let dim = params.target_dim;

    for epoch in 1..=params.epochs {
        let alpha =
            INITIAL_LEARNING_RATE * (1.0 - (epoch - 1) as f64 / params.epochs as f64);
        for (e, &(i, j, _)) in edges.iter().enumerate() {
            if next_sample[e] > epoch as f64 {
                continue;
            }
            next_sample[e] += epochs_per_sample[e];

            let d2: f64 = (0..dim)
                .map(|c| (layout[i][c] - layout[j][c]).powi(2))
                .sum();
            let coeff = -2.0 / (1.0 + d2);
            for c in 0..dim {
                let step = alpha * clip(coeff * (layout[i][c] - layout[j][c]));
                layout[i][c] += step;
                layout[j][c] -= step;
            }

            for _ in 0..NEGATIVE_SAMPLES {
                let k = rng.random_range(0..n);
                if k == i {
                    continue;
                }
                let d2: f64 = (0..dim)
                    .map(|c| (layout[i][c] - layout[k][c]).powi(2))
                    .sum();
                let coeff = 2.0 / ((REPULSION_EPS + d2) * (1.0 + d2));
                for c in 0..dim {
                    let step = alpha * clip(coeff * (layout[i][c] - layout[k][c]));
                    layout[i][c] += step;
                }
            }
        }
    }
}

fn clip(x: f64) -> f64 {
    x.clamp(-GRAD_CLIP, GRAD_CLIP)
}
