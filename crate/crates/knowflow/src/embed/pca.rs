//! Principal-component reduction via SVD of the mean-centered data matrix.

use nalgebra::DMatrix;

use super::{EmbedError, EmbeddingVector};

/// Fitted PCA basis. `components` holds `target_dim` orthonormal rows of
/// length D, ordered by nonincreasing singular value, each sign-fixed so its
/// largest-magnitude entry is positive. `rank` counts singular values above
/// `1e-12` of the leading one; a rank below `target_dim` means the trailing
/// projection dimensions carry no variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub components: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
    pub mean: Vec<f64>,
    pub rank: usize,
}

impl PcaModel {
    pub fn is_rank_deficient(&self) -> bool {
        self.rank < self.components.len()
    }
}

/// Projections plus the fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaReduction {
    pub projections: Vec<EmbeddingVector>,
    pub model: PcaModel,
}

/// Reduce vectors to `target_dim` principal components. Requires
/// `target_dim <= D` and at least `target_dim + 1` vectors. Rank deficiency
/// is reported through [`PcaModel::rank`], not as an error.
pub fn reduce_pca(
    vectors: &[EmbeddingVector],
    target_dim: usize,
) -> Result<PcaReduction, EmbedError> {
    let n = vectors.len();
    if target_dim == 0 {
        return Err(EmbedError::InvalidConfig("target_dim must be positive".into()));
    }
    if n < target_dim + 1 {
        return Err(EmbedError::TooFewPoints {
            needed: target_dim + 1,
            got: n,
        });
    }
    let dim = vectors[0].values.len();
    for v in vectors {
        if v.values.len() != dim {
            return Err(EmbedError::DimensionMismatch {
                expected: dim,
                got: v.values.len(),
            });
        }
    }
    if target_dim > dim {
        return Err(EmbedError::DimensionMismatch {
            expected: dim,
            got: target_dim,
        });
    }

    let mut mean = vec![0.0_f64; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(&v.values) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i].values[j] - mean[j]);
    // nalgebra returns singular values in descending order.
    let svd = centered.clone().svd(false, true);
    let v_t = svd.v_t.expect("v requested");

    let mut components = Vec::with_capacity(target_dim);
    let mut singular_values = Vec::with_capacity(target_dim);
    for c in 0..target_dim {
        let mut row: Vec<f64> = (0..dim).map(|j| v_t[(c, j)]).collect();
        // Fix the sign so the largest-magnitude entry is positive (first such
        // entry on ties).
        let mut best = 0usize;
        for (j, x) in row.iter().enumerate() {
            if x.abs() > row[best].abs() {
                best = j;
            }
        }
        if row[best] < 0.0 {
            for x in &mut row {
                *x = -*x;
            }
        }
        components.push(row);
        singular_values.push(svd.singular_values[c]);
    }

    let leading = svd.singular_values[0];
    let rank = singular_values
        .iter()
        .take_while(|s| **s > 1e-12 * leading && **s > 0.0)
        .count();

    let projections = vectors
        .iter()
        .enumerate()
        .map(|(i, v)| EmbeddingVector {
            doc_id: v.doc_id.clone(),
            values: components
                .iter()
                .map(|comp| {
                    comp.iter()
                        .enumerate()
                        .map(|(j, c)| c * (vectors[i].values[j] - mean[j]))
                        .sum()
                })
                .collect(),
        })
        .collect();

    Ok(PcaReduction {
        projections,
        model: PcaModel {
            components,
            singular_values,
            mean,
            rank,
        },
    })
}
