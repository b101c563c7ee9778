//! Neighbourhood-preservation and cluster-separation scores for embeddings.

use rayon::prelude::*;

use super::condensed::CondensedDistanceMatrix;
use super::umap::TermEmbedding;
use crate::error::{Error, Result};
use crate::scalar::{squared_euclidean, Scalar};

/// Trustworthiness of an embedding at neighbourhood size `k`.
///
/// The input-space rank of `j` around `i` is one plus the number of points
/// strictly closer than `j`, so tied points share the best rank.
pub fn trustworthiness<T: Scalar>(
    high: &CondensedDistanceMatrix<T>,
    emb: &TermEmbedding<T>,
    k: usize,
) -> Result<f64> {
    let n = high.len();
    if emb.len() != n {
        return Err(Error::DimensionMismatch {
            left: n,
            right: emb.len(),
        });
    }
    if k == 0 || 2 * n < 3 * k + 2 {
        return Err(Error::InvalidParameter(format!(
            "trustworthiness needs 0 < k and 3k + 1 < 2n (k = {k}, n = {n})"
        )));
    }
    let penalty: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut sorted: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| high.get(i, j).as_f64())
                .collect();
            sorted.sort_by(f64::total_cmp);
            let mut low: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (squared_euclidean(emb.point(i), emb.point(j)).as_f64(), j))
                .collect();
            low.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            low[..k]
                .iter()
                .map(|&(_, j)| {
                    let d = high.get(i, j).as_f64();
                    let rank = 1 + sorted.partition_point(|&v| v < d);
                    rank.saturating_sub(k) as f64
                })
                .sum::<f64>()
        })
        .sum();
    let (n, k) = (n as f64, k as f64);
    Ok(1.0 - 2.0 / (n * k * (2.0 * n - 3.0 * k - 1.0)) * penalty)
}

/// Mean silhouette of `labels` under Euclidean distance in the embedding.
/// Points in singleton clusters score zero.
pub fn silhouette<T: Scalar>(emb: &TermEmbedding<T>, labels: &[usize]) -> Result<f64> {
    let n = emb.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: labels.len(),
        });
    }
    let n_labels = labels.iter().copied().max().map_or(0, |m| m + 1);
    if n < 2 || n_labels < 2 {
        return Err(Error::InvalidParameter("silhouette needs at least two clusters".into()));
    }
    let mut sizes = vec![0usize; n_labels];
    for &l in labels {
        sizes[l] += 1;
    }
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let li = labels[i];
            if sizes[li] < 2 {
                return 0.0;
            }
            let mut sums = vec![0.0; n_labels];
            for j in 0..n {
                if j != i {
                    sums[labels[j]] += squared_euclidean(emb.point(i), emb.point(j)).as_f64().sqrt();
                }
            }
            let a = sums[li] / (sizes[li] - 1) as f64;
            let b = (0..n_labels)
                .filter(|&l| l != li && sizes[l] > 0)
                .map(|l| sums[l] / sizes[l] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m > 0.0 {
                (b - a) / m
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / n as f64)
}
