use rayon::prelude::*;

use super::{wasserstein_prepared, OtParams, Prepared, WeightedPointPattern};
use crate::error::{Error, Result};
use crate::geometry::{CondensedDistanceMatrix, MatrixKind};
use crate::scalar::Scalar;

/// Exact Wasserstein distance for every pair of patterns, solved independently
/// on a pool of `threads` workers (0 = one per core). The result does not
/// depend on scheduling.
pub fn pairwise_author_distances<T: Scalar>(
    patterns: &[WeightedPointPattern<T>],
    params: &OtParams,
    threads: usize,
) -> Result<CondensedDistanceMatrix<T>> {
    params.validate()?;
    let prepared: Vec<Prepared> = patterns.iter().map(Prepared::from_pattern).collect();
    pairwise_with(patterns, threads, |i, j| {
        wasserstein_prepared(&prepared[i], &prepared[j], params).map(|s| s.distance)
    })
}

/// Fills a condensed author matrix with `distance(i, j)` for `i < j`, in
/// parallel. The first failing pair (in row-major order) aborts the run.
pub fn pairwise_with<T, F>(
    patterns: &[WeightedPointPattern<T>],
    threads: usize,
    distance: F,
) -> Result<CondensedDistanceMatrix<T>>
where
    T: Scalar,
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let n = patterns.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let results: Vec<Result<f64>> = pool.install(|| {
        pairs
            .par_iter()
            .map(|&(i, j)| distance(i, j))
            .collect()
    });
    let mut values = Vec::with_capacity(pairs.len());
    for (&(i, j), r) in pairs.iter().zip(results) {
        match r {
            Ok(d) => values.push(T::lit(d)),
            Err(e) => {
                return Err(Error::PairFailed {
                    left: patterns[i].owner.clone(),
                    right: patterns[j].owner.clone(),
                    source: Box::new(e),
                })
            }
        }
    }
    let ids = patterns.iter().map(|p| p.owner.clone()).collect();
    CondensedDistanceMatrix::new(n, values, MatrixKind::Author, ids)
}
