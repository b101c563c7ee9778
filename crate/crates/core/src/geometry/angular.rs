use rayon::prelude::*;

use super::condensed::{CondensedDistanceMatrix, MatrixKind};
use crate::docterm::SparseDocTermMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::text::Vocabulary;

/// `acos(dot / (|x| |y|))` with the cosine clamped into `[-1, 1]`.
/// Parallel vectors (`dot^2 = |x|^2 |y|^2`) map to exactly zero.
#[inline]
pub fn angle_from_cosine<T: Scalar>(dot: T, norm_x_sq: T, norm_y_sq: T) -> T {
    let norm_sq = norm_x_sq * norm_y_sq;
    if dot > T::zero() && dot * dot >= norm_sq {
        return T::zero();
    }
    let cos = dot / norm_sq.sqrt();
    cos.max(-T::one()).min(T::one()).acos()
}

/// Angular distance between two binary presence vectors given as sorted
/// supports (indices of the ones).
pub fn angular_distance<T: Scalar>(x: &[u32], y: &[u32]) -> Result<T> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::ZeroVector);
    }
    let dot = sorted_intersection_len(x, y);
    Ok(angle_from_cosine(
        T::from_count(dot),
        T::from_count(x.len()),
        T::from_count(y.len()),
    ))
}

/// Angular distance between two real vectors.
pub fn angular_distance_dense<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let (mut dot, mut nx, mut ny) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        dot = dot + a * b;
        nx = nx + a * a;
        ny = ny + b * b;
    }
    if nx == T::zero() || ny == T::zero() {
        return Err(Error::ZeroVector);
    }
    Ok(angle_from_cosine(dot, nx, ny))
}

pub(crate) fn sorted_intersection_len(x: &[u32], y: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Term-term angular distances and which vocabulary ranks they cover.
#[derive(Debug, Clone)]
pub struct TermDistances<T> {
    pub matrix: CondensedDistanceMatrix<T>,
    /// 1-based vocabulary rank of each matrix row.
    pub ranks: Vec<usize>,
    /// Ranks whose column was empty and were left out.
    pub excluded: Vec<usize>,
}

/// Angular distance between every pair of non-empty term columns of `x`.
///
/// Dot products are the sizes of column-support intersections, accumulated
/// by walking each column's documents, so the cost is proportional to the
/// sum of squared row lengths rather than to the number of term pairs times
/// the number of documents.
pub fn pairwise_term_distances<T: Scalar>(
    x: &SparseDocTermMatrix,
    vocab: &Vocabulary,
) -> Result<TermDistances<T>> {
    let supports = x.column_supports();
    let mut ranks = Vec::new();
    let mut excluded = Vec::new();
    for (c, s) in supports.iter().enumerate() {
        if s.is_empty() {
            excluded.push(c + 1);
        } else {
            ranks.push(c + 1);
        }
    }
    if !excluded.is_empty() {
        log::warn!("{} terms absent from all documents were excluded", excluded.len());
    }
    // dense position of each rank, or usize::MAX when excluded
    let mut position = vec![usize::MAX; x.n_terms() + 1];
    for (p, &r) in ranks.iter().enumerate() {
        position[r] = p;
    }
    let n = ranks.len();
    let rows = x.rows();
    let sizes: Vec<usize> = ranks.iter().map(|&r| supports[r - 1].len()).collect();

    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut dots = vec![0u32; n];
            for &row in &supports[ranks[p] - 1] {
                for &t in &rows[row as usize].terms {
                    let q = position[t as usize];
                    if q > p && q != usize::MAX {
                        dots[q] += 1;
                    }
                }
            }
            ((p + 1)..n)
                .map(|q| {
                    angle_from_cosine(
                        T::from_count(dots[q] as usize),
                        T::from_count(sizes[p]),
                        T::from_count(sizes[q]),
                    )
                })
                .collect()
        })
        .collect();

    let ids = ranks
        .iter()
        .map(|&r| vocab.term(r).map_or_else(|| r.to_string(), str::to_string))
        .collect();
    Ok(TermDistances {
        matrix: CondensedDistanceMatrix::new(n, upper.concat(), MatrixKind::Term, ids)?,
        ranks,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docterm::DocRow;
    use std::f64::consts::PI;

    #[test]
    fn analytic_cases() {
        assert_eq!(angular_distance::<f64>(&[0, 1], &[0, 1]).unwrap(), 0.0);
        assert!((angular_distance::<f64>(&[0], &[1]).unwrap() - PI / 2.0).abs() < 1e-15);
        let third = angular_distance::<f64>(&[1, 2], &[1, 3]).unwrap();
        assert!((third - PI / 3.0).abs() < 1e-12, "{third}");
    }

    #[test]
    fn zero_vector_rejected() {
        assert!(matches!(angular_distance::<f64>(&[], &[1]), Err(Error::ZeroVector)));
        assert!(matches!(
            angular_distance_dense(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn dense_counts() {
        let d = angular_distance_dense(&[1.0f64, 1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        assert!((d - PI / 3.0).abs() < 1e-12);
        let f = angular_distance_dense(&[1.0f32, 0.0], &[0.0, 1.0]).unwrap();
        assert!((f - std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }

    fn vocab(n: usize) -> Vocabulary {
        Vocabulary::from_counts((0..n).map(|i| (format!("t{i:02}"), (100 - i) as u64)))
    }

    #[test]
    fn identical_columns() {
        let x = SparseDocTermMatrix::from_rows(
            2,
            2,
            vec![
                DocRow { doc_index: 0, terms: vec![1, 2] },
                DocRow { doc_index: 1, terms: vec![1, 2] },
            ],
        )
        .unwrap();
        let d = pairwise_term_distances::<f64>(&x, &vocab(2)).unwrap();
        assert_eq!(d.matrix.values(), &[0.0]);
        assert_eq!(d.matrix.ids(), ["t00", "t01"]);
    }

    #[test]
    fn disjoint_columns_and_exclusion() {
        let x = SparseDocTermMatrix::from_rows(
            3,
            4,
            vec![
                DocRow { doc_index: 0, terms: vec![1] },
                DocRow { doc_index: 1, terms: vec![2] },
                DocRow { doc_index: 2, terms: vec![4] },
            ],
        )
        .unwrap();
        let d = pairwise_term_distances::<f64>(&x, &vocab(4)).unwrap();
        assert_eq!(d.ranks, [1, 2, 4]);
        assert_eq!(d.excluded, [3]);
        assert!(d.matrix.values().iter().all(|&v| (v - PI / 2.0).abs() < 1e-15));
    }
}
