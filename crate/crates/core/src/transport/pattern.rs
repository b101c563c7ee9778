use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angular_distance_dense, TermEmbedding};
use crate::scalar::Scalar;
use crate::text::{AuthorProfile, Vocabulary};

/// A discrete probability distribution over points of `R^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedPointPattern<T> {
    pub owner: String,
    pub dim: usize,
    /// Row-major `masses.len() x dim` coordinates.
    pub points: Vec<T>,
    pub masses: Vec<T>,
}

/// Allowed deviation of the mass total from 1.
pub fn mass_tolerance<T: Scalar>(n: usize) -> f64 {
    (T::epsilon().as_f64() * 4.0 * n.max(1) as f64).max(1e-12)
}

impl<T: Scalar> WeightedPointPattern<T> {
    pub fn new(owner: impl Into<String>, dim: usize, points: Vec<T>, masses: Vec<T>) -> Result<Self> {
        let owner = owner.into();
        if dim == 0 || points.len() != dim * masses.len() {
            return Err(Error::DimensionMismatch {
                left: points.len(),
                right: dim * masses.len(),
            });
        }
        if masses.is_empty() {
            return Err(Error::EmptyPattern { author_id: owner });
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > T::zero())) {
            return Err(Error::DegenerateMasses(format!("`{owner}` has mass {m}")));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateMasses(format!("`{owner}` has a non-finite coordinate")));
        }
        let total: f64 = masses.iter().map(|m| m.as_f64()).sum();
        if (total - 1.0).abs() > mass_tolerance::<T>(masses.len()) {
            return Err(Error::DegenerateMasses(format!("`{owner}` masses sum to {total}")));
        }
        Ok(WeightedPointPattern {
            owner,
            dim,
            points,
            masses,
        })
    }

    /// Builds a pattern from unnormalized nonnegative weights; zero weights are dropped.
    pub fn from_weights(owner: impl Into<String>, dim: usize, points: &[T], weights: &[T]) -> Result<Self> {
        let owner = owner.into();
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::EmptyPattern { author_id: owner });
        }
        let mut p = Vec::new();
        let mut m = Vec::new();
        for (k, &w) in weights.iter().enumerate() {
            if w > T::zero() {
                p.extend_from_slice(&points[k * dim..(k + 1) * dim]);
                m.push(w / total);
            }
        }
        Self::new(owner, dim, p, m)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, k: usize) -> &[T] {
        &self.points[k * self.dim..(k + 1) * self.dim]
    }

    /// The same pattern with every point shifted by `offset`.
    pub fn translated(&self, offset: &[T]) -> Self {
        let mut out = self.clone();
        for (k, v) in out.points.iter_mut().enumerate() {
            *v = *v + offset[k % self.dim];
        }
        out
    }

    /// The same pattern with every coordinate multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        out.points.iter_mut().for_each(|v| *v = *v * s);
        out
    }
}

/// Places an author's term frequencies on the embedded term coordinates.
/// Terms without a coordinate are dropped before normalization.
pub fn make_point_pattern<T: Scalar>(
    profile: &AuthorProfile,
    emb: &TermEmbedding<T>,
) -> Result<WeightedPointPattern<T>> {
    let index: HashMap<&str, usize> = emb.ids.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    make_point_pattern_indexed(profile, emb, &index)
}

/// [`make_point_pattern`] with a prebuilt term-to-row index for `emb`.
pub fn make_point_pattern_indexed<T: Scalar>(
    profile: &AuthorProfile,
    emb: &TermEmbedding<T>,
    index: &HashMap<&str, usize>,
) -> Result<WeightedPointPattern<T>> {
    let kept: Vec<(usize, u64)> = profile
        .term_counts
        .iter()
        .filter(|(_, &c)| c > 0)
        .filter_map(|(t, &c)| index.get(t.as_str()).map(|&row| (row, c)))
        .collect();
    let total: u64 = kept.iter().map(|&(_, c)| c).sum();
    if total == 0 {
        return Err(Error::EmptyPattern {
            author_id: profile.author_id.clone(),
        });
    }
    let mut points = Vec::with_capacity(kept.len() * emb.dim);
    let mut masses = Vec::with_capacity(kept.len());
    for &(row, c) in &kept {
        points.extend_from_slice(emb.point(row));
        masses.push(T::from_count(c as usize) / T::from_count(total as usize));
    }
    WeightedPointPattern::new(profile.author_id.clone(), emb.dim, points, masses)
}

/// Angle between two authors' raw term-count vectors over `vocab`.
pub fn direct_author_angular_distance<T: Scalar>(
    fa: &AuthorProfile,
    fb: &AuthorProfile,
    vocab: &Vocabulary,
) -> Result<T> {
    let restrict = |p: &AuthorProfile| -> Result<BTreeMap<usize, f64>> {
        let m: BTreeMap<usize, f64> = p
            .term_counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .filter_map(|(t, &c)| vocab.rank(t).map(|r| (r, c as f64)))
            .collect();
        if m.is_empty() {
            return Err(Error::EmptyPattern {
                author_id: p.author_id.clone(),
            });
        }
        Ok(m)
    };
    let a = restrict(fa)?;
    let b = restrict(fb)?;
    let ranks: Vec<usize> = a.keys().chain(b.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let va: Vec<T> = ranks.iter().map(|r| T::lit(a.get(r).copied().unwrap_or(0.0))).collect();
    let vb: Vec<T> = ranks.iter().map(|r| T::lit(b.get(r).copied().unwrap_or(0.0))).collect();
    angular_distance_dense(&va, &vb)
}
