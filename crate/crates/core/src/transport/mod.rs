//! Optimal transport between author term patterns on a shared embedding.

mod pairwise;
mod pattern;
pub mod simplex;
pub mod sinkhorn;

use serde::{Deserialize, Serialize};

pub use pairwise::{pairwise_author_distances, pairwise_with};
pub use pattern::{
    direct_author_angular_distance, make_point_pattern, make_point_pattern_indexed, mass_tolerance,
    WeightedPointPattern,
};
pub use simplex::{CostTable, SimplexStats};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Transport settings. `max_iter` bounds Sinkhorn sweeps; the exact solver
/// may pivot up to `max_iter * (m + n)` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OtParams {
    pub p: u32,
    pub sinkhorn_lambda: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Largest cost matrix, in bytes, held in memory per solve.
    pub memory_budget: usize,
}

impl Default for OtParams {
    fn default() -> Self {
        OtParams {
            p: 2,
            sinkhorn_lambda: 10.0,
            max_iter: 10_000,
            tol: 1e-9,
            memory_budget: 256 << 20,
        }
    }
}

impl OtParams {
    pub fn validate(&self) -> Result<()> {
        if self.p != 1 && self.p != 2 {
            return Err(Error::InvalidParameter(format!("p must be 1 or 2, got {}", self.p)));
        }
        if !(self.sinkhorn_lambda > 0.0 && self.sinkhorn_lambda.is_finite()) {
            return Err(Error::InvalidParameter("sinkhorn_lambda must be positive".into()));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("max_iter and tol must be positive".into()));
        }
        Ok(())
    }
}

/// Optimal flows `(source_index, target_index, mass)` and the total
/// `p`-th power cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan<T> {
    pub flows: Vec<(usize, usize, T)>,
    pub cost: T,
}

impl<T: Scalar> TransportPlan<T> {
    /// Row and column sums of the flows.
    pub fn marginals(&self, m: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rows = vec![0.0; m];
        let mut cols = vec![0.0; n];
        for &(i, j, f) in &self.flows {
            rows[i] += f.as_f64();
            cols[j] += f.as_f64();
        }
        (rows, cols)
    }
}

/// A pattern converted once to `f64` for repeated solves.
#[derive(Debug, Clone)]
pub struct Prepared {
    dim: usize,
    points: Vec<f64>,
    masses: Vec<f64>,
}

impl Prepared {
    pub fn from_pattern<T: Scalar>(p: &WeightedPointPattern<T>) -> Self {
        let masses: Vec<f64> = p.masses.iter().map(|m| m.as_f64()).collect();
        let total: f64 = masses.iter().sum();
        Prepared {
            dim: p.dim,
            points: p.points.iter().map(|v| v.as_f64()).collect(),
            masses: masses.iter().map(|m| m / total).collect(),
        }
    }
}

pub(crate) struct Solved {
    pub distance: f64,
    pub cost: f64,
    pub flows: Vec<(usize, usize, f64)>,
}

fn check_dims(a: &Prepared, b: &Prepared) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    if a.masses.is_empty() || b.masses.is_empty() {
        return Err(Error::DegenerateMasses("empty pattern".into()));
    }
    Ok(())
}

fn root(cost: f64, p: u32) -> f64 {
    let c = cost.max(0.0);
    if p == 2 {
        c.sqrt()
    } else {
        c
    }
}

/// Total order on prepared patterns by size, then masses, then coordinates,
/// compared bitwise.
fn canonical_cmp(a: &Prepared, b: &Prepared) -> std::cmp::Ordering {
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<u64>>();
    a.masses
        .len()
        .cmp(&b.masses.len())
        .then_with(|| bits(&a.masses).cmp(&bits(&b.masses)))
        .then_with(|| bits(&a.points).cmp(&bits(&b.points)))
}

/// Solves with the arguments in canonical order, so `W(a, b)` and `W(b, a)`
/// agree to the bit; bitwise-equal patterns are zero apart.
pub(crate) fn wasserstein_prepared(a: &Prepared, b: &Prepared, params: &OtParams) -> Result<Solved> {
    check_dims(a, b)?;
    match canonical_cmp(a, b) {
        std::cmp::Ordering::Equal => Ok(Solved {
            distance: 0.0,
            cost: 0.0,
            flows: a.masses.iter().enumerate().map(|(i, &m)| (i, i, m)).collect(),
        }),
        std::cmp::Ordering::Less => solve_ordered(a, b, params),
        std::cmp::Ordering::Greater => {
            let mut s = solve_ordered(b, a, params)?;
            for f in &mut s.flows {
                *f = (f.1, f.0, f.2);
            }
            s.flows.sort_by_key(|f| (f.0, f.1));
            Ok(s)
        }
    }
}

fn solve_ordered(a: &Prepared, b: &Prepared, params: &OtParams) -> Result<Solved> {
    let cost = CostTable::new(&a.points, &b.points, a.dim, params.p, params.memory_budget);
    let max_pivots = params.max_iter.saturating_mul(a.masses.len() + b.masses.len());
    let sol = simplex::solve_transport(&a.masses, &b.masses, &cost, max_pivots)?;
    Ok(Solved {
        distance: root(sol.cost, params.p),
        cost: sol.cost,
        flows: sol.flows,
    })
}

/// Exact `p`-Wasserstein distance `(min sum f_ij |x_i - y_j|^p)^(1/p)` and
/// an optimal plan.
pub fn wasserstein<T: Scalar>(
    a: &WeightedPointPattern<T>,
    b: &WeightedPointPattern<T>,
    params: &OtParams,
) -> Result<(T, TransportPlan<T>)> {
    params.validate()?;
    let s = wasserstein_prepared(&Prepared::from_pattern(a), &Prepared::from_pattern(b), params)?;
    Ok((
        T::lit(s.distance),
        TransportPlan {
            flows: s.flows.into_iter().map(|(i, j, f)| (i, j, T::lit(f))).collect(),
            cost: T::lit(s.cost),
        },
    ))
}

/// Unregularized cost of the entropic plan, raised to `1/p`. The plan is
/// rounded onto the feasible set, so the value never undercuts the exact
/// distance.
pub fn sinkhorn<T: Scalar>(
    a: &WeightedPointPattern<T>,
    b: &WeightedPointPattern<T>,
    params: &OtParams,
) -> Result<T> {
    params.validate()?;
    let (pa, pb) = (Prepared::from_pattern(a), Prepared::from_pattern(b));
    sinkhorn_prepared(&pa, &pb, params).map(T::lit)
}

pub(crate) fn sinkhorn_prepared(a: &Prepared, b: &Prepared, params: &OtParams) -> Result<f64> {
    check_dims(a, b)?;
    let cost = CostTable::new(&a.points, &b.points, a.dim, params.p, params.memory_budget);
    let plan = sinkhorn::sinkhorn_plan(
        &a.masses,
        &b.masses,
        &cost,
        params.sinkhorn_lambda,
        params.max_iter,
        params.tol,
    )?;
    let n = b.masses.len();
    let total: f64 = plan
        .iter()
        .enumerate()
        .map(|(k, &f)| f * cost.get(k / n, k % n))
        .sum();
    Ok(root(total, params.p))
}

/// Sinkhorn distances for every pair, in parallel.
pub fn pairwise_sinkhorn_distances<T: Scalar>(
    patterns: &[WeightedPointPattern<T>],
    params: &OtParams,
    threads: usize,
) -> Result<crate::geometry::CondensedDistanceMatrix<T>> {
    params.validate()?;
    let prepared: Vec<Prepared> = patterns.iter().map(Prepared::from_pattern).collect();
    pairwise_with(patterns, threads, |i, j| sinkhorn_prepared(&prepared[i], &prepared[j], params))
}
