//! Entropic transport by alternating log-domain scaling.

use super::simplex::CostTable;
use crate::error::{Error, Result};

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Dense `m x n` plan from Sinkhorn scaling with kernel `exp(-sharpness * c)`,
/// run until the row-marginal L1 residual drops below `tol`, then rounded onto
/// the transportation polytope so both marginals hold exactly.
pub fn sinkhorn_plan(
    supply: &[f64],
    demand: &[f64],
    cost: &CostTable<'_>,
    sharpness: f64,
    max_iter: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let m = supply.len();
    let n = demand.len();
    let la: Vec<f64> = supply.iter().map(|v| v.ln()).collect();
    let lb: Vec<f64> = demand.iter().map(|v| v.ln()).collect();
    let mut f = vec![0.0; m];
    let mut g = vec![0.0; n];
    let log_entry = |f: &[f64], g: &[f64], i: usize, j: usize| -> f64 {
        la[i] + lb[j] + sharpness * (f[i] + g[j] - cost.get(i, j))
    };

    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        for i in 0..m {
            let lse = log_sum_exp((0..n).map(|j| lb[j] + sharpness * (g[j] - cost.get(i, j))));
            f[i] = -lse / sharpness;
        }
        for j in 0..n {
            let lse = log_sum_exp((0..m).map(|i| la[i] + sharpness * (f[i] - cost.get(i, j))));
            g[j] = -lse / sharpness;
        }
        residual = (0..m)
            .map(|i| {
                let row: f64 = (0..n).map(|j| log_entry(&f, &g, i, j).exp()).sum();
                (row - supply[i]).abs()
            })
            .sum();
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SinkhornNotConverged {
            iterations: max_iter,
            residual,
        });
    }

    let mut plan = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            plan[i * n + j] = log_entry(&f, &g, i, j).exp();
        }
    }
    round_to_marginals(&mut plan, supply, demand);
    Ok(plan)
}

/// Projects a nonnegative plan onto the polytope with the given marginals:
/// scale down overfull rows, then overfull columns, then spread the deficits.
pub fn round_to_marginals(plan: &mut [f64], supply: &[f64], demand: &[f64]) {
    let m = supply.len();
    let n = demand.len();
    for i in 0..m {
        let row: f64 = plan[i * n..(i + 1) * n].iter().sum();
        if row > supply[i] {
            let s = supply[i] / row;
            plan[i * n..(i + 1) * n].iter_mut().for_each(|v| *v *= s);
        }
    }
    for j in 0..n {
        let col: f64 = (0..m).map(|i| plan[i * n + j]).sum();
        if col > demand[j] {
            let s = demand[j] / col;
            (0..m).for_each(|i| plan[i * n + j] *= s);
        }
    }
    let err_r: Vec<f64> = (0..m)
        .map(|i| (supply[i] - plan[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0))
        .collect();
    let err_c: Vec<f64> = (0..n)
        .map(|j| (demand[j] - (0..m).map(|i| plan[i * n + j]).sum::<f64>()).max(0.0))
        .collect();
    let mass: f64 = err_c.iter().sum();
    if mass > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan[i * n + j] += err_r[i] * err_c[j] / mass;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_restores_marginals() {
        let mut plan = vec![0.4, 0.3, 0.1, 0.05];
        let a = [0.5, 0.5];
        let b = [0.6, 0.4];
        round_to_marginals(&mut plan, &a, &b);
        for i in 0..2 {
            assert!((plan[2 * i] + plan[2 * i + 1] - a[i]).abs() < 1e-15);
            assert!((plan[i] + plan[2 + i] - b[i]).abs() < 1e-15);
        }
        assert!(plan.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn reports_residual_on_failure() {
        let src = [0.0, 1.0];
        let dst = [0.0, 1.0];
        let cost = CostTable::new(&src, &dst, 1, 2, usize::MAX);
        let err = sinkhorn_plan(&[0.3, 0.7], &[0.6, 0.4], &cost, 5.0, 1, 1e-300).unwrap_err();
        assert!(matches!(err, Error::SinkhornNotConverged { iterations: 1, .. }));
    }
}
