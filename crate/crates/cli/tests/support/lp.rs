//! Dense two-phase simplex with Bland's rule for `min c.x, A x = b, x >= 0`.

const EPS: f64 = 1e-11;

struct Tableau {
    rows: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r];
        for k in 0..self.rows.len() {
            if k != r {
                let f = self.rows[k][col];
                if f != 0.0 {
                    for (v, pv) in self.rows[k].iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                    self.rhs[k] -= f * pivot_rhs;
                }
            }
        }
        self.basis[r] = col;
    }

    /// Minimizes `cost` over the columns flagged in `allowed`.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) {
        loop {
            let reduced = |j: usize| -> f64 {
                cost[j] - self.basis.iter().zip(&self.rows).map(|(&b, row)| cost[b] * row[j]).sum::<f64>()
            };
            let Some(enter) = (0..cost.len()).find(|&j| allowed[j] && !self.basis.contains(&j) && reduced(j) < -EPS)
            else {
                return;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][enter];
                if a > EPS {
                    let ratio = self.rhs[r] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            let (r, _) = leave.expect("bounded");
            self.pivot(r, enter);
        }
    }
}

/// Optimal objective of `min c.x` subject to `A x = b`, `x >= 0`, with
/// `b >= 0`. Panics when infeasible.
pub fn solve_standard_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> f64 {
    let (m, n) = (a.len(), c.len());
    // columns n..n+m are artificials
    let mut t = Tableau {
        rows: a
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
                r
            })
            .collect(),
        rhs: b.to_vec(),
        basis: (n..n + m).collect(),
    };
    let phase1: Vec<f64> = (0..n + m).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    t.optimize(&phase1, &vec![true; n + m]);
    let infeasibility: f64 = t.basis.iter().zip(&t.rhs).filter(|(&bv, _)| bv >= n).map(|(_, v)| v).sum();
    assert!(infeasibility < 1e-9, "infeasible LP");
    // drive zero-level artificials out of the basis, dropping redundant rows
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            match (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                Some(j) => {
                    t.pivot(r, j);
                    r += 1;
                }
                None => {
                    t.rows.remove(r);
                    t.rhs.remove(r);
                    t.basis.remove(r);
                }
            }
        } else {
            r += 1;
        }
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat(0.0).take(m));
    let allowed: Vec<bool> = (0..n + m).map(|j| j < n).collect();
    t.optimize(&phase2, &allowed);
    t.basis.iter().zip(&t.rhs).map(|(&bv, v)| phase2[bv] * v).sum()
}

/// Optimal cost of the transportation problem with the given cost matrix.
pub fn transport_lp(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> f64 {
    let (m, n) = (supply.len(), demand.len());
    let mut a = Vec::with_capacity(m + n);
    for i in 0..m {
        a.push((0..m * n).map(|k| if k / n == i { 1.0 } else { 0.0 }).collect());
    }
    for j in 0..n {
        a.push((0..m * n).map(|k| if k % n == j { 1.0 } else { 0.0 }).collect());
    }
    let b: Vec<f64> = supply.iter().chain(demand).copied().collect();
    let c: Vec<f64> = cost.iter().flatten().copied().collect();
    solve_standard_form(&a, &b, &c)
}
