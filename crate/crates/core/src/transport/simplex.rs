//! Exact transportation simplex on a spanning-tree basis.

use crate::error::{Error, Result};

const NONE: usize = usize::MAX;

/// Ground costs `|x_i - y_j|^p`, materialized when they fit the memory budget
/// and recomputed on demand otherwise.
pub struct CostTable<'a> {
    src: &'a [f64],
    dst: &'a [f64],
    dim: usize,
    p: u32,
    n: usize,
    dense: Option<Vec<f64>>,
}

impl<'a> CostTable<'a> {
    pub fn new(src: &'a [f64], dst: &'a [f64], dim: usize, p: u32, memory_budget: usize) -> Self {
        let m = src.len() / dim;
        let n = dst.len() / dim;
        let mut table = CostTable {
            src,
            dst,
            dim,
            p,
            n,
            dense: None,
        };
        if m.saturating_mul(n).saturating_mul(std::mem::size_of::<f64>()) <= memory_budget {
            let mut d = Vec::with_capacity(m * n);
            for i in 0..m {
                for j in 0..n {
                    d.push(table.compute(i, j));
                }
            }
            table.dense = Some(d);
        }
        table
    }

    pub fn rows(&self) -> usize {
        self.src.len() / self.dim
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn is_dense(&self) -> bool {
        self.dense.is_some()
    }

    #[inline]
    fn compute(&self, i: usize, j: usize) -> f64 {
        let x = &self.src[i * self.dim..(i + 1) * self.dim];
        let y = &self.dst[j * self.dim..(j + 1) * self.dim];
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if self.p == 2 {
            sq
        } else {
            sq.sqrt()
        }
    }

    /// Row `i` of the materialized table, if the table is dense.
    #[inline]
    pub fn dense_row(&self, i: usize) -> Option<&[f64]> {
        self.dense.as_deref().map(|d| &d[i * self.n..(i + 1) * self.n])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.dense {
            Some(d) => d[i * self.n + j],
            None => self.compute(i, j),
        }
    }
}

/// Solver counters, reported for diagnostics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimplexStats {
    pub pivots: usize,
    pub degenerate_pivots: usize,
}

/// Optimal basic flows `(i, j, mass)` (zero flows omitted) and the total cost.
pub struct SimplexSolution {
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    pub stats: SimplexStats,
}

/// Orientation of a tree arc relative to its lower endpoint.
const UP: i8 = 1;
const DOWN: i8 = -1;

/// Primal network simplex on the bipartite graph rows -> columns, with one
/// artificial arc per node to an extra root. Arc `e < m * n` is cell
/// `(e / n, e % n)`; arc `m * n + u` is the artificial arc of node `u`.
struct Network<'c, 'a> {
    m: usize,
    n: usize,
    cost: &'c CostTable<'a>,
    art_cost: f64,
    art_tail: Vec<usize>,
    art_head: Vec<usize>,
    flow_art: Vec<f64>,
    // flows of real arcs are stored only while they are in the tree
    tree_flow: Vec<f64>,
    pot: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty: Vec<usize>,
}

impl Network<'_, '_> {
    fn n_real(&self) -> usize {
        self.m * self.n
    }

    #[inline]
    fn tail(&self, e: usize) -> usize {
        if e < self.n_real() {
            e / self.n
        } else {
            self.art_tail[e - self.n_real()]
        }
    }

    #[inline]
    fn head(&self, e: usize) -> usize {
        if e < self.n_real() {
            self.m + e % self.n
        } else {
            self.art_head[e - self.n_real()]
        }
    }

    #[inline]
    fn arc_cost(&self, e: usize) -> f64 {
        if e < self.n_real() {
            self.cost.get(e / self.n, e % self.n)
        } else if self.art_tail[e - self.n_real()] == self.m + self.n {
            self.art_cost
        } else {
            0.0
        }
    }

    #[inline]
    fn flow(&self, e: usize) -> f64 {
        if e < self.n_real() {
            self.tree_flow[e]
        } else {
            self.flow_art[e - self.n_real()]
        }
    }

    #[inline]
    fn add_flow(&mut self, e: usize, delta: f64) {
        if e < self.n_real() {
            self.tree_flow[e] += delta;
        } else {
            let k = e - self.n_real();
            self.flow_art[k] += delta;
        }
    }

    #[inline]
    fn set_flow(&mut self, e: usize, value: f64) {
        if e < self.n_real() {
            self.tree_flow[e] = value;
        } else {
            let k = e - self.n_real();
            self.flow_art[k] = value;
        }
    }

    fn new<'c2, 'a2>(supply: &[f64], demand: &[f64], cost: &'c2 CostTable<'a2>) -> Network<'c2, 'a2> {
        let (m, n) = (supply.len(), demand.len());
        let nodes = m + n;
        let root = nodes;
        let mut max_cost: f64 = 0.0;
        for i in 0..m {
            for j in 0..n {
                max_cost = max_cost.max(cost.get(i, j));
            }
        }
        let mut net = Network {
            m,
            n,
            cost,
            art_cost: (max_cost + 1.0) * nodes as f64,
            art_tail: vec![0; nodes],
            art_head: vec![0; nodes],
            flow_art: vec![0.0; nodes],
            tree_flow: vec![0.0; m * n],
            pot: vec![0.0; nodes + 1],
            parent: vec![NONE; nodes + 1],
            pred: vec![NONE; nodes + 1],
            pred_dir: vec![UP; nodes + 1],
            thread: vec![0; nodes + 1],
            rev_thread: vec![0; nodes + 1],
            succ_num: vec![1; nodes + 1],
            last_succ: vec![0; nodes + 1],
            dirty: Vec::new(),
        };
        net.thread[root] = 0;
        net.rev_thread[0] = root;
        net.succ_num[root] = nodes + 1;
        net.last_succ[root] = root - 1;
        for u in 0..nodes {
            let e = m * n + u;
            net.parent[u] = root;
            net.pred[u] = e;
            net.thread[u] = u + 1;
            net.rev_thread[u + 1] = u;
            net.last_succ[u] = u;
            if u < m {
                net.pred_dir[u] = UP;
                net.art_tail[u] = u;
                net.art_head[u] = root;
                net.flow_art[u] = supply[u];
            } else {
                net.pred_dir[u] = DOWN;
                net.pot[u] = net.art_cost;
                net.art_tail[u] = root;
                net.art_head[u] = u;
                net.flow_art[u] = demand[u - m];
            }
        }
        net
    }

    fn update_tree(&mut self, in_arc: usize, u_in: usize, v_in: usize, u_out: usize, join: usize) {
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.tail(in_arc) { UP } else { DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };
            // re-hang the stem u_in .. u_out below v_in
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty.clear();
            self.dirty.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty.push(last);
                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;
                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;
                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;
            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for k in 0..self.dirty.len() {
                let u = self.dirty[k];
                self.rev_thread[self.thread[u]] = u;
            }
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.tail(in_arc) { UP } else { DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }
        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }
        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    /// Recomputes every potential from the tree, parents first.
    fn refresh_potentials(&mut self) {
        let root = self.m + self.n;
        self.pot[root] = 0.0;
        let mut u = self.thread[root];
        while u != root {
            let e = self.pred[u];
            let p = self.parent[u];
            self.pot[u] = self.pot[p] - f64::from(self.pred_dir[u]) * self.arc_cost(e);
            u = self.thread[u];
        }
    }

    fn update_potentials(&mut self, in_arc: usize, u_in: usize, v_in: usize) {
        let sigma = self.pot[v_in] - self.pot[u_in] - f64::from(self.pred_dir[u_in]) * self.arc_cost(in_arc);
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pot[u] += sigma;
            u = self.thread[u];
        }
    }
}

/// Minimizes `sum f_ij c_ij` subject to row sums `supply` and column sums
/// `demand`. Both mass vectors must be positive with equal totals.
///
/// Entering arcs are priced by block search. Leaving arcs follow the
/// strongly feasible tree rule, so degenerate pivots cannot cycle.
pub fn solve_transport(
    supply: &[f64],
    demand: &[f64],
    cost: &CostTable<'_>,
    max_pivots: usize,
) -> Result<SimplexSolution> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 || cost.rows() != m || cost.cols() != n {
        return Err(Error::DimensionMismatch {
            left: m * n,
            right: cost.rows() * cost.cols(),
        });
    }
    let mut net = Network::new(supply, demand, cost);
    let total = m * n;
    let block = ((total as f64).sqrt() as usize).max(10).min(total);
    // potentials reach art_cost, so rounding is relative to it
    let tol = 64.0 * f64::EPSILON * net.art_cost;
    let mut next_arc = 0usize;
    let mut stats = SimplexStats::default();
    let mut refreshed = false;

    loop {
        // block search for the most negative reduced cost, row by row
        let mut best = -tol;
        let mut entering = NONE;
        let mut count = block;
        let mut scanned = 0;
        let (mut i, mut j) = (next_arc / n, next_arc % n);
        let col_pot = &net.pot[m..m + n];
        'scan: while scanned < total {
            let shift = net.pot[i];
            let stop = n.min(j + (total - scanned));
            match cost.dense_row(i) {
                Some(row) => {
                    while j < stop {
                        let r = row[j] + shift - col_pot[j];
                        if r < best {
                            best = r;
                            entering = i * n + j;
                        }
                        j += 1;
                        count -= 1;
                        if count == 0 {
                            if entering != NONE {
                                break 'scan;
                            }
                            count = block;
                        }
                        scanned += 1;
                    }
                }
                None => {
                    while j < stop {
                        let r = cost.get(i, j) + shift - col_pot[j];
                        if r < best {
                            best = r;
                            entering = i * n + j;
                        }
                        j += 1;
                        count -= 1;
                        if count == 0 {
                            if entering != NONE {
                                break 'scan;
                            }
                            count = block;
                        }
                        scanned += 1;
                    }
                }
            }
            if j == n {
                j = 0;
                i = if i + 1 == m { 0 } else { i + 1 };
            }
        }
        let e = if j == n { ((i + 1) % m) * n } else { i * n + j };
        if entering == NONE {
            if refreshed {
                break;
            }
            net.refresh_potentials();
            refreshed = true;
            continue;
        }
        refreshed = false;
        next_arc = e;
        if stats.pivots >= max_pivots {
            return Err(Error::NotConverged {
                iterations: stats.pivots,
                best: Vec::new(),
                value: f64::NAN,
            });
        }

        let in_arc = entering;
        let (first, second) = (net.tail(in_arc), net.head(in_arc));
        let mut join_u = first;
        let mut join_v = second;
        while join_u != join_v {
            if net.succ_num[join_u] < net.succ_num[join_v] {
                join_u = net.parent[join_u];
            } else {
                join_v = net.parent[join_v];
            }
        }
        let join = join_u;

        // flow runs join -> first -> second -> join
        let mut delta = f64::INFINITY;
        let mut u_out = NONE;
        let mut side = 0;
        let mut u = first;
        while u != join {
            if net.pred_dir[u] == UP {
                let d = net.flow(net.pred[u]);
                if d < delta {
                    delta = d;
                    u_out = u;
                    side = 1;
                }
            }
            u = net.parent[u];
        }
        let mut u = second;
        while u != join {
            if net.pred_dir[u] == DOWN {
                let d = net.flow(net.pred[u]);
                if d <= delta {
                    delta = d;
                    u_out = u;
                    side = 2;
                }
            }
            u = net.parent[u];
        }
        if u_out == NONE {
            return Err(Error::NotConverged {
                iterations: stats.pivots,
                best: Vec::new(),
                value: f64::INFINITY,
            });
        }
        let (u_in, v_in) = if side == 1 { (first, second) } else { (second, first) };

        if delta > 0.0 {
            let mut u = first;
            while u != join {
                let e = net.pred[u];
                net.add_flow(e, -f64::from(net.pred_dir[u]) * delta);
                u = net.parent[u];
            }
            let mut u = second;
            while u != join {
                let e = net.pred[u];
                net.add_flow(e, f64::from(net.pred_dir[u]) * delta);
                u = net.parent[u];
            }
        } else {
            stats.degenerate_pivots += 1;
        }
        let out_arc = net.pred[u_out];
        net.set_flow(out_arc, 0.0);
        net.tree_flow[in_arc] = delta;

        net.update_tree(in_arc, u_in, v_in, u_out, join);
        net.update_potentials(in_arc, u_in, v_in);
        stats.pivots += 1;
    }

    let residual: f64 = net.flow_art.iter().sum();
    if residual > 1e-9 {
        return Err(Error::DegenerateMasses(format!(
            "supply and demand totals differ (residual {residual:e})"
        )));
    }
    let mut flows = Vec::new();
    let mut total_cost = 0.0;
    for u in 0..m + n {
        let e = net.pred[u];
        if e < total && net.tree_flow[e] > 0.0 {
            let (i, j) = (e / n, e % n);
            total_cost += net.tree_flow[e] * cost.get(i, j);
            flows.push((i, j, net.tree_flow[e]));
        }
    }
    flows.sort_by_key(|&(i, j, _)| (i, j));
    Ok(SimplexSolution {
        flows,
        cost: total_cost,
        stats,
    })
}
