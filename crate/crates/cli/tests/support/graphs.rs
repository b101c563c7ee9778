//! Small-graph enumeration and brute-force modularity.

use std::collections::HashSet;

/// Graph on at most 8 vertices as neighbour bitmasks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallGraph {
    pub n: usize,
    pub adj: [u8; 8],
}

impl SmallGraph {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.adj[u] >> v & 1 == 1 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn code(&self, order: &[usize]) -> u64 {
        let mut code = 0u64;
        for a in 0..self.n {
            for b in a + 1..self.n {
                code <<= 1;
                if self.adj[order[a]] >> order[b] & 1 == 1 {
                    code |= 1;
                }
            }
        }
        code
    }

    /// Canonical code: the largest edge code over vertex orders that respect
    /// the stable colour-refinement classes.
    pub fn canonical(&self) -> u64 {
        let n = self.n;
        let mut colour: Vec<usize> = (0..n).map(|v| self.adj[v].count_ones() as usize).collect();
        loop {
            let sigs: Vec<(usize, Vec<usize>)> = (0..n)
                .map(|v| {
                    let mut nb: Vec<usize> = (0..n).filter(|&u| self.adj[v] >> u & 1 == 1).map(|u| colour[u]).collect();
                    nb.sort_unstable();
                    (colour[v], nb)
                })
                .collect();
            let mut distinct = sigs.clone();
            distinct.sort();
            distinct.dedup();
            let next: Vec<usize> = sigs.iter().map(|s| distinct.binary_search(s).unwrap()).collect();
            let stable = distinct.len() == {
                let mut c = colour.clone();
                c.sort_unstable();
                c.dedup();
                c.len()
            };
            colour = next;
            if stable {
                break;
            }
        }
        let mut cells: Vec<Vec<usize>> = Vec::new();
        let mut classes: Vec<usize> = colour.clone();
        classes.sort_unstable();
        classes.dedup();
        for c in classes {
            cells.push((0..n).filter(|&v| colour[v] == c).collect());
        }
        let mut best = 0u64;
        let mut order = Vec::with_capacity(n);
        permute_cells(&mut cells, 0, &mut order, &mut |o| best = best.max(self.code(o)));
        best | (n as u64) << 56
    }
}

fn permute_cells(cells: &mut [Vec<usize>], k: usize, order: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if k == cells.len() {
        visit(order);
        return;
    }
    let len = cells[k].len();
    heap_permutations(cells, k, len, order, visit);
}

fn heap_permutations(
    cells: &mut [Vec<usize>],
    k: usize,
    size: usize,
    order: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if size <= 1 {
        let base = order.len();
        order.extend_from_slice(&cells[k]);
        permute_cells(cells, k + 1, order, visit);
        order.truncate(base);
        return;
    }
    heap_permutations(cells, k, size - 1, order, visit);
    for i in 0..size - 1 {
        let swap = if size % 2 == 0 { i } else { 0 };
        cells[k].swap(swap, size - 1);
        heap_permutations(cells, k, size - 1, order, visit);
    }
}

/// Every connected graph on `1..=max_n` vertices, one per isomorphism class.
/// Each connected graph has a vertex whose removal leaves it connected, so
/// extending the connected graphs of the previous order is exhaustive.
pub fn connected_graphs(max_n: usize) -> Vec<Vec<SmallGraph>> {
    let mut levels = vec![vec![SmallGraph { n: 1, adj: [0; 8] }]];
    for n in 2..=max_n {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in levels.last().unwrap() {
            for mask in 1u16..(1 << (n - 1)) {
                let mut h = SmallGraph { n, adj: g.adj };
                for u in 0..n - 1 {
                    if mask >> u & 1 == 1 {
                        h.adj[u] |= 1 << (n - 1);
                        h.adj[n - 1] |= 1 << u;
                    }
                }
                if seen.insert(h.canonical()) {
                    next.push(h);
                }
            }
        }
        levels.push(next);
    }
    levels
}

/// Modularity from the pairwise definition
/// `Q = (1 / 2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j)`.
pub fn modularity_pairwise(n: usize, edges: &[(usize, usize)], assignment: &[usize]) -> f64 {
    let m = edges.len() as f64;
    let mut a = vec![vec![0.0; n]; n];
    let mut k = vec![0.0; n];
    for &(u, v) in edges {
        a[u][v] += 1.0;
        a[v][u] += 1.0;
        k[u] += 1.0;
        k[v] += 1.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if assignment[i] == assignment[j] {
                q += a[i][j] - k[i] * k[j] / (2.0 * m);
            }
        }
    }
    q / (2.0 * m)
}

/// Maximum modularity over all set partitions, enumerated as restricted
/// growth strings.
pub fn exhaustive_max_modularity(n: usize, edges: &[(usize, usize)]) -> f64 {
    let m = edges.len() as f64;
    let mut deg = vec![0.0; n];
    for &(u, v) in edges {
        deg[u] += 1.0;
        deg[v] += 1.0;
    }
    let mut labels = vec![0usize; n];
    let mut best = f64::NEG_INFINITY;
    let mut internal = vec![0.0; n];
    let mut degsum = vec![0.0; n];
    loop {
        internal.iter_mut().for_each(|x| *x = 0.0);
        degsum.iter_mut().for_each(|x| *x = 0.0);
        for &(u, v) in edges {
            if labels[u] == labels[v] {
                internal[labels[u]] += 1.0;
            }
        }
        for v in 0..n {
            degsum[labels[v]] += deg[v];
        }
        let q: f64 = (0..n).map(|c| internal[c] / m - (degsum[c] / (2.0 * m)).powi(2)).sum();
        best = best.max(q);
        // next restricted growth string
        let mut i = n - 1;
        loop {
            if i == 0 {
                return best;
            }
            let prefix_max = labels[..i].iter().copied().max().unwrap();
            if labels[i] <= prefix_max {
                labels[i] += 1;
                for l in labels.iter_mut().skip(i + 1) {
                    *l = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}
