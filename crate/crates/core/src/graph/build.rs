use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CondensedDistanceMatrix;
use crate::scalar::Scalar;

/// Simple undirected graph on vertices `0..n`, adjacency lists sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UndirectedGraph {
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        UndirectedGraph { adj: vec![Vec::new(); n] }
    }

    /// Builds from an edge list; duplicates collapse and self-loops are dropped.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} vertices");
            if u != v {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        UndirectedGraph { adj }
    }

    /// Builds from a symmetric 0/1 matrix; the diagonal is ignored.
    pub fn from_matrix(a: &[Vec<bool>]) -> Self {
        let n = a.len();
        Self::from_edges(
            n,
            (0..n).flat_map(|i| (i + 1..n).filter(move |&j| a[i][j] || a[j][i]).map(move |j| (i, j))),
        )
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn to_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.n_vertices();
        let mut m = vec![vec![false; n]; n];
        for (u, v) in self.edges() {
            m[u][v] = true;
            m[v][u] = true;
        }
        m
    }
}

/// Largest nearest-neighbour distance: the smallest threshold at which no
/// vertex is left without a neighbour.
pub fn epsilon_threshold<T: Scalar>(w: &CondensedDistanceMatrix<T>) -> Result<f64> {
    let n = w.len();
    if n < 2 {
        return Err(Error::TooFewObservations { needed: 2, got: n });
    }
    Ok((0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| w.get(i, j).as_f64())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Directed 0/1 matrix with `a[i][j]` set when `j` is one of the `k` nearest
/// vertices to `i` and `w(i, j) <= epsilon`. Equal distances are ordered by id.
pub fn knn_adjacency<T: Scalar>(w: &CondensedDistanceMatrix<T>, epsilon: f64, k: usize) -> Result<Vec<Vec<bool>>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = w.len();
    let ids = w.ids();
    let mut a = vec![vec![false; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&x, &y| {
            w.get(i, x)
                .as_f64()
                .total_cmp(&w.get(i, y).as_f64())
                .then_with(|| ids[x].cmp(&ids[y]))
        });
        for &j in others.iter().take(k) {
            if w.get(i, j).as_f64() <= epsilon {
                row[j] = true;
            }
        }
    }
    Ok(a)
}

/// `max(a, a^T)`.
pub fn symmetrize(a: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| i != j && (a[i][j] || a[j][i])).collect())
        .collect()
}

/// The thresholded k-nearest-neighbour author graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuthorGraph {
    pub ids: Vec<String>,
    pub directed: Vec<Vec<bool>>,
    pub graph: UndirectedGraph,
    pub epsilon: f64,
    pub k: usize,
}

impl AuthorGraph {
    /// Threshold at the nearest-neighbour bound, keep `k` neighbours per
    /// vertex, and symmetrize. Every vertex ends with degree at least 1.
    pub fn from_distances<T: Scalar>(w: &CondensedDistanceMatrix<T>, k: usize) -> Result<Self> {
        let epsilon = epsilon_threshold(w)?;
        let directed = knn_adjacency(w, epsilon, k)?;
        let graph = UndirectedGraph::from_matrix(&symmetrize(&directed));
        Ok(AuthorGraph {
            ids: w.ids().to_vec(),
            directed,
            graph,
            epsilon,
            k,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

pub fn degree_stats(g: &UndirectedGraph) -> DegreeStats {
    let n = g.n_vertices();
    let degrees = (0..n).map(|v| g.degree(v));
    DegreeStats {
        min: degrees.clone().min().unwrap_or(0),
        max: degrees.clone().max().unwrap_or(0),
        mean: if n == 0 { 0.0 } else { degrees.sum::<usize>() as f64 / n as f64 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MatrixKind;

    fn matrix(n: usize, vals: Vec<f64>) -> CondensedDistanceMatrix<f64> {
        let ids = (0..n).map(|i| format!("a{i}")).collect();
        CondensedDistanceMatrix::new(n, vals, MatrixKind::Author, ids).unwrap()
    }

    #[test]
    fn epsilon_is_max_of_mins() {
        // nearest distances 0.3, 0.3, 0.5
        let w = matrix(3, vec![0.3, 0.5, 0.6]);
        assert_eq!(epsilon_threshold(&w).unwrap(), 0.5);
        assert_eq!(epsilon_threshold(&matrix(2, vec![0.7])).unwrap(), 0.7);
        assert!(epsilon_threshold(&matrix(1, vec![])).is_err());
    }

    #[test]
    fn nearest_neighbour_is_not_commutative() {
        // a0-a1 0.1, a1-a2 0.05: a0 -> a1 but a1 -> a2 only
        let w = matrix(3, vec![0.1, 0.9, 0.05]);
        let a = knn_adjacency(&w, 1.0, 1).unwrap();
        assert!(a[0][1] && !a[1][0] && a[1][2] && a[2][1]);
        let g = UndirectedGraph::from_matrix(&symmetrize(&a));
        assert_eq!(g.n_edges(), 2);
    }

    #[test]
    fn large_k_reduces_to_threshold() {
        let w = matrix(3, vec![0.1, 0.9, 0.05]);
        let a = knn_adjacency(&w, 0.5, 5).unwrap();
        assert_eq!(a, vec![vec![false, true, false], vec![true, false, true], vec![false, true, false]]);
    }

    #[test]
    fn ties_follow_id_order() {
        let w = matrix(3, vec![0.2, 0.2, 0.2]);
        let a = knn_adjacency(&w, 1.0, 1).unwrap();
        assert!(a[0][1] && a[1][0] && a[2][0]);
    }

    #[test]
    fn degree_summaries() {
        let k4 = UndirectedGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(degree_stats(&k4), DegreeStats { min: 3, max: 3, mean: 3.0 });
        let path = UndirectedGraph::from_edges(3, [(0, 1), (1, 2)]);
        let s = degree_stats(&path);
        assert_eq!((s.min, s.max), (1, 2));
        assert!((s.mean - 4.0 / 3.0).abs() < 1e-15);
    }
}
