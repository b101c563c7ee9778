use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::UndirectedGraph;
use super::replicate_seed;

const GAIN_EPS: f64 = 1e-12;

/// Non-overlapping community assignment with its modularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Community of each vertex, numbered by first appearance.
    pub assignment: Vec<usize>,
    pub modularity: f64,
}

impl Partition {
    pub fn n_communities(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    pub fn members(&self, community: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&v| self.assignment[v] == community).collect()
    }
}

/// Renumbers labels `0, 1, ...` in order of first appearance.
pub fn relabel<L: std::hash::Hash + Eq + Clone>(labels: &[L]) -> Vec<usize> {
    let mut seen: HashMap<L, usize> = HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(l.clone()).or_insert(next)
        })
        .collect()
}

/// Newman modularity `sum_c (e_c / m - (d_c / 2m)^2)` of an unweighted graph.
pub fn modularity(g: &UndirectedGraph, assignment: &[usize]) -> f64 {
    let m = g.n_edges() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = assignment.iter().copied().max().map_or(0, |x| x + 1);
    let mut internal = vec![0.0; k];
    let mut degree = vec![0.0; k];
    for v in 0..g.n_vertices() {
        degree[assignment[v]] += g.degree(v) as f64;
    }
    for (u, v) in g.edges() {
        if assignment[u] == assignment[v] {
            internal[assignment[u]] += 1.0;
        }
    }
    (0..k)
        .map(|c| internal[c] / m - (degree[c] / (2.0 * m)).powi(2))
        .sum()
}

/// Weighted graph of one aggregation level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn from_graph(g: &UndirectedGraph) -> Self {
        let n = g.n_vertices();
        let adj: Vec<Vec<(usize, f64)>> = (0..n).map(|v| g.neighbors(v).iter().map(|&u| (u, 1.0)).collect()).collect();
        let strength = (0..n).map(|v| g.degree(v) as f64).collect();
        Level {
            adj,
            self_loops: vec![0.0; n],
            strength,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns the community of each node and whether any
    /// node changed community.
    fn local_moves(
        &self,
        two_m: f64,
        rng: &mut ChaCha8Rng,
        randomized: bool,
        start: Option<&[usize]>,
    ) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = start.map_or_else(|| (0..n).collect(), <[usize]>::to_vec);
        let mut tot = vec![0.0; n];
        for v in 0..n {
            tot[comm[v]] += self.strength[v];
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut weights_to: Vec<f64> = vec![0.0; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut any_move = false;
        loop {
            let mut moved = false;
            for &v in &order {
                let kv = self.strength[v];
                let own = comm[v];
                for &(u, w) in &self.adj[v] {
                    let c = comm[u];
                    if weights_to[c] == 0.0 {
                        touched.push(c);
                    }
                    weights_to[c] += w;
                }
                tot[own] -= kv;
                let gain = |c: usize, w: f64| w - tot[c] * kv / two_m;
                let mut best = own;
                let mut best_gain = gain(own, weights_to[own]);
                if randomized {
                    let stay = best_gain;
                    let mut improving: Vec<usize> =
                        touched.iter().copied().filter(|&c| gain(c, weights_to[c]) > stay + GAIN_EPS).collect();
                    improving.sort_unstable();
                    if let Some(&c) = improving.choose(rng) {
                        best = c;
                    }
                } else {
                    for &c in &touched {
                        let g = gain(c, weights_to[c]);
                        if g > best_gain + GAIN_EPS || (g > best_gain - GAIN_EPS && c < best && best != own) {
                            best = c;
                            best_gain = g;
                        }
                    }
                }
                tot[best] += kv;
                if best != own {
                    comm[v] = best;
                    moved = true;
                    any_move = true;
                }
                for &c in &touched {
                    weights_to[c] = 0.0;
                }
                touched.clear();
            }
            if !moved {
                break;
            }
        }
        (relabel(&comm), any_move)
    }

    fn aggregate(&self, comm: &[usize]) -> Level {
        let k = comm.iter().copied().max().map_or(0, |m| m + 1);
        let mut self_loops = vec![0.0; k];
        let mut strength = vec![0.0; k];
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        for v in 0..self.len() {
            let cv = comm[v];
            strength[cv] += self.strength[v];
            self_loops[cv] += self.self_loops[v];
            for &(u, w) in &self.adj[v] {
                let cu = comm[u];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loops[cv] += w / 2.0;
                } else {
                    *links[cv].entry(cu).or_insert(0.0) += w;
                }
            }
        }
        Level {
            adj: links.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
            strength,
        }
    }
}

/// Two-phase Louvain modularity maximization with a seeded sweep order.
/// Each vertex moves to the community of largest gain. Once the levels stop
/// changing, single-vertex moves on the original graph refine the partition
/// and coarsening restarts from it. An edgeless graph yields singletons with
/// `Q = 0`.
pub fn louvain(g: &UndirectedGraph, seed: u64) -> Partition {
    louvain_run(g, seed, false)
}

/// Louvain in which coarse-level moves go to a uniformly chosen improving
/// community instead of the best one.
fn louvain_run(g: &UndirectedGraph, seed: u64, randomized: bool) -> Partition {
    let n = g.n_vertices();
    let m = g.n_edges() as f64;
    if m == 0.0 {
        return Partition {
            assignment: (0..n).collect(),
            modularity: 0.0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = Level::from_graph(g);
    let mut membership: Vec<usize> = (0..n).collect();
    loop {
        let mut level = base.aggregate(&membership);
        loop {
            let (comm, moved) = level.local_moves(2.0 * m, &mut rng, randomized, None);
            if !moved {
                break;
            }
            for c in membership.iter_mut() {
                *c = comm[*c];
            }
            level = level.aggregate(&comm);
        }
        // single-vertex moves on the original graph, then coarsen again
        let (refined, moved) = base.local_moves(2.0 * m, &mut rng, false, Some(&membership));
        if !moved {
            break;
        }
        membership = refined;
    }
    let assignment = relabel(&membership);
    let modularity = modularity(g, &assignment);
    Partition { assignment, modularity }
}

/// Best of several seeded Louvain runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LouvainSummary {
    pub best: Partition,
    pub best_replicate: usize,
    /// Number of replicates that produced each community count.
    pub cluster_count_frequency: BTreeMap<usize, usize>,
    pub modularities: Vec<f64>,
}

/// Runs `replicates` Louvain passes in parallel with seeds derived from
/// `seed`; the highest-modularity partition wins, earliest replicate on ties.
/// Replicate 0 is plain [`louvain`]; later replicates pick among improving
/// moves at random so that they explore different local optima.
pub fn louvain_replicates(g: &UndirectedGraph, seed: u64, replicates: usize) -> LouvainSummary {
    let runs: Vec<Partition> = (0..replicates.max(1))
        .into_par_iter()
        .map(|r| louvain_run(g, replicate_seed(seed, r as u64), r > 0))
        .collect();
    let mut best_replicate = 0;
    for (r, p) in runs.iter().enumerate() {
        if p.modularity > runs[best_replicate].modularity {
            best_replicate = r;
        }
    }
    let mut cluster_count_frequency = BTreeMap::new();
    for p in &runs {
        *cluster_count_frequency.entry(p.n_communities()).or_insert(0) += 1;
    }
    LouvainSummary {
        best: runs[best_replicate].clone(),
        best_replicate,
        cluster_count_frequency,
        modularities: runs.iter().map(|p| p.modularity).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> UndirectedGraph {
        UndirectedGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    }

    #[test]
    fn disjoint_edges_score_one_half() {
        let g = UndirectedGraph::from_edges(4, [(0, 1), (2, 3)]);
        assert!((modularity(&g, &[0, 0, 1, 1]) - 0.5).abs() < 1e-15);
        assert_eq!(modularity(&g, &[0, 0, 0, 0]), 0.0);
        let p = louvain(&g, 1);
        assert_eq!(p.assignment, vec![0, 0, 1, 1]);
    }

    #[test]
    fn recovers_two_cliques() {
        for seed in 0..10 {
            let p = louvain(&two_triangles(), seed);
            assert_eq!(p.assignment, vec![0, 0, 0, 1, 1, 1]);
            assert!((p.modularity - modularity(&two_triangles(), &p.assignment)).abs() < 1e-12);
        }
    }

    #[test]
    fn clique_is_one_community() {
        let k5 = UndirectedGraph::from_edges(5, (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))));
        assert_eq!(louvain(&k5, 3).n_communities(), 1);
    }

    #[test]
    fn edgeless_graph_is_singletons() {
        let p = louvain(&UndirectedGraph::empty(3), 0);
        assert_eq!(p.assignment, vec![0, 1, 2]);
        assert_eq!(p.modularity, 0.0);
    }

    #[test]
    fn replicate_summary_counts_runs() {
        let s = louvain_replicates(&two_triangles(), 9, 20);
        assert_eq!(s.cluster_count_frequency.values().sum::<usize>(), 20);
        assert_eq!(s.modularities.len(), 20);
        assert_eq!(s.best.n_communities(), 2);
    }

    #[test]
    fn relabel_by_first_appearance() {
        assert_eq!(relabel(&[7, 3, 7, 1]), vec![0, 1, 0, 2]);
    }
}
