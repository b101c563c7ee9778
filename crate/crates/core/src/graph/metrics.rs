use std::collections::{BTreeMap, HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::build::UndirectedGraph;
use super::replicate_seed;
use crate::error::{Error, Result};

/// Hop counts from `source`; `None` for unreachable vertices.
pub fn bfs_distances(g: &UndirectedGraph, source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n_vertices()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// All-pairs hop counts.
pub fn all_pairs_distances(g: &UndirectedGraph) -> Vec<Vec<Option<usize>>> {
    (0..g.n_vertices()).into_par_iter().map(|s| bfs_distances(g, s)).collect()
}

/// Connected-component label of each vertex, numbered by lowest vertex.
pub fn components(g: &UndirectedGraph) -> Vec<usize> {
    let n = g.n_vertices();
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        for (v, d) in bfs_distances(g, s).into_iter().enumerate() {
            if d.is_some() {
                label[v] = next;
            }
        }
        next += 1;
    }
    label
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Closeness {
    /// `1 / sum of hop counts` within the vertex's component; `None` when isolated.
    pub value: Option<f64>,
    /// Whether the vertex lies in the largest component.
    pub in_giant_component: bool,
}

pub fn closeness_centrality(g: &UndirectedGraph) -> Vec<Closeness> {
    let n = g.n_vertices();
    let comp = components(g);
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &comp {
        *sizes.entry(c).or_insert(0) += 1;
    }
    // largest component, lowest label on ties
    let giant = sizes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&c, _)| c);
    (0..n)
        .into_par_iter()
        .map(|v| {
            let total: usize = bfs_distances(g, v).into_iter().flatten().sum();
            Closeness {
                value: (total > 0).then(|| 1.0 / total as f64),
                in_giant_component: Some(comp[v]) == giant,
            }
        })
        .collect()
}

/// How pairs with no connecting path enter group means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unreachable {
    #[default]
    Exclude,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistance {
    pub size: usize,
    /// Mean hop count over reachable member pairs; `None` for singleton
    /// groups or when no pair is connected.
    pub mean: Option<f64>,
    pub pairs: usize,
    pub unreachable_pairs: usize,
}

fn group_members(groups: &[String]) -> BTreeMap<&str, Vec<usize>> {
    let mut out: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (v, g) in groups.iter().enumerate() {
        out.entry(g.as_str()).or_default().push(v);
    }
    out
}

fn group_distance(dist: &[Vec<Option<usize>>], members: &[usize]) -> GroupDistance {
    let mut sum = 0usize;
    let mut pairs = 0usize;
    let mut unreachable = 0usize;
    for (a, &u) in members.iter().enumerate() {
        for &v in &members[a + 1..] {
            match dist[u][v] {
                Some(d) => {
                    sum += d;
                    pairs += 1;
                }
                None => unreachable += 1,
            }
        }
    }
    GroupDistance {
        size: members.len(),
        mean: (pairs > 0).then(|| sum as f64 / pairs as f64),
        pairs,
        unreachable_pairs: unreachable,
    }
}

/// Mean shortest-path length between members of each group, measured in the
/// whole graph. `groups[v]` labels vertex `v`.
pub fn within_cluster_distance(
    g: &UndirectedGraph,
    groups: &[String],
    policy: Unreachable,
) -> Result<BTreeMap<String, GroupDistance>> {
    if groups.len() != g.n_vertices() {
        return Err(Error::LengthMismatch {
            left: g.n_vertices(),
            right: groups.len(),
        });
    }
    let dist = all_pairs_distances(g);
    let mut out = BTreeMap::new();
    for (name, members) in group_members(groups) {
        let gd = group_distance(&dist, &members);
        if policy == Unreachable::Fail && gd.unreachable_pairs > 0 {
            return Err(Error::InvalidParameter(format!(
                "group `{name}` has {} disconnected member pairs",
                gd.unreachable_pairs
            )));
        }
        out.insert(name.to_string(), gd);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub observed: Option<f64>,
    pub null_mean: Option<f64>,
    pub q05: Option<f64>,
    pub q50: Option<f64>,
    pub q95: Option<f64>,
    /// Fraction of replicates whose group mean is at most the observed mean.
    pub p_value: Option<f64>,
    /// Replicates in which the group had at least one connected pair.
    pub n_valid: usize,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

/// Null distribution of each group's mean path length under uniform
/// relabelling of vertices (group sizes preserved).
pub fn permutation_null(
    g: &UndirectedGraph,
    groups: &[String],
    n_reps: usize,
    seed: u64,
) -> Result<BTreeMap<String, NullSummary>> {
    if n_reps == 0 {
        return Err(Error::InvalidParameter("n_reps must be at least 1".into()));
    }
    if groups.len() != g.n_vertices() {
        return Err(Error::LengthMismatch {
            left: g.n_vertices(),
            right: groups.len(),
        });
    }
    let dist = all_pairs_distances(g);
    let observed: BTreeMap<&str, Option<f64>> = group_members(groups)
        .into_iter()
        .map(|(k, m)| (k, group_distance(&dist, &m).mean))
        .collect();
    let replicates: Vec<BTreeMap<String, Option<f64>>> = (0..n_reps)
        .into_par_iter()
        .map(|r| {
            let mut shuffled = groups.to_vec();
            shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(replicate_seed(seed, r as u64)));
            group_members(&shuffled)
                .into_iter()
                .map(|(k, m)| (k.to_string(), group_distance(&dist, &m).mean))
                .collect()
        })
        .collect();
    let mut out = BTreeMap::new();
    for (name, obs) in observed {
        let mut null: Vec<f64> = replicates.iter().filter_map(|r| r.get(name).copied().flatten()).collect();
        null.sort_by(f64::total_cmp);
        let n_valid = null.len();
        let null_mean = (n_valid > 0).then(|| null.iter().sum::<f64>() / n_valid as f64);
        let p_value = match (obs, n_valid) {
            (Some(o), k) if k > 0 => Some(null.iter().filter(|&&v| v <= o).count() as f64 / k as f64),
            _ => None,
        };
        out.insert(
            name.to_string(),
            NullSummary {
                observed: obs,
                null_mean,
                q05: quantile(&null, 0.05),
                q50: quantile(&null, 0.5),
                q95: quantile(&null, 0.95),
                p_value,
                n_valid,
            },
        );
    }
    Ok(out)
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1)) as f64 / 2.0
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index<A, B>(a: &[A], b: &[B]) -> Result<f64>
where
    A: std::hash::Hash + Eq,
    B: std::hash::Hash + Eq,
{
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as u64;
    let mut table: HashMap<(&A, &B), u64> = HashMap::new();
    let mut rows: HashMap<&A, u64> = HashMap::new();
    let mut cols: HashMap<&B, u64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| choose2(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| choose2(c)).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / total;
    let max = (sum_rows + sum_cols) / 2.0;
    if max == expected {
        // both labelings trivial (all singletons or one block)
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> UndirectedGraph {
        UndirectedGraph::from_edges(3, [(0, 1), (1, 2)])
    }

    #[test]
    fn closeness_on_path_and_clique() {
        let c = closeness_centrality(&path3());
        assert_eq!(c[1].value, Some(0.5));
        assert_eq!(c[0].value, Some(1.0 / 3.0));
        let k4 = UndirectedGraph::from_edges(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert!(closeness_centrality(&k4).iter().all(|c| c.value == Some(1.0 / 3.0)));
    }

    #[test]
    fn isolated_vertex_flagged() {
        let g = UndirectedGraph::from_edges(4, [(0, 1), (1, 2)]);
        let c = closeness_centrality(&g);
        assert_eq!(c[3].value, None);
        assert!(!c[3].in_giant_component && c[0].in_giant_component);
    }

    #[test]
    fn group_path_lengths() {
        let labels: Vec<String> = ["x", "x", "x"].iter().map(|s| s.to_string()).collect();
        let d = within_cluster_distance(&path3(), &labels, Unreachable::Exclude).unwrap();
        assert!((d["x"].mean.unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let labels: Vec<String> = ["x", "x", "y"].iter().map(|s| s.to_string()).collect();
        let d = within_cluster_distance(&path3(), &labels, Unreachable::Exclude).unwrap();
        assert_eq!(d["x"].mean, Some(1.0));
        assert_eq!(d["y"].mean, None);
    }

    #[test]
    fn unreachable_policy() {
        let g = UndirectedGraph::from_edges(3, [(0, 1)]);
        let labels: Vec<String> = vec!["x".into(); 3];
        let d = within_cluster_distance(&g, &labels, Unreachable::Exclude).unwrap();
        assert_eq!(d["x"].unreachable_pairs, 2);
        assert_eq!(d["x"].mean, Some(1.0));
        assert!(within_cluster_distance(&g, &labels, Unreachable::Fail).is_err());
    }

    #[test]
    fn single_replicate_null_is_legal() {
        let labels: Vec<String> = ["x", "x", "y"].iter().map(|s| s.to_string()).collect();
        let s = permutation_null(&path3(), &labels, 1, 5).unwrap();
        assert!(s["x"].n_valid == 1 && s["x"].q05 == s["x"].q95);
        assert!(permutation_null(&path3(), &labels, 0, 5).is_err());
    }

    #[test]
    fn ari_cases() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 9, 9]).unwrap(), 1.0);
        let singletons: Vec<usize> = (0..6).collect();
        assert_eq!(adjusted_rand_index(&singletons, &[0; 6]).unwrap(), 0.0);
        // contingency [[2,1],[1,2]]: index 2, rows 6, cols 6, total 15
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 0, 1, 1];
        let expected = (2.0 - 6.0 * 6.0 / 15.0) / (6.0 - 36.0 / 15.0);
        assert!((adjusted_rand_index(&a, &b).unwrap() - expected).abs() < 1e-15);
        assert!(adjusted_rand_index(&a, &b[..5]).is_err());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), Some(3.0));
        assert!((quantile(&v, 0.05).unwrap() - 1.2).abs() < 1e-12);
        assert_eq!(quantile(&[], 0.5), None);
    }
}
