//! Seeded synthetic inputs.

use atlas_core::geometry::{CondensedDistanceMatrix, MatrixKind};
use atlas_core::graph::UndirectedGraph;
use atlas_core::PointPattern;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// `k` points uniform in `[0, 1]^dim` with masses uniform in `(0.05, 1]`.
pub fn random_pattern(rng: &mut ChaCha8Rng, owner: &str, k: usize, dim: usize) -> PointPattern {
    let points: Vec<f64> = (0..k * dim).map(|_| rng.gen::<f64>()).collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..=1.0)).collect();
    PointPattern::from_weights(owner, dim, &points, &weights).unwrap()
}

/// Squared Euclidean costs between the points of two patterns.
pub fn squared_costs(a: &PointPattern, b: &PointPattern) -> Vec<Vec<f64>> {
    (0..a.len())
        .map(|i| {
            (0..b.len())
                .map(|j| a.point(i).iter().zip(b.point(j)).map(|(x, y)| (x - y) * (x - y)).sum())
                .collect()
        })
        .collect()
}

fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:03}")).collect()
}

/// Euclidean distances among `2 * half` points from two unit-variance
/// Gaussian blobs in `R^dim` whose centres are `gap` apart, uniformly
/// rescaled so the largest distance is 3.
pub fn two_blobs(rng: &mut ChaCha8Rng, half: usize, dim: usize, gap: f64) -> (CondensedDistanceMatrix<f64>, Vec<usize>) {
    let normal = rand_distr_normal();
    let mut pts = Vec::with_capacity(2 * half);
    let mut labels = Vec::with_capacity(2 * half);
    for g in 0..2 {
        for _ in 0..half {
            let mut p: Vec<f64> = (0..dim).map(|_| normal(rng)).collect();
            p[0] += g as f64 * gap;
            pts.push(p);
            labels.push(g);
        }
    }
    let n = pts.len();
    let dist = |i: usize, j: usize| pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let largest = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| dist(i, j)).fold(0.0, f64::max);
    // term-mode distances are angles, so the largest is scaled to 3 < pi
    let m = CondensedDistanceMatrix::try_from_fn(n, MatrixKind::Term, ids("t", n), |i, j| Ok(3.0 * dist(i, j) / largest))
        .unwrap();
    (m, labels)
}

/// Box-Muller standard normal draws.
fn rand_distr_normal() -> impl Fn(&mut ChaCha8Rng) -> f64 {
    |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }
}

/// Symmetric matrix of i.i.d. uniform distances.
pub fn random_author_matrix(rng: &mut ChaCha8Rng, n: usize) -> CondensedDistanceMatrix<f64> {
    let values: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.gen_range(0.01..1.0)).collect();
    CondensedDistanceMatrix::new(n, values, MatrixKind::Author, ids("a", n)).unwrap()
}

/// Stochastic block model with equal blocks; returns the graph and block labels.
pub fn planted_partition(
    rng: &mut ChaCha8Rng,
    blocks: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
) -> (UndirectedGraph, Vec<String>) {
    let n = blocks * size;
    let labels: Vec<String> = (0..n).map(|v| format!("g{}", v / size)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / size == v / size { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    // a ring through all vertices keeps the graph connected
    for u in 0..n {
        edges.push((u, (u + 1) % n));
    }
    (UndirectedGraph::from_edges(n, edges), labels)
}

/// Authors drawing word tokens from a Zipf-Mandelbrot law over `n_terms`
/// ranks placed uniformly in `[-10, 10]^3`. Token counts per author are
/// uniform in `1_000..9_000`, about 45 abstracts of 100 retained words.
pub fn scale_workload(rng: &mut ChaCha8Rng, n_authors: usize, n_terms: usize) -> Vec<PointPattern> {
    let coords: Vec<f64> = (0..n_terms * 3).map(|_| rng.gen_range(-10.0..10.0)).collect();
    let zipf = WeightedIndex::new((1..=n_terms).map(|r| (r as f64 + 72.7).powf(-1.2))).unwrap();
    (0..n_authors)
        .map(|a| {
            let tokens = rng.gen_range(1000..9000);
            let mut counts = vec![0u32; n_terms];
            for _ in 0..tokens {
                counts[zipf.sample(rng)] += 1;
            }
            let (mut pts, mut w) = (Vec::new(), Vec::new());
            for (t, &c) in counts.iter().enumerate() {
                if c > 0 {
                    pts.extend_from_slice(&coords[3 * t..3 * t + 3]);
                    w.push(c as f64);
                }
            }
            PointPattern::from_weights(format!("a{a:02}"), 3, &pts, &w).unwrap()
        })
        .collect()
}
