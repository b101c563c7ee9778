//! UMAP over a precomputed distance matrix.
//!
//! Steps: exact k-nearest-neighbour scan of the condensed matrix, per-point
//! `rho`/`sigma` calibration so each neighbourhood's membership mass equals
//! `log2(n_neighbors)`, fuzzy-union symmetrization, then negative-sampling SGD
//! on the low-dimensional layout. Layout arithmetic is carried out in `f64`.

use std::cell::Cell;
use std::collections::BTreeMap;
use std::io::Write;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::condensed::CondensedDistanceMatrix;
use crate::error::{Error, Result};
use crate::optim::{nelder_mead_minimize, NelderMeadOptions};
use crate::scalar::Scalar;
use crate::text::Vocabulary;

pub const DEFAULT_SEED: u64 = 0x5eed_a71a5;

const SMOOTH_K_TOLERANCE: f64 = 1e-5;
const MIN_K_DIST_SCALE: f64 = 1e-3;
const INIT_RANGE: f64 = 10.0;
const GRAD_CLIP: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub n_epochs: usize,
    pub dim: usize,
    pub seed: u64,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
    /// 1 runs the bit-reproducible sequential layout; more threads share the
    /// coordinates lock-free and are not reproducible.
    pub layout_threads: usize,
}

impl Default for UmapParams {
    fn default() -> Self {
        UmapParams {
            n_neighbors: 15,
            min_dist: 0.1,
            spread: 1.0,
            n_epochs: 500,
            dim: 3,
            seed: DEFAULT_SEED,
            negative_sample_rate: 5,
            learning_rate: 1.0,
            layout_threads: 1,
        }
    }
}

impl UmapParams {
    pub fn validate(&self, n_points: usize) -> Result<()> {
        if self.n_neighbors < 2 {
            return Err(Error::InvalidParameter("n_neighbors must be at least 2".into()));
        }
        if self.n_neighbors >= n_points {
            return Err(Error::InvalidParameter(format!(
                "n_neighbors ({}) must be smaller than the number of points ({n_points})",
                self.n_neighbors
            )));
        }
        if self.dim < 2 {
            return Err(Error::InvalidParameter("embedding dimension must be at least 2".into()));
        }
        if !(self.min_dist >= 0.0 && self.spread > 0.0 && self.min_dist < self.spread * 3.0) {
            return Err(Error::InvalidParameter("need 0 <= min_dist < 3 * spread".into()));
        }
        if self.n_epochs == 0 || self.layout_threads == 0 {
            return Err(Error::InvalidParameter("n_epochs and layout_threads must be positive".into()));
        }
        Ok(())
    }
}

/// Coordinates in `R^dim`, one point per id.
#[derive(Debug, Clone, PartialEq)]
pub struct TermEmbedding<T> {
    pub dim: usize,
    pub ids: Vec<String>,
    pub coords: Vec<T>,
    pub seed: u64,
}

impl<T: Scalar> TermEmbedding<T> {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Writes `term,rank,x1..xd`.
    pub fn write_csv<W: Write>(&self, w: W, vocab: &Vocabulary) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["term".to_string(), "rank".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x{k}")));
        out.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut rec = vec![
                id.clone(),
                vocab.rank(id).map_or_else(String::new, |r| r.to_string()),
            ];
            rec.extend(self.point(i).iter().map(|v| v.as_f64().to_string()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<embedding csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R, seed: u64) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let dim = reader.headers()?.len().saturating_sub(2);
        let mut ids = Vec::new();
        let mut coords = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            ids.push(rec.get(0).unwrap_or("").to_string());
            for k in 0..dim {
                let v: f64 = rec
                    .get(k + 2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidRow {
                        row: i + 2,
                        message: format!("bad coordinate x{}", k + 1),
                    })?;
                coords.push(T::lit(v));
            }
        }
        Ok(TermEmbedding {
            dim,
            ids,
            coords,
            seed,
        })
    }
}

/// Nearest neighbours of every point, self first, ties broken by index.
pub fn nearest_neighbors<T: Scalar>(
    dist: &CondensedDistanceMatrix<T>,
    k: usize,
) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let n = dist.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (dist.get(i, j).as_f64(), j))
                .collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            let take = (k - 1).min(row.len());
            if take < row.len() {
                row.select_nth_unstable_by(take, cmp);
                row.truncate(take);
            }
            row.sort_by(cmp);
            let mut idx = vec![i];
            let mut d = vec![0.0];
            for (dv, j) in row {
                idx.push(j);
                d.push(dv);
            }
            (idx, d)
        })
        .unzip()
}

/// Per-point `(sigma, rho)` so that `sum_j exp(-(d_ij - rho)/sigma) = log2(k)`
/// over each point's neighbours (local connectivity 1).
pub fn smooth_knn_dist(knn_dists: &[Vec<f64>], k: usize) -> (Vec<f64>, Vec<f64>) {
    let target = (k as f64).log2();
    let total: f64 = knn_dists.iter().flatten().sum();
    let count: usize = knn_dists.iter().map(Vec::len).sum();
    let mean_all = if count > 0 { total / count as f64 } else { 0.0 };

    knn_dists
        .iter()
        .map(|row| {
            let rho = row.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);
            let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
            for _ in 0..64 {
                let psum: f64 = row[1..]
                    .iter()
                    .map(|&d| {
                        let gap = d - rho;
                        if gap > 0.0 {
                            (-gap / mid).exp()
                        } else {
                            1.0
                        }
                    })
                    .sum();
                if (psum - target).abs() < SMOOTH_K_TOLERANCE {
                    break;
                }
                if psum > target {
                    hi = mid;
                    mid = (lo + hi) / 2.0;
                } else {
                    lo = mid;
                    mid = if hi.is_infinite() { mid * 2.0 } else { (lo + hi) / 2.0 };
                }
            }
            let mean_row = row.iter().sum::<f64>() / row.len() as f64;
            let floor = MIN_K_DIST_SCALE * if rho > 0.0 { mean_row } else { mean_all };
            (mid.max(floor), rho)
        })
        .unzip()
}

/// Fits `1 / (1 + a x^(2b))` to the target membership curve on `[0, 3 * spread]`.
pub fn find_ab_params(spread: f64, min_dist: f64) -> Result<(f64, f64)> {
    let xs: Vec<f64> = (0..300).map(|i| 3.0 * spread * i as f64 / 299.0).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() })
        .collect();
    let sse = |p: &[f64]| -> f64 {
        if p[0] <= 0.0 || p[1] <= 0.0 {
            return f64::INFINITY;
        }
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| {
                let r = 1.0 / (1.0 + p[0] * x.powf(2.0 * p[1])) - y;
                r * r
            })
            .sum()
    };
    let opts = NelderMeadOptions {
        ftol: 1e-14,
        ..Default::default()
    };
    let m = nelder_mead_minimize(sse, &[1.0, 1.0], &opts)?;
    Ok((m.x[0], m.x[1]))
}

/// Fuzzy-union graph as directed entries `(head, tail, weight)`, sorted by
/// `(head, tail)`; each undirected edge appears once per direction.
pub fn fuzzy_graph(
    knn_idx: &[Vec<usize>],
    knn_dists: &[Vec<f64>],
    sigmas: &[f64],
    rhos: &[f64],
) -> Vec<(u32, u32, f64)> {
    // (min, max) -> (w[min->max], w[max->min])
    let mut pairs: BTreeMap<(u32, u32), (f64, f64)> = BTreeMap::new();
    for (i, (idx, ds)) in knn_idx.iter().zip(knn_dists).enumerate() {
        for (&j, &d) in idx.iter().zip(ds) {
            if j == i {
                continue;
            }
            let gap = d - rhos[i];
            let w = if gap <= 0.0 || sigmas[i] == 0.0 {
                1.0
            } else {
                (-gap / sigmas[i]).exp()
            };
            let key = (i.min(j) as u32, i.max(j) as u32);
            let slot = pairs.entry(key).or_insert((0.0, 0.0));
            if i < j {
                slot.0 = w;
            } else {
                slot.1 = w;
            }
        }
    }
    let mut edges = Vec::with_capacity(pairs.len() * 2);
    for ((i, j), (a, b)) in pairs {
        let w = a + b - a * b;
        if w > 0.0 {
            edges.push((i, j, w));
            edges.push((j, i, w));
        }
    }
    edges.sort_by_key(|&(h, t, _)| (h, t));
    edges
}

fn id_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a, stable across platforms and runs
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h ^ seed.rotate_left(17)
}

/// Uniform initialization in `[-10, 10]^dim`, seeded per point id so that
/// permuting the input permutes the starting layout.
pub fn random_init(ids: &[String], dim: usize, seed: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(ids.len() * dim);
    for id in ids {
        let mut rng = ChaCha8Rng::seed_from_u64(id_seed(seed, id));
        out.extend((0..dim).map(|_| rng.gen_range(-INIT_RANGE..INIT_RANGE)));
    }
    out
}

trait Coords {
    fn load(&self, i: usize) -> f64;
    fn store(&self, i: usize, v: f64);
}

impl Coords for [Cell<f64>] {
    #[inline]
    fn load(&self, i: usize) -> f64 {
        self[i].get()
    }
    #[inline]
    fn store(&self, i: usize, v: f64) {
        self[i].set(v)
    }
}

impl Coords for [AtomicU64] {
    #[inline]
    fn load(&self, i: usize) -> f64 {
        f64::from_bits(self[i].load(Ordering::Relaxed))
    }
    #[inline]
    fn store(&self, i: usize, v: f64) {
        self[i].store(v.to_bits(), Ordering::Relaxed)
    }
}

struct Schedule<'a> {
    heads: &'a [u32],
    tails: &'a [u32],
    per_sample: &'a [f64],
    next: &'a mut [f64],
    per_negative: &'a [f64],
    next_negative: &'a mut [f64],
}

struct LayoutConsts {
    a: f64,
    b: f64,
    dim: usize,
    n_vertices: usize,
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

fn run_epoch<S: Coords + ?Sized>(
    coords: &S,
    s: &mut Schedule<'_>,
    c: &LayoutConsts,
    epoch: f64,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) {
    let dim = c.dim;
    let mut cur = vec![0.0; dim];
    for e in 0..s.heads.len() {
        if s.next[e] > epoch {
            continue;
        }
        let j = s.heads[e] as usize;
        let k = s.tails[e] as usize;
        for d in 0..dim {
            cur[d] = coords.load(j * dim + d);
        }
        let mut dist_sq = 0.0;
        for d in 0..dim {
            let diff = cur[d] - coords.load(k * dim + d);
            dist_sq += diff * diff;
        }
        let coeff = if dist_sq > 0.0 {
            -2.0 * c.a * c.b * dist_sq.powf(c.b - 1.0) / (c.a * dist_sq.powf(c.b) + 1.0)
        } else {
            0.0
        };
        for d in 0..dim {
            let other = coords.load(k * dim + d);
            let g = clip(coeff * (cur[d] - other));
            cur[d] += g * alpha;
            coords.store(k * dim + d, other - g * alpha);
        }
        s.next[e] += s.per_sample[e];

        let n_neg = ((epoch - s.next_negative[e]) / s.per_negative[e]).max(0.0) as usize;
        for _ in 0..n_neg {
            let k = rng.gen_range(0..c.n_vertices);
            if k == j {
                continue;
            }
            let mut dist_sq = 0.0;
            for d in 0..dim {
                let diff = cur[d] - coords.load(k * dim + d);
                dist_sq += diff * diff;
            }
            let coeff = if dist_sq > 0.0 {
                2.0 * c.b / ((0.001 + dist_sq) * (c.a * dist_sq.powf(c.b) + 1.0))
            } else {
                0.0
            };
            for d in 0..dim {
                let g = if coeff > 0.0 {
                    clip(coeff * (cur[d] - coords.load(k * dim + d)))
                } else {
                    GRAD_CLIP
                };
                cur[d] += g * alpha;
            }
        }
        s.next_negative[e] += n_neg as f64 * s.per_negative[e];
        for d in 0..dim {
            coords.store(j * dim + d, cur[d]);
        }
    }
}

/// Optimizes `init` in place against the weighted edge list.
pub fn optimize_layout(
    init: &mut [f64],
    edges: &[(u32, u32, f64)],
    n_vertices: usize,
    params: &UmapParams,
    ab: (f64, f64),
) {
    if edges.is_empty() {
        return;
    }
    let n_epochs = params.n_epochs;
    let w_max = edges.iter().map(|e| e.2).fold(0.0, f64::max);
    let kept: Vec<&(u32, u32, f64)> = edges
        .iter()
        .filter(|e| e.2 >= w_max / n_epochs as f64)
        .collect();
    let heads: Vec<u32> = kept.iter().map(|e| e.0).collect();
    let tails: Vec<u32> = kept.iter().map(|e| e.1).collect();
    let per_sample: Vec<f64> = kept.iter().map(|e| w_max / e.2).collect();
    let per_negative: Vec<f64> = per_sample
        .iter()
        .map(|p| p / params.negative_sample_rate.max(1) as f64)
        .collect();
    let mut next = per_sample.clone();
    let mut next_negative = per_negative.clone();
    let consts = LayoutConsts {
        a: ab.0,
        b: ab.1,
        dim: params.dim,
        n_vertices,
    };

    if params.layout_threads <= 1 {
        let cells = Cell::from_mut(init).as_slice_of_cells();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut sched = Schedule {
            heads: &heads,
            tails: &tails,
            per_sample: &per_sample,
            next: &mut next,
            per_negative: &per_negative,
            next_negative: &mut next_negative,
        };
        for epoch in 0..n_epochs {
            let alpha = params.learning_rate * (1.0 - epoch as f64 / n_epochs as f64);
            run_epoch(cells, &mut sched, &consts, epoch as f64, alpha, &mut rng);
        }
        return;
    }

    let shared: Vec<AtomicU64> = init.iter().map(|v| AtomicU64::new(v.to_bits())).collect();
    let chunk = heads.len().div_ceil(params.layout_threads);
    let mut rngs: Vec<ChaCha8Rng> = (0..params.layout_threads)
        .map(|t| ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(t as u64 + 1)))
        .collect();
    for epoch in 0..n_epochs {
        let alpha = params.learning_rate * (1.0 - epoch as f64 / n_epochs as f64);
        std::thread::scope(|scope| {
            let parts = heads
                .chunks(chunk)
                .zip(tails.chunks(chunk))
                .zip(per_sample.chunks(chunk))
                .zip(next.chunks_mut(chunk))
                .zip(per_negative.chunks(chunk))
                .zip(next_negative.chunks_mut(chunk))
                .zip(rngs.iter_mut());
            for ((((((h, t), ps), nx), pn), nn), rng) in parts {
                let shared = &shared[..];
                let consts = &consts;
                scope.spawn(move || {
                    let mut sched = Schedule {
                        heads: h,
                        tails: t,
                        per_sample: ps,
                        next: nx,
                        per_negative: pn,
                        next_negative: nn,
                    };
                    run_epoch(shared, &mut sched, consts, epoch as f64, alpha, rng);
                });
            }
        });
    }
    for (dst, src) in init.iter_mut().zip(&shared) {
        *dst = f64::from_bits(src.load(Ordering::Relaxed));
    }
}

/// Embeds the points of a precomputed distance matrix into `R^dim`.
pub fn umap_embed<T: Scalar>(
    dist: &CondensedDistanceMatrix<T>,
    params: &UmapParams,
) -> Result<TermEmbedding<T>> {
    let n = dist.len();
    params.validate(n)?;
    if let Some(p) = dist.values().iter().position(|v| !v.is_finite()) {
        let (i, j) = pair_of(n, p);
        return Err(Error::NonFiniteDistance { i, j });
    }
    let (knn_idx, knn_dists) = nearest_neighbors(dist, params.n_neighbors);
    let (sigmas, rhos) = smooth_knn_dist(&knn_dists, params.n_neighbors);
    let edges = fuzzy_graph(&knn_idx, &knn_dists, &sigmas, &rhos);
    let ab = find_ab_params(params.spread, params.min_dist)?;
    let mut coords = random_init(dist.ids(), params.dim, params.seed);
    optimize_layout(&mut coords, &edges, n, params, ab);
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("layout diverged to non-finite coordinates".into()));
    }
    Ok(TermEmbedding {
        dim: params.dim,
        ids: dist.ids().to_vec(),
        coords: coords.into_iter().map(T::lit).collect(),
        seed: params.seed,
    })
}

fn pair_of(n: usize, mut p: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - i - 1;
        if p < row {
            return (i, i + 1 + p);
        }
        p -= row;
    }
    (0, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::condensed::MatrixKind;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    #[test]
    fn ab_parameters_match_reference_curve() {
        // reference values for spread 1, min_dist 0.1
        let (a, b) = find_ab_params(1.0, 0.1).unwrap();
        assert!((a - 1.5769).abs() < 2e-3, "a = {a}");
        assert!((b - 0.8951).abs() < 2e-3, "b = {b}");
    }

    #[test]
    fn sigma_calibration_hits_target() {
        let dists = vec![vec![0.0, 0.5, 0.7, 1.0, 1.2]];
        let (sigmas, rhos) = smooth_knn_dist(&dists, 5);
        assert_eq!(rhos[0], 0.5);
        let psum: f64 = dists[0][1..].iter().map(|&d| (-(d - rhos[0]).max(0.0) / sigmas[0]).exp()).sum();
        assert!((psum - 5f64.log2()).abs() < 1e-4);
    }

    #[test]
    fn knn_includes_self_first() {
        let m = CondensedDistanceMatrix::new(3, vec![1.0f64, 2.0, 0.5], MatrixKind::Author, ids(3)).unwrap();
        let (idx, d) = nearest_neighbors(&m, 2);
        assert_eq!(idx[0], [0, 1]);
        assert_eq!(idx[2], [2, 1]);
        assert_eq!(d[2], [0.0, 0.5]);
    }

    #[test]
    fn fuzzy_union_is_symmetric() {
        let m = CondensedDistanceMatrix::try_from_fn(6, MatrixKind::Term, ids(6), |i, j| {
            Ok(((i as f64 - j as f64).abs() * 0.3).min(3.0))
        })
        .unwrap();
        let (idx, d) = nearest_neighbors(&m, 3);
        let (s, r) = smooth_knn_dist(&d, 3);
        let edges = fuzzy_graph(&idx, &d, &s, &r);
        for &(h, t, w) in &edges {
            assert!(edges.iter().any(|&(h2, t2, w2)| h2 == t && t2 == h && w2 == w));
            assert!(w > 0.0 && w <= 1.0);
        }
    }

    #[test]
    fn parameter_errors() {
        let m = CondensedDistanceMatrix::new(3, vec![1.0f64; 3], MatrixKind::Author, ids(3)).unwrap();
        let p = UmapParams {
            n_neighbors: 3,
            ..Default::default()
        };
        assert!(umap_embed(&m, &p).is_err());
        let p = UmapParams {
            n_neighbors: 2,
            dim: 1,
            ..Default::default()
        };
        assert!(umap_embed(&m, &p).is_err());
    }

    #[test]
    fn pair_lookup() {
        assert_eq!(pair_of(4, 0), (0, 1));
        assert_eq!(pair_of(4, 3), (1, 2));
        assert_eq!(pair_of(4, 5), (2, 3));
    }

    #[test]
    fn init_follows_ids() {
        let a = random_init(&["x".into(), "y".into()], 2, 1);
        let b = random_init(&["y".into(), "x".into()], 2, 1);
        assert_eq!(&a[..2], &b[2..]);
        assert!(a.iter().all(|v| v.abs() <= 10.0));
    }
}
