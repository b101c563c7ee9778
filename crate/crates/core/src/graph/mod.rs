//! Author graphs from distance matrices: construction, community detection,
//! path statistics and export.

mod build;
mod export;
mod louvain;
mod metrics;
mod words;

pub use build::{degree_stats, epsilon_threshold, knn_adjacency, symmetrize, AuthorGraph, DegreeStats, UndirectedGraph};
pub use export::{to_dot, to_graphml, VertexAttributes};
pub use louvain::{louvain, louvain_replicates, modularity, relabel, LouvainSummary, Partition};
pub use metrics::{
    adjusted_rand_index, all_pairs_distances, bfs_distances, closeness_centrality, components, permutation_null,
    quantile, within_cluster_distance, Closeness, GroupDistance, NullSummary, Unreachable,
};
pub use words::{characteristic_words, write_cluster_csv, ClusterWords, ScoredWord};

/// Seed for replicate `index`, decorrelated from `master` by a SplitMix64 step.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
