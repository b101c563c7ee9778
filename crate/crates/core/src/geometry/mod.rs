//! Term geometry: angular distances between term columns, low-dimensional
//! embeddings and their quality scores.

pub mod angular;
pub mod condensed;
pub mod quality;
pub mod umap;

pub use angular::{
    angle_from_cosine, angular_distance, angular_distance_dense, pairwise_term_distances,
    TermDistances,
};
pub use condensed::{condensed_index, CondensedDistanceMatrix, MatrixHeader, MatrixKind};
pub use quality::{silhouette, trustworthiness};
pub use umap::{umap_embed, TermEmbedding, UmapParams};
