//! Research-interest mapping: text processing, term geometry, optimal
//! transport between author term patterns, and graph statistics.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`.

pub mod corpus;
pub mod docterm;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod optim;
pub mod scalar;
pub mod stats;
pub mod text;
pub mod transport;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DistanceMatrix = geometry::CondensedDistanceMatrix<f64>;
pub type Embedding = geometry::TermEmbedding<f64>;
pub type PointPattern = transport::WeightedPointPattern<f64>;
pub type Plan = transport::TransportPlan<f64>;
pub type ZipfParams = text::ZipfFit<f64>;
