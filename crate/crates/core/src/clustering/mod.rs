//! Query clustering: Jaccard distance matrix, hierarchical agglomerative
//! clustering and flat cuts of the resulting dendrogram.

mod export;
mod hac;
mod matrix;

use thiserror::Error;

pub use export::{dendrogram_dot, dendrogram_text, matrix_json};
pub use hac::{cut, hac, ClusterCut, CutTarget, Dendrogram, Linkage, Merge};
pub use matrix::{build_distance_matrix, jaccard_distance, jaccard_distance_sets, DistanceMatrix};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusteringError {
    #[error("distance matrix needs at least one query")]
    Empty,
    #[error("duplicate query id {0}")]
    DuplicateId(String),
    #[error("matrix shape mismatch: {ids} ids but row {row} has {len} entries")]
    Shape { ids: usize, row: usize, len: usize },
    #[error("matrix entry ({0}, {1}) breaks symmetry, zero diagonal or [0, 1] range")]
    InvalidEntry(usize, usize),
    #[error("cluster count {k} outside 1..={n}")]
    CountOutOfRange { k: usize, n: usize },
    #[error("unknown linkage {0:?} (expected single, complete or average)")]
    UnknownLinkage(String),
}
