//! Synthetic benchmark data, its query workload and the random-predicate
//! partitioning baseline.

mod baseline;
mod lubm;
mod workload;

use thiserror::Error;

pub use baseline::{random_partition, BaselineSpec, BaselineStrategy};
pub use lubm::{generate_lubm, GeneratorSpec, MIN_TRIPLES};
pub use workload::{lubm_workload, lubm_workload_text, single_pattern_queries};

/// Namespace of the university schema.
pub const UB: &str = "http://swat.cse.lehigh.edu/onto/univ-bench.owl#";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("target of {target} triples is below the minimum of {min}")]
    ScaleTooSmall { target: usize, min: usize },
    #[error("number of shards must be at least 1")]
    ZeroShards,
}
