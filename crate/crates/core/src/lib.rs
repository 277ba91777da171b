//! Workload-aware partitioning of RDF knowledge graphs.
//!
//! The pipeline extracts predicate (P) and predicate-object (PO) features
//! from a SPARQL workload and from the data, clusters queries by Jaccard
//! distance with hierarchical agglomerative clustering, turns the clusters
//! into disjoint shards, rewrites queries into federated form and evaluates
//! them over in-process shards with a deterministic cost model.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix the
//! types the pipeline uses by default.

pub mod bench;
pub mod clustering;
pub mod config;
pub mod exec;
pub mod features;
pub mod ntriples;
pub mod partitioner;
pub mod pipeline;
pub mod query;
pub mod rdf;
pub mod rewriter;
pub mod scalar;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error as ThisError;

pub use ntriples::{parse_ntriples, parse_ntriples_str, to_ntriples_string, write_ntriples, NTriplesError};
pub use query::{FederatedQuery, PatternTerm, Query, QueryError, TriplePattern};
pub use rdf::{KnowledgeGraph, Term, TermKind, Triple, TripleId};
pub use scalar::Scalar;

pub use num_rational::Rational64;

/// Exact Jaccard distances.
pub type Distance = Rational64;
/// Replicated-feature score weights and scores.
pub type Weight = f64;
/// Simulated milliseconds, exact so the cost identity holds to the last bit.
pub type SimTime = Rational64;

pub type JaccardMatrix = clustering::DistanceMatrix<Distance>;
pub type QueryDendrogram = clustering::Dendrogram<Distance>;
pub type Weights = partitioner::ScoreWeights<Weight>;
pub type Costs = exec::CostModel<SimTime>;
pub type Stats = exec::ExecStats<SimTime>;
pub type Report = exec::WorkloadReport<SimTime>;

#[derive(Debug, ThisError)]
pub enum Error {
    #[error(transparent)]
    NTriples(#[from] NTriplesError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Clustering(#[from] clustering::ClusteringError),
    #[error(transparent)]
    Partition(#[from] partitioner::PartitionError),
    #[error(transparent)]
    Rewrite(#[from] rewriter::RewriteError),
    #[error(transparent)]
    Exec(#[from] exec::ExecError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Bench(#[from] bench::BenchError),
}

/// Index of a shard (processing node).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShardId(pub usize);

impl fmt::Display for ShardId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "shard-{}", self.0)
    }
}
