use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::BenchError;
use crate::features::Feature;
use crate::partitioner::Partitioning;
use crate::{KnowledgeGraph, ShardId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BaselineStrategy {
    /// Whole predicates on random shards (round-robin after a shuffle).
    #[default]
    RandomPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineSpec {
    pub seed: u64,
    pub k: usize,
    pub strategy: BaselineStrategy,
}

/// Shuffles the predicates with a seeded RNG and deals them round-robin to
/// `k` shards, so every predicate lives on exactly one shard.
pub fn random_partition(g: &KnowledgeGraph, spec: &BaselineSpec) -> Result<Partitioning, BenchError> {
    if spec.k == 0 {
        return Err(BenchError::ZeroShards);
    }
    let BaselineStrategy::RandomPredicate = spec.strategy;
    let mut predicates: Vec<_> = g.predicates().cloned().collect();
    predicates.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let home: BTreeMap<Feature, ShardId> =
        predicates.iter().enumerate().map(|(i, p)| (Feature::P(p.clone()), ShardId(i % spec.k))).collect();
    let assignment: Vec<ShardId> = g.triples().iter().map(|t| home[&Feature::P(t.p.clone())]).collect();
    Ok(Partitioning::from_assignment(spec.k, &assignment, home))
}
