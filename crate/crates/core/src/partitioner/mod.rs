//! Turns a cluster cut into `k` disjoint shards: replicated features are
//! scored and resolved to a single group, unclustered features follow their
//! join partners, and everything left over is placed greedily by size.

mod balance;
mod groups;
mod metadata;
mod placement;
mod score;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::features::{Feature, FeatureCatalog};
use crate::{KnowledgeGraph, Scalar};

pub use balance::{balance_and_assign, greedy_assign, BalanceReport, Ownership, Partitioning};
pub use groups::{find_replicated, groups_from_cut, pad_groups, FeatureGroup, GroupSelection, ReplicatedFeature};
pub use metadata::{emit_metadata, load_metadata};
pub use placement::{proximity_place, resolve_replication, Placement};
pub use score::{score_replicated, score_terms, ScoreTerms, ScoreWeights};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("number of shards must be at least 1")]
    ZeroShards,
    #[error("cut produced {groups} groups but {k} shards were requested")]
    TooFewGroups { k: usize, groups: usize },
    #[error("{groups} groups given for {k} shards")]
    TooManyGroups { k: usize, groups: usize },
    #[error("feature {0} is neither in the workload nor in the dataset")]
    UnknownFeature(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("invalid partition metadata: {0}")]
    Metadata(String),
}

#[derive(Debug, Clone)]
pub struct PartitionConfig<W> {
    pub k: usize,
    pub weights: ScoreWeights<W>,
    pub epsilon: f64,
}

impl<W: Scalar> Default for PartitionConfig<W> {
    fn default() -> Self {
        PartitionConfig { k: 3, weights: ScoreWeights::default(), epsilon: 0.15 }
    }
}

/// Everything the partitioner decided, for reporting.
#[derive(Debug, Clone)]
pub struct PartitionOutcome<W> {
    pub partitioning: Partitioning,
    pub report: BalanceReport,
    pub replicated: Vec<ReplicatedFeature<W>>,
    pub ownership: BTreeMap<Feature, usize>,
    pub placement: Placement,
    pub groups: Vec<FeatureGroup>,
}

/// Runs scoring, resolution, proximity placement and greedy balancing on a
/// group selection. `selection.groups` must hold exactly `config.k` groups.
pub fn partition<W: Scalar>(
    graph: &KnowledgeGraph,
    catalog: &FeatureCatalog,
    selection: GroupSelection,
    config: &PartitionConfig<W>,
) -> Result<PartitionOutcome<W>, PartitionError> {
    config.weights.validate()?;
    let GroupSelection { mut groups, unclustered } = selection;
    let mut replicated = find_replicated(&groups);
    for rep in &mut replicated {
        for &gid in &rep.groups {
            let score = score_replicated(&rep.feature, &groups[gid], catalog, &config.weights)?;
            rep.per_group_score.insert(gid, score);
        }
    }
    let ownership = resolve_replication(&replicated);
    for (feature, owner) in &ownership {
        for g in groups.iter_mut().filter(|g| g.group_id != *owner) {
            g.features.remove(feature);
        }
    }
    let in_groups: BTreeSet<&Feature> = groups.iter().flat_map(|g| g.features.iter()).collect();
    let pending: BTreeSet<Feature> = unclustered.into_iter().filter(|f| !in_groups.contains(f)).collect();
    let placement = proximity_place(&pending, &groups, &catalog.workload);
    for (feature, gid) in &placement.placed {
        groups[*gid].features.insert(feature.clone());
    }
    let (partitioning, report) = balance_and_assign(&groups, catalog, graph, config.k, config.epsilon)?;
    Ok(PartitionOutcome { partitioning, report, replicated, ownership, placement, groups })
}
