//! End-to-end orchestration: workload analysis, partitioning by either
//! strategy and evaluation of a workload over the resulting shards.

use std::collections::BTreeMap;

use crate::bench::{random_partition, BaselineSpec, BaselineStrategy};
use crate::clustering::{build_distance_matrix, cut, hac, ClusterCut, CutTarget, Linkage};
use crate::config::Config;
use crate::exec::{eval_centralized, eval_federated, run_workload};
use crate::features::{extract_dataset_features, extract_workload_features, FeatureCatalog, QueryFeatures};
use crate::partitioner::{groups_from_cut, pad_groups, partition, GroupSelection, PartitionConfig, PartitionOutcome, Partitioning};
use crate::rewriter::rewrite;
use crate::{Distance, Error, JaccardMatrix, KnowledgeGraph, Query, QueryDendrogram, Report, Weight};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub features: Vec<QueryFeatures>,
    /// Absent for an empty workload.
    pub matrix: Option<JaccardMatrix>,
    pub dendrogram: Option<QueryDendrogram>,
}

pub fn analyze(workload: &[Query], linkage: Linkage) -> Result<Analysis, Error> {
    let features = extract_workload_features(workload)?;
    if features.is_empty() {
        return Ok(Analysis { features, matrix: None, dendrogram: None });
    }
    let matrix = build_distance_matrix::<Distance>(&features)?;
    let dendrogram = hac(&matrix, linkage);
    Ok(Analysis { features, matrix: Some(matrix), dendrogram: Some(dendrogram) })
}

#[derive(Debug, Clone)]
pub struct WawPartRun {
    pub catalog: FeatureCatalog,
    pub analysis: Analysis,
    pub cut: Option<ClusterCut<Distance>>,
    pub outcome: PartitionOutcome<Weight>,
}

impl WawPartRun {
    pub fn partitioning(&self) -> &Partitioning {
        &self.outcome.partitioning
    }
}

/// Clusters the workload and partitions `graph` into `config.k` shards.
/// With a count cut and fewer queries than shards, every query is its own
/// group and the remaining groups start empty.
pub fn partition_wawpart(graph: &KnowledgeGraph, workload: &[Query], config: &Config) -> Result<WawPartRun, Error> {
    let analysis = analyze(workload, config.linkage)?;
    let catalog = extract_dataset_features(graph, analysis.features.clone());
    let (selection, cluster_cut) = match &analysis.dendrogram {
        None => {
            let mut groups = Vec::new();
            pad_groups(&mut groups, config.k);
            (GroupSelection { groups, unclustered: Default::default() }, None)
        }
        Some(d) => match &config.cut_distance {
            Some(t) => {
                let c = cut(d, &CutTarget::Distance(*t))?;
                (groups_from_cut(&c, &analysis.features, config.k, &catalog)?, Some(c))
            }
            None => {
                let k = config.k.min(d.leaf_count());
                let c = cut(d, &CutTarget::Count(k))?;
                let mut sel = groups_from_cut(&c, &analysis.features, k, &catalog)?;
                pad_groups(&mut sel.groups, config.k);
                (sel, Some(c))
            }
        },
    };
    let pc = PartitionConfig { k: config.k, weights: config.weights.clone(), epsilon: config.epsilon };
    let outcome = partition(graph, &catalog, selection, &pc)?;
    Ok(WawPartRun { catalog, analysis, cut: cluster_cut, outcome })
}

pub fn partition_random(graph: &KnowledgeGraph, config: &Config) -> Result<Partitioning, Error> {
    let spec = BaselineSpec { seed: config.seed, k: config.k, strategy: BaselineStrategy::RandomPredicate };
    Ok(random_partition(graph, &spec)?)
}

pub fn evaluate(graph: &KnowledgeGraph, workload: &[Query], p: &Partitioning, config: &Config) -> Report {
    run_workload(workload, p, &p.shard_graphs(graph), &config.cost)
}

/// Ids of queries whose federated answers differ from centralized ones, or
/// that fail to run.
pub fn correctness_failures(graph: &KnowledgeGraph, workload: &[Query], p: &Partitioning, config: &Config) -> Vec<String> {
    let shards: BTreeMap<_, _> = p.shard_graphs(graph);
    workload
        .iter()
        .filter(|q| {
            let central = eval_centralized(q, graph, &config.cost, false).0;
            let federated = rewrite(q, p).ok().and_then(|plan| eval_federated(&plan, &shards, &config.cost).ok());
            federated.is_none_or(|(b, _)| b != central)
        })
        .map(|q| q.id.clone())
        .collect()
}
