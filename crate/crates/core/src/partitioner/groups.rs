use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::PartitionError;
use crate::clustering::ClusterCut;
use crate::features::{Feature, FeatureCatalog, QueryFeatures};

/// Union of the features of one selected cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureGroup {
    pub group_id: usize,
    pub features: BTreeSet<Feature>,
    pub source_queries: BTreeSet<String>,
}

impl FeatureGroup {
    pub fn empty(group_id: usize) -> Self {
        FeatureGroup { group_id, features: BTreeSet::new(), source_queries: BTreeSet::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSelection {
    pub groups: Vec<FeatureGroup>,
    /// Features of clusters that were not selected and that no selected
    /// group already contains.
    pub unclustered: BTreeSet<Feature>,
}

/// Builds `k` groups from a cut whose leaves index `workload`. With more
/// clusters than shards, the clusters with the most features are kept (ties
/// by triple mass, then by smallest leaf); the rest become unclustered.
/// Selected groups are numbered by smallest leaf.
pub fn groups_from_cut<D>(
    cut: &ClusterCut<D>,
    workload: &[QueryFeatures],
    k: usize,
    catalog: &FeatureCatalog,
) -> Result<GroupSelection, PartitionError> {
    if k == 0 {
        return Err(PartitionError::ZeroShards);
    }
    if cut.clusters.len() < k {
        return Err(PartitionError::TooFewGroups { k, groups: cut.clusters.len() });
    }
    let unions: Vec<BTreeSet<Feature>> = cut
        .clusters
        .iter()
        .map(|c| c.iter().flat_map(|&q| workload[q].features.iter().cloned()).collect())
        .collect();
    let mut order: Vec<usize> = (0..cut.clusters.len()).collect();
    order.sort_by_key(|&c| {
        let mass: usize = unions[c].iter().map(|f| catalog.count(f)).sum();
        (Reverse(unions[c].len()), Reverse(mass), cut.clusters[c][0])
    });
    let mut selected = order[..k].to_vec();
    selected.sort_by_key(|&c| cut.clusters[c][0]);

    let groups: Vec<FeatureGroup> = selected
        .iter()
        .enumerate()
        .map(|(gid, &c)| FeatureGroup {
            group_id: gid,
            features: unions[c].clone(),
            source_queries: cut.clusters[c].iter().map(|&q| workload[q].query_id.clone()).collect(),
        })
        .collect();
    let grouped: BTreeSet<&Feature> = groups.iter().flat_map(|g| g.features.iter()).collect();
    let unclustered = order[k..]
        .iter()
        .flat_map(|&c| unions[c].iter())
        .filter(|f| !grouped.contains(f))
        .cloned()
        .collect();
    Ok(GroupSelection { groups, unclustered })
}

/// Appends empty groups until there are `k`.
pub fn pad_groups(groups: &mut Vec<FeatureGroup>, k: usize) {
    while groups.len() < k {
        groups.push(FeatureGroup::empty(groups.len()));
    }
}

/// A feature present in two or more groups, with its score per candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicatedFeature<W> {
    pub feature: Feature,
    pub groups: BTreeSet<usize>,
    pub per_group_score: BTreeMap<usize, W>,
}

pub fn find_replicated<W>(groups: &[FeatureGroup]) -> Vec<ReplicatedFeature<W>> {
    let mut seen: BTreeMap<&Feature, BTreeSet<usize>> = BTreeMap::new();
    for g in groups {
        for f in &g.features {
            seen.entry(f).or_default().insert(g.group_id);
        }
    }
    seen.into_iter()
        .filter(|(_, gs)| gs.len() >= 2)
        .map(|(f, groups)| ReplicatedFeature { feature: f.clone(), groups, per_group_score: BTreeMap::new() })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_dataset_features, extract_query_features, fixtures};
    use crate::rdf::Term;
    use crate::KnowledgeGraph;

    fn group(id: usize, names: &[&str]) -> FeatureGroup {
        FeatureGroup {
            group_id: id,
            features: names.iter().map(|n| Feature::P(Term::iri(*n))).collect(),
            source_queries: BTreeSet::new(),
        }
    }

    #[test]
    fn replicated_are_shared_features() {
        assert!(find_replicated::<f64>(&[group(0, &["a"]), group(1, &["b"])]).is_empty());
        let reps = find_replicated::<f64>(&[group(0, &["a", "b"]), group(1, &["b", "c"])]);
        assert_eq!(reps.len(), 1);
        assert_eq!(reps[0].feature, Feature::P(Term::iri("b")));
        assert_eq!(reps[0].groups, BTreeSet::from([0, 1]));
    }

    #[test]
    fn student_course_pair_apart_replicates_the_intersection() {
        let wl = vec![extract_query_features(&fixtures::q7()).unwrap(), extract_query_features(&fixtures::q9()).unwrap()];
        let catalog = extract_dataset_features(&KnowledgeGraph::new(), wl.clone());
        let cut = ClusterCut { cut_distance: 0.0, clusters: vec![vec![0], vec![1]] };
        let sel = groups_from_cut(&cut, &wl, 2, &catalog).unwrap();
        let reps = find_replicated::<f64>(&sel.groups);
        let got: BTreeSet<Feature> = reps.into_iter().map(|r| r.feature).collect();
        let expected: BTreeSet<Feature> = wl[0].features.intersection(&wl[1].features).cloned().collect();
        assert_eq!(got, expected);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn surplus_clusters_become_unclustered() {
        let mk = |id: &str, names: &[&str]| QueryFeatures {
            query_id: id.into(),
            features: names.iter().map(|n| Feature::P(Term::iri(*n))).collect(),
            joins: vec![],
            per_pattern_feature: names.iter().map(|n| Feature::P(Term::iri(*n))).collect(),
        };
        let wl = vec![mk("Q1", &["a", "b"]), mk("Q2", &["c"]), mk("Q3", &["d", "e", "a"])];
        let catalog = extract_dataset_features(&KnowledgeGraph::new(), wl.clone());
        let cut = ClusterCut { cut_distance: 0.5, clusters: vec![vec![0], vec![1], vec![2]] };
        let sel = groups_from_cut(&cut, &wl, 2, &catalog).unwrap();
        let sources: Vec<_> = sel.groups.iter().map(|g| g.source_queries.iter().cloned().collect::<Vec<_>>()).collect();
        assert_eq!(sources, [vec!["Q1".to_string()], vec!["Q3".to_string()]]);
        assert_eq!(sel.unclustered, BTreeSet::from([Feature::P(Term::iri("c"))]));
        assert_eq!(
            groups_from_cut(&cut, &wl, 4, &catalog).unwrap_err(),
            PartitionError::TooFewGroups { k: 4, groups: 3 }
        );
    }
}
