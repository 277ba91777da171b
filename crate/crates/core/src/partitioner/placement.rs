use std::collections::{BTreeMap, BTreeSet};

use super::{FeatureGroup, ReplicatedFeature};
use crate::features::{Feature, QueryFeatures};
use crate::Scalar;

/// Keeps each replicated feature in its best-scoring group; equal scores go
/// to the smaller group id.
pub fn resolve_replication<W: Scalar>(reps: &[ReplicatedFeature<W>]) -> BTreeMap<Feature, usize> {
    let mut ownership = BTreeMap::new();
    for rep in reps {
        let mut best: Option<(usize, &W)> = None;
        for (&gid, score) in &rep.per_group_score {
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((gid, score));
            }
        }
        let owner = best.map(|(g, _)| g).or_else(|| rep.groups.first().copied());
        if let Some(owner) = owner {
            ownership.insert(rep.feature.clone(), owner);
        }
    }
    ownership
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Placement {
    pub placed: BTreeMap<Feature, usize>,
    /// Features with no join link to any group; left for greedy placement.
    pub deferred: BTreeSet<Feature>,
}

/// Places unclustered features next to their join partners. Repeatedly
/// takes the (feature, group) pair with the most workload join links between
/// the feature and the group's current features, so a placed feature can
/// pull in features joined only to it. Ties go to the smaller feature, then
/// the smaller group id.
pub fn proximity_place(unclustered: &BTreeSet<Feature>, groups: &[FeatureGroup], workload: &[QueryFeatures]) -> Placement {
    let mut members: Vec<BTreeSet<&Feature>> = groups.iter().map(|g| g.features.iter().collect()).collect();
    // Each link as an unordered pair of endpoint features.
    let edges: Vec<(&Feature, &Feature)> = workload
        .iter()
        .flat_map(|q| q.joins.iter().map(move |l| (&q.per_pattern_feature[l.left], &q.per_pattern_feature[l.right])))
        .collect();
    let mut pending: BTreeSet<&Feature> = unclustered.iter().collect();
    let mut placed = BTreeMap::new();
    loop {
        let mut best: Option<(usize, &Feature, usize)> = None;
        for &f in &pending {
            for (gid, m) in members.iter().enumerate() {
                let proximity = edges
                    .iter()
                    .filter(|(a, b)| (*a == f && m.contains(b)) || (*b == f && m.contains(a)))
                    .count();
                if proximity > 0 && best.is_none_or(|(p, _, _)| proximity > p) {
                    best = Some((proximity, f, gid));
                }
            }
        }
        let Some((_, f, gid)) = best else { break };
        pending.remove(f);
        members[gid].insert(f);
        placed.insert(f.clone(), groups[gid].group_id);
    }
    Placement { placed, deferred: pending.into_iter().cloned().collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{JoinKind, JoinLink};
    use crate::query::PatternTerm;
    use crate::rdf::Term;

    fn p(name: &str) -> Feature {
        Feature::P(Term::iri(name))
    }

    fn group(id: usize, names: &[&str]) -> FeatureGroup {
        FeatureGroup { group_id: id, features: names.iter().map(|n| p(n)).collect(), source_queries: BTreeSet::new() }
    }

    /// A chain query `?v0 f0 ?v1 . ?v1 f1 ?v2 ...`, one OS link per step.
    fn chain(id: &str, names: &[&str]) -> QueryFeatures {
        let per: Vec<Feature> = names.iter().map(|n| p(n)).collect();
        let joins = (1..names.len())
            .map(|i| JoinLink { kind: JoinKind::OS, left: i - 1, right: i, on: PatternTerm::var(format!("v{i}")) })
            .collect();
        QueryFeatures { query_id: id.into(), features: per.iter().cloned().collect(), joins, per_pattern_feature: per }
    }

    fn rep(f: &str, scores: &[(usize, i32)]) -> ReplicatedFeature<f64> {
        ReplicatedFeature {
            feature: p(f),
            groups: scores.iter().map(|s| s.0).collect(),
            per_group_score: scores.iter().map(|&(g, s)| (g, f64::from(s))).collect(),
        }
    }

    #[test]
    fn argmax_with_low_id_ties() {
        let reps = [rep("x", &[(0, 2), (1, 0)]), rep("y", &[(0, 1), (1, 1)]), rep("z", &[(0, 1), (2, 5), (1, 5)])];
        let own = resolve_replication(&reps);
        assert_eq!(own[&p("x")], 0);
        assert_eq!(own[&p("y")], 0);
        assert_eq!(own[&p("z")], 1);
    }

    #[test]
    fn proximity_follows_join_partners() {
        let groups = [group(0, &["a"]), group(1, &["b", "c", "d"])];
        // u is linked once to a and three times to group 1.
        let wl = [chain("Q1", &["a", "u"]), chain("Q2", &["u", "b", "u", "c"])];
        let pl = proximity_place(&BTreeSet::from([p("u"), p("lonely")]), &groups, &wl);
        assert_eq!(pl.placed, BTreeMap::from([(p("u"), 1)]));
        assert_eq!(pl.deferred, BTreeSet::from([p("lonely")]));
    }

    #[test]
    fn placement_is_transitive() {
        let groups = [group(0, &["a"]), group(1, &["b"])];
        let wl = [chain("Q1", &["a", "u", "v"])];
        let pl = proximity_place(&BTreeSet::from([p("u"), p("v")]), &groups, &wl);
        assert_eq!(pl.placed, BTreeMap::from([(p("u"), 0), (p("v"), 0)]));
        assert!(pl.deferred.is_empty());
    }
}
