use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{FeatureGroup, PartitionError};
use crate::features::{Feature, FeatureCatalog};
use crate::{KnowledgeGraph, ShardId, TripleId};

/// Which feature owns which triples, so every triple has exactly one owner.
///
/// A triple `(s, p, o)` belongs to `PO(p, o)` when that key is in the
/// catalog and to `P(p)` otherwise, except that a `P(p)` used by the
/// workload owns every `p` triple and its `PO(p, _)` refinements become
/// dependents that share its home. Without that exception a pattern
/// `?s p ?o` would have to read from several shards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ownership {
    pub owned: BTreeMap<Feature, Vec<TripleId>>,
    /// Dependent feature to its owner.
    pub owner_of: BTreeMap<Feature, Feature>,
}

impl Ownership {
    pub fn compute(catalog: &FeatureCatalog, graph: &KnowledgeGraph) -> Self {
        let workload = catalog.workload_features();
        let all: BTreeSet<&Feature> = catalog.dataset_features.keys().chain(workload.iter()).collect();
        let mut owned = BTreeMap::new();
        let mut owner_of = BTreeMap::new();
        for f in all {
            match f {
                Feature::PO(p, _) if workload.contains(&Feature::P(p.clone())) => {
                    owner_of.insert(f.clone(), Feature::P(p.clone()));
                }
                Feature::PO(p, o) => {
                    owned.insert(f.clone(), graph.lookup_po(p, o).to_vec());
                }
                Feature::P(p) if workload.contains(f) => {
                    owned.insert(f.clone(), graph.lookup_p(p).to_vec());
                }
                Feature::P(p) => {
                    let residual = graph
                        .lookup_p(p)
                        .iter()
                        .copied()
                        .filter(|&id| !catalog.contains(&Feature::PO(p.clone(), graph.triple(id).o.clone())))
                        .collect();
                    owned.insert(f.clone(), residual);
                }
            }
        }
        Ownership { owned, owner_of }
    }

    /// The feature whose home decides where `f` lives.
    pub fn unit_of<'a>(&'a self, f: &'a Feature) -> &'a Feature {
        self.owner_of.get(f).unwrap_or(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partitioning {
    pub k: usize,
    /// Sorted triple ids per shard.
    pub shards: BTreeMap<ShardId, Vec<TripleId>>,
    pub feature_home: BTreeMap<Feature, ShardId>,
    pub sizes: BTreeMap<ShardId, usize>,
}

impl Partitioning {
    /// Builds the partitioning from a shard per triple.
    pub fn from_assignment(k: usize, triple_shard: &[ShardId], feature_home: BTreeMap<Feature, ShardId>) -> Self {
        let mut shards: BTreeMap<ShardId, Vec<TripleId>> = (0..k).map(|i| (ShardId(i), Vec::new())).collect();
        for (i, shard) in triple_shard.iter().enumerate() {
            shards.get_mut(shard).expect("shard id below k").push(TripleId(i as u32));
        }
        let sizes = shards.iter().map(|(s, ids)| (*s, ids.len())).collect();
        Partitioning { k, shards, feature_home, sizes }
    }

    pub fn shard_graph(&self, graph: &KnowledgeGraph, shard: ShardId) -> KnowledgeGraph {
        graph.subgraph(self.shards.get(&shard).map_or(&[][..], Vec::as_slice))
    }

    pub fn shard_graphs(&self, graph: &KnowledgeGraph) -> BTreeMap<ShardId, KnowledgeGraph> {
        self.shards.keys().map(|&s| (s, self.shard_graph(graph, s))).collect()
    }

    pub fn home(&self, feature: &Feature) -> Option<ShardId> {
        self.feature_home.get(feature).copied()
    }

    /// Checks the disjoint cover and size bookkeeping against `graph`.
    pub fn check_disjoint_cover(&self, graph: &KnowledgeGraph) -> Result<(), String> {
        let mut seen = vec![false; graph.len()];
        for (shard, ids) in &self.shards {
            if self.sizes.get(shard) != Some(&ids.len()) {
                return Err(format!("{shard}: recorded size differs from {} triples", ids.len()));
            }
            for id in ids {
                let slot = seen.get_mut(id.index()).ok_or_else(|| format!("{shard}: unknown triple {}", id.0))?;
                if std::mem::replace(slot, true) {
                    return Err(format!("triple {} stored twice", id.0));
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(format!("triple {i} stored nowhere")),
            None => Ok(()),
        }
    }
}

/// Assigns items largest first to the currently smallest bin (ties to the
/// lower bin). Equal items keep input order. Returns the bin per item.
pub fn greedy_assign(bins: &mut [usize], items: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| Reverse(items[i]));
    let mut out = vec![0; items.len()];
    for i in order {
        let bin = (0..bins.len()).min_by_key(|&b| (bins[b], b)).expect("at least one bin");
        bins[bin] += items[i];
        out[i] = bin;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceReport {
    pub target: f64,
    pub epsilon: f64,
    pub sizes: Vec<usize>,
    /// `size / target - 1` per shard.
    pub deviations: Vec<f64>,
    pub within_epsilon: bool,
    pub seeded_sizes: Vec<usize>,
    pub largest_greedy_item: usize,
}

impl BalanceReport {
    pub fn new(sizes: Vec<usize>, seeded_sizes: Vec<usize>, largest_greedy_item: usize, epsilon: f64) -> Self {
        let total: usize = sizes.iter().sum();
        let target = total as f64 / sizes.len().max(1) as f64;
        let deviations: Vec<f64> =
            sizes.iter().map(|&s| if target > 0.0 { s as f64 / target - 1.0 } else { 0.0 }).collect();
        let within_epsilon = deviations.iter().all(|d| d.abs() <= epsilon);
        BalanceReport { target, epsilon, sizes, deviations, within_epsilon, seeded_sizes, largest_greedy_item }
    }
}

/// Seeds shard `i` with the triples of group `i`'s features, then places the
/// remaining features largest first into the smallest shard. Epsilon is only
/// reported against.
pub fn balance_and_assign(
    groups: &[FeatureGroup],
    catalog: &FeatureCatalog,
    graph: &KnowledgeGraph,
    k: usize,
    epsilon: f64,
) -> Result<(Partitioning, BalanceReport), PartitionError> {
    if k == 0 {
        return Err(PartitionError::ZeroShards);
    }
    if groups.len() < k {
        return Err(PartitionError::TooFewGroups { k, groups: groups.len() });
    }
    if groups.len() > k {
        return Err(PartitionError::TooManyGroups { k, groups: groups.len() });
    }
    let ownership = Ownership::compute(catalog, graph);
    let mut unit_home: BTreeMap<&Feature, ShardId> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        for f in &g.features {
            let unit = ownership.unit_of(f);
            if ownership.owned.contains_key(unit) && *unit == *f {
                unit_home.entry(unit).or_insert(ShardId(i));
            }
        }
    }
    // Dependents whose owner is not grouped pull the owner into their group.
    for (i, g) in groups.iter().enumerate() {
        for f in &g.features {
            let unit = ownership.unit_of(f);
            if ownership.owned.contains_key(unit) {
                unit_home.entry(unit).or_insert(ShardId(i));
            }
        }
    }

    let mut bins = vec![0usize; k];
    for (unit, shard) in &unit_home {
        bins[shard.0] += ownership.owned[*unit].len();
    }
    let seeded_sizes = bins.clone();
    let unused: Vec<&Feature> = ownership.owned.keys().filter(|f| !unit_home.contains_key(f)).collect();
    let items: Vec<usize> = unused.iter().map(|f| ownership.owned[*f].len()).collect();
    let picks = greedy_assign(&mut bins, &items);
    for (f, bin) in unused.iter().zip(picks) {
        unit_home.insert(f, ShardId(bin));
    }

    let mut triple_shard = vec![ShardId(usize::MAX); graph.len()];
    for (unit, shard) in &unit_home {
        for id in &ownership.owned[*unit] {
            triple_shard[id.index()] = *shard;
        }
    }
    debug_assert!(triple_shard.iter().all(|s| s.0 < k), "every triple has an owner");
    let mut feature_home: BTreeMap<Feature, ShardId> =
        unit_home.iter().map(|(f, s)| ((*f).clone(), *s)).collect();
    for (dep, owner) in &ownership.owner_of {
        feature_home.insert(dep.clone(), unit_home[owner]);
    }
    let partitioning = Partitioning::from_assignment(k, &triple_shard, feature_home);
    let sizes: Vec<usize> = partitioning.sizes.values().copied().collect();
    let report = BalanceReport::new(sizes, seeded_sizes, items.iter().copied().max().unwrap_or(0), epsilon);
    Ok((partitioning, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{extract_dataset_features, extract_workload_features};
    use crate::query::parse_workload;
    use crate::rdf::Term;
    use crate::{Triple, parse_ntriples_str};
    use proptest::prelude::*;

    fn graph_with_sizes(sizes: &[usize]) -> KnowledgeGraph {
        let mut triples = Vec::new();
        for (p, &n) in sizes.iter().enumerate() {
            for i in 0..n {
                triples.push(
                    Triple::new(Term::iri(format!("http://e/s{i}")), Term::iri(format!("http://e/p{p}")), Term::iri("http://e/o"))
                        .unwrap(),
                );
            }
        }
        KnowledgeGraph::from_triples(triples)
    }

    #[test]
    fn empty_workload_greedy_trace() {
        let g = graph_with_sizes(&[5, 4, 3, 2]);
        let cat = extract_dataset_features(&g, vec![]);
        let groups = [FeatureGroup::empty(0), FeatureGroup::empty(1)];
        let (p, report) = balance_and_assign(&groups, &cat, &g, 2, 0.15).unwrap();
        assert_eq!(report.sizes, [7, 7]);
        let home = |i: usize| p.feature_home[&Feature::P(Term::iri(format!("http://e/p{i}")))];
        assert_eq!([home(0), home(1), home(2), home(3)], [ShardId(0), ShardId(1), ShardId(1), ShardId(0)]);
        p.check_disjoint_cover(&g).unwrap();
    }

    #[test]
    fn one_group_takes_everything() {
        let g = graph_with_sizes(&[3, 2]);
        let cat = extract_dataset_features(&g, vec![]);
        let (p, _) = balance_and_assign(&[FeatureGroup::empty(0)], &cat, &g, 1, 0.15).unwrap();
        assert_eq!(p.sizes[&ShardId(0)], 5);
        assert!(p.feature_home.values().all(|s| *s == ShardId(0)));
    }

    #[test]
    fn shard_count_errors() {
        let g = graph_with_sizes(&[1]);
        let cat = extract_dataset_features(&g, vec![]);
        assert_eq!(balance_and_assign(&[], &cat, &g, 0, 0.1).unwrap_err(), PartitionError::ZeroShards);
        assert_eq!(
            balance_and_assign(&[FeatureGroup::empty(0)], &cat, &g, 2, 0.1).unwrap_err(),
            PartitionError::TooFewGroups { k: 2, groups: 1 }
        );
    }

    #[test]
    fn po_ownership_and_subsumption() {
        let data = "\
<http://e/a> <http://e/type> <http://e/Student> .
<http://e/b> <http://e/type> <http://e/Student> .
<http://e/c> <http://e/type> <http://e/Course> .
<http://e/a> <http://e/takes> <http://e/c> .
";
        let g = parse_ntriples_str(data).unwrap();
        let wl = extract_workload_features(
            &parse_workload("SELECT ?x WHERE { ?x <http://e/type> <http://e/Student> . ?x <http://e/takes> ?c }").unwrap(),
        )
        .unwrap();
        let cat = extract_dataset_features(&g, wl.clone());
        let own = Ownership::compute(&cat, &g);
        let student = Feature::PO(Term::iri("http://e/type"), Term::iri("http://e/Student"));
        assert_eq!(own.owned[&student].len(), 2);
        assert_eq!(own.owned[&Feature::P(Term::iri("http://e/type"))].len(), 1);

        let wl2 = extract_workload_features(
            &parse_workload("SELECT ?x WHERE { ?x <http://e/type> <http://e/Student> }\n---\nSELECT ?x WHERE { ?x <http://e/type> ?t }")
                .unwrap(),
        )
        .unwrap();
        let cat2 = extract_dataset_features(&g, wl2);
        let own2 = Ownership::compute(&cat2, &g);
        assert_eq!(own2.unit_of(&student), &Feature::P(Term::iri("http://e/type")));
        assert_eq!(own2.owned[&Feature::P(Term::iri("http://e/type"))].len(), 3);

        let groups = [
            FeatureGroup { group_id: 0, features: BTreeSet::from([student.clone()]), source_queries: BTreeSet::new() },
            FeatureGroup::empty(1),
        ];
        let (p, _) = balance_and_assign(&groups, &cat2, &g, 2, 0.15).unwrap();
        assert_eq!(p.home(&student), p.home(&Feature::P(Term::iri("http://e/type"))));
        p.check_disjoint_cover(&g).unwrap();
    }

    proptest! {
        #[test]
        fn greedy_spread_bounded_by_largest_item(items in prop::collection::vec(0usize..50, 0..30), k in 1usize..6) {
            let mut bins = vec![0; k];
            let picks = greedy_assign(&mut bins, &items);
            prop_assert_eq!(bins.iter().sum::<usize>(), items.iter().sum::<usize>());
            prop_assert!(picks.iter().all(|&b| b < k));
            let spread = bins.iter().max().unwrap() - bins.iter().min().unwrap();
            prop_assert!(spread <= items.iter().copied().max().unwrap_or(0));
        }

        #[test]
        fn greedy_spread_from_seeds(seeds in prop::collection::vec(0usize..100, 1..5), items in prop::collection::vec(0usize..50, 0..30)) {
            let initial = seeds.iter().max().unwrap() - seeds.iter().min().unwrap();
            let mut bins = seeds.clone();
            greedy_assign(&mut bins, &items);
            let spread = bins.iter().max().unwrap() - bins.iter().min().unwrap();
            prop_assert!(spread <= initial.max(items.iter().copied().max().unwrap_or(0)));
        }

        #[test]
        fn disjoint_cover_on_random_graphs(sizes in prop::collection::vec(0usize..8, 1..8), k in 1usize..4) {
            let g = graph_with_sizes(&sizes);
            let cat = extract_dataset_features(&g, vec![]);
            let groups: Vec<_> = (0..k).map(FeatureGroup::empty).collect();
            let (p, _) = balance_and_assign(&groups, &cat, &g, k, 0.15).unwrap();
            prop_assert!(p.check_disjoint_cover(&g).is_ok());
            prop_assert_eq!(p.feature_home.len(), cat.dataset_features.len());
        }
    }
}
