//! Workload and dataset features.
//!
//! Every triple pattern with a constant predicate yields one feature: `PO`
//! when the object is constant, `P` otherwise. Structural joins between
//! patterns (shared subject, object-to-subject, shared object) are kept as
//! [`JoinLink`]s.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::query::{PatternTerm, Query};
use crate::rdf::{KnowledgeGraph, Term, TripleId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    P,
    PO,
}

/// A predicate feature or a predicate-object feature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    P(Term),
    PO(Term, Term),
}

impl Feature {
    pub fn kind(&self) -> FeatureKind {
        match self {
            Feature::P(_) => FeatureKind::P,
            Feature::PO(..) => FeatureKind::PO,
        }
    }

    pub fn predicate(&self) -> &Term {
        match self {
            Feature::P(p) | Feature::PO(p, _) => p,
        }
    }

    pub fn object(&self) -> Option<&Term> {
        match self {
            Feature::P(_) => None,
            Feature::PO(_, o) => Some(o),
        }
    }

    /// The P feature this feature refines (itself for P features).
    pub fn predicate_feature(&self) -> Feature {
        Feature::P(self.predicate().clone())
    }

    /// Canonical key: `P|<pred>` or `PO|<pred>|<obj>`. IRIs are written bare,
    /// literals in their quoted form, so the two never collide.
    pub fn key(&self) -> String {
        match self {
            Feature::P(p) => format!("P|{}", p.lexical()),
            Feature::PO(p, o) => format!("PO|{}|{}", p.lexical(), o.lexical()),
        }
    }

    pub fn from_key(key: &str) -> Option<Feature> {
        let mut parts = key.splitn(3, '|');
        let kind = parts.next()?;
        let predicate = Term::try_iri(parts.next()?)?;
        match (kind, parts.next()) {
            ("P", None) => Some(Feature::P(predicate)),
            ("PO", Some(object)) => {
                let object = if object.starts_with('"') {
                    Term::literal_raw(object)
                } else {
                    Term::try_iri(object)?
                };
                Some(Feature::PO(predicate, object))
            }
            _ => None,
        }
    }

    /// Number of triples in `graph` matching this feature's key.
    pub fn match_count(&self, graph: &KnowledgeGraph) -> usize {
        self.matching(graph).len()
    }

    pub fn matching<'g>(&self, graph: &'g KnowledgeGraph) -> &'g [TripleId] {
        match self {
            Feature::P(p) => graph.lookup_p(p),
            Feature::PO(p, o) => graph.lookup_po(p, o),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl Serialize for Feature {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.key())
    }
}

impl<'de> Deserialize<'de> for Feature {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let key = String::deserialize(deserializer)?;
        Feature::from_key(&key).ok_or_else(|| serde::de::Error::custom(format!("invalid feature key {key:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JoinKind {
    /// Shared subject.
    SS,
    /// Object of `left` is the subject of `right`.
    OS,
    /// Shared object.
    OO,
}

/// A join between two patterns of one query. SS and OO links are stored
/// once with `left < right`; OS links are directional.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct JoinLink {
    pub kind: JoinKind,
    pub left: usize,
    pub right: usize,
    /// The shared variable or constant.
    pub on: PatternTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryFeatures {
    pub query_id: String,
    pub features: BTreeSet<Feature>,
    pub joins: Vec<JoinLink>,
    /// Feature of each pattern, indexed by pattern position.
    pub per_pattern_feature: Vec<Feature>,
}

impl QueryFeatures {
    pub fn uses(&self, feature: &Feature) -> bool {
        self.features.contains(feature)
    }

    /// Links with at least one endpoint featurized by `feature`.
    pub fn links_of<'a>(&'a self, feature: &'a Feature) -> impl Iterator<Item = &'a JoinLink> + 'a {
        self.joins.iter().filter(move |l| {
            &self.per_pattern_feature[l.left] == feature || &self.per_pattern_feature[l.right] == feature
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("unfeaturizable pattern {pattern} in query {query}: variable predicate")]
    Unfeaturizable { query: String, pattern: usize },
}

pub fn extract_query_features(query: &Query) -> Result<QueryFeatures, FeatureError> {
    let mut per_pattern_feature = Vec::with_capacity(query.patterns.len());
    for (i, tp) in query.patterns.iter().enumerate() {
        let p = tp
            .predicate()
            .ok_or_else(|| FeatureError::Unfeaturizable { query: query.id.clone(), pattern: i })?;
        per_pattern_feature.push(match &tp.o {
            PatternTerm::Const(o) => Feature::PO(p.clone(), o.clone()),
            PatternTerm::Var(_) => Feature::P(p.clone()),
        });
    }
    let mut joins = Vec::new();
    let n = query.patterns.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&query.patterns[i], &query.patterns[j]);
            if i < j && a.s == b.s {
                joins.push(JoinLink { kind: JoinKind::SS, left: i, right: j, on: a.s.clone() });
            }
            if a.o == b.s {
                joins.push(JoinLink { kind: JoinKind::OS, left: i, right: j, on: a.o.clone() });
            }
            if i < j && a.o == b.o {
                joins.push(JoinLink { kind: JoinKind::OO, left: i, right: j, on: a.o.clone() });
            }
        }
    }
    joins.sort();
    Ok(QueryFeatures {
        query_id: query.id.clone(),
        features: per_pattern_feature.iter().cloned().collect(),
        joins,
        per_pattern_feature,
    })
}

pub fn extract_workload_features(queries: &[Query]) -> Result<Vec<QueryFeatures>, FeatureError> {
    queries.iter().map(extract_query_features).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureStats {
    pub count: usize,
    pub triples: Vec<TripleId>,
}

/// Dataset feature statistics plus the featurized workload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    pub dataset_features: BTreeMap<Feature, FeatureStats>,
    pub workload: Vec<QueryFeatures>,
    pub total_triples: usize,
}

impl FeatureCatalog {
    /// Triple count of a feature; zero when the dataset has no match.
    pub fn count(&self, feature: &Feature) -> usize {
        self.dataset_features.get(feature).map_or(0, |s| s.count)
    }

    pub fn contains(&self, feature: &Feature) -> bool {
        self.dataset_features.contains_key(feature)
    }

    /// Union of all workload query features.
    pub fn workload_features(&self) -> BTreeSet<Feature> {
        self.workload.iter().flat_map(|q| q.features.iter().cloned()).collect()
    }

    pub fn query(&self, id: &str) -> Option<&QueryFeatures> {
        self.workload.iter().find(|q| q.query_id == id)
    }

    /// Catalog PO keys refining predicate `p`.
    pub fn po_refinements<'a>(&'a self, p: &'a Term) -> impl Iterator<Item = &'a Feature> + 'a {
        self.dataset_features
            .range(Feature::PO(p.clone(), Term::smallest())..)
            .map(|(f, _)| f)
            .take_while(move |f| f.kind() == FeatureKind::PO && f.predicate() == p)
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct WorkloadEntry<'a> {
            id: &'a str,
            features: Vec<String>,
            joins: Vec<serde_json::Value>,
        }
        let dataset: BTreeMap<String, usize> =
            self.dataset_features.iter().map(|(f, s)| (f.key(), s.count)).collect();
        let workload: Vec<WorkloadEntry> = self
            .workload
            .iter()
            .map(|q| WorkloadEntry {
                id: &q.query_id,
                features: q.features.iter().map(Feature::key).collect(),
                joins: q
                    .joins
                    .iter()
                    .map(|l| serde_json::json!({ "kind": l.kind, "left": l.left, "right": l.right }))
                    .collect(),
            })
            .collect();
        serde_json::json!({
            "total_triples": self.total_triples,
            "dataset_features": dataset,
            "workload": workload,
        })
    }
}

/// Builds the catalog: every predicate of the graph as a P feature, plus
/// each workload PO feature that matches at least one triple.
pub fn extract_dataset_features(graph: &KnowledgeGraph, workload: Vec<QueryFeatures>) -> FeatureCatalog {
    let mut dataset_features = BTreeMap::new();
    for p in graph.predicates() {
        let triples = graph.lookup_p(p).to_vec();
        dataset_features.insert(Feature::P(p.clone()), FeatureStats { count: triples.len(), triples });
    }
    for feature in workload.iter().flat_map(|q| q.features.iter()) {
        if let Feature::PO(p, o) = feature {
            let triples = graph.lookup_po(p, o);
            if !triples.is_empty() && !dataset_features.contains_key(feature) {
                dataset_features
                    .insert(feature.clone(), FeatureStats { count: triples.len(), triples: triples.to_vec() });
            }
        }
    }
    FeatureCatalog { dataset_features, workload, total_triples: graph.len() }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::ntriples::parse_ntriples_str;
    use crate::query::parse_query;
    use crate::rdf::vocab::RDF_TYPE;

    const UB: &str = "http://swat.cse.lehigh.edu/onto/univ-bench.owl#";

    fn ub(local: &str) -> Term {
        Term::iri(format!("{UB}{local}"))
    }

    #[test]
    fn query_seven_has_four_features() {
        let f = extract_query_features(&q7()).unwrap();
        let expected: BTreeSet<Feature> = [
            Feature::PO(Term::iri(RDF_TYPE), ub("Student")),
            Feature::PO(Term::iri(RDF_TYPE), ub("Course")),
            Feature::P(ub("takesCourse")),
            Feature::P(ub("teacherOf")),
        ]
        .into();
        assert_eq!(f.features, expected);
    }

    #[test]
    fn query_nine_has_six_features() {
        let f = extract_query_features(&q9()).unwrap();
        assert_eq!(f.features.len(), 6);
        assert!(f.uses(&Feature::PO(Term::iri(RDF_TYPE), ub("Faculty"))));
        assert!(f.uses(&Feature::P(ub("advisor"))));
        assert_eq!(f.per_pattern_feature.len(), 6);
    }

    #[test]
    fn single_pattern_has_no_joins() {
        let f = extract_query_features(&parse_query("SELECT ?x WHERE { ?x <p> ?y }").unwrap()).unwrap();
        assert_eq!(f.features, [Feature::P(Term::iri("p"))].into());
        assert!(f.joins.is_empty());
    }

    #[test]
    fn variable_predicate_is_unfeaturizable() {
        let q = parse_query("SELECT ?x WHERE { ?x <p> ?y . ?y ?pred ?z }").unwrap().with_id("QV");
        assert_eq!(
            extract_query_features(&q).unwrap_err(),
            FeatureError::Unfeaturizable { query: "QV".into(), pattern: 1 }
        );
    }

    #[test]
    fn join_links_follow_shared_positions() {
        let q = parse_query("SELECT ?a WHERE { ?a <p> ?b . ?a <q> ?c . ?b <r> ?c }").unwrap();
        let f = extract_query_features(&q).unwrap();
        let kinds: Vec<_> = f.joins.iter().map(|l| (l.kind, l.left, l.right)).collect();
        assert_eq!(kinds, [(JoinKind::SS, 0, 1), (JoinKind::OS, 0, 2), (JoinKind::OO, 1, 2)]);
        for l in &f.joins {
            assert_ne!(l.left, l.right);
            if l.kind != JoinKind::OS {
                assert!(l.left < l.right);
            }
        }
    }

    #[test]
    fn features_ignore_variable_names() {
        let a = parse_query("SELECT ?x WHERE { ?x <p> ?y . ?y <q> <o> }").unwrap();
        let b = parse_query("SELECT ?m WHERE { ?m <p> ?n . ?n <q> <o> }").unwrap();
        let (fa, fb) = (extract_query_features(&a).unwrap(), extract_query_features(&b).unwrap());
        assert_eq!(fa.features, fb.features);
        let shape = |f: &QueryFeatures| f.joins.iter().map(|l| (l.kind, l.left, l.right)).collect::<Vec<_>>();
        assert_eq!(shape(&fa), shape(&fb));
    }

    #[test]
    fn keys_round_trip() {
        for f in [
            Feature::P(ub("advisor")),
            Feature::PO(Term::iri(RDF_TYPE), ub("Student")),
            Feature::PO(ub("name"), Term::literal("a|b")),
        ] {
            assert_eq!(Feature::from_key(&f.key()), Some(f.clone()));
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(serde_json::from_str::<Feature>(&json).unwrap(), f);
        }
        assert_eq!(Feature::from_key("X|a"), None);
        assert_eq!(Feature::from_key("P|a|b"), None);
    }

    fn sample_graph() -> KnowledgeGraph {
        parse_ntriples_str(&format!(
            "<s1> <{RDF_TYPE}> <{UB}Student> .\n<s2> <{RDF_TYPE}> <{UB}Student> .\n<s3> <{RDF_TYPE}> <{UB}Student> .\n<c1> <{RDF_TYPE}> <{UB}Course> .\n<s1> <{UB}takesCourse> <c1> .\n"
        ))
        .unwrap()
    }

    #[test]
    fn empty_workload_catalog_has_one_p_per_predicate() {
        let g = sample_graph();
        let cat = extract_dataset_features(&g, Vec::new());
        assert_eq!(cat.dataset_features.len(), 2);
        assert!(cat.dataset_features.keys().all(|f| f.kind() == FeatureKind::P));
        assert_eq!(cat.dataset_features.values().map(|s| s.count).sum::<usize>(), g.len());
    }

    #[test]
    fn workload_po_counts_come_from_the_index() {
        let g = sample_graph();
        let wl = vec![extract_query_features(&q7()).unwrap()];
        let cat = extract_dataset_features(&g, wl);
        assert_eq!(cat.count(&Feature::PO(Term::iri(RDF_TYPE), ub("Student"))), 3);
        assert_eq!(cat.count(&Feature::PO(Term::iri(RDF_TYPE), ub("Course"))), 1);
        // teacherOf has no triples: absent, counted as zero.
        assert!(!cat.contains(&Feature::P(ub("teacherOf"))));
        assert_eq!(cat.count(&Feature::P(ub("teacherOf"))), 0);
        let refinements: Vec<_> = cat.po_refinements(&Term::iri(RDF_TYPE)).cloned().collect();
        assert_eq!(refinements.len(), 2);
        let json = cat.to_json();
        assert_eq!(json["dataset_features"][format!("PO|{RDF_TYPE}|{UB}Student")], 3);
        assert_eq!(json["workload"][0]["id"], "Q7");
    }
}
