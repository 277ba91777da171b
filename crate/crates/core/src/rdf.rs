//! RDF terms, triples and an in-memory graph with predicate, predicate-object,
//! subject and object indices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Well-known vocabulary.
pub mod vocab {
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    Literal,
}

/// An IRI or a literal.
///
/// For literals `lexical` holds the full quoted form as written in
/// N-Triples, including any `@lang` or `^^<datatype>` suffix, so equality is
/// purely syntactic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    kind: TermKind,
    lexical: String,
}

impl Term {
    /// Builds an IRI term. Returns `None` for empty IRIs or IRIs containing
    /// whitespace.
    pub fn try_iri(iri: impl Into<String>) -> Option<Term> {
        let lexical = iri.into();
        if lexical.is_empty() || lexical.chars().any(char::is_whitespace) {
            return None;
        }
        Some(Term { kind: TermKind::Iri, lexical })
    }

    /// Builds an IRI term, panicking on an invalid IRI.
    pub fn iri(iri: impl Into<String>) -> Term {
        let lexical = iri.into();
        Term::try_iri(lexical.clone()).unwrap_or_else(|| panic!("invalid IRI {lexical:?}"))
    }

    /// Builds a plain literal from an unescaped value.
    pub fn literal(value: &str) -> Term {
        Term { kind: TermKind::Literal, lexical: format!("\"{}\"", escape_literal(value)) }
    }

    /// Builds a literal from its full quoted form (`"v"`, `"v"@en`,
    /// `"v"^^<dt>`), kept verbatim.
    pub fn literal_raw(quoted: impl Into<String>) -> Term {
        Term { kind: TermKind::Literal, lexical: quoted.into() }
    }

    /// Lower bound of the term order, for range scans.
    pub(crate) fn smallest() -> Term {
        Term { kind: TermKind::Iri, lexical: String::new() }
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    pub fn is_literal(&self) -> bool {
        self.kind == TermKind::Literal
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::Literal => f.write_str(&self.lexical),
        }
    }
}

fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl Triple {
    /// Builds a triple; subject and predicate must be IRIs.
    pub fn new(s: Term, p: Term, o: Term) -> Option<Triple> {
        (s.is_iri() && p.is_iri()).then_some(Triple { s, p, o })
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.s, self.p, self.o)
    }
}

/// Dense triple identifier, assigned in first-insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripleId(pub u32);

impl TripleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A set of distinct triples with sorted id-list indices.
///
/// Ids are pushed in increasing order, so every index list stays sorted
/// without a post-pass.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    ids: HashMap<Triple, TripleId>,
    index_p: BTreeMap<Term, Vec<TripleId>>,
    index_po: BTreeMap<(Term, Term), Vec<TripleId>>,
    index_s: BTreeMap<Term, Vec<TripleId>>,
    index_o: BTreeMap<Term, Vec<TripleId>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a triple, returning its id and whether it was new.
    pub fn insert(&mut self, triple: Triple) -> (TripleId, bool) {
        if let Some(&id) = self.ids.get(&triple) {
            return (id, false);
        }
        let id = TripleId(u32::try_from(self.triples.len()).expect("graph exceeds u32 triple ids"));
        self.index_p.entry(triple.p.clone()).or_default().push(id);
        self.index_po.entry((triple.p.clone(), triple.o.clone())).or_default().push(id);
        self.index_s.entry(triple.s.clone()).or_default().push(id);
        self.index_o.entry(triple.o.clone()).or_default().push(id);
        self.ids.insert(triple.clone(), id);
        self.triples.push(triple);
        (id, true)
    }

    pub fn from_triples<I: IntoIterator<Item = Triple>>(triples: I) -> Self {
        let mut g = Self::new();
        for t in triples {
            g.insert(t);
        }
        g
    }

    /// The graph restricted to `ids`, re-numbered densely in ascending id order.
    pub fn subgraph<'a, I: IntoIterator<Item = &'a TripleId>>(&self, ids: I) -> KnowledgeGraph {
        let mut sorted: Vec<TripleId> = ids.into_iter().copied().collect();
        sorted.sort_unstable();
        sorted.dedup();
        KnowledgeGraph::from_triples(sorted.into_iter().map(|id| self.triples[id.index()].clone()))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple(&self, id: TripleId) -> &Triple {
        &self.triples[id.index()]
    }

    pub fn id_of(&self, triple: &Triple) -> Option<TripleId> {
        self.ids.get(triple).copied()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.ids.contains_key(triple)
    }

    pub fn lookup_p(&self, p: &Term) -> &[TripleId] {
        self.index_p.get(p).map_or(&[], Vec::as_slice)
    }

    pub fn lookup_po(&self, p: &Term, o: &Term) -> &[TripleId] {
        // BTreeMap needs an owned tuple key; the clone is two short strings.
        self.index_po.get(&(p.clone(), o.clone())).map_or(&[], Vec::as_slice)
    }

    pub fn lookup_s(&self, s: &Term) -> &[TripleId] {
        self.index_s.get(s).map_or(&[], Vec::as_slice)
    }

    pub fn lookup_o(&self, o: &Term) -> &[TripleId] {
        self.index_o.get(o).map_or(&[], Vec::as_slice)
    }

    /// Distinct predicates in term order.
    pub fn predicates(&self) -> impl Iterator<Item = &Term> {
        self.index_p.keys()
    }

    /// Distinct (predicate, object) keys in term order.
    pub fn po_keys(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.index_po.keys().map(|(p, o)| (p, o))
    }
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for KnowledgeGraph {}

#[cfg(test)]
mod tests {
    use super::*;

    fn iri(s: &str) -> Term {
        Term::iri(s)
    }

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(iri(s), iri(p), iri(o)).unwrap()
    }

    #[test]
    fn lookup_p_enumerates_matching_ids() {
        let g = KnowledgeGraph::from_triples([t("a", "p", "b"), t("c", "p", "d"), t("a", "q", "b")]);
        assert_eq!(g.lookup_p(&iri("p")), &[TripleId(0), TripleId(1)]);
        assert_eq!(g.lookup_p(&iri("q")), &[TripleId(2)]);
        assert!(g.lookup_p(&iri("missing")).is_empty());
    }

    #[test]
    fn lookup_po_is_subset_of_lookup_p() {
        let g = KnowledgeGraph::from_triples([t("a", "type", "Student"), t("b", "type", "Course")]);
        assert_eq!(g.lookup_po(&iri("type"), &iri("Student")), &[TripleId(0)]);
        assert!(g.lookup_po(&iri("type"), &iri("Faculty")).is_empty());
        for (p, o) in g.po_keys() {
            let within = g.lookup_p(p);
            assert!(g.lookup_po(p, o).iter().all(|id| within.contains(id)));
        }
    }

    #[test]
    fn duplicates_are_ignored() {
        let mut g = KnowledgeGraph::new();
        assert_eq!(g.insert(t("a", "p", "b")), (TripleId(0), true));
        assert_eq!(g.insert(t("a", "p", "b")), (TripleId(0), false));
        assert_eq!(g.len(), 1);
        assert_eq!(g.lookup_s(&iri("a")).len(), 1);
        assert_eq!(g.lookup_o(&iri("b")).len(), 1);
    }

    #[test]
    fn literal_and_iri_with_same_text_differ() {
        let lit = Term::literal_raw("\"x\"");
        let also = Term::iri("\"x\"");
        assert_ne!(lit, also);
        assert_eq!(Term::literal("a\"b").lexical(), "\"a\\\"b\"");
    }

    #[test]
    fn invalid_iris_are_rejected() {
        assert!(Term::try_iri("").is_none());
        assert!(Term::try_iri("a b").is_none());
        assert!(Triple::new(Term::literal("x"), iri("p"), iri("o")).is_none());
    }

    #[test]
    fn subgraph_renumbers_densely() {
        let g = KnowledgeGraph::from_triples([t("a", "p", "b"), t("c", "p", "d"), t("a", "q", "b")]);
        let sub = g.subgraph(&[TripleId(2), TripleId(0)]);
        assert_eq!(sub.len(), 2);
        assert_eq!(sub.triple(TripleId(0)), g.triple(TripleId(0)));
        assert_eq!(sub.triple(TripleId(1)), g.triple(TripleId(2)));
    }
}
