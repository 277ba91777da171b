//! Index-backed evaluation of basic graph patterns.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::query::{PatternTerm, TriplePattern};
use crate::rdf::{KnowledgeGraph, Term, Triple, TripleId};

/// A solution: variable name to bound term.
pub type Binding = BTreeMap<String, Term>;

/// Variable numbering shared by every relation of one evaluation.
#[derive(Debug, Clone, Default)]
pub(crate) struct Vars {
    names: Vec<String>,
}

impl Vars {
    pub(crate) fn of<'a>(patterns: impl IntoIterator<Item = &'a TriplePattern>) -> Self {
        let mut names: Vec<String> = Vec::new();
        for v in patterns.into_iter().flat_map(TriplePattern::vars) {
            if !names.iter().any(|n| n == v) {
                names.push(v.to_owned());
            }
        }
        Vars { names }
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn index(&self, name: &str) -> usize {
        self.names.iter().position(|n| n == name).expect("variable registered")
    }

    pub(crate) fn name(&self, i: usize) -> &str {
        &self.names[i]
    }
}

pub(crate) type Row<'g> = Vec<Option<&'g Term>>;

/// Rows over a known set of bound variables.
#[derive(Debug, Clone)]
pub(crate) struct Relation<'g> {
    pub(crate) vars: BTreeSet<usize>,
    pub(crate) rows: Vec<Row<'g>>,
}

/// Patterns in evaluation order: left to right, except that the next
/// pattern is the first remaining one sharing a variable with those already
/// placed, when one exists. This avoids cross products between patterns that
/// only connect later.
pub(crate) fn connected_order(patterns: &[&TriplePattern]) -> Vec<usize> {
    let mut remaining: Vec<usize> = (0..patterns.len()).collect();
    let mut bound: BTreeSet<&str> = BTreeSet::new();
    let mut order = Vec::with_capacity(patterns.len());
    while !remaining.is_empty() {
        let pos = remaining
            .iter()
            .position(|&i| patterns[i].vars().any(|v| bound.contains(v)))
            .unwrap_or(0);
        let i = remaining.remove(pos);
        bound.extend(patterns[i].vars());
        order.push(i);
    }
    order
}

/// Splits pattern indices into groups connected by shared variables.
pub(crate) fn components(patterns: &[&TriplePattern]) -> Vec<Vec<usize>> {
    let mut comps: Vec<(BTreeSet<&str>, Vec<usize>)> = Vec::new();
    for (i, tp) in patterns.iter().enumerate() {
        let vars: BTreeSet<&str> = tp.vars().collect();
        let mut merged = (vars, vec![i]);
        let mut rest = Vec::new();
        for c in comps {
            if c.0.is_disjoint(&merged.0) {
                rest.push(c);
            } else {
                merged.0.extend(c.0);
                merged.1.extend(c.1);
            }
        }
        merged.1.sort_unstable();
        rest.push(merged);
        comps = rest;
    }
    let mut out: Vec<Vec<usize>> = comps.into_iter().map(|c| c.1).collect();
    out.sort();
    out
}

fn resolve<'a>(t: &'a PatternTerm, row: &[Option<&'a Term>], vars: &Vars) -> Option<&'a Term> {
    match t {
        PatternTerm::Const(c) => Some(c),
        PatternTerm::Var(v) => row[vars.index(v)],
    }
}

fn candidates(store: &KnowledgeGraph, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<TripleId> {
    match (s, p, o) {
        (Some(s), Some(p), Some(o)) => {
            let t = Triple { s: s.clone(), p: p.clone(), o: o.clone() };
            store.id_of(&t).into_iter().collect()
        }
        (_, Some(p), Some(o)) => store.lookup_po(p, o).to_vec(),
        (Some(s), _, _) => store.lookup_s(s).to_vec(),
        (None, Some(p), None) => store.lookup_p(p).to_vec(),
        (None, None, Some(o)) => store.lookup_o(o).to_vec(),
        (None, None, None) => (0..store.len() as u32).map(TripleId).collect(),
    }
}

/// Evaluates patterns on one store. Each pattern evaluated against one
/// partial row counts as one index probe.
pub(crate) fn eval_rows<'g>(
    patterns: &[&'g TriplePattern],
    store: &'g KnowledgeGraph,
    vars: &Vars,
) -> (Relation<'g>, u64) {
    let mut rows: Vec<Row<'g>> = vec![vec![None; vars.len()]];
    let mut probes = 0u64;
    let mut bound = BTreeSet::new();
    for i in connected_order(patterns) {
        let tp = patterns[i];
        let mut next = Vec::new();
        for row in &rows {
            probes += 1;
            let (s, p, o) = (resolve(&tp.s, row, vars), resolve(&tp.p, row, vars), resolve(&tp.o, row, vars));
            'triples: for id in candidates(store, s, p, o) {
                let t = store.triple(id);
                let mut new = row.clone();
                for (pt, value) in [(&tp.s, &t.s), (&tp.p, &t.p), (&tp.o, &t.o)] {
                    match pt {
                        PatternTerm::Const(c) if c != value => continue 'triples,
                        PatternTerm::Const(_) => {}
                        PatternTerm::Var(v) => {
                            let slot = &mut new[vars.index(v)];
                            match slot {
                                Some(existing) if *existing != value => continue 'triples,
                                _ => *slot = Some(value),
                            }
                        }
                    }
                }
                next.push(new);
            }
        }
        rows = next;
        bound.extend(tp.vars().map(|v| vars.index(v)));
        if rows.is_empty() {
            break;
        }
    }
    if rows.is_empty() {
        bound = patterns.iter().flat_map(|tp| tp.vars()).map(|v| vars.index(v)).collect();
    }
    (Relation { vars: bound, rows }, probes)
}

/// Hash join on the variables both relations bind.
pub(crate) fn join<'g>(left: Relation<'g>, right: Relation<'g>) -> Relation<'g> {
    let shared: Vec<usize> = left.vars.intersection(&right.vars).copied().collect();
    let mut table: HashMap<Vec<&Term>, Vec<usize>> = HashMap::new();
    for (i, row) in right.rows.iter().enumerate() {
        let key = shared.iter().map(|&v| row[v].expect("bound")).collect();
        table.entry(key).or_default().push(i);
    }
    let mut rows = Vec::new();
    for row in &left.rows {
        let key: Vec<&Term> = shared.iter().map(|&v| row[v].expect("bound")).collect();
        for &j in table.get(&key).map_or(&[][..], Vec::as_slice) {
            let mut merged = row.clone();
            for &v in &right.vars {
                merged[v] = merged[v].or(right.rows[j][v]);
            }
            rows.push(merged);
        }
    }
    let vars = left.vars.union(&right.vars).copied().collect();
    Relation { vars, rows }
}

/// Joins relations, each next one being the first that shares a variable
/// with what has been joined so far.
pub(crate) fn join_all<'g>(mut relations: Vec<Relation<'g>>) -> Option<Relation<'g>> {
    if relations.is_empty() {
        return None;
    }
    let mut acc = relations.remove(0);
    while !relations.is_empty() {
        let pos = relations.iter().position(|r| !r.vars.is_disjoint(&acc.vars)).unwrap_or(0);
        acc = join(acc, relations.remove(pos));
    }
    Some(acc)
}

/// Projects rows onto `projected` (every variable when empty), collapsing
/// duplicates.
pub(crate) fn project(rows: &[Row<'_>], vars: &Vars, projected: &[String]) -> BTreeSet<Binding> {
    let idx: Vec<usize> = if projected.is_empty() {
        (0..vars.len()).collect()
    } else {
        projected.iter().map(|v| vars.index(v)).collect()
    };
    rows.iter()
        .map(|row| idx.iter().filter_map(|&i| row[i].map(|t| (vars.name(i).to_owned(), t.clone()))).collect())
        .collect()
}

/// All solutions of the patterns over `store`, over every variable.
pub fn eval_bgp(patterns: &[TriplePattern], store: &KnowledgeGraph) -> BTreeSet<Binding> {
    eval_bgp_counted(patterns, store, &[]).0
}

/// Solutions projected onto `projected` plus the probe count.
pub fn eval_bgp_counted(patterns: &[TriplePattern], store: &KnowledgeGraph, projected: &[String]) -> (BTreeSet<Binding>, u64) {
    let vars = Vars::of(patterns);
    let refs: Vec<&TriplePattern> = patterns.iter().collect();
    let (rel, probes) = eval_rows(&refs, store, &vars);
    (project(&rel.rows, &vars, projected), probes)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_ntriples_str;
    use crate::query::parse_query;

    const FIXTURE: &str = "\
<http://e/a> <http://e/p> <http://e/b> .
<http://e/b> <http://e/q> <http://e/c> .
<http://e/d> <http://e/p> <http://e/e> .
<http://e/c> <http://e/q> <http://e/a> .
";

    fn patterns(body: &str) -> Vec<TriplePattern> {
        parse_query(&format!("SELECT * WHERE {{ {body} }}")).unwrap().patterns
    }

    fn b(pairs: &[(&str, &str)]) -> Binding {
        pairs.iter().map(|(v, t)| (v.to_string(), Term::iri(format!("http://e/{t}")))).collect()
    }

    #[test]
    fn single_pattern() {
        let g = parse_ntriples_str("<http://e/a> <http://e/p> <http://e/b> .").unwrap();
        assert_eq!(eval_bgp(&patterns("?x <http://e/p> ?y"), &g), BTreeSet::from([b(&[("x", "a"), ("y", "b")])]));
    }

    #[test]
    fn elbow_join_matches_brute_force() {
        let g = parse_ntriples_str(FIXTURE).unwrap();
        let ps = patterns("?x <http://e/p> ?y . ?y <http://e/q> ?z");
        let got = eval_bgp(&ps, &g);
        assert_eq!(got, BTreeSet::from([b(&[("x", "a"), ("y", "b"), ("z", "c")])]));
        assert_eq!(got, oracle::brute_force(&ps, &g, &[]));
    }

    #[test]
    fn unsatisfiable_and_repeated_vars() {
        let g = parse_ntriples_str(FIXTURE).unwrap();
        assert!(eval_bgp(&patterns("?x <http://e/p> <http://e/zzz>"), &g).is_empty());
        assert!(eval_bgp(&patterns("?x <http://e/p> ?x"), &g).is_empty());
        let cycle = patterns("?x <http://e/p> ?y . ?y <http://e/q> ?z . ?z <http://e/q> ?x");
        assert_eq!(eval_bgp(&cycle, &g), oracle::brute_force(&cycle, &g, &[]));
        assert_eq!(eval_bgp(&cycle, &g).len(), 1);
    }

    #[test]
    fn order_connects_before_cross_product() {
        let ps = patterns("?a <http://e/p> ?b . ?c <http://e/p> ?d . ?b <http://e/q> ?c");
        let refs: Vec<_> = ps.iter().collect();
        assert_eq!(connected_order(&refs), [0, 2, 1]);
        assert_eq!(components(&refs), [vec![0, 1, 2]]);
        let ps = patterns("?a <http://e/p> ?b . ?c <http://e/p> ?d . ?b <http://e/q> ?e");
        let refs: Vec<_> = ps.iter().collect();
        assert_eq!(components(&refs), [vec![0, 2], vec![1]]);
    }

    #[test]
    fn probes_count_pattern_evaluations() {
        let g = parse_ntriples_str(FIXTURE).unwrap();
        // One probe for the first pattern, then one per binding of ?y (2).
        let (res, probes) = eval_bgp_counted(&patterns("?x <http://e/p> ?y . ?y <http://e/q> ?z"), &g, &["x".to_string()]);
        assert_eq!(probes, 3);
        assert_eq!(res, BTreeSet::from([b(&[("x", "a")])]));
    }
}
