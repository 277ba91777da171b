//! SELECT queries over basic graph patterns and their federated form.

mod parser;
mod serialize;
mod workload;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::Term;
use crate::ShardId;

pub use parser::{parse_federated, parse_query, FederatedText};
pub use serialize::{serialize_federated, serialize_query};
pub use workload::{parse_workload, serialize_workload};

#[cfg(test)]
pub(crate) mod parser_fixtures {
    pub(crate) const LUBM_Q2: &str = "\
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX ub: <http://swat.cse.lehigh.edu/onto/univ-bench.owl#>
SELECT ?X ?Y ?Z FROM <lubm> WHERE { ?X rdf:type ub:GraduateStudent . ?Y rdf:type ub:University . ?Z rdf:type ub:Department . ?X ub:memberOf ?Z . ?Z ub:subOrganizationOf ?Y . ?X ub:undergraduateDegreeFrom ?Y }";
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternTerm {
    Var(String),
    Const(Term),
}

impl PatternTerm {
    pub fn var(name: impl Into<String>) -> Self {
        PatternTerm::Var(name.into())
    }

    pub fn iri(iri: impl Into<String>) -> Self {
        PatternTerm::Const(Term::iri(iri))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Term> {
        match self {
            PatternTerm::Const(t) => Some(t),
            PatternTerm::Var(_) => None,
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Const(t) => write!(f, "{t}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub s: PatternTerm,
    pub p: PatternTerm,
    pub o: PatternTerm,
}

impl TriplePattern {
    pub fn new(s: PatternTerm, p: PatternTerm, o: PatternTerm) -> Self {
        TriplePattern { s, p, o }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.s, &self.p, &self.o].into_iter().filter_map(PatternTerm::as_var)
    }

    /// Constant predicate, if any.
    pub fn predicate(&self) -> Option<&Term> {
        self.p.as_const()
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.s, self.p, self.o)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub id: String,
    pub projected: Vec<String>,
    pub patterns: Vec<TriplePattern>,
}

impl Query {
    /// Checks that patterns are non-empty, projected variables occur in the
    /// patterns and constant positions hold the right term kinds.
    pub fn new(
        id: impl Into<String>,
        projected: Vec<String>,
        patterns: Vec<TriplePattern>,
    ) -> Result<Query, QueryError> {
        let query = Query { id: id.into(), projected, patterns };
        query.validate()?;
        Ok(query)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    fn validate(&self) -> Result<(), QueryError> {
        if self.patterns.is_empty() {
            return Err(QueryError::EmptyPattern);
        }
        for tp in &self.patterns {
            for (term, position) in [(&tp.s, "subject"), (&tp.p, "predicate")] {
                if let PatternTerm::Const(t) = term {
                    if !t.is_iri() {
                        return Err(QueryError::InvalidTerm { position, term: t.to_string() });
                    }
                }
            }
        }
        let vars = self.variables();
        if let Some(missing) = self.projected.iter().find(|v| !vars.contains(v.as_str())) {
            return Err(QueryError::UnboundProjection(missing.clone()));
        }
        Ok(())
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        self.patterns.iter().flat_map(TriplePattern::vars).collect()
    }

    /// Variables in order of first occurrence.
    pub fn variables_in_order(&self) -> Vec<String> {
        let mut seen = Vec::<String>::new();
        for v in self.patterns.iter().flat_map(TriplePattern::vars) {
            if !seen.iter().any(|s| s == v) {
                seen.push(v.to_owned());
            }
        }
        seen
    }
}

/// A query split into per-shard pattern groups. The group on `ppn` runs
/// locally at the primary processing node; the others are delegated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FederatedQuery {
    pub base_query_id: String,
    pub projected: Vec<String>,
    pub ppn: ShardId,
    pub groups: Vec<(ShardId, Vec<TriplePattern>)>,
}

impl FederatedQuery {
    pub fn ppn_group(&self) -> &[TriplePattern] {
        self.groups
            .iter()
            .find(|(shard, _)| *shard == self.ppn)
            .map_or(&[], |(_, patterns)| patterns.as_slice())
    }

    pub fn remote_groups(&self) -> impl Iterator<Item = &(ShardId, Vec<TriplePattern>)> {
        self.groups.iter().filter(move |(shard, _)| *shard != self.ppn)
    }

    /// True when every pattern runs on the primary node.
    pub fn is_local(&self) -> bool {
        self.groups.iter().all(|(shard, _)| *shard == self.ppn)
    }

    pub fn pattern_count(&self) -> usize {
        self.groups.iter().map(|(_, patterns)| patterns.len()).sum()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("unsupported keyword {0}")]
    UnsupportedKeyword(String),
    #[error("undeclared prefix '{0}:'")]
    UndeclaredPrefix(String),
    #[error("query has no triple patterns")]
    EmptyPattern,
    #[error("projected variable ?{0} does not occur in the pattern")]
    UnboundProjection(String),
    #[error("{term} is not allowed as {position}")]
    InvalidTerm { position: &'static str, term: String },
    #[error("no endpoint configured for {0}")]
    MissingEndpoint(ShardId),
    #[error("SERVICE endpoint <{0}> is not mapped to a shard")]
    UnknownEndpoint(String),
    #[error("workload query {index}: {source}")]
    Workload { index: usize, source: Box<QueryError> },
}
