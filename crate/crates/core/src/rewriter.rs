//! Rewrites queries into federated plans against a partitioning: every
//! pattern goes to the shard holding its feature, the shard with the most
//! patterns becomes the primary processing node (PPN) and the other shards'
//! patterns become delegated groups.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::features::{extract_query_features, Feature, FeatureError, JoinLink};
use crate::partitioner::Partitioning;
use crate::query::{FederatedQuery, PatternTerm, Query, TriplePattern};
use crate::rdf::Term;
use crate::ShardId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("pattern {0} has a variable predicate")]
    VariablePredicate(String),
    #[error("unknown predicate {0}: no shard holds it")]
    UnknownPredicate(String),
    #[error("triples of predicate {0} are spread over several shards; pattern {1} needs all of them")]
    SpreadPredicate(String, String),
}

impl From<FeatureError> for RewriteError {
    fn from(e: FeatureError) -> Self {
        match e {
            FeatureError::Unfeaturizable { query, pattern } => {
                RewriteError::VariablePredicate(format!("{pattern} of query {query}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JoinLocality {
    Local,
    Distributed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FederatedPlan {
    pub query: FederatedQuery,
    pub join_annotations: Vec<(JoinLink, JoinLocality)>,
    /// Shard of each original pattern, by position.
    pub pattern_shards: Vec<ShardId>,
}

impl FederatedPlan {
    /// False when every pattern runs on one shard and the query is kept as is.
    pub fn rewritten(&self) -> bool {
        self.query.groups.len() > 1
    }

    /// Join links whose patterns sit on different shards.
    pub fn distributed_links(&self) -> usize {
        self.join_annotations.iter().filter(|(_, l)| *l == JoinLocality::Distributed).count()
    }

    /// Distinct join terms with at least one cross-shard link.
    pub fn distributed_joins(&self) -> usize {
        self.join_annotations
            .iter()
            .filter(|(_, l)| *l == JoinLocality::Distributed)
            .map(|(link, _)| &link.on)
            .collect::<BTreeSet<&PatternTerm>>()
            .len()
    }
}

/// Home shard of the pattern's most specific homed feature. A pattern with a
/// variable object reads every triple of its predicate, so all features of
/// that predicate must share the home.
pub fn locate_pattern(tp: &TriplePattern, meta: &Partitioning) -> Result<ShardId, RewriteError> {
    let p = tp.predicate().ok_or_else(|| RewriteError::VariablePredicate(tp.to_string()))?;
    if let PatternTerm::Const(o) = &tp.o {
        if let Some(shard) = meta.home(&Feature::PO(p.clone(), o.clone())) {
            return Ok(shard);
        }
    }
    let shard = meta.home(&Feature::P(p.clone())).ok_or_else(|| RewriteError::UnknownPredicate(p.to_string()))?;
    if tp.o.as_var().is_some() {
        let spread = meta
            .feature_home
            .range(Feature::PO(p.clone(), Term::smallest())..)
            .take_while(|(f, _)| matches!(f, Feature::PO(fp, _) if fp == p))
            .any(|(_, s)| *s != shard);
        if spread {
            return Err(RewriteError::SpreadPredicate(p.to_string(), tp.to_string()));
        }
    }
    Ok(shard)
}

/// Groups patterns by shard. The PPN holds the most patterns (ties to the
/// smaller id) and comes first; other groups follow in order of their first
/// pattern. A pattern over a predicate no shard holds matches nothing and
/// runs at the PPN.
pub fn rewrite(q: &Query, meta: &Partitioning) -> Result<FederatedPlan, RewriteError> {
    let located = q
        .patterns
        .iter()
        .map(|tp| match locate_pattern(tp, meta) {
            Ok(s) => Ok(Some(s)),
            Err(RewriteError::UnknownPredicate(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut counts: BTreeMap<ShardId, usize> = BTreeMap::new();
    for s in located.iter().flatten() {
        *counts.entry(*s).or_default() += 1;
    }
    let ppn = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map_or(ShardId(0), |(s, _)| *s);
    let pattern_shards: Vec<ShardId> = located.into_iter().map(|s| s.unwrap_or(ppn)).collect();
    let mut order = vec![ppn];
    for s in &pattern_shards {
        if !order.contains(s) {
            order.push(*s);
        }
    }
    let groups = order
        .iter()
        .map(|&shard| {
            let patterns = q.patterns.iter().zip(&pattern_shards).filter(|(_, s)| **s == shard);
            (shard, patterns.map(|(tp, _)| tp.clone()).collect())
        })
        .collect();

    let features = extract_query_features(q)?;
    let join_annotations = features
        .joins
        .into_iter()
        .map(|link| {
            let locality = if pattern_shards[link.left] == pattern_shards[link.right] {
                JoinLocality::Local
            } else {
                JoinLocality::Distributed
            };
            (link, locality)
        })
        .collect();
    let query = FederatedQuery { base_query_id: q.id.clone(), projected: q.projected.clone(), ppn, groups };
    Ok(FederatedPlan { query, join_annotations, pattern_shards })
}
