use std::collections::BTreeMap;
use std::fmt::Write;

use super::{FederatedQuery, Query, QueryError, TriplePattern};
use crate::ShardId;

fn select_line(out: &mut String, projected: &[String]) {
    out.push_str("SELECT");
    for v in projected {
        let _ = write!(out, " ?{v}");
    }
    out.push_str(" WHERE {\n");
}

fn pattern_lines(out: &mut String, patterns: &[TriplePattern], indent: &str) {
    for tp in patterns {
        let _ = writeln!(out, "{indent}{tp} .");
    }
}

/// Canonical text for a query: full IRIs, one pattern per line.
pub fn serialize_query(query: &Query) -> String {
    let mut out = String::new();
    select_line(&mut out, &query.projected);
    pattern_lines(&mut out, &query.patterns, "  ");
    out.push_str("}\n");
    out
}

/// SPARQL 1.1 federated text. Patterns of the primary node's group are
/// written inline; every other group becomes a `SERVICE <endpoint>` block.
/// A plan whose only group is the primary node serializes exactly like the
/// original query.
pub fn serialize_federated(
    fq: &FederatedQuery,
    endpoints: &BTreeMap<ShardId, String>,
) -> Result<String, QueryError> {
    let mut out = String::new();
    select_line(&mut out, &fq.projected);
    pattern_lines(&mut out, fq.ppn_group(), "  ");
    for (shard, patterns) in fq.remote_groups() {
        let endpoint = endpoints.get(shard).ok_or(QueryError::MissingEndpoint(*shard))?;
        let _ = writeln!(out, "  SERVICE <{endpoint}> {{");
        pattern_lines(&mut out, patterns, "    ");
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}
