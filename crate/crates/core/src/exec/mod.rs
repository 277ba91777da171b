//! In-process query execution over shards with deterministic cost
//! accounting. Simulated time is derived from counts only, never from the
//! wall clock.

mod bgp;
mod report;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::partitioner::Partitioning;
use crate::query::{Query, TriplePattern};
use crate::rewriter::{rewrite, FederatedPlan, RewriteError};
use crate::{KnowledgeGraph, Scalar, ShardId};

pub use bgp::{eval_bgp, eval_bgp_counted, Binding};
pub use report::{compare_table, QueryReport, WorkloadReport};

use bgp::{components, join_all, project, Vars};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExecError {
    #[error("no store for {0}")]
    MissingShard(ShardId),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// Simulated milliseconds per remote call, per shipped row and per index
/// probe.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<C> {
    pub call_latency: C,
    pub per_row_cost: C,
    pub local_match_cost: C,
}

impl<C: Scalar> Default for CostModel<C> {
    fn default() -> Self {
        CostModel {
            call_latency: C::from_count(50),
            per_row_cost: C::ratio(1, 100),
            local_match_cost: C::ratio(1, 10_000),
        }
    }
}

impl<C: Scalar> CostModel<C> {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("call_latency", &self.call_latency),
            ("per_row_cost", &self.per_row_cost),
            ("local_match_cost", &self.local_match_cost),
        ] {
            if *v < C::zero() {
                return Err(format!("{name} is negative"));
            }
        }
        Ok(())
    }

    pub fn time(&self, remote_calls: usize, rows_shipped: u64, probes: u64) -> C {
        let count = |n: u64| C::from_u64(n).expect("count representable in cost type");
        self.call_latency.clone() * C::from_count(remote_calls)
            + self.per_row_cost.clone() * count(rows_shipped)
            + self.local_match_cost.clone() * count(probes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExecStats<C> {
    pub result_count: usize,
    /// Distinct join terms with a link crossing shards.
    pub distributed_joins: usize,
    /// Join links crossing shards.
    pub distributed_links: usize,
    pub remote_calls: usize,
    pub rows_shipped: u64,
    pub probes: u64,
    pub simulated_time: C,
}

/// Evaluates on the whole graph. The remote variant charges one call for
/// sending the query to a remote centralized store.
pub fn eval_centralized<C: Scalar>(
    q: &Query,
    g: &KnowledgeGraph,
    cm: &CostModel<C>,
    remote: bool,
) -> (BTreeSet<Binding>, ExecStats<C>) {
    let (bindings, probes) = eval_bgp_counted(&q.patterns, g, &q.projected);
    let remote_calls = usize::from(remote);
    let stats = ExecStats {
        result_count: bindings.len(),
        distributed_joins: 0,
        distributed_links: 0,
        remote_calls,
        rows_shipped: 0,
        probes,
        simulated_time: cm.time(remote_calls, 0, probes),
    };
    (bindings, stats)
}

/// Runs each group on its shard and joins the results at the PPN in plan
/// order. A plan with one group is evaluated exactly like the original
/// query on that shard. Within a group, patterns not connected by variables
/// are shipped as separate relations, so `rows_shipped` counts the group's
/// full result size without materializing cross products.
pub fn eval_federated<C: Scalar>(
    plan: &FederatedPlan,
    shards: &BTreeMap<ShardId, KnowledgeGraph>,
    cm: &CostModel<C>,
) -> Result<(BTreeSet<Binding>, ExecStats<C>), ExecError> {
    let fq = &plan.query;
    let store = |s: &ShardId| shards.get(s).ok_or(ExecError::MissingShard(*s));
    if !plan.rewritten() {
        let patterns: Vec<TriplePattern> = fq.ppn_group().to_vec();
        let (bindings, probes) = eval_bgp_counted(&patterns, store(&fq.ppn)?, &fq.projected);
        let stats = ExecStats {
            result_count: bindings.len(),
            distributed_joins: 0,
            distributed_links: 0,
            remote_calls: 0,
            rows_shipped: 0,
            probes,
            simulated_time: cm.time(0, 0, probes),
        };
        return Ok((bindings, stats));
    }

    let vars = Vars::of(fq.groups.iter().flat_map(|(_, ps)| ps.iter()));
    let mut relations = Vec::new();
    let mut probes = 0u64;
    let mut rows_shipped = 0u64;
    let mut remote_calls = 0usize;
    for (shard, patterns) in &fq.groups {
        let g = store(shard)?;
        let refs: Vec<&TriplePattern> = patterns.iter().collect();
        let mut group_rows = 1u64;
        for comp in components(&refs) {
            let part: Vec<&TriplePattern> = comp.iter().map(|&i| refs[i]).collect();
            let (rel, p) = bgp::eval_rows(&part, g, &vars);
            probes += p;
            group_rows = group_rows.saturating_mul(rel.rows.len() as u64);
            relations.push(rel);
        }
        if *shard != fq.ppn {
            remote_calls += 1;
            rows_shipped = rows_shipped.saturating_add(group_rows);
        }
    }
    let joined = join_all(relations).expect("plan has patterns");
    let bindings = project(&joined.rows, &vars, &fq.projected);
    let stats = ExecStats {
        result_count: bindings.len(),
        distributed_joins: plan.distributed_joins(),
        distributed_links: plan.distributed_links(),
        remote_calls,
        rows_shipped,
        probes,
        simulated_time: cm.time(remote_calls, rows_shipped, probes),
    };
    Ok((bindings, stats))
}

/// Rewrites and runs every query once. Failing queries are recorded and the
/// run continues.
pub fn run_workload<C: Scalar>(
    workload: &[Query],
    meta: &Partitioning,
    shards: &BTreeMap<ShardId, KnowledgeGraph>,
    cm: &CostModel<C>,
) -> WorkloadReport<C> {
    let mut report = WorkloadReport::default();
    for q in workload {
        let outcome = rewrite(q, meta)
            .map_err(ExecError::from)
            .and_then(|plan| eval_federated(&plan, shards, cm).map(|(_, stats)| (plan, stats)));
        match outcome {
            Ok((plan, stats)) => report.queries.push(QueryReport {
                query_id: q.id.clone(),
                ppn: plan.query.ppn,
                rewritten: plan.rewritten(),
                stats,
            }),
            Err(e) => report.failures.push((q.id.clone(), e.to_string())),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Feature;
    use crate::query::parse_query;
    use crate::{parse_ntriples_str, Rational64};

    const UB: &str = "http://swat.cse.lehigh.edu/onto/univ-bench.owl#";
    const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

    fn mini_university() -> KnowledgeGraph {
        let t = |s: &str, p: &str, o: &str| {
            let p = if p == "type" { RDF_TYPE.to_string() } else { format!("{UB}{p}") };
            let o = if o.starts_with(char::is_uppercase) { format!("{UB}{o}") } else { format!("http://e/{o}") };
            format!("<http://e/{s}> <{p}> <{o}> .\n")
        };
        let mut nt = String::new();
        for (s, p, o) in [
            ("g0", "type", "GraduateStudent"),
            ("g1", "type", "GraduateStudent"),
            ("u0", "type", "University"),
            ("u1", "type", "University"),
            ("d0", "type", "Department"),
            ("d1", "type", "Department"),
            ("g0", "memberOf", "d0"),
            ("g1", "memberOf", "d1"),
            ("d0", "subOrganizationOf", "u0"),
            ("d1", "subOrganizationOf", "u1"),
            ("g0", "undergraduateDegreeFrom", "u0"),
            ("g1", "undergraduateDegreeFrom", "u0"),
        ] {
            nt.push_str(&t(s, p, o));
        }
        parse_ntriples_str(&nt).unwrap()
    }

    fn triangle_partitioning(g: &KnowledgeGraph) -> Partitioning {
        let pred = |id: crate::TripleId| g.triple(id).p.lexical().to_owned();
        let shard_of = |p: &str| match p.rsplit('#').next().unwrap() {
            "type" => ShardId(0),
            "memberOf" | "subOrganizationOf" => ShardId(1),
            _ => ShardId(2),
        };
        let assignment: Vec<ShardId> = (0..g.len() as u32).map(|i| shard_of(&pred(crate::TripleId(i)))).collect();
        let home = g.predicates().map(|p| (Feature::P(p.clone()), shard_of(p.lexical()))).collect();
        Partitioning::from_assignment(3, &assignment, home)
    }

    #[test]
    fn triangle_plan_matches_centralized() {
        let g = mini_university();
        let meta = triangle_partitioning(&g);
        let shards = meta.shard_graphs(&g);
        let q = parse_query(crate::query::parser_fixtures::LUBM_Q2).unwrap();
        let plan = rewrite(&q, &meta).unwrap();
        let cm = CostModel::<Rational64>::default();
        let (fed, stats) = eval_federated(&plan, &shards, &cm).unwrap();
        let (central, _) = eval_centralized(&q, &g, &cm, false);
        assert_eq!(fed, central);
        assert_eq!(fed.len(), 1);
        assert_eq!(stats.remote_calls, 2);
        assert_eq!(stats.distributed_joins, 3);
        // Shard 1 ships its two chained memberships, shard 2 both degrees.
        assert_eq!(stats.rows_shipped, 4);
        assert_eq!(stats.simulated_time, cm.time(2, 4, stats.probes));
    }

    #[test]
    fn local_plan_has_centralized_stats() {
        let g = mini_university();
        let meta = Partitioning::from_assignment(
            1,
            &vec![ShardId(0); g.len()],
            g.predicates().map(|p| (Feature::P(p.clone()), ShardId(0))).collect(),
        );
        let shards = meta.shard_graphs(&g);
        let q = parse_query(crate::query::parser_fixtures::LUBM_Q2).unwrap();
        let cm = CostModel::<Rational64>::default();
        let (fed, fs) = eval_federated(&rewrite(&q, &meta).unwrap(), &shards, &cm).unwrap();
        let (central, cs) = eval_centralized(&q, &g, &cm, false);
        assert_eq!((fed, fs), (central, cs));
        let (_, remote) = eval_centralized(&q, &g, &cm, true);
        assert_eq!(remote.simulated_time - cm.time(0, 0, remote.probes), Rational64::from_integer(50));
    }

    #[test]
    fn missing_shard_and_failures() {
        let g = mini_university();
        let meta = triangle_partitioning(&g);
        let q = parse_query(crate::query::parser_fixtures::LUBM_Q2).unwrap().with_id("Q2");
        let plan = rewrite(&q, &meta).unwrap();
        let cm = CostModel::<f64>::default();
        assert_eq!(eval_federated(&plan, &BTreeMap::new(), &cm).unwrap_err(), ExecError::MissingShard(ShardId(0)));
        let bad = parse_query("SELECT ?x WHERE { ?x ?p ?y }").unwrap().with_id("bad");
        let unknown = parse_query("SELECT ?x WHERE { ?x <http://e/unknown> ?y }").unwrap().with_id("unknown");
        let report = run_workload(&[q, bad, unknown], &meta, &meta.shard_graphs(&g), &cm);
        assert_eq!(report.queries.len(), 2);
        assert_eq!(report.queries[1].stats.result_count, 0);
        assert_eq!(report.failures[0].0, "bad");
        assert!(run_workload(&[], &meta, &BTreeMap::new(), &cm).queries.is_empty());
    }

    #[test]
    fn default_costs() {
        let cm = CostModel::<Rational64>::default();
        assert_eq!(cm.time(1, 100, 10_000), Rational64::from_integer(52));
        assert!(CostModel { call_latency: -1.0, per_row_cost: 0.0, local_match_cost: 0.0 }.validate().is_err());
    }
}
