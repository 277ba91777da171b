use std::fmt::Write;

use serde_json::{json, Value};

use super::ExecStats;
use crate::{Scalar, ShardId};

#[derive(Debug, Clone, PartialEq)]
pub struct QueryReport<C> {
    pub query_id: String,
    pub ppn: ShardId,
    pub rewritten: bool,
    pub stats: ExecStats<C>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadReport<C> {
    pub queries: Vec<QueryReport<C>>,
    /// Query id and error message of queries that could not run.
    pub failures: Vec<(String, String)>,
}

impl<C> Default for WorkloadReport<C> {
    fn default() -> Self {
        WorkloadReport { queries: Vec::new(), failures: Vec::new() }
    }
}

impl<C: Scalar> WorkloadReport<C> {
    pub fn total_distributed_joins(&self) -> usize {
        self.queries.iter().map(|q| q.stats.distributed_joins).sum()
    }

    pub fn total_distributed_links(&self) -> usize {
        self.queries.iter().map(|q| q.stats.distributed_links).sum()
    }

    pub fn total_remote_calls(&self) -> usize {
        self.queries.iter().map(|q| q.stats.remote_calls).sum()
    }

    pub fn total_rows_shipped(&self) -> u64 {
        self.queries.iter().map(|q| q.stats.rows_shipped).fold(0, u64::saturating_add)
    }

    pub fn total_simulated_time(&self) -> C {
        self.queries.iter().fold(C::zero(), |acc, q| acc + q.stats.simulated_time.clone())
    }

    /// Mean over executed queries; zero for an empty report.
    pub fn mean_simulated_time(&self) -> C {
        if self.queries.is_empty() {
            return C::zero();
        }
        self.total_simulated_time() / C::from_count(self.queries.len())
    }

    pub fn to_json(&self) -> Value {
        let time = |c: &C| json!({ "ms": c.to_f64_lossy(), "exact": c.to_string() });
        let queries: Vec<Value> = self
            .queries
            .iter()
            .map(|q| {
                json!({
                    "id": q.query_id,
                    "ppn": q.ppn,
                    "rewritten": q.rewritten,
                    "results": q.stats.result_count,
                    "distributed_joins": q.stats.distributed_joins,
                    "distributed_links": q.stats.distributed_links,
                    "remote_calls": q.stats.remote_calls,
                    "rows_shipped": q.stats.rows_shipped,
                    "probes": q.stats.probes,
                    "simulated_time": time(&q.stats.simulated_time),
                })
            })
            .collect();
        let failures: Vec<Value> =
            self.failures.iter().map(|(id, e)| json!({ "id": id, "error": e })).collect();
        json!({
            "queries": queries,
            "failures": failures,
            "totals": {
                "distributed_joins": self.total_distributed_joins(),
                "distributed_links": self.total_distributed_links(),
                "remote_calls": self.total_remote_calls(),
                "rows_shipped": self.total_rows_shipped(),
                "simulated_time": time(&self.total_simulated_time()),
                "mean_simulated_time": time(&self.mean_simulated_time()),
            },
        })
    }

    /// Aligned columns: id, results, distributed joins, remote calls, rows
    /// shipped, simulated ms.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<12} {:>9} {:>6} {:>7} {:>12} {:>14}\n", "query", "results", "djoins", "remote", "rows", "sim-ms");
        for q in &self.queries {
            let s = &q.stats;
            let _ = writeln!(
                out,
                "{:<12} {:>9} {:>6} {:>7} {:>12} {:>14.4}",
                q.query_id,
                s.result_count,
                s.distributed_joins,
                s.remote_calls,
                s.rows_shipped,
                s.simulated_time.to_f64_lossy()
            );
        }
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>6} {:>7} {:>12} {:>14.4}",
            "total",
            self.queries.iter().map(|q| q.stats.result_count).sum::<usize>(),
            self.total_distributed_joins(),
            self.total_remote_calls(),
            self.total_rows_shipped(),
            self.total_simulated_time().to_f64_lossy()
        );
        for (id, e) in &self.failures {
            let _ = writeln!(out, "failed {id}: {e}");
        }
        out
    }
}

/// Side-by-side per-query table of two runs of the same workload.
pub fn compare_table<C: Scalar>(left_name: &str, left: &WorkloadReport<C>, right_name: &str, right: &WorkloadReport<C>) -> String {
    let mut out = format!(
        "{:<12} {:>8} {:>14} {:>8} {:>14}\n",
        "query",
        format!("{left_name}-dj"),
        format!("{left_name}-ms"),
        format!("{right_name}-dj"),
        format!("{right_name}-ms")
    );
    let mut ids: Vec<&str> = left.queries.iter().map(|q| q.query_id.as_str()).collect();
    for q in &right.queries {
        if !ids.contains(&q.query_id.as_str()) {
            ids.push(&q.query_id);
        }
    }
    let cell = |r: &WorkloadReport<C>, id: &str| {
        r.queries.iter().find(|q| q.query_id == id).map_or((String::from("-"), String::from("-")), |q| {
            (q.stats.distributed_joins.to_string(), format!("{:.4}", q.stats.simulated_time.to_f64_lossy()))
        })
    };
    for id in ids {
        let ((ld, lt), (rd, rt)) = (cell(left, id), cell(right, id));
        let _ = writeln!(out, "{id:<12} {ld:>8} {lt:>14} {rd:>8} {rt:>14}");
    }
    let _ = writeln!(
        out,
        "{:<12} {:>8} {:>14.4} {:>8} {:>14.4}",
        "total",
        left.total_distributed_joins(),
        left.total_simulated_time().to_f64_lossy(),
        right.total_distributed_joins(),
        right.total_simulated_time().to_f64_lossy()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational64;

    fn row(id: &str, dj: usize, t: i64) -> QueryReport<Rational64> {
        QueryReport {
            query_id: id.into(),
            ppn: ShardId(0),
            rewritten: dj > 0,
            stats: ExecStats {
                result_count: 1,
                distributed_joins: dj,
                distributed_links: dj,
                remote_calls: dj,
                rows_shipped: 0,
                probes: 0,
                simulated_time: Rational64::from_integer(t),
            },
        }
    }

    #[test]
    fn totals_and_text() {
        let r = WorkloadReport { queries: vec![row("Q1", 0, 1), row("Q2", 2, 101)], failures: vec![] };
        assert_eq!(r.total_distributed_joins(), 2);
        assert_eq!(r.mean_simulated_time(), Rational64::from_integer(51));
        let text = r.to_text();
        assert!(text.lines().nth(2).unwrap().starts_with("Q2"));
        assert!(text.contains("total"));
        assert_eq!(r.to_json()["totals"]["simulated_time"]["exact"], "102");
        assert_eq!(WorkloadReport::<f64>::default().mean_simulated_time(), 0.0);
    }

    #[test]
    fn compare_is_side_by_side() {
        let a = WorkloadReport { queries: vec![row("Q1", 0, 1)], failures: vec![] };
        let b = WorkloadReport { queries: vec![row("Q1", 3, 200)], failures: vec![] };
        let t = compare_table("wawpart", &a, "random", &b);
        let line = t.lines().nth(1).unwrap();
        assert_eq!(line.split_whitespace().collect::<Vec<_>>(), ["Q1", "0", "1.0000", "3", "200.0000"]);
    }
}
