use std::fmt::Write;

use serde_json::{json, Value};

use super::{Dendrogram, DistanceMatrix};
use crate::Scalar;

/// `# leaf <index> <id>` lines then one `<new> <left> <right> <height>`
/// line per merge.
pub fn dendrogram_text<D: Scalar>(d: &Dendrogram<D>) -> String {
    let mut out = format!("# linkage {}\n", d.linkage);
    for (i, id) in d.leaves.iter().enumerate() {
        let _ = writeln!(out, "# leaf {i} {id}");
    }
    for m in &d.merges {
        let _ = writeln!(out, "{} {} {} {:.6}", m.new, m.left, m.right, m.height.to_f64_lossy());
    }
    out
}

pub fn dendrogram_dot<D: Scalar>(d: &Dendrogram<D>) -> String {
    let mut out = String::from("digraph dendrogram {\n  node [shape=box];\n");
    for (i, id) in d.leaves.iter().enumerate() {
        let _ = writeln!(out, "  n{i} [label=\"{}\"];", id.replace('"', "\\\""));
    }
    for m in &d.merges {
        let _ = writeln!(out, "  n{} [shape=ellipse, label=\"{:.2}\"];", m.new, m.height.to_f64_lossy());
        let _ = writeln!(out, "  n{} -> n{};\n  n{} -> n{};", m.new, m.left, m.new, m.right);
    }
    out.push_str("}\n");
    out
}

/// Float distances for tools plus the exact values as strings.
pub fn matrix_json<D: Scalar>(m: &DistanceMatrix<D>) -> Value {
    let n = m.len();
    let rows = |f: &dyn Fn(&D) -> Value| -> Vec<Vec<Value>> {
        (0..n).map(|i| m.row(i).iter().map(f).collect()).collect()
    };
    json!({
        "ids": m.ids(),
        "distances": rows(&|v| json!(v.to_f64_lossy())),
        "exact": rows(&|v| json!(v.to_string())),
    })
}
