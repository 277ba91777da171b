//! Workload files: queries separated by a line holding only `---`, each
//! optionally preceded by `# id: <name>`. Unnamed queries are called `Q1`,
//! `Q2`, ... by position.

use super::{parse_query, serialize_query, Query, QueryError};

pub fn parse_workload(text: &str) -> Result<Vec<Query>, QueryError> {
    let mut blocks: Vec<Vec<&str>> = vec![Vec::new()];
    for line in text.lines() {
        if line.trim() == "---" {
            blocks.push(Vec::new());
        } else {
            blocks.last_mut().expect("at least one block").push(line);
        }
    }
    let mut queries = Vec::new();
    for block in blocks {
        if block.iter().all(|l| l.trim().is_empty() || l.trim_start().starts_with('#') && id_of(l).is_none()) {
            continue;
        }
        let index = queries.len() + 1;
        let mut id = None;
        let mut body = String::new();
        for line in block {
            match id_of(line) {
                Some(name) if id.is_none() && body.trim().is_empty() => id = Some(name.to_owned()),
                _ => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let query = parse_query(&body)
            .map_err(|source| QueryError::Workload { index, source: Box::new(source) })?;
        queries.push(query.with_id(id.unwrap_or_else(|| format!("Q{index}"))));
    }
    Ok(queries)
}

fn id_of(line: &str) -> Option<&str> {
    let rest = line.trim().strip_prefix('#')?.trim_start().strip_prefix("id:")?.trim();
    (!rest.is_empty()).then_some(rest)
}

pub fn serialize_workload(queries: &[Query]) -> String {
    let mut out = String::new();
    for (i, q) in queries.iter().enumerate() {
        if i > 0 {
            out.push_str("---\n");
        }
        if !q.id.is_empty() {
            out.push_str(&format!("# id: {}\n", q.id));
        }
        out.push_str(&serialize_query(q));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_default_by_position() {
        let text = "SELECT ?x WHERE { ?x <p> ?y }\n---\n# id: star\nSELECT ?y WHERE { ?x <q> ?y }\n---\nSELECT ?x WHERE { ?x <r> <o> }\n";
        let qs = parse_workload(text).unwrap();
        let ids: Vec<_> = qs.iter().map(|q| q.id.as_str()).collect();
        assert_eq!(ids, ["Q1", "star", "Q3"]);
    }

    #[test]
    fn round_trip_and_empty_blocks() {
        let text = "# id: A\nSELECT ?x WHERE { ?x <p> ?y }\n---\n\n---\n# id: B\nSELECT ?y WHERE { ?x <q> ?y }\n---\n";
        let qs = parse_workload(text).unwrap();
        assert_eq!(qs.len(), 2);
        assert_eq!(parse_workload(&serialize_workload(&qs)).unwrap(), qs);
        assert!(parse_workload("").unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_query() {
        let err = parse_workload("SELECT ?x WHERE { ?x <p> ?y }\n---\nSELECT ?x WHERE { ?x ub:p ?y }").unwrap_err();
        assert_eq!(
            err,
            QueryError::Workload { index: 2, source: Box::new(QueryError::UndeclaredPrefix("ub".into())) }
        );
    }
}
