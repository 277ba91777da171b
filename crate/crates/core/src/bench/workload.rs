use super::UB;
use crate::query::{parse_workload, PatternTerm, Query, TriplePattern};
use crate::rdf::vocab::RDF_TYPE;

const PREFIXES: &str = "\
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
PREFIX ub: <http://swat.cse.lehigh.edu/onto/univ-bench.owl#>
";

const DEPT0: &str = "<http://www.Department0.University0.edu>";
const UNIV0: &str = "<http://www.University0.edu>";

/// Fourteen queries in the shapes of the usual university benchmark suite:
/// stars, chains, triangles and single patterns. Q7 and Q9 are the pair
/// whose Jaccard distance is 1/3; Q2 is the six-pattern triangle query.
pub fn lubm_workload_text() -> String {
    let q = [
        ("Q1", "SELECT ?X WHERE { ?X rdf:type ub:GraduateStudent . ?X ub:takesCourse <http://www.Department0.University0.edu/GraduateCourse0> }".to_string()),
        ("Q2", "SELECT ?X ?Y ?Z WHERE { ?X rdf:type ub:GraduateStudent . ?Y rdf:type ub:University . ?Z rdf:type ub:Department . ?X ub:memberOf ?Z . ?Z ub:subOrganizationOf ?Y . ?X ub:undergraduateDegreeFrom ?Y }".to_string()),
        ("Q3", "SELECT ?X WHERE { ?X rdf:type ub:Publication . ?X ub:publicationAuthor <http://www.Department0.University0.edu/AssistantProfessor0> }".to_string()),
        ("Q4", format!("SELECT ?X ?Y1 ?Y2 WHERE {{ ?X rdf:type ub:Professor . ?X ub:worksFor {DEPT0} . ?X ub:researchInterest ?Y1 . ?X ub:doctoralDegreeFrom ?Y2 }}")),
        ("Q5", format!("SELECT ?X WHERE {{ ?X rdf:type ub:Student . ?X ub:memberOf {DEPT0} }}")),
        ("Q6", "SELECT ?X WHERE { ?X rdf:type ub:Student }".to_string()),
        ("Q7", "SELECT ?X ?Y WHERE { ?X rdf:type ub:Student . ?Y rdf:type ub:Course . ?X ub:takesCourse ?Y . <http://www.Department0.University0.edu/AssociateProfessor0> ub:teacherOf ?Y }".to_string()),
        ("Q8", format!("SELECT ?X ?Y WHERE {{ ?X rdf:type ub:Student . ?Y rdf:type ub:Department . ?X ub:memberOf ?Y . ?Y ub:subOrganizationOf {UNIV0} }}")),
        ("Q9", "SELECT ?X ?Y ?Z WHERE { ?X rdf:type ub:Student . ?Y rdf:type ub:Faculty . ?Z rdf:type ub:Course . ?X ub:advisor ?Y . ?Y ub:teacherOf ?Z . ?X ub:takesCourse ?Z }".to_string()),
        ("Q10", "SELECT ?X WHERE { ?X rdf:type ub:Student . ?X ub:takesCourse <http://www.Department0.University0.edu/GraduateCourse0> }".to_string()),
        ("Q11", format!("SELECT ?X WHERE {{ ?X rdf:type ub:ResearchGroup . ?X ub:subOrganizationOf ?Y . ?Y ub:subOrganizationOf {UNIV0} }}")),
        ("Q12", format!("SELECT ?X ?Y WHERE {{ ?X rdf:type ub:FullProfessor . ?Y rdf:type ub:Department . ?X ub:headOf ?Y . ?Y ub:subOrganizationOf {UNIV0} }}")),
        ("Q13", format!("SELECT ?X WHERE {{ ?X rdf:type ub:GraduateStudent . ?X ub:undergraduateDegreeFrom {UNIV0} }}")),
        ("Q14", "SELECT ?X WHERE { ?X rdf:type ub:UndergraduateStudent }".to_string()),
    ];
    let blocks: Vec<String> = q.iter().map(|(id, body)| format!("# id: {id}\n{PREFIXES}{body}\n")).collect();
    blocks.join("---\n")
}

pub fn lubm_workload() -> Vec<Query> {
    parse_workload(&lubm_workload_text()).expect("built-in workload parses")
}

/// `n` one-pattern queries cycling over the schema's classes and
/// properties, alternating constant and variable objects.
pub fn single_pattern_queries(n: usize) -> Vec<Query> {
    const CLASSES: [&str; 8] = [
        "Student", "UndergraduateStudent", "GraduateStudent", "Course", "Publication", "Faculty", "Department", "ResearchGroup",
    ];
    const PROPERTIES: [&str; 10] = [
        "takesCourse", "memberOf", "advisor", "teacherOf", "worksFor", "name", "emailAddress", "publicationAuthor",
        "undergraduateDegreeFrom", "subOrganizationOf",
    ];
    (0..n)
        .map(|i| {
            let pattern = if i % 2 == 0 {
                let class = CLASSES[(i / 2) % CLASSES.len()];
                TriplePattern::new(PatternTerm::var("x"), PatternTerm::iri(RDF_TYPE), PatternTerm::iri(format!("{UB}{class}")))
            } else {
                let prop = PROPERTIES[(i / 2) % PROPERTIES.len()];
                TriplePattern::new(PatternTerm::var("x"), PatternTerm::iri(format!("{UB}{prop}")), PatternTerm::var("y"))
            };
            let projected = pattern.vars().map(str::to_owned).collect();
            Query::new(format!("S{i}"), projected, vec![pattern]).expect("valid single pattern")
        })
        .collect()
}
