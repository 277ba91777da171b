use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BenchError, UB};
use crate::rdf::vocab::RDF_TYPE;
use crate::{KnowledgeGraph, Term, Triple};

/// One department is well above this, so every constant the workload names
/// exists once the target is reached.
pub const MIN_TRIPLES: usize = 1000;

const DEPARTMENTS_PER_UNIVERSITY: usize = 6;
/// Universities that degrees may come from, generated or not.
const DEGREE_UNIVERSITIES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    /// Exact number of triples to emit.
    pub triples: usize,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec { seed: 1, triples: 15_000 }
    }
}

struct Emitter {
    rng: ChaCha8Rng,
    triples: Vec<Triple>,
    target: usize,
}

impl Emitter {
    fn full(&self) -> bool {
        self.triples.len() >= self.target
    }

    fn add(&mut self, s: &str, p: &str, o: Term) {
        let p = if p == "type" { RDF_TYPE.to_owned() } else { format!("{UB}{p}") };
        self.triples.push(Triple::new(Term::iri(s), Term::iri(p), o).expect("IRI subject and predicate"));
    }

    fn link(&mut self, s: &str, p: &str, o: &str) {
        self.add(s, p, Term::iri(o));
    }

    fn types(&mut self, s: &str, classes: &[&str]) {
        for c in classes {
            self.link(s, "type", &format!("{UB}{c}"));
        }
    }

    fn text(&mut self, s: &str, p: &str, value: &str) {
        self.add(s, p, Term::literal(value));
    }

    fn person(&mut self, iri: &str, local: &str, dept: &str) {
        self.text(iri, "name", local);
        let host = dept.trim_start_matches("http://www.");
        self.text(iri, "emailAddress", &format!("{local}@{host}"));
        let phone = format!("{:03}-{:03}-{:04}", self.rng.gen_range(0..1000), self.rng.gen_range(0..1000), self.rng.gen_range(0..10_000));
        self.text(iri, "telephone", &phone);
    }

    fn degree_university(&mut self) -> String {
        university(self.rng.gen_range(0..DEGREE_UNIVERSITIES))
    }
}

fn university(i: usize) -> String {
    format!("http://www.University{i}.edu")
}

/// Deterministic university-domain graph with exactly `spec.triples`
/// triples. Entities are emitted department by department; the last one is
/// cut off where the target is reached. Superclass types (Student,
/// Professor, Faculty, Course) are stated explicitly so plain pattern
/// matching needs no inference.
pub fn generate_lubm(spec: &GeneratorSpec) -> Result<KnowledgeGraph, BenchError> {
    if spec.triples < MIN_TRIPLES {
        return Err(BenchError::ScaleTooSmall { target: spec.triples, min: MIN_TRIPLES });
    }
    let mut e = Emitter { rng: ChaCha8Rng::seed_from_u64(spec.seed), triples: Vec::new(), target: spec.triples };
    'outer: for u in 0.. {
        let univ = university(u);
        e.types(&univ, &["University"]);
        e.text(&univ, "name", &format!("University{u}"));
        for d in 0..DEPARTMENTS_PER_UNIVERSITY {
            department(&mut e, u, d);
            if e.full() {
                break 'outer;
            }
        }
    }
    e.triples.truncate(spec.triples);
    let graph = KnowledgeGraph::from_triples(e.triples);
    debug_assert_eq!(graph.len(), spec.triples, "generator emits no duplicates");
    Ok(graph)
}

/// Class, superclasses, head count range and publications range.
type Rank = (&'static str, &'static [&'static str], (usize, usize), (usize, usize));

fn department(e: &mut Emitter, u: usize, d: usize) {
    let univ = university(u);
    let dept = format!("http://www.Department{d}.University{u}.edu");
    e.types(&dept, &["Department"]);
    e.link(&dept, "subOrganizationOf", &univ);
    e.text(&dept, "name", &format!("Department{d}"));

    let ranks: [Rank; 4] = [
        ("FullProfessor", &["Professor", "Faculty"], (2, 4), (15, 20)),
        ("AssociateProfessor", &["Professor", "Faculty"], (3, 5), (10, 18)),
        ("AssistantProfessor", &["Professor", "Faculty"], (2, 4), (5, 10)),
        ("Lecturer", &["Faculty"], (1, 3), (0, 5)),
    ];
    let mut faculty: Vec<(String, usize)> = Vec::new();
    let mut professors: Vec<String> = Vec::new();
    for (class, supers, (lo, hi), pubs) in ranks {
        let n = e.rng.gen_range(lo..=hi);
        for i in 0..n {
            let local = format!("{class}{i}");
            let iri = format!("{dept}/{local}");
            e.types(&iri, &[class]);
            e.types(&iri, supers);
            e.link(&iri, "worksFor", &dept);
            e.person(&iri, &local, &dept);
            for degree in ["undergraduateDegreeFrom", "mastersDegreeFrom", "doctoralDegreeFrom"] {
                let from = e.degree_university();
                e.link(&iri, degree, &from);
            }
            if class != "Lecturer" {
                let topic = e.rng.gen_range(0..30);
                e.text(&iri, "researchInterest", &format!("Research{topic}"));
                professors.push(iri.clone());
            }
            let count = e.rng.gen_range(pubs.0..=pubs.1);
            faculty.push((iri, count));
        }
    }
    e.link(&faculty[0].0, "headOf", &dept);

    let courses = course_block(e, &dept, "Course", &["Course"], faculty.len() * 3 / 2);
    let grad_courses = course_block(e, &dept, "GraduateCourse", &["GraduateCourse", "Course"], faculty.len() - 1);
    for (i, c) in courses.iter().chain(&grad_courses).enumerate() {
        let teacher = faculty[i % faculty.len()].0.clone();
        e.link(&teacher, "teacherOf", c);
    }

    let undergrads = e.rng.gen_range(2..=3) * faculty.len();
    for i in 0..undergrads {
        let local = format!("UndergraduateStudent{i}");
        let iri = format!("{dept}/{local}");
        e.types(&iri, &["UndergraduateStudent", "Student"]);
        e.link(&iri, "memberOf", &dept);
        e.person(&iri, &local, &dept);
        let n = e.rng.gen_range(2..=3);
        for c in sample(&mut e.rng, courses.len(), n) {
            e.link(&iri, "takesCourse", &courses[c]);
        }
        if e.rng.gen_bool(0.2) {
            let a = professors.choose(&mut e.rng).expect("department has professors").clone();
            e.link(&iri, "advisor", &a);
        }
    }

    let mut grads = Vec::new();
    for i in 0..faculty.len() {
        let local = format!("GraduateStudent{i}");
        let iri = format!("{dept}/{local}");
        e.types(&iri, &["GraduateStudent", "Student"]);
        e.link(&iri, "memberOf", &dept);
        let from = if e.rng.gen_bool(0.5) { univ.clone() } else { e.degree_university() };
        e.link(&iri, "undergraduateDegreeFrom", &from);
        e.person(&iri, &local, &dept);
        let n = e.rng.gen_range(1..=3);
        for c in sample(&mut e.rng, grad_courses.len(), n) {
            e.link(&iri, "takesCourse", &grad_courses[c]);
        }
        let a = professors.choose(&mut e.rng).expect("department has professors").clone();
        e.link(&iri, "advisor", &a);
        if e.rng.gen_bool(0.3) {
            let c = courses.choose(&mut e.rng).expect("department has courses").clone();
            e.link(&iri, "teachingAssistantOf", &c);
        }
        grads.push(iri);
    }

    for g in 0..e.rng.gen_range(2..=4) {
        let iri = format!("{dept}/ResearchGroup{g}");
        e.types(&iri, &["ResearchGroup"]);
        e.link(&iri, "subOrganizationOf", &dept);
    }

    for (author, count) in &faculty {
        for p in 0..*count {
            let iri = format!("{author}/Publication{p}");
            e.types(&iri, &["Publication"]);
            e.text(&iri, "name", &format!("Publication{p}"));
            e.link(&iri, "publicationAuthor", author);
            let coauthors = e.rng.gen_range(1..=2);
            for g in sample(&mut e.rng, grads.len(), coauthors) {
                e.link(&iri, "publicationAuthor", &grads[g]);
            }
        }
    }
}

fn course_block(e: &mut Emitter, dept: &str, class: &str, types: &[&str], n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            let iri = format!("{dept}/{class}{i}");
            e.types(&iri, types);
            e.text(&iri, "name", &format!("{class}{i}"));
            iri
        })
        .collect()
}
