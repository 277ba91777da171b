//! N-Triples reading and canonical writing.
//!
//! Supported subset: `<iri>` terms, plain, language-tagged and typed
//! literals, `.` terminators, `#` comments and blank lines. Blank nodes are
//! rejected.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::rdf::{KnowledgeGraph, Term, Triple};

#[derive(Debug, Error)]
pub enum NTriplesError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: blank nodes are not supported")]
    BlankNode { line: usize },
    #[error("line {line}: input is not valid UTF-8")]
    Utf8 { line: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Parses N-Triples from a buffered reader. Duplicate triples keep the id of
/// their first occurrence.
pub fn parse_ntriples<R: BufRead>(mut reader: R) -> Result<KnowledgeGraph, NTriplesError> {
    let mut graph = KnowledgeGraph::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| NTriplesError::Utf8 { line: line_no })?;
        if let Some(triple) = parse_line(line, line_no)? {
            graph.insert(triple);
        }
    }
    Ok(graph)
}

pub fn parse_ntriples_str(input: &str) -> Result<KnowledgeGraph, NTriplesError> {
    parse_ntriples(input.as_bytes())
}

/// Writes one triple per line in id order.
pub fn write_ntriples<W: Write>(graph: &KnowledgeGraph, mut out: W) -> io::Result<()> {
    for triple in graph.triples() {
        writeln!(out, "{triple}")?;
    }
    Ok(())
}

pub fn to_ntriples_string(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for triple in graph.triples() {
        out.push_str(&triple.to_string());
        out.push('\n');
    }
    out
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn error(&self, message: impl Into<String>) -> NTriplesError {
        NTriplesError::Syntax { line: self.line, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start_matches([' ', '\t']).len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn iri(&mut self) -> Result<Term, NTriplesError> {
        debug_assert_eq!(self.peek(), Some('<'));
        let rest = &self.rest()[1..];
        let end = rest.find('>').ok_or_else(|| self.error("unterminated IRI"))?;
        let iri = &rest[..end];
        if iri.contains(['<', '"', '{', '}', '|', '^', '`', '\\']) {
            return Err(self.error(format!("invalid character in IRI <{iri}>")));
        }
        let term = Term::try_iri(iri).ok_or_else(|| self.error(format!("invalid IRI <{iri}>")))?;
        self.pos += end + 2;
        Ok(term)
    }

    fn literal(&mut self) -> Result<Term, NTriplesError> {
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut i = self.pos + 1;
        loop {
            match bytes.get(i) {
                None | Some(b'\n') | Some(b'\r') => return Err(self.error("unterminated literal")),
                Some(b'\\') => {
                    match bytes.get(i + 1) {
                        Some(b't' | b'b' | b'n' | b'r' | b'f' | b'"' | b'\'' | b'\\') => i += 2,
                        Some(b'u') => i += 6,
                        Some(b'U') => i += 10,
                        _ => return Err(self.error("invalid escape in literal")),
                    }
                    if i > bytes.len() {
                        return Err(self.error("truncated escape in literal"));
                    }
                }
                Some(b'"') => break,
                Some(_) => i += 1,
            }
        }
        self.pos = i + 1;
        match self.peek() {
            Some('@') => {
                let rest = &self.rest()[1..];
                let len = rest
                    .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                    .unwrap_or(rest.len());
                if len == 0 || !rest.as_bytes()[0].is_ascii_alphabetic() {
                    return Err(self.error("invalid language tag"));
                }
                self.pos += len + 1;
            }
            Some('^') => {
                if !self.rest().starts_with("^^<") {
                    return Err(self.error("expected ^^<datatype>"));
                }
                self.pos += 2;
                self.iri()?;
            }
            _ => {}
        }
        Ok(Term::literal_raw(&self.text[start..self.pos]))
    }

    fn term(&mut self, position: &str) -> Result<Term, NTriplesError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => self.iri(),
            Some('"') => {
                if position != "object" {
                    return Err(self.error(format!("literal not allowed as {position}")));
                }
                self.literal()
            }
            Some('_') if self.rest().starts_with("_:") => Err(NTriplesError::BlankNode { line: self.line }),
            Some(c) => Err(self.error(format!("unexpected '{c}' at {position}"))),
            None => Err(self.error(format!("missing {position}"))),
        }
    }
}

fn parse_line(line: &str, line_no: usize) -> Result<Option<Triple>, NTriplesError> {
    let line = line.trim_end_matches(['\n', '\r']);
    let trimmed = line.trim_start_matches([' ', '\t']);
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let mut cur = Cursor { text: line, pos: 0, line: line_no };
    let s = cur.term("subject")?;
    let p = cur.term("predicate")?;
    let o = cur.term("object")?;
    cur.skip_ws();
    if cur.peek() != Some('.') {
        return Err(cur.error("expected '.'"));
    }
    cur.pos += 1;
    cur.skip_ws();
    if !(cur.rest().is_empty() || cur.rest().starts_with('#')) {
        return Err(cur.error("trailing content after '.'"));
    }
    Ok(Some(Triple::new(s, p, o).expect("subject and predicate parsed as IRIs")))
}
