use std::collections::{BTreeMap, HashMap};

use super::{FederatedQuery, PatternTerm, Query, QueryError, TriplePattern};
use crate::rdf::{vocab, Term};
use crate::ShardId;

const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "FILTER", "UNION", "MINUS", "GRAPH", "BIND", "VALUES", "ORDER", "LIMIT", "OFFSET",
    "GROUP", "HAVING", "CONSTRUCT", "ASK", "DESCRIBE", "BASE", "INSERT", "DELETE", "REDUCED",
    "NAMED",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Iri(String),
    PName(String, String),
    Literal(String),
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> QueryError {
    QueryError::Syntax { line, column, message: message.into() }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '.'
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, end: usize| {
        for &c in &chars[*i..end] {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        }
        *i = end;
    };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let c_end = i + 1;
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c_end);
            continue;
        }
        if c == '#' {
            let end = chars[i..].iter().position(|&c| c == '\n').map_or(chars.len(), |n| i + n);
            advance(&mut i, &mut line, &mut col, end);
            continue;
        }
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line: tl, column: tc });
        match c {
            '{' | '}' | '.' | '*' | ';' | ',' | '(' | ')' | '[' | ']' => {
                push(&mut out, Tok::Punct(c));
                advance(&mut i, &mut line, &mut col, c_end);
            }
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(syntax(tl, tc, "empty variable name"));
                }
                push(&mut out, Tok::Var(chars[i + 1..j].iter().collect()));
                advance(&mut i, &mut line, &mut col, j);
            }
            '<' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '>' {
                    if chars[j].is_whitespace() {
                        return Err(syntax(tl, tc, "whitespace inside IRI"));
                    }
                    j += 1;
                }
                if j == chars.len() {
                    return Err(syntax(tl, tc, "unterminated IRI"));
                }
                let iri: String = chars[i + 1..j].iter().collect();
                if iri.is_empty() {
                    return Err(syntax(tl, tc, "empty IRI"));
                }
                push(&mut out, Tok::Iri(iri));
                advance(&mut i, &mut line, &mut col, j + 1);
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut body = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(syntax(tl, tc, "unterminated literal")),
                        Some('\\') => {
                            let next = *chars.get(j + 1).ok_or_else(|| syntax(tl, tc, "unterminated literal"))?;
                            if next == '\'' {
                                body.push('\'');
                            } else {
                                body.push('\\');
                                body.push(next);
                            }
                            j += 2;
                        }
                        Some(&q) if q == quote => break,
                        Some('"') => {
                            body.push_str("\\\"");
                            j += 1;
                        }
                        Some(&other) => {
                            body.push(other);
                            j += 1;
                        }
                    }
                }
                push(&mut out, Tok::Literal(format!("\"{body}\"")));
                advance(&mut i, &mut line, &mut col, j + 1);
            }
            '@' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '-') {
                    j += 1;
                }
                match out.last_mut() {
                    Some(Spanned { tok: Tok::Literal(lit), .. }) if j > i + 1 && !lit.contains("\"^^") => {
                        lit.push_str(&chars[i..j].iter().collect::<String>());
                    }
                    _ => return Err(syntax(tl, tc, "language tag must follow a literal")),
                }
                advance(&mut i, &mut line, &mut col, j);
            }
            '^' => {
                if chars.get(i + 1) != Some(&'^') {
                    return Err(syntax(tl, tc, "expected ^^"));
                }
                push(&mut out, Tok::Punct('^'));
                advance(&mut i, &mut line, &mut col, c_end + 1);
            }
            c if c.is_ascii_digit() || ((c == '-' || c == '+') && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut datatype = XSD_INTEGER;
                if chars.get(j) == Some(&'.') && chars.get(j + 1).is_some_and(char::is_ascii_digit) {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    datatype = XSD_DECIMAL;
                }
                let digits: String = chars[i..j].iter().collect();
                push(&mut out, Tok::Literal(format!("\"{digits}\"^^<{datatype}>")));
                advance(&mut i, &mut line, &mut col, j);
            }
            c if c.is_alphabetic() || c == '_' || c == ':' => {
                let mut j = i;
                while j < chars.len() && (is_name_char(chars[j]) || chars[j] == ':') {
                    j += 1;
                }
                // A trailing '.' terminates the pattern rather than the name.
                while j > i && chars[j - 1] == '.' {
                    j -= 1;
                }
                let word: String = chars[i..j].iter().collect();
                let tok = match word.split_once(':') {
                    Some((prefix, local)) => Tok::PName(prefix.to_owned(), local.to_owned()),
                    None => Tok::Word(word),
                };
                push(&mut out, tok);
                advance(&mut i, &mut line, &mut col, j);
            }
            other => return Err(syntax(tl, tc, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    end: (usize, usize),
}

/// One federated query as written: inline patterns plus SERVICE blocks in
/// textual order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FederatedText {
    pub projected: Vec<String>,
    pub local: Vec<TriplePattern>,
    pub services: Vec<(String, Vec<TriplePattern>)>,
}

impl FederatedText {
    /// Maps SERVICE endpoints back to shards. Inline patterns belong to
    /// `ppn`; blocks addressed to the same shard are merged in order.
    pub fn into_federated(
        self,
        base_query_id: impl Into<String>,
        ppn: ShardId,
        endpoints: &BTreeMap<ShardId, String>,
    ) -> Result<FederatedQuery, QueryError> {
        let mut groups: Vec<(ShardId, Vec<TriplePattern>)> = vec![(ppn, self.local)];
        for (endpoint, patterns) in self.services {
            let shard = endpoints
                .iter()
                .find(|(_, e)| **e == endpoint)
                .map(|(s, _)| *s)
                .ok_or(QueryError::UnknownEndpoint(endpoint))?;
            match groups.iter_mut().find(|(s, _)| *s == shard) {
                Some((_, existing)) => existing.extend(patterns),
                None => groups.push((shard, patterns)),
            }
        }
        Ok(FederatedQuery { base_query_id: base_query_id.into(), projected: self.projected, ppn, groups })
    }
}

impl Parser {
    fn new(text: &str) -> Result<Parser, QueryError> {
        let toks = tokenize(text)?;
        let lines = text.split('\n').count();
        let last_col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser { toks, pos: 0, prefixes: HashMap::new(), end: (lines, last_col) })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |s| (s.line, s.column))
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn next(&mut self) -> Option<Tok> {
        let tok = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        tok
    }

    fn keyword(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.to_ascii_uppercase()),
            _ => None,
        }
    }

    fn check_unsupported(&self) -> Result<(), QueryError> {
        if let Some(kw) = self.keyword() {
            if UNSUPPORTED.contains(&kw.as_str()) {
                return Err(QueryError::UnsupportedKeyword(kw));
            }
        }
        Ok(())
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        match self.peek() {
            Some(Tok::Punct(p)) if *p == c => {
                self.pos += 1;
                Ok(())
            }
            Some(other) => Err(self.error(format!("expected '{c}', found {}", describe(other)))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(p)) if *p == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<String, QueryError> {
        let ns = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| QueryError::UndeclaredPrefix(prefix.to_owned()))?;
        Ok(format!("{ns}{local}"))
    }

    fn prologue(&mut self) -> Result<(), QueryError> {
        while self.keyword().as_deref() == Some("PREFIX") {
            self.pos += 1;
            let prefix = match self.next() {
                Some(Tok::PName(prefix, local)) if local.is_empty() => prefix,
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected prefix name ending in ':'"));
                }
            };
            let iri = match self.next() {
                Some(Tok::Iri(iri)) => iri,
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected namespace IRI"));
                }
            };
            self.prefixes.insert(prefix, iri);
        }
        Ok(())
    }

    /// `SELECT vars [FROM iri] [WHERE]`, returning the projection. `None`
    /// stands for `*`.
    fn select_clause(&mut self) -> Result<Option<Vec<String>>, QueryError> {
        self.check_unsupported()?;
        if self.keyword().as_deref() != Some("SELECT") {
            return Err(self.error("expected SELECT"));
        }
        self.pos += 1;
        if self.keyword().as_deref() == Some("DISTINCT") {
            self.pos += 1;
        }
        self.check_unsupported()?;
        let projected = if self.eat_punct('*') {
            None
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.error("expected projected variables or '*'"));
            }
            Some(vars)
        };
        loop {
            self.check_unsupported()?;
            match self.keyword().as_deref() {
                Some("FROM") => {
                    self.pos += 1;
                    self.check_unsupported()?;
                    match self.next() {
                        Some(Tok::Iri(_)) => {}
                        Some(Tok::PName(prefix, local)) => {
                            self.expand(&prefix, &local)?;
                        }
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("expected dataset IRI after FROM"));
                        }
                    }
                }
                Some("WHERE") => {
                    self.pos += 1;
                    break;
                }
                _ => break,
            }
        }
        Ok(projected)
    }

    fn term(&mut self, position: &'static str) -> Result<PatternTerm, QueryError> {
        self.check_unsupported()?;
        let tok = self.next();
        let term = match tok {
            Some(Tok::Var(v)) => PatternTerm::Var(v),
            Some(Tok::Iri(iri)) => PatternTerm::Const(Term::iri(iri)),
            Some(Tok::PName(prefix, local)) => PatternTerm::Const(Term::iri(self.expand(&prefix, &local)?)),
            Some(Tok::Word(w)) if w == "a" && position == "predicate" => PatternTerm::iri(vocab::RDF_TYPE),
            Some(Tok::Literal(mut lit)) => {
                if self.eat_punct('^') {
                    let datatype = match self.next() {
                        Some(Tok::Iri(iri)) => iri,
                        Some(Tok::PName(prefix, local)) => self.expand(&prefix, &local)?,
                        _ => {
                            self.pos -= 1;
                            return Err(self.error("expected datatype IRI after ^^"));
                        }
                    };
                    if lit.contains("\"@") || lit.contains("\"^^") {
                        return Err(self.error("literal already carries a tag or datatype"));
                    }
                    lit.push_str(&format!("^^<{datatype}>"));
                }
                PatternTerm::Const(Term::literal_raw(lit))
            }
            Some(other) => {
                self.pos -= 1;
                return Err(self.error(format!("expected {position}, found {}", describe(&other))));
            }
            None => {
                self.pos -= 1;
                return Err(self.error(format!("expected {position}, found end of input")));
            }
        };
        if let PatternTerm::Const(t) = &term {
            if position != "object" && t.is_literal() {
                self.pos -= 1;
                return Err(self.error(format!("literal not allowed as {position}")));
            }
        }
        Ok(term)
    }

    fn pattern(&mut self) -> Result<TriplePattern, QueryError> {
        let s = self.term("subject")?;
        let p = self.term("predicate")?;
        let o = self.term("object")?;
        Ok(TriplePattern::new(s, p, o))
    }

    /// Body of a `{ ... }` block after the opening brace, up to and including
    /// the closing brace. SERVICE blocks are collected only when `services`
    /// is given.
    fn block(
        &mut self,
        patterns: &mut Vec<TriplePattern>,
        mut services: Option<&mut Vec<(String, Vec<TriplePattern>)>>,
    ) -> Result<(), QueryError> {
        loop {
            if self.eat_punct('}') {
                return Ok(());
            }
            if self.peek().is_none() {
                return Err(self.error("expected '}', found end of input"));
            }
            if self.keyword().as_deref() == Some("SERVICE") {
                let Some(services) = services.as_deref_mut() else {
                    return Err(QueryError::UnsupportedKeyword("SERVICE".into()));
                };
                self.pos += 1;
                let endpoint = match self.next() {
                    Some(Tok::Iri(iri)) => iri,
                    Some(Tok::PName(prefix, local)) => self.expand(&prefix, &local)?,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected endpoint IRI after SERVICE"));
                    }
                };
                self.expect_punct('{')?;
                let mut inner = Vec::new();
                self.block(&mut inner, None)?;
                services.push((endpoint, inner));
                self.eat_punct('.');
                continue;
            }
            patterns.push(self.pattern()?);
            if self.eat_punct('.') {
                continue;
            }
            match self.peek() {
                Some(Tok::Punct('}')) => {}
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("SERVICE") && services.is_some() => {}
                Some(Tok::Punct(c @ (';' | ','))) => {
                    return Err(self.error(format!("'{c}' pattern abbreviations are not supported")))
                }
                _ => {
                    self.check_unsupported()?;
                    return Err(self.error("expected '.' or '}' after triple pattern"));
                }
            }
        }
    }

    fn finish(&mut self) -> Result<(), QueryError> {
        self.check_unsupported()?;
        match self.peek() {
            None => Ok(()),
            Some(other) => Err(self.error(format!("unexpected {} after query", describe(other)))),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Var(v) => format!("?{v}"),
        Tok::Iri(i) => format!("<{i}>"),
        Tok::PName(p, l) => format!("{p}:{l}"),
        Tok::Literal(l) => l.clone(),
        Tok::Word(w) => format!("'{w}'"),
        Tok::Punct(c) => format!("'{c}'"),
    }
}

/// Parses `[PREFIX ...]* SELECT vars [FROM iri] [WHERE] { patterns }`.
/// Prefixed names are expanded; the returned query has an empty id.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut parser = Parser::new(text)?;
    parser.prologue()?;
    let projected = parser.select_clause()?;
    parser.expect_punct('{')?;
    let mut patterns = Vec::new();
    parser.block(&mut patterns, None)?;
    parser.finish()?;
    let query = Query { id: String::new(), projected: Vec::new(), patterns };
    let projected = projected.unwrap_or_else(|| query.variables_in_order());
    Query::new(String::new(), projected, query.patterns)
}

/// Parses a federated query with inline patterns and `SERVICE <ep> { ... }`
/// blocks.
pub fn parse_federated(text: &str) -> Result<FederatedText, QueryError> {
    let mut parser = Parser::new(text)?;
    parser.prologue()?;
    let projected = parser.select_clause()?;
    parser.expect_punct('{')?;
    let mut local = Vec::new();
    let mut services = Vec::new();
    parser.block(&mut local, Some(&mut services))?;
    parser.finish()?;
    let mut all: Vec<TriplePattern> = local.clone();
    all.extend(services.iter().flat_map(|(_, p)| p.iter().cloned()));
    let projected = match projected {
        Some(p) => p,
        None => Query { id: String::new(), projected: Vec::new(), patterns: all.clone() }.variables_in_order(),
    };
    Query::new(String::new(), projected.clone(), all)?;
    Ok(FederatedText { projected, local, services })
}
