//! Line-oriented triple documents.
//!
//! Each non-empty, non-comment line holds exactly one statement:
//!
//! ```text
//! <ex:apple> <rdf:type> <ex:FoodItem> .
//! <ex:apple> <rdfs:label> "apple" .
//! <ex:Rule1> <ex:hasPriority> "1"^^int .
//! _:b0 <ex:hasAction> "put" .
//! ```
//!
//! Lines whose first non-blank character is `#` are comments.

use std::fmt;

use super::OntologyError;

/// Subject or object position term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    Blank(String),
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Str(String),
    Int(i64),
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Term {
        Term::Iri(s.into())
    }

    pub fn str_lit(s: impl Into<String>) -> Term {
        Term::Literal(Literal::Str(s.into()))
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    /// Local part of an IRI (after the last `#`, `/` or `:`), or the literal text.
    pub fn local_name(&self) -> String {
        match self {
            Term::Iri(s) | Term::Blank(s) => local_name(s).to_string(),
            Term::Literal(Literal::Str(s)) => s.clone(),
            Term::Literal(Literal::Int(i)) => i.to_string(),
        }
    }
}

pub fn local_name(iri: &str) -> &str {
    match iri.rfind(['#', '/', ':']) {
        Some(idx) => &iri[idx + 1..],
        None => iri,
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Blank(s) => write!(f, "_:{s}"),
            Term::Literal(Literal::Int(i)) => write!(f, "\"{i}\"^^int"),
            Term::Literal(Literal::Str(s)) => {
                f.write_str("\"")?;
                for c in s.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\t' => f.write_str("\\t")?,
                        '\r' => f.write_str("\\r")?,
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")
            }
        }
    }
}

/// One statement. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Self {
        Triple { subject, predicate: predicate.into(), object }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <{}> {} .", self.subject, self.predicate, self.object)
    }
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, message: impl Into<String>) -> OntologyError {
        OntologyError::Parse { line: self.line, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start_matches([' ', '\t']);
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn iri(&mut self) -> Result<String, OntologyError> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.bump();
        let end = self.rest().find('>').ok_or_else(|| self.err("unterminated IRI"))?;
        let iri = &self.rest()[..end];
        if iri.is_empty() {
            return Err(self.err("empty IRI"));
        }
        if iri.chars().any(|c| c.is_whitespace() || c == '<' || c == '"') {
            return Err(self.err(format!("invalid character in IRI <{iri}>")));
        }
        self.pos += end + 1;
        Ok(iri.to_string())
    }

    fn blank(&mut self) -> Result<String, OntologyError> {
        if !self.rest().starts_with("_:") {
            return Err(self.err("expected blank node"));
        }
        self.pos += 2;
        let end = self
            .rest()
            .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '-'))
            .unwrap_or(self.rest().len());
        if end == 0 {
            return Err(self.err("empty blank node label"));
        }
        let label = &self.rest()[..end];
        self.pos += end;
        Ok(label.to_string())
    }

    fn literal(&mut self) -> Result<Literal, OntologyError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.err("unterminated literal")),
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some('n') => value.push('\n'),
                    Some('t') => value.push('\t'),
                    Some('r') => value.push('\r'),
                    other => return Err(self.err(format!("bad escape {other:?}"))),
                },
                Some(c) => value.push(c),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            let datatype = if self.peek() == Some('<') {
                self.iri()?
            } else {
                let end = self.rest().find(|c: char| c.is_whitespace()).unwrap_or(self.rest().len());
                let dt = self.rest()[..end].to_string();
                self.pos += end;
                dt
            };
            match local_name(&datatype) {
                "int" | "integer" => {
                    let parsed = value
                        .trim()
                        .parse::<i64>()
                        .map_err(|_| self.err(format!("invalid integer literal \"{value}\"")))?;
                    return Ok(Literal::Int(parsed));
                }
                "string" => {}
                other => return Err(self.err(format!("unsupported datatype {other}"))),
            }
        }
        Ok(Literal::Str(value))
    }

    fn term(&mut self, allow_literal: bool) -> Result<Term, OntologyError> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iri()?)),
            Some('_') => Ok(Term::Blank(self.blank()?)),
            Some('"') if allow_literal => Ok(Term::Literal(self.literal()?)),
            Some('"') => Err(self.err("literal not allowed in subject position")),
            Some(c) => Err(self.err(format!("unexpected character '{c}'"))),
            None => Err(self.err("unexpected end of line")),
        }
    }
}

/// Parses a whole document. Line numbers in errors are 1-based.
pub fn parse_document(doc: &str) -> Result<Vec<Triple>, OntologyError> {
    let mut triples = Vec::new();
    for (idx, raw) in doc.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cur = Cursor { src: line, pos: 0, line: idx + 1 };
        let subject = cur.term(false)?;
        cur.skip_ws();
        if cur.peek() != Some('<') {
            return Err(cur.err("predicate must be an IRI"));
        }
        let predicate = cur.iri()?;
        let object = cur.term(true)?;
        cur.skip_ws();
        if cur.bump() != Some('.') {
            return Err(cur.err("expected terminating '.'"));
        }
        cur.skip_ws();
        if !cur.rest().is_empty() && !cur.rest().starts_with('#') {
            return Err(cur.err("trailing content after '.'"));
        }
        triples.push(Triple { subject, predicate, object });
    }
    Ok(triples)
}

/// One statement per line, in iteration order.
pub fn serialize<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
