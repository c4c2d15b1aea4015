//! Minimal text syntax:
//!
//! ```text
//! PREFIX : <http://example.org/kb#>
//! SELECT ?name ?role WHERE { ?P :name ?name . ?P :playRole ?role }
//! ```
//!
//! Prefixed names and IRIs are reduced to their local part, since the store
//! has a single flat namespace. `a` and `rdf:type` test concept membership.

use std::collections::BTreeMap;

use crate::error::QueryError;
use crate::kb::Id;
use crate::vocab::{Concept, Predicate, Range};

use super::{Clause, QTerm, Query};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Var(String),
    Iri(String),
    Literal(String),
    LBrace,
    RBrace,
    Dot,
}

fn malformed(msg: impl Into<String>) -> QueryError {
    QueryError::MalformedQuery(msg.into())
}

fn lex(text: &str) -> Result<Vec<Tok>, QueryError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '#' => {
                while chars.next().is_some_and(|c| c != '\n') {}
            }
            '{' => {
                chars.next();
                toks.push(Tok::LBrace);
            }
            '}' => {
                chars.next();
                toks.push(Tok::RBrace);
            }
            '.' => {
                chars.next();
                toks.push(Tok::Dot);
            }
            '<' => {
                chars.next();
                let mut iri = String::new();
                loop {
                    match chars.next() {
                        Some('>') => break,
                        Some(c) if c.is_whitespace() => return Err(malformed("whitespace inside <iri>")),
                        Some(c) => iri.push(c),
                        None => return Err(malformed("unterminated <iri>")),
                    }
                }
                toks.push(Tok::Iri(iri));
            }
            '"' => {
                // Literals use JSON string escapes, as in the triples file.
                let mut raw = String::from(chars.next().unwrap());
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => {
                            raw.push('\\');
                            match chars.next() {
                                Some(c) => raw.push(c),
                                None => return Err(malformed("unterminated string literal")),
                            }
                        }
                        Some(c) => raw.push(c),
                        None => return Err(malformed("unterminated string literal")),
                    }
                }
                raw.push('"');
                let lit: String =
                    serde_json::from_str(&raw).map_err(|e| malformed(format!("invalid string literal: {e}")))?;
                toks.push(Tok::Literal(lit));
            }
            '?' | '$' => {
                chars.next();
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(malformed("empty variable name"));
                }
                toks.push(Tok::Var(name));
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '{' | '}' | '<' | '"' | '?' | '#') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                // Trailing dots are statement separators, inner ones belong to the name.
                let dots = word.len() - word.trim_end_matches('.').len();
                word.truncate(word.len() - dots);
                if word.is_empty() {
                    return Err(malformed(format!("unexpected character `{c}`")));
                }
                toks.push(Tok::Word(word));
                toks.extend(std::iter::repeat_n(Tok::Dot, dots));
            }
        }
    }
    Ok(toks)
}

fn local_of_iri(iri: &str) -> &str {
    iri.rsplit(['#', '/']).next().unwrap_or(iri)
}

struct Names {
    prefixes: BTreeMap<String, String>,
}

impl Names {
    /// Resolves a prefixed name, `<iri>` or bare word to a local name.
    fn local(&self, tok: &Tok) -> Result<String, QueryError> {
        match tok {
            Tok::Iri(iri) => Ok(local_of_iri(iri).to_string()),
            Tok::Word(w) => match w.split_once(':') {
                Some((prefix, local)) => {
                    if prefix != "rdf" && !self.prefixes.contains_key(prefix) {
                        return Err(malformed(format!("undeclared prefix `{prefix}:`")));
                    }
                    Ok(local.to_string())
                }
                None => Ok(w.clone()),
            },
            other => Err(malformed(format!("expected a name, found {other:?}"))),
        }
    }

    fn is_type(&self, tok: &Tok) -> bool {
        match tok {
            Tok::Word(w) => w == "a" || w == "rdf:type",
            Tok::Iri(iri) => iri == "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
            _ => false,
        }
    }
}

fn keyword(tok: Option<&Tok>, kw: &str) -> bool {
    matches!(tok, Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
}

pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let toks = lex(text)?;
    let mut pos = 0;
    let mut names = Names { prefixes: BTreeMap::new() };
    while keyword(toks.get(pos), "PREFIX") {
        let (Some(Tok::Word(p)), Some(Tok::Iri(iri))) = (toks.get(pos + 1), toks.get(pos + 2)) else {
            return Err(malformed("expected `PREFIX name: <iri>`"));
        };
        let Some(p) = p.strip_suffix(':') else {
            return Err(malformed("prefix name must end with `:`"));
        };
        names.prefixes.insert(p.to_string(), iri.clone());
        pos += 3;
    }
    if !keyword(toks.get(pos), "SELECT") {
        return Err(malformed("expected SELECT"));
    }
    pos += 1;
    let mut select = Vec::new();
    while let Some(Tok::Var(v)) = toks.get(pos) {
        if select.contains(v) {
            return Err(malformed(format!("?{v} selected twice")));
        }
        select.push(v.clone());
        pos += 1;
    }
    if select.is_empty() {
        return Err(malformed("SELECT needs at least one variable"));
    }
    if !keyword(toks.get(pos), "WHERE") {
        return Err(malformed("expected WHERE"));
    }
    pos += 1;
    if toks.get(pos) != Some(&Tok::LBrace) {
        return Err(malformed("expected `{`"));
    }
    pos += 1;
    let mut clauses = Vec::new();
    loop {
        match toks.get(pos) {
            Some(Tok::RBrace) => {
                pos += 1;
                break;
            }
            Some(Tok::Dot) => pos += 1,
            Some(_) => {
                let (s, p, o) = match (toks.get(pos), toks.get(pos + 1), toks.get(pos + 2)) {
                    (Some(s), Some(p), Some(o)) => (s, p, o),
                    _ => return Err(malformed("incomplete triple pattern")),
                };
                clauses.push(clause(&names, s, p, o)?);
                pos += 3;
            }
            None => return Err(malformed("missing `}`")),
        }
    }
    if pos != toks.len() {
        return Err(malformed("unexpected input after `}`"));
    }
    Query::new(select, clauses)
}

fn subject(names: &Names, tok: &Tok) -> Result<QTerm, QueryError> {
    match tok {
        Tok::Var(v) => Ok(QTerm::Var(v.clone())),
        Tok::Literal(_) => Err(malformed("a literal cannot be a subject")),
        other => {
            let local = names.local(other)?;
            Id::new(local).map(QTerm::Id).map_err(|e| malformed(e.to_string()))
        }
    }
}

fn clause(names: &Names, s: &Tok, p: &Tok, o: &Tok) -> Result<Clause, QueryError> {
    let s = subject(names, s)?;
    if let Tok::Var(_) = p {
        return Err(malformed("predicates must be constants"));
    }
    if names.is_type(p) {
        if let Tok::Var(_) | Tok::Literal(_) = o {
            return Err(malformed("the object of `a` must be a concept name"));
        }
        let concept: Concept =
            names.local(o)?.parse().map_err(|e: crate::error::VocabError| malformed(e.to_string()))?;
        return Ok(Clause::Type(s, concept));
    }
    let predicate: Predicate =
        names.local(p)?.parse().map_err(|e: crate::error::VocabError| malformed(e.to_string()))?;
    let object = match o {
        Tok::Var(v) => QTerm::Var(v.clone()),
        Tok::Literal(l) => QTerm::Literal(l.clone()),
        other => {
            let local = names.local(other)?;
            if predicate.signature().range == Range::Literal {
                return Err(malformed(format!("{predicate} takes a literal object")));
            }
            QTerm::Id(Id::new(local).map_err(|e| malformed(e.to_string()))?)
        }
    };
    Ok(Clause::Triple(s, predicate, object))
}
