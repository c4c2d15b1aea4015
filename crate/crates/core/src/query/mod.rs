//! Conjunctive queries over the knowledge base.

mod canned;
mod parser;
mod results;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::QueryError;
use crate::kb::{quote, Id, KnowledgeBase, Value};
use crate::vocab::{Concept, Predicate};

pub use canned::{canned_queries, canned_query, CANNED_NAMES};
pub use parser::parse_query;
pub use results::{ResultTable, DEFAULT_BASE, SPARQL_RESULTS_NS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QTerm {
    Var(String),
    Id(Id),
    Literal(String),
}

impl fmt::Display for QTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QTerm::Var(v) => write!(f, "?{v}"),
            QTerm::Id(id) => write!(f, "{id}"),
            QTerm::Literal(l) => f.write_str(&quote(l)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Clause {
    Type(QTerm, Concept),
    Triple(QTerm, Predicate, QTerm),
}

impl Clause {
    fn vars(&self) -> Vec<&str> {
        let terms: Vec<&QTerm> = match self {
            Clause::Type(s, _) => vec![s],
            Clause::Triple(s, _, o) => vec![s, o],
        };
        terms
            .into_iter()
            .filter_map(|t| match t {
                QTerm::Var(v) => Some(v.as_str()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Type(s, c) => write!(f, "{s} a {c}"),
            Clause::Triple(s, p, o) => write!(f, "{s} {p} {o}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    select: Vec<String>,
    clauses: Vec<Clause>,
}

impl Query {
    pub fn new(select: Vec<String>, clauses: Vec<Clause>) -> Result<Self, QueryError> {
        if clauses.is_empty() {
            return Err(QueryError::MalformedQuery("empty WHERE block".into()));
        }
        for v in &select {
            if !clauses.iter().any(|c| c.vars().contains(&v.as_str())) {
                return Err(QueryError::MalformedQuery(format!("?{v} does not occur in WHERE")));
            }
        }
        Ok(Query { select, clauses })
    }

    pub fn select(&self) -> &[String] {
        &self.select
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<String> = self.select.iter().map(|v| format!("?{v}")).collect();
        let clauses: Vec<String> = self.clauses.iter().map(ToString::to_string).collect();
        write!(f, "SELECT {} WHERE {{ {} }}", vars.join(" "), clauses.join(" . "))
    }
}

type Binding = BTreeMap<String, Value>;

fn resolve<'a>(term: &'a QTerm, binding: &'a Binding) -> Option<Value> {
    match term {
        QTerm::Var(v) => binding.get(v).cloned(),
        QTerm::Id(id) => Some(Value::Id(id.clone())),
        QTerm::Literal(l) => Some(Value::Literal(l.clone())),
    }
}

fn bind(binding: &mut Binding, term: &QTerm, value: &Value) -> bool {
    match term {
        QTerm::Var(v) => match binding.get(v) {
            Some(existing) => existing == value,
            None => {
                binding.insert(v.clone(), value.clone());
                true
            }
        },
        _ => resolve(term, binding).as_ref() == Some(value),
    }
}

/// Candidate extensions of `binding` satisfying one clause.
fn extend(kb: &KnowledgeBase, clause: &Clause, binding: &Binding) -> Vec<Binding> {
    let mut out = Vec::new();
    match clause {
        Clause::Type(s, concept) => match resolve(s, binding) {
            Some(Value::Id(id)) => {
                if kb.has_concept(&id, *concept) {
                    out.push(binding.clone());
                }
            }
            Some(Value::Literal(_)) => {}
            None => {
                for id in kb.instances_of(*concept) {
                    let mut b = binding.clone();
                    if bind(&mut b, s, &Value::Id(id.clone())) {
                        out.push(b);
                    }
                }
            }
        },
        Clause::Triple(s, p, o) => match resolve(s, binding) {
            Some(Value::Id(subject)) => {
                for object in kb.objects(&subject, *p) {
                    let mut b = binding.clone();
                    if bind(&mut b, o, object) {
                        out.push(b);
                    }
                }
            }
            Some(Value::Literal(_)) => {}
            None => match resolve(o, binding) {
                Some(object) => {
                    for subject in kb.subjects(*p, &object) {
                        let mut b = binding.clone();
                        if bind(&mut b, s, &Value::Id(subject.clone())) {
                            out.push(b);
                        }
                    }
                }
                None => {
                    for (subject, object) in kb.predicate_pairs(*p) {
                        let mut b = binding.clone();
                        if bind(&mut b, s, &Value::Id(subject.clone())) && bind(&mut b, o, object) {
                            out.push(b);
                        }
                    }
                }
            },
        },
    }
    out
}

fn bound_positions(clause: &Clause, binding: &Binding) -> usize {
    clause.vars().iter().filter(|v| binding.contains_key(**v)).count()
        + match clause {
            Clause::Type(QTerm::Var(_), _) => 0,
            Clause::Type(..) => 1,
            Clause::Triple(s, _, o) => [s, o].iter().filter(|t| !matches!(t, QTerm::Var(_))).count(),
        }
}

fn solve(kb: &KnowledgeBase, remaining: &mut Vec<&Clause>, binding: &Binding, out: &mut Vec<Binding>) {
    if remaining.is_empty() {
        out.push(binding.clone());
        return;
    }
    // Most-constrained clause first; ties keep written order.
    let (idx, _) = remaining
        .iter()
        .enumerate()
        .max_by_key(|(i, c)| (bound_positions(c, binding), std::cmp::Reverse(*i)))
        .expect("non-empty");
    let clause = remaining.remove(idx);
    for b in extend(kb, clause, binding) {
        solve(kb, remaining, &b, out);
    }
    remaining.insert(idx, clause);
}

/// Evaluates a query with bag semantics; rows are sorted lexicographically.
pub fn run_query(kb: &KnowledgeBase, query: &Query) -> ResultTable {
    let mut solutions = Vec::new();
    let mut remaining: Vec<&Clause> = query.clauses.iter().collect();
    solve(kb, &mut remaining, &Binding::new(), &mut solutions);
    let mut rows: Vec<Vec<Value>> = solutions
        .into_iter()
        .map(|b| query.select.iter().map(|v| b[v].clone()).collect())
        .collect();
    rows.sort();
    ResultTable { variables: query.select.clone(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kb() -> KnowledgeBase {
        let mut kb = KnowledgeBase::new();
        for (id, c) in [("A", Concept::Participant), ("B", Concept::Participant), ("seller", Concept::Role), ("buyer", Concept::Role)] {
            kb.add_instance(Id::new(id).unwrap(), id, &[c]).unwrap();
        }
        for (p, role) in [("A", "seller"), ("B", "buyer")] {
            let pid = Id::new(p).unwrap();
            kb.assert(&pid, Predicate::Name, Value::literal(p)).unwrap();
            kb.assert(&pid, Predicate::PlayRole, Id::new(role).unwrap()).unwrap();
        }
        kb
    }

    #[test]
    fn participants_and_roles() {
        let q = parse_query("SELECT ?name ?role WHERE { ?P name ?name . ?P playRole ?role }").unwrap();
        let t = run_query(&kb(), &q);
        assert_eq!(
            t.rows,
            vec![
                vec![Value::literal("A"), Value::Id(Id::new("seller").unwrap())],
                vec![Value::literal("B"), Value::Id(Id::new("buyer").unwrap())],
            ]
        );
    }

    #[test]
    fn empty_kb_gives_no_rows() {
        let q = parse_query("SELECT ?x WHERE { ?x a Participant }").unwrap();
        assert!(run_query(&KnowledgeBase::new(), &q).rows.is_empty());
    }

    #[test]
    fn constants_and_bag_semantics() {
        let q = parse_query("SELECT ?p WHERE { ?p playRole seller }").unwrap();
        assert_eq!(run_query(&kb(), &q).rows.len(), 1);
        // ?r is projected away, so both participants appear once each.
        let q = parse_query("SELECT ?t WHERE { ?p a Participant . ?t a Role }").unwrap();
        assert_eq!(run_query(&kb(), &q).rows.len(), 4);
    }

    #[test]
    fn repeated_variable_must_agree() {
        let q = parse_query("SELECT ?x WHERE { ?x playRole ?x }").unwrap();
        assert!(run_query(&kb(), &q).rows.is_empty());
    }

    #[test]
    fn display_reparses() {
        let q = parse_query(r#"SELECT ?p WHERE { ?p name "A" . ?p a Participant }"#).unwrap();
        assert_eq!(parse_query(&q.to_string()).unwrap(), q);
    }
}
