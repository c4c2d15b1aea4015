//! Conjunctive deduction rules with string built-ins, and their evaluation.

mod builtins;
mod engine;
mod ruleset;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{RuleError, VocabError};
use crate::kb::{quote, Id};
use crate::vocab::{Concept, Predicate};

pub use builtins::{contains_ignore_case, substring_before};
pub use engine::{evaluate_rule, run_to_fixpoint, DeductionReport, GroundAtom, ITERATION_CAP};
pub use ruleset::{builtin_ruleset, dump_rules};

/// Stable identifiers of the registered rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum RuleId {
    Gr1a,
    Gr1b,
    Gr2,
    Gr3a,
    Gr3b,
    Gr3seq,
    Gr4,
    Gr5a,
    Gr5b,
    Gr5c,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::Gr1a,
        RuleId::Gr1b,
        RuleId::Gr2,
        RuleId::Gr3a,
        RuleId::Gr3b,
        RuleId::Gr3seq,
        RuleId::Gr4,
        RuleId::Gr5a,
        RuleId::Gr5b,
        RuleId::Gr5c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Gr1a => "GR1a",
            RuleId::Gr1b => "GR1b",
            RuleId::Gr2 => "GR2",
            RuleId::Gr3a => "GR3a",
            RuleId::Gr3b => "GR3b",
            RuleId::Gr3seq => "GR3seq",
            RuleId::Gr4 => "GR4",
            RuleId::Gr5a => "GR5a",
            RuleId::Gr5b => "GR5b",
            RuleId::Gr5c => "GR5c",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = VocabError;

    fn from_str(s: &str) -> Result<Self, VocabError> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| VocabError::Unknown { kind: "rule", name: s.to_string() })
    }
}

impl TryFrom<String> for RuleId {
    type Error = VocabError;
    fn try_from(s: String) -> Result<Self, VocabError> {
        s.parse()
    }
}

impl From<RuleId> for String {
    fn from(r: RuleId) -> String {
        r.as_str().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Id),
    Literal(String),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Const(id) => write!(f, "{id}"),
            Term::Literal(s) => f.write_str(&quote(s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    /// `substringBefore(out, input, separator)`
    SubstringBefore,
    /// `containsIgnoreCase(haystack, needle)`
    ContainsIgnoreCase,
}

impl Builtin {
    pub fn arity(self) -> usize {
        match self {
            Builtin::SubstringBefore => 3,
            Builtin::ContainsIgnoreCase => 2,
        }
    }

    /// Argument positions that must be bound before the built-in runs.
    fn inputs(self) -> &'static [usize] {
        match self {
            Builtin::SubstringBefore => &[1, 2],
            Builtin::ContainsIgnoreCase => &[0, 1],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Builtin::SubstringBefore => "substringBefore",
            Builtin::ContainsIgnoreCase => "containsIgnoreCase",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Concept(Concept, Term),
    Property(Predicate, Term, Term),
    Builtin(Builtin, Vec<Term>),
}

impl Atom {
    fn terms(&self) -> Vec<&Term> {
        match self {
            Atom::Concept(_, t) => vec![t],
            Atom::Property(_, s, o) => vec![s, o],
            Atom::Builtin(_, args) => args.iter().collect(),
        }
    }

    fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::as_var)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Concept(c, t) => write!(f, "{c}({t})"),
            Atom::Property(p, s, o) => write!(f, "{p}({s}, {o})"),
            Atom::Builtin(b, args) => {
                let args: Vec<String> = args.iter().map(ToString::to_string).collect();
                write!(f, "{}({})", b.name(), args.join(", "))
            }
        }
    }
}

/// Mints a head-only variable from the values bound to `from`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skolem {
    pub var: String,
    pub prefix: &'static str,
    pub from: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    id: RuleId,
    body: Vec<Atom>,
    head: Vec<Atom>,
    skolems: Vec<Skolem>,
}

impl Rule {
    /// Builds a rule, checking that every head variable is bound by the body or
    /// minted by a skolem, and that built-ins see their inputs bound.
    pub fn new(
        id: RuleId,
        body: Vec<Atom>,
        head: Vec<Atom>,
        skolems: Vec<Skolem>,
    ) -> Result<Self, RuleError> {
        let ill = |message: String| RuleError::IllFormed { rule: id.to_string(), message };
        if body.is_empty() {
            return Err(ill("empty body".into()));
        }
        if head.is_empty() {
            return Err(ill("empty head".into()));
        }
        if body.iter().all(|a| matches!(a, Atom::Builtin(..))) {
            return Err(ill("body needs at least one concept or property atom".into()));
        }
        let mut bound: BTreeSet<&str> = BTreeSet::new();
        for atom in &body {
            match atom {
                Atom::Builtin(b, args) => {
                    if args.len() != b.arity() {
                        return Err(ill(format!("{} expects {} arguments", b.name(), b.arity())));
                    }
                    for &i in b.inputs() {
                        if let Some(v) = args[i].as_var() {
                            if !bound.contains(v) {
                                return Err(ill(format!("{} input ?{v} is unbound", b.name())));
                            }
                        }
                    }
                    if *b == Builtin::SubstringBefore {
                        if let Term::Literal(sep) = &args[2] {
                            if sep.is_empty() {
                                return Err(RuleError::EmptySeparator);
                            }
                        }
                    }
                    bound.extend(atom.vars());
                }
                _ => bound.extend(atom.vars()),
            }
        }
        for sk in &skolems {
            if bound.contains(sk.var.as_str()) {
                return Err(ill(format!("skolem ?{} is already bound by the body", sk.var)));
            }
            if let Some(v) = sk.from.iter().find(|v| !bound.contains(v.as_str())) {
                return Err(ill(format!("skolem ?{} depends on unbound ?{v}", sk.var)));
            }
        }
        for atom in &head {
            if matches!(atom, Atom::Builtin(..)) {
                return Err(ill("built-ins are not allowed in the head".into()));
            }
            for v in atom.vars() {
                if !bound.contains(v) && !skolems.iter().any(|s| s.var == v) {
                    return Err(ill(format!("head variable ?{v} is neither bound nor skolemized")));
                }
            }
        }
        Ok(Rule { id, body, head, skolems })
    }

    pub fn id(&self) -> RuleId {
        self.id
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &[Atom] {
        &self.head
    }

    pub fn skolems(&self) -> &[Skolem] {
        &self.skolems
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.body.iter().map(ToString::to_string).collect();
        let head: Vec<String> = self.head.iter().map(ToString::to_string).collect();
        write!(f, "{}: {} => {}", self.id, body.join(", "), head.join(", "))?;
        for sk in &self.skolems {
            let from: Vec<String> = sk.from.iter().map(|v| format!("?{v}")).collect();
            write!(f, " [?{} := {}({})]", sk.var, sk.prefix, from.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> Term {
        Term::var(s)
    }

    #[test]
    fn unbound_head_variable_is_rejected() {
        let err = Rule::new(
            RuleId::Gr1a,
            vec![Atom::Concept(Concept::Participant, v("x"))],
            vec![Atom::Property(Predicate::PlayRole, v("x"), v("y"))],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, RuleError::IllFormed { .. }));
    }

    #[test]
    fn builtin_needs_bound_inputs() {
        let err = Rule::new(
            RuleId::Gr4,
            vec![
                Atom::Builtin(
                    Builtin::SubstringBefore,
                    vec![v("y"), v("a"), Term::Literal(" ".into())],
                ),
                Atom::Concept(Concept::CommonGoal, v("a")),
            ],
            vec![Atom::Concept(Concept::CommonGoal, v("a"))],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, RuleError::IllFormed { .. }));
    }

    #[test]
    fn empty_separator_is_rejected() {
        let err = Rule::new(
            RuleId::Gr4,
            vec![
                Atom::Property(Predicate::Description, v("x"), v("a")),
                Atom::Builtin(Builtin::SubstringBefore, vec![v("y"), v("a"), Term::Literal("".into())]),
            ],
            vec![Atom::Concept(Concept::CommonGoal, v("x"))],
            vec![],
        )
        .unwrap_err();
        assert_eq!(err, RuleError::EmptySeparator);
    }

    #[test]
    fn rule_ids_parse() {
        for r in RuleId::ALL {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
        }
        assert!("GR9".parse::<RuleId>().is_err());
    }
}
