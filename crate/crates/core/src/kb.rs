//! Fact store: typed instances plus subject–predicate–object facts with
//! provenance.
//!
//! Every mutation goes through the vocabulary signatures in [`crate::vocab`], so
//! a `KnowledgeBase` never holds a fact whose subject or object has the wrong
//! class. Iteration order is lexicographic by id everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{describe_concepts, KbError};
use crate::rules::RuleId;
use crate::vocab::{Concept, Domain, EnumIndividual, Predicate, Range};

/// Identifier of an instance (or of a pre-declared enumeration individual).
///
/// Restricted to `[A-Za-z0-9_.-]` so ids can be written unquoted in the triples
/// file and reused as XML ids after prefixing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Id(String);

impl Id {
    pub fn new(s: impl Into<String>) -> Result<Self, KbError> {
        let s = s.into();
        if is_valid_id(&s) {
            Ok(Id(s))
        } else {
            Err(KbError::InvalidId(s))
        }
    }

    /// Derives an id from a display name: whitespace runs become `_`, other
    /// characters outside the id alphabet become `_`.
    pub fn from_name(name: &str) -> Self {
        let mut out = String::with_capacity(name.len());
        let mut in_space = false;
        for ch in name.trim().chars() {
            if ch.is_whitespace() {
                if !in_space {
                    out.push('_');
                }
                in_space = true;
                continue;
            }
            in_space = false;
            if ch.is_ascii_alphanumeric() || matches!(ch, '_' | '-' | '.') {
                out.push(ch);
            } else {
                out.push('_');
            }
        }
        if out.is_empty() {
            out.push('_');
        }
        Id(out)
    }

    /// Deterministic id for an individual minted by a rule head.
    pub fn skolem(prefix: &str, parts: &[&Id]) -> Self {
        let mut out = prefix.to_string();
        for p in parts {
            out.push_str("--");
            out.push_str(&p.0);
        }
        Id(out)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn enum_individual(&self) -> Option<EnumIndividual> {
        self.0.parse().ok()
    }
}

pub(crate) fn is_valid_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl fmt::Display for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Id {
    type Error = KbError;
    fn try_from(s: String) -> Result<Self, KbError> {
        Id::new(s)
    }
}

impl From<Id> for String {
    fn from(id: Id) -> String {
        id.0
    }
}

impl From<EnumIndividual> for Id {
    fn from(e: EnumIndividual) -> Self {
        Id(e.as_str().to_string())
    }
}

/// Object position of a fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Id(Id),
    Literal(String),
}

impl Value {
    pub fn id(id: &str) -> Result<Self, KbError> {
        Id::new(id).map(Value::Id)
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Value::Literal(s.into())
    }

    pub fn as_id(&self) -> Option<&Id> {
        match self {
            Value::Id(id) => Some(id),
            Value::Literal(_) => None,
        }
    }

    /// The raw text: the id itself or the literal's content.
    pub fn text(&self) -> &str {
        match self {
            Value::Id(id) => id.as_str(),
            Value::Literal(s) => s,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Id(id) => write!(f, "{id}"),
            Value::Literal(s) => write!(f, "{}", quote(s)),
        }
    }
}

impl From<Id> for Value {
    fn from(id: Id) -> Self {
        Value::Id(id)
    }
}

impl From<EnumIndividual> for Value {
    fn from(e: EnumIndividual) -> Self {
        Value::Id(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Provenance {
    Asserted,
    Derived(RuleId),
}

impl Provenance {
    pub fn is_derived(self) -> bool {
        matches!(self, Provenance::Derived(_))
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Asserted => f.write_str("asserted"),
            Provenance::Derived(rule) => write!(f, "derived:{rule}"),
        }
    }
}

impl FromStr for Provenance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "asserted" {
            return Ok(Provenance::Asserted);
        }
        match s.strip_prefix("derived:") {
            Some(rule) => rule.parse().map(Provenance::Derived).map_err(|e| format!("{e}")),
            None => Err(format!("unknown provenance `{s}`")),
        }
    }
}

impl TryFrom<String> for Provenance {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Provenance> for String {
    fn from(p: Provenance) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: Id,
    pub label: String,
    pub concepts: BTreeMap<Concept, Provenance>,
}

impl Instance {
    pub fn has(&self, concept: Concept) -> bool {
        self.concepts.contains_key(&concept)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub subject: Id,
    pub predicate: Predicate,
    pub object: Value,
    pub provenance: Provenance,
}

impl Fact {
    pub fn asserted(subject: Id, predicate: Predicate, object: impl Into<Value>) -> Self {
        Fact { subject, predicate, object: object.into(), provenance: Provenance::Asserted }
    }

    pub fn triple(&self) -> (&Id, Predicate, &Value) {
        (&self.subject, self.predicate, &self.object)
    }
}

/// A triple pattern; `None` positions are wildcards.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pattern {
    pub subject: Option<Id>,
    pub predicate: Option<Predicate>,
    pub object: Option<Value>,
}

impl Pattern {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn subject(mut self, s: Id) -> Self {
        self.subject = Some(s);
        self
    }

    pub fn predicate(mut self, p: Predicate) -> Self {
        self.predicate = Some(p);
        self
    }

    pub fn object(mut self, o: impl Into<Value>) -> Self {
        self.object = Some(o.into());
        self
    }
}

type Triple = (Id, Predicate, Value);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    instances: BTreeMap<Id, Instance>,
    facts: BTreeMap<Triple, Provenance>,
    by_predicate: BTreeMap<Predicate, BTreeSet<(Id, Value)>>,
    by_subject: BTreeMap<Id, BTreeSet<(Predicate, Value)>>,
    by_concept: BTreeMap<Concept, BTreeSet<Id>>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty() && self.facts.is_empty()
    }

    pub fn fact_count(&self) -> usize {
        self.facts.len()
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn instance(&self, id: &Id) -> Option<&Instance> {
        self.instances.get(id)
    }

    pub fn instances(&self) -> impl Iterator<Item = &Instance> {
        self.instances.values()
    }

    pub fn instances_of(&self, concept: Concept) -> impl Iterator<Item = &Id> {
        self.by_concept.get(&concept).into_iter().flatten()
    }

    pub fn has_concept(&self, id: &Id, concept: Concept) -> bool {
        self.instances.get(id).is_some_and(|i| i.has(concept))
    }

    pub fn label<'a>(&'a self, id: &'a Id) -> &'a str {
        self.instances.get(id).map_or(id.as_str(), |i| i.label.as_str())
    }

    /// Adds an asserted instance, or merges concepts into an existing one.
    /// Returns whether anything changed.
    pub fn add_instance(
        &mut self,
        id: Id,
        label: &str,
        concepts: &[Concept],
    ) -> Result<bool, KbError> {
        self.insert_instance(id, label, concepts, Provenance::Asserted)
    }

    pub(crate) fn insert_instance(
        &mut self,
        id: Id,
        label: &str,
        concepts: &[Concept],
        provenance: Provenance,
    ) -> Result<bool, KbError> {
        if id.enum_individual().is_some() {
            return Err(KbError::ReservedId(id.0));
        }
        if label.trim().is_empty() {
            return Err(KbError::EmptyLabel(id.0));
        }
        if concepts.is_empty() {
            return Err(KbError::NoConcepts(id.0));
        }
        let mut changed = false;
        match self.instances.get(&id) {
            Some(existing) if existing.label != label => {
                return Err(KbError::LabelConflict { id: id.0, existing: existing.label.clone() });
            }
            Some(_) => {}
            None => {
                self.instances.insert(
                    id.clone(),
                    Instance { id: id.clone(), label: label.to_string(), concepts: BTreeMap::new() },
                );
                changed = true;
            }
        }
        for &c in concepts {
            changed |= self.add_concept(&id, c, provenance)?;
        }
        Ok(changed)
    }

    /// Types an existing instance with one more concept.
    pub fn add_concept(
        &mut self,
        id: &Id,
        concept: Concept,
        provenance: Provenance,
    ) -> Result<bool, KbError> {
        let inst = self
            .instances
            .get_mut(id)
            .ok_or_else(|| KbError::UnknownInstance(id.0.clone()))?;
        let changed = match inst.concepts.get(&concept) {
            None => {
                inst.concepts.insert(concept, provenance);
                true
            }
            Some(Provenance::Derived(_)) if provenance == Provenance::Asserted => {
                inst.concepts.insert(concept, provenance);
                true
            }
            Some(_) => false,
        };
        self.by_concept.entry(concept).or_default().insert(id.clone());
        Ok(changed)
    }

    /// Checks a triple against the instance table and the predicate signature.
    pub fn check(&self, subject: &Id, predicate: Predicate, object: &Value) -> Result<(), KbError> {
        let sig = predicate.signature();
        let violation = |reason: String| KbError::DomainRangeViolation {
            subject: subject.0.clone(),
            predicate,
            object: object.to_string(),
            reason,
        };
        let subj = self
            .instances
            .get(subject)
            .ok_or_else(|| KbError::UnknownInstance(subject.0.clone()))?;
        if let Domain::Concepts(domain) = sig.domain {
            if !domain.iter().any(|c| subj.has(*c)) {
                return Err(violation(format!("subject is not a {}", describe_concepts(domain))));
            }
        }
        match (sig.range, object) {
            (Range::Literal, Value::Literal(_)) => Ok(()),
            (Range::Literal, Value::Id(_)) => Err(violation("object must be a literal".into())),
            (Range::Enum(kinds), Value::Id(id)) => match id.enum_individual() {
                Some(e) if kinds.contains(&e.kind()) => Ok(()),
                _ => Err(violation(format!("object must be one of the {kinds:?} individuals"))),
            },
            (Range::Concepts(range), Value::Id(id)) => {
                let obj = self
                    .instances
                    .get(id)
                    .ok_or_else(|| KbError::UnknownInstance(id.0.clone()))?;
                if range.iter().any(|c| obj.has(*c)) {
                    Ok(())
                } else {
                    Err(violation(format!("object is not a {}", describe_concepts(range))))
                }
            }
            (_, Value::Literal(_)) => Err(violation("object must be an instance".into())),
        }
    }

    /// Inserts a fact after checking it. Duplicates are ignored, except that an
    /// assertion upgrades a previously derived fact. Returns whether the store
    /// changed.
    pub fn assert_fact(&mut self, fact: Fact) -> Result<bool, KbError> {
        self.check(&fact.subject, fact.predicate, &fact.object)?;
        let key = (fact.subject, fact.predicate, fact.object);
        match self.facts.get(&key) {
            Some(Provenance::Derived(_)) if fact.provenance == Provenance::Asserted => {
                self.facts.insert(key, fact.provenance);
                Ok(true)
            }
            Some(_) => Ok(false),
            None => {
                self.by_predicate.entry(key.1).or_default().insert((key.0.clone(), key.2.clone()));
                self.by_subject.entry(key.0.clone()).or_default().insert((key.1, key.2.clone()));
                self.facts.insert(key, fact.provenance);
                Ok(true)
            }
        }
    }

    /// Shorthand for asserting a fact with `Asserted` provenance.
    pub fn assert(
        &mut self,
        subject: &Id,
        predicate: Predicate,
        object: impl Into<Value>,
    ) -> Result<bool, KbError> {
        self.assert_fact(Fact::asserted(subject.clone(), predicate, object))
    }

    pub fn contains(&self, subject: &Id, predicate: Predicate, object: &Value) -> bool {
        self.facts.contains_key(&(subject.clone(), predicate, object.clone()))
    }

    pub fn provenance(&self, subject: &Id, predicate: Predicate, object: &Value) -> Option<Provenance> {
        self.facts.get(&(subject.clone(), predicate, object.clone())).copied()
    }

    /// All facts unifying with `pattern`, ordered by (subject, predicate, object).
    pub fn matching(&self, pattern: &Pattern) -> Vec<Fact> {
        let fits = |s: &Id, p: Predicate, o: &Value| {
            pattern.subject.as_ref().is_none_or(|x| x == s)
                && pattern.predicate.is_none_or(|x| x == p)
                && pattern.object.as_ref().is_none_or(|x| x == o)
        };
        let make = |s: &Id, p: Predicate, o: &Value| Fact {
            subject: s.clone(),
            predicate: p,
            object: o.clone(),
            provenance: self.facts[&(s.clone(), p, o.clone())],
        };
        match (&pattern.subject, pattern.predicate) {
            (Some(s), _) => self
                .by_subject
                .get(s)
                .into_iter()
                .flatten()
                .filter(|(p, o)| fits(s, *p, o))
                .map(|(p, o)| make(s, *p, o))
                .collect(),
            (None, Some(p)) => self
                .by_predicate
                .get(&p)
                .into_iter()
                .flatten()
                .filter(|(s, o)| fits(s, p, o))
                .map(|(s, o)| make(s, p, o))
                .collect(),
            (None, None) => self
                .facts
                .iter()
                .filter(|((s, p, o), _)| fits(s, *p, o))
                .map(|((s, p, o), prov)| Fact {
                    subject: s.clone(),
                    predicate: *p,
                    object: o.clone(),
                    provenance: *prov,
                })
                .collect(),
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = Fact> + '_ {
        self.facts.iter().map(|((s, p, o), prov)| Fact {
            subject: s.clone(),
            predicate: *p,
            object: o.clone(),
            provenance: *prov,
        })
    }

    /// The (subject, predicate, object) set, ignoring provenance.
    pub fn triples(&self) -> BTreeSet<(Id, Predicate, Value)> {
        self.facts.keys().cloned().collect()
    }

    pub fn objects<'a>(&'a self, subject: &Id, predicate: Predicate) -> impl Iterator<Item = &'a Value> + 'a {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .filter(move |(p, _)| *p == predicate)
            .map(|(_, o)| o)
    }

    pub fn object_ids<'a>(&'a self, subject: &Id, predicate: Predicate) -> impl Iterator<Item = &'a Id> + 'a {
        self.objects(subject, predicate).filter_map(Value::as_id)
    }

    pub fn subjects<'a>(&'a self, predicate: Predicate, object: &Value) -> impl Iterator<Item = &'a Id> + 'a {
        let object = object.clone();
        self.by_predicate
            .get(&predicate)
            .into_iter()
            .flat_map(move |set| {
                let object = object.clone();
                set.iter().filter(move |(_, o)| *o == object).map(|(s, _)| s)
            })
    }

    pub(crate) fn predicate_pairs(&self, predicate: Predicate) -> impl Iterator<Item = &(Id, Value)> {
        self.by_predicate.get(&predicate).into_iter().flatten()
    }

    /// Removes every derived fact, derived typing and rule-minted instance.
    pub fn drop_derived(&mut self) {
        let mut kept = KnowledgeBase::new();
        for inst in self.instances.values() {
            let asserted: Vec<Concept> = inst
                .concepts
                .iter()
                .filter(|(_, p)| !p.is_derived())
                .map(|(c, _)| *c)
                .collect();
            if !asserted.is_empty() {
                kept.add_instance(inst.id.clone(), &inst.label, &asserted)
                    .expect("asserted instance re-inserts cleanly");
            }
        }
        for fact in self.facts().filter(|f| !f.provenance.is_derived()) {
            kept.assert_fact(fact).expect("asserted fact re-inserts cleanly");
        }
        *self = kept;
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(Arc::new(self.clone()))
    }

    /// Canonical line-oriented dump: instances then facts, each sorted by id.
    pub fn to_triples(&self) -> String {
        let mut out = String::from("# cbp knowledge base v1\n");
        for inst in self.instances.values() {
            let concepts: Vec<String> = inst
                .concepts
                .iter()
                .map(|(c, p)| match p {
                    Provenance::Asserted => c.to_string(),
                    Provenance::Derived(rule) => format!("{c}@{rule}"),
                })
                .collect();
            out.push_str(&format!(
                "instance {} {} {}\n",
                inst.id,
                quote(&inst.label),
                concepts.join(",")
            ));
        }
        for ((s, p, o), prov) in &self.facts {
            out.push_str(&format!("fact {s} {p} {o} {prov}\n"));
        }
        out
    }

    /// Parses the triples format. Line order is irrelevant: all instances are
    /// loaded before any fact is checked.
    pub fn from_triples(text: &str) -> Result<Self, KbError> {
        struct PendingFact {
            line: usize,
            fact: Fact,
        }
        let mut kb = KnowledgeBase::new();
        let mut facts = Vec::new();
        let mut instances = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| KbError::Parse { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let tokens = tokenize(trimmed).map_err(err)?;
            match tokens.first().map(|t| t.text.as_str()) {
                Some("instance") => {
                    let [_, id, label, concepts] = tokens.as_slice() else {
                        return Err(err("expected `instance <id> <label> <concepts>`".into()));
                    };
                    if id.quoted || concepts.quoted {
                        return Err(err("id and concepts must be unquoted".into()));
                    }
                    let id = Id::new(id.text.clone())?;
                    let mut typed = Vec::new();
                    for spec in concepts.text.split(',') {
                        let (name, prov) = match spec.split_once('@') {
                            Some((c, rule)) => (
                                c,
                                Provenance::Derived(rule.parse().map_err(|e| err(format!("{e}")))?),
                            ),
                            None => (spec, Provenance::Asserted),
                        };
                        let concept: Concept = name.parse().map_err(|e| err(format!("{e}")))?;
                        typed.push((concept, prov));
                    }
                    instances.push((line, id, label.text.clone(), typed));
                }
                Some("fact") => {
                    let [_, s, p, o, prov] = tokens.as_slice() else {
                        return Err(err("expected `fact <s> <p> <o> <provenance>`".into()));
                    };
                    if s.quoted || p.quoted || prov.quoted {
                        return Err(err("only the object may be quoted".into()));
                    }
                    let object = if o.quoted {
                        Value::Literal(o.text.clone())
                    } else {
                        Value::Id(Id::new(o.text.clone())?)
                    };
                    facts.push(PendingFact {
                        line,
                        fact: Fact {
                            subject: Id::new(s.text.clone())?,
                            predicate: p.text.parse().map_err(|e| err(format!("{e}")))?,
                            object,
                            provenance: prov.text.parse().map_err(err)?,
                        },
                    });
                }
                _ => return Err(err(format!("unknown record `{trimmed}`"))),
            }
        }
        for (line, id, label, typed) in instances {
            let with_line = |e: KbError| KbError::Parse { line, message: e.to_string() };
            for (concept, prov) in typed {
                kb.insert_instance(id.clone(), &label, &[concept], prov).map_err(with_line)?;
            }
        }
        for PendingFact { line, fact } in facts {
            kb.assert_fact(fact).map_err(|e| KbError::Parse { line, message: e.to_string() })?;
        }
        Ok(kb)
    }
}

/// Immutable, cheaply clonable view of a knowledge base.
#[derive(Debug, Clone)]
pub struct Snapshot(Arc<KnowledgeBase>);

impl Deref for Snapshot {
    type Target = KnowledgeBase;
    fn deref(&self) -> &KnowledgeBase {
        &self.0
    }
}

impl Snapshot {
    pub fn to_owned_kb(&self) -> KnowledgeBase {
        (*self.0).clone()
    }
}

pub(crate) fn quote(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

struct Token {
    text: String,
    quoted: bool,
}

fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if bytes[i] == b'"' {
            let start = i;
            i += 1;
            let mut closed = false;
            while i < bytes.len() {
                match bytes[i] {
                    b'\\' => i += 2,
                    b'"' => {
                        closed = true;
                        i += 1;
                        break;
                    }
                    _ => i += 1,
                }
            }
            if !closed || i > bytes.len() {
                return Err("unterminated string".into());
            }
            let text: String = serde_json::from_str(&line[start..i])
                .map_err(|e| format!("bad string literal: {e}"))?;
            tokens.push(Token { text, quoted: true });
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            tokens.push(Token { text: line[start..i].to_string(), quoted: false });
        }
    }
    Ok(tokens)
}
