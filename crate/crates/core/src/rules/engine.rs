//! Semi-naive forward chaining.
//!
//! Each round joins every rule body with at least one atom drawn from the
//! previous round's delta, then applies all new head atoms at once. Because a
//! round only reads the store as it stood at the start of the round, the
//! result (facts and provenance) does not depend on the order of `rules`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::RuleError;
use crate::kb::{Fact, Id, KnowledgeBase, Provenance, Value};
use crate::vocab::{Concept, Predicate};

use super::builtins::{contains_ignore_case, substring_before};
use super::{Atom, Builtin, Rule, RuleId, Term};

/// Hard stop for [`run_to_fixpoint`]. The built-in rules are monotone over a
/// finite skolem space, so hitting this means a rule-set bug.
pub const ITERATION_CAP: usize = 10_000;

/// A head atom with every variable replaced by a value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroundAtom {
    Typed(Id, Concept),
    Triple(Id, Predicate, Value),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionReport {
    pub iterations: usize,
    pub derived: BTreeMap<RuleId, Vec<Fact>>,
    pub typings: BTreeMap<RuleId, Vec<(Id, Concept)>>,
    pub created: Vec<Id>,
}

impl DeductionReport {
    pub fn derived_fact_count(&self) -> usize {
        self.derived.values().map(Vec::len).sum()
    }

    pub fn facts_of(&self, rule: RuleId) -> &[Fact] {
        self.derived.get(&rule).map_or(&[], Vec::as_slice)
    }
}

type Binding = BTreeMap<String, Value>;

#[derive(Default)]
struct Delta {
    types: BTreeMap<Concept, BTreeSet<Id>>,
    triples: BTreeMap<Predicate, BTreeSet<(Id, Value)>>,
}

impl Delta {
    fn of_kb(kb: &KnowledgeBase) -> Self {
        let mut d = Delta::default();
        for inst in kb.instances() {
            for c in inst.concepts.keys() {
                d.types.entry(*c).or_default().insert(inst.id.clone());
            }
        }
        for f in kb.facts() {
            d.triples.entry(f.predicate).or_default().insert((f.subject, f.object));
        }
        d
    }

    fn of_atoms<'a>(atoms: impl Iterator<Item = &'a GroundAtom>) -> Self {
        let mut d = Delta::default();
        for a in atoms {
            match a {
                GroundAtom::Typed(id, c) => {
                    d.types.entry(*c).or_default().insert(id.clone());
                }
                GroundAtom::Triple(s, p, o) => {
                    d.triples.entry(*p).or_default().insert((s.clone(), o.clone()));
                }
            }
        }
        d
    }
}

/// Where atom candidates come from.
#[derive(Clone, Copy)]
enum Source<'a> {
    Store,
    Delta(&'a Delta),
}

fn resolve(term: &Term, binding: &Binding) -> Option<Value> {
    match term {
        Term::Var(v) => binding.get(v).cloned(),
        Term::Const(id) => Some(Value::Id(id.clone())),
        Term::Literal(s) => Some(Value::Literal(s.clone())),
    }
}

/// Binds `term` to `value`. Returns `None` on conflict, otherwise the newly
/// bound variable (if any) so the caller can undo it.
fn unify(term: &Term, value: &Value, binding: &mut Binding) -> Option<Option<String>> {
    match resolve(term, binding) {
        Some(existing) => (existing == *value).then_some(None),
        None => {
            let Term::Var(v) = term else { unreachable!("constants always resolve") };
            binding.insert(v.clone(), value.clone());
            Some(Some(v.clone()))
        }
    }
}

struct Solver<'a> {
    kb: &'a KnowledgeBase,
    atoms: Vec<(&'a Atom, Source<'a>)>,
    out: Vec<Binding>,
}

impl<'a> Solver<'a> {
    fn run(mut self) -> Vec<Binding> {
        let mut binding = Binding::new();
        self.step(0, &mut binding);
        self.out
    }

    fn try_candidates(&mut self, i: usize, pairs: &[(&Term, Value)], binding: &mut Binding) {
        let mut bound = Vec::new();
        for (term, value) in pairs {
            match unify(term, value, binding) {
                Some(Some(v)) => bound.push(v),
                Some(None) => {}
                None => {
                    for v in bound {
                        binding.remove(&v);
                    }
                    return;
                }
            }
        }
        self.step(i + 1, binding);
        for v in bound {
            binding.remove(&v);
        }
    }

    fn step(&mut self, i: usize, binding: &mut Binding) {
        if i == self.atoms.len() {
            self.out.push(binding.clone());
            return;
        }
        let (atom, source) = self.atoms[i];
        match atom {
            Atom::Concept(concept, term) => {
                let candidates: Vec<Id> = match (resolve(term, binding), source) {
                    (Some(Value::Literal(_)), _) => Vec::new(),
                    (Some(Value::Id(id)), Source::Store) => {
                        if self.kb.has_concept(&id, *concept) { vec![id] } else { Vec::new() }
                    }
                    (Some(Value::Id(id)), Source::Delta(d)) => {
                        let hit = d.types.get(concept).is_some_and(|s| s.contains(&id));
                        if hit { vec![id] } else { Vec::new() }
                    }
                    (None, Source::Store) => self.kb.instances_of(*concept).cloned().collect(),
                    (None, Source::Delta(d)) => {
                        d.types.get(concept).into_iter().flatten().cloned().collect()
                    }
                };
                for id in candidates {
                    self.try_candidates(i, &[(term, Value::Id(id))], binding);
                }
            }
            Atom::Property(predicate, s, o) => {
                let sv = resolve(s, binding);
                let ov = resolve(o, binding);
                let fits = |subj: &Id, obj: &Value| {
                    sv.as_ref().is_none_or(|x| x.as_id() == Some(subj))
                        && ov.as_ref().is_none_or(|x| x == obj)
                };
                let candidates: Vec<(Id, Value)> = match (source, &sv) {
                    (_, Some(Value::Literal(_))) => Vec::new(),
                    (Source::Delta(d), _) => d
                        .triples
                        .get(predicate)
                        .into_iter()
                        .flatten()
                        .filter(|(a, b)| fits(a, b))
                        .cloned()
                        .collect(),
                    (Source::Store, Some(Value::Id(sid))) => self
                        .kb
                        .objects(sid, *predicate)
                        .filter(|obj| fits(sid, obj))
                        .map(|obj| (sid.clone(), obj.clone()))
                        .collect(),
                    (Source::Store, None) => self
                        .kb
                        .predicate_pairs(*predicate)
                        .filter(|(a, b)| fits(a, b))
                        .cloned()
                        .collect(),
                };
                for (subj, obj) in candidates {
                    self.try_candidates(i, &[(s, Value::Id(subj)), (o, obj)], binding);
                }
            }
            Atom::Builtin(builtin, args) => {
                let arg = |k: usize| resolve(&args[k], binding);
                match builtin {
                    Builtin::SubstringBefore => {
                        let (Some(input), Some(sep)) = (arg(1), arg(2)) else { return };
                        let Ok(prefix) = substring_before(input.text(), sep.text()) else { return };
                        let prefix = Value::Literal(prefix.to_string());
                        self.try_candidates(i, &[(&args[0], prefix)], binding);
                    }
                    Builtin::ContainsIgnoreCase => {
                        let (Some(h), Some(n)) = (arg(0), arg(1)) else { return };
                        if contains_ignore_case(h.text(), n.text()) == Ok(true) {
                            self.step(i + 1, binding);
                        }
                    }
                }
            }
        }
    }
}

struct Instantiation {
    atoms: Vec<GroundAtom>,
    minted: Vec<(Id, String)>,
}

fn instantiate(kb: &KnowledgeBase, rule: &Rule, binding: &Binding) -> Instantiation {
    let mut binding = binding.clone();
    let mut minted = Vec::new();
    for sk in rule.skolems() {
        let parts: Vec<Id> = sk
            .from
            .iter()
            .map(|v| match &binding[v] {
                Value::Id(id) => id.clone(),
                Value::Literal(s) => Id::from_name(s),
            })
            .collect();
        let refs: Vec<&Id> = parts.iter().collect();
        let id = Id::skolem(sk.prefix, &refs);
        let labels: Vec<&str> = parts.iter().map(|p| kb.label(p)).collect();
        minted.push((id.clone(), format!("{}({})", sk.prefix, labels.join(", "))));
        binding.insert(sk.var.clone(), Value::Id(id));
    }
    let value = |t: &Term| resolve(t, &binding).expect("head variables are bound");
    let id_of = |t: &Term| match value(t) {
        Value::Id(id) => id,
        Value::Literal(s) => Id::from_name(&s),
    };
    let atoms = rule
        .head()
        .iter()
        .map(|atom| match atom {
            Atom::Concept(c, t) => GroundAtom::Typed(id_of(t), *c),
            Atom::Property(p, s, o) => GroundAtom::Triple(id_of(s), *p, value(o)),
            Atom::Builtin(..) => unreachable!("rejected by Rule::new"),
        })
        .collect();
    Instantiation { atoms, minted }
}

fn solve(kb: &KnowledgeBase, rule: &Rule, delta_at: Option<(usize, &Delta)>) -> Vec<Binding> {
    let body = rule.body();
    let atoms = match delta_at {
        None => body.iter().map(|a| (a, Source::Store)).collect(),
        // The delta atom goes first; moving an atom earlier never unbinds a
        // built-in input.
        Some((j, delta)) => std::iter::once((&body[j], Source::Delta(delta)))
            .chain(
                body.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, a)| (a, Source::Store)),
            )
            .collect(),
    };
    Solver { kb, atoms, out: Vec::new() }.run()
}

/// Every head instantiation of `rule` over the current store, known or not.
pub fn evaluate_rule(kb: &KnowledgeBase, rule: &Rule) -> BTreeSet<GroundAtom> {
    solve(kb, rule, None)
        .iter()
        .flat_map(|b| instantiate(kb, rule, b).atoms)
        .collect()
}

fn is_known(kb: &KnowledgeBase, atom: &GroundAtom) -> bool {
    match atom {
        GroundAtom::Typed(id, c) => kb.has_concept(id, *c),
        GroundAtom::Triple(s, p, o) => kb.contains(s, *p, o),
    }
}

/// Applies `rules` until nothing new can be derived.
pub fn run_to_fixpoint(kb: &mut KnowledgeBase, rules: &[Rule]) -> Result<DeductionReport, RuleError> {
    run_with_cap(kb, rules, ITERATION_CAP)
}

pub(crate) fn run_with_cap(
    kb: &mut KnowledgeBase,
    rules: &[Rule],
    cap: usize,
) -> Result<DeductionReport, RuleError> {
    let mut report = DeductionReport::default();
    let mut delta = Delta::of_kb(kb);
    loop {
        report.iterations += 1;
        if report.iterations > cap {
            return Err(RuleError::IterationCap(cap));
        }
        let mut fresh: BTreeMap<GroundAtom, RuleId> = BTreeMap::new();
        let mut labels: BTreeMap<Id, String> = BTreeMap::new();
        for rule in rules {
            for (j, atom) in rule.body().iter().enumerate() {
                if matches!(atom, Atom::Builtin(..)) {
                    continue;
                }
                for binding in solve(kb, rule, Some((j, &delta))) {
                    let inst = instantiate(kb, rule, &binding);
                    for atom in inst.atoms {
                        if !is_known(kb, &atom) {
                            fresh
                                .entry(atom)
                                .and_modify(|r| *r = (*r).min(rule.id()))
                                .or_insert(rule.id());
                        }
                    }
                    labels.extend(inst.minted);
                }
            }
        }
        if fresh.is_empty() {
            return Ok(report);
        }
        let invalid = |rule: RuleId| move |source| RuleError::InvalidHead { rule: rule.to_string(), source };
        // Typings first so that facts about freshly typed individuals pass the
        // domain/range check.
        for (atom, rule) in &fresh {
            if let GroundAtom::Typed(id, concept) = atom {
                let prov = Provenance::Derived(*rule);
                if kb.instance(id).is_none() {
                    let label = labels.get(id).cloned().unwrap_or_else(|| id.to_string());
                    kb.insert_instance(id.clone(), &label, &[*concept], prov).map_err(invalid(*rule))?;
                    report.created.push(id.clone());
                } else {
                    kb.add_concept(id, *concept, prov).map_err(invalid(*rule))?;
                }
                report.typings.entry(*rule).or_default().push((id.clone(), *concept));
            }
        }
        for (atom, rule) in &fresh {
            if let GroundAtom::Triple(s, p, o) = atom {
                let fact = Fact {
                    subject: s.clone(),
                    predicate: *p,
                    object: o.clone(),
                    provenance: Provenance::Derived(*rule),
                };
                kb.assert_fact(fact.clone()).map_err(invalid(*rule))?;
                report.derived.entry(*rule).or_default().push(fact);
            }
        }
        delta = Delta::of_atoms(fresh.keys());
    }
}
