use crate::kb::Id;
use crate::vocab::{Concept as C, EnumIndividual as E, Predicate as P};

use super::{Atom, Builtin, Rule, RuleId, Skolem, Term};

fn v(name: &str) -> Term {
    Term::var(name)
}

fn c(concept: C, var: &str) -> Atom {
    Atom::Concept(concept, v(var))
}

fn p(predicate: P, s: &str, o: &str) -> Atom {
    Atom::Property(predicate, v(s), v(o))
}

fn pe(predicate: P, s: &str, o: E) -> Atom {
    Atom::Property(predicate, v(s), Term::Const(Id::from(o)))
}

fn skolem(var: &str, prefix: &'static str, from: &[&str]) -> Skolem {
    Skolem { var: var.into(), prefix, from: from.iter().map(|s| s.to_string()).collect() }
}

fn rule(id: RuleId, body: Vec<Atom>, head: Vec<Atom>, skolems: Vec<Skolem>) -> Rule {
    Rule::new(id, body, head, skolems).expect("built-in rules are well formed")
}

/// Cross-participant resource dependency. `provider`/`consumer` name the
/// relationship end (P1 or P2) whose business service outputs/inputs the
/// resource.
fn message_flow_rule(id: RuleId, provider: P, consumer: P) -> Rule {
    rule(
        id,
        vec![
            c(C::CollaborativeNetwork, "a"),
            p(P::HasRelationship, "a", "z"),
            p(provider, "z", "y"),
            p(P::ProvideBusinessService, "y", "c"),
            p(P::HasOutput, "c", "d"),
            p(consumer, "z", "x"),
            p(P::ProvideBusinessService, "x", "b"),
            p(P::HasInput, "b", "d"),
            c(C::CoordinationService, "f"),
            p(P::ManipulateResource, "f", "d"),
        ],
        vec![
            c(C::DependencyBetweenBusinessServices, "e"),
            p(P::FromBusinessService, "e", "c"),
            p(P::ToBusinessService, "e", "b"),
            p(P::ContainResource, "e", "d"),
            p(P::IsCoordinatedBy, "e", "f"),
            c(C::MisService, "f"),
            p(P::HasMisService, "a", "f"),
        ],
        vec![skolem("e", "dep", &["c", "b", "d"])],
    )
}

fn topology_rule(id: RuleId, power: E, duration: E, kind: E) -> Rule {
    rule(
        id,
        vec![c(C::Topology, "x"), pe(P::HasPower, "x", power), pe(P::HasDuration, "x", duration)],
        vec![pe(P::HasType, "x", kind)],
        vec![],
    )
}

/// The ten registered deduction rules, in id order.
pub fn builtin_ruleset() -> Vec<Rule> {
    vec![
        // role -> abstract services
        rule(
            RuleId::Gr1a,
            vec![c(C::Participant, "x"), p(P::PlayRole, "x", "y"), p(P::PerformAService, "y", "z")],
            vec![p(P::ProvideAService, "x", "z")],
            vec![],
        ),
        // abstract service -> role (any matching service suffices)
        rule(
            RuleId::Gr1b,
            vec![
                c(C::Participant, "x"),
                p(P::ProvideAService, "x", "z"),
                p(P::PerformAService, "y", "z"),
            ],
            vec![p(P::PlayRole, "x", "y")],
            vec![],
        ),
        rule(
            RuleId::Gr2,
            vec![
                c(C::Participant, "x"),
                p(P::ProvideAService, "x", "y"),
                p(P::HasBusinessService, "y", "a"),
            ],
            vec![p(P::ProvideBusinessService, "x", "a")],
            vec![],
        ),
        message_flow_rule(RuleId::Gr3a, P::P1, P::P2),
        message_flow_rule(RuleId::Gr3b, P::P2, P::P1),
        // e1 delivers into b; b's output feeds b2 of the same participant; e2
        // leaves from b2. Then the MIS service of e1 precedes that of e2.
        rule(
            RuleId::Gr3seq,
            vec![
                c(C::DependencyBetweenBusinessServices, "e1"),
                p(P::ToBusinessService, "e1", "b"),
                p(P::IsCoordinatedBy, "e1", "f1"),
                c(C::MisService, "f1"),
                p(P::ProvideBusinessService, "p", "b"),
                p(P::HasOutput, "b", "r"),
                p(P::ProvideBusinessService, "p", "b2"),
                p(P::HasInput, "b2", "r"),
                p(P::FromBusinessService, "e2", "b2"),
                p(P::IsCoordinatedBy, "e2", "f2"),
                c(C::MisService, "f2"),
            ],
            vec![
                c(C::DependencyBetweenMisServices, "s"),
                p(P::FromDependency, "s", "e1"),
                p(P::ToDependency, "s", "e2"),
                p(P::ContainResource, "s", "r"),
            ],
            vec![skolem("s", "seq", &["e1", "e2"])],
        ),
        rule(
            RuleId::Gr4,
            vec![
                c(C::CommonGoal, "x"),
                p(P::Description, "x", "a"),
                Atom::Builtin(
                    Builtin::SubstringBefore,
                    vec![v("y"), v("a"), Term::Literal(" ".into())],
                ),
                c(C::AbstractService, "b"),
                p(P::Name, "b", "c"),
                Atom::Builtin(Builtin::ContainsIgnoreCase, vec![v("c"), v("y")]),
            ],
            vec![p(P::AchievesAService, "x", "b")],
            vec![],
        ),
        topology_rule(RuleId::Gr5a, E::Central, E::Continuous, E::Star),
        topology_rule(RuleId::Gr5b, E::Equal, E::Discontinuous, E::P2p),
        topology_rule(RuleId::Gr5c, E::Hierarchical, E::Continuous, E::Chain),
    ]
}

/// Human-readable rule listing, one rule per line.
pub fn dump_rules(rules: &[Rule]) -> String {
    rules.iter().map(|r| format!("{r}\n")).collect()
}
