//! Oracles for the acceptance suite.
//!
//! The naive evaluator works on plain strings and re-runs every rule against
//! the whole store until nothing changes. It shares no code with the engine:
//! rule bodies are hand-written joins transcribed from the rule formulas.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use cbp_core::process::{FlowKind, Lane, Node, NodeKind, Pool, ProcessGraph};
use cbp_core::vocab::{Domain, Range};
use cbp_core::{Concept, EnumIndividual, Id, KnowledgeBase, Predicate, Value};
use rand::seq::SliceRandom;
use rand::Rng;

/// Object of a triple: `i:<id>` or `l:<literal>`.
pub type Obj = String;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct State {
    pub types: BTreeSet<(String, String)>,
    pub triples: BTreeSet<(String, String, Obj)>,
}

pub fn iri(id: &str) -> Obj {
    format!("i:{id}")
}

fn lit(o: &str) -> Option<&str> {
    o.strip_prefix("l:")
}

fn inst(o: &str) -> Option<&str> {
    o.strip_prefix("i:")
}

impl State {
    pub fn of_kb(kb: &KnowledgeBase) -> Self {
        let mut s = State::default();
        for i in kb.instances() {
            for c in i.concepts.keys() {
                s.types.insert((i.id.to_string(), c.as_str().to_string()));
            }
        }
        for (subj, p, o) in kb.triples() {
            let o = match o {
                Value::Id(id) => iri(id.as_str()),
                Value::Literal(l) => format!("l:{l}"),
            };
            s.triples.insert((subj.to_string(), p.as_str().to_string(), o));
        }
        s
    }

    fn is(&self, x: &str, concept: &str) -> bool {
        self.types.contains(&(x.to_string(), concept.to_string()))
    }

    fn of_type(&self, concept: &str) -> Vec<String> {
        self.types.iter().filter(|(_, c)| c == concept).map(|(x, _)| x.clone()).collect()
    }

    /// Object ids of `p` from subject `s`.
    fn objs(&self, s: &str, p: &str) -> Vec<String> {
        self.triples
            .iter()
            .filter(|(a, b, _)| a == s && b == p)
            .filter_map(|(_, _, o)| inst(o).map(str::to_string))
            .collect()
    }

    fn lits(&self, s: &str, p: &str) -> Vec<String> {
        self.triples
            .iter()
            .filter(|(a, b, _)| a == s && b == p)
            .filter_map(|(_, _, o)| lit(o).map(str::to_string))
            .collect()
    }

    fn pairs(&self, p: &str) -> Vec<(String, String)> {
        self.triples
            .iter()
            .filter(|(_, b, _)| b == p)
            .filter_map(|(a, _, o)| inst(o).map(|o| (a.clone(), o.to_string())))
            .collect()
    }

    fn has(&self, s: &str, p: &str, o: &str) -> bool {
        self.triples.contains(&(s.to_string(), p.to_string(), iri(o)))
    }
}

#[derive(Default)]
struct Out {
    types: Vec<(String, String)>,
    triples: Vec<(String, String, Obj)>,
}

impl Out {
    fn ty(&mut self, x: &str, c: &str) {
        self.types.push((x.into(), c.into()));
    }
    fn t(&mut self, s: &str, p: &str, o: &str) {
        self.triples.push((s.into(), p.into(), iri(o)));
    }
}

fn gr1a(s: &State, out: &mut Out) {
    for x in s.of_type("Participant") {
        for y in s.objs(&x, "playRole") {
            for z in s.objs(&y, "performAService") {
                out.t(&x, "provideAService", &z);
            }
        }
    }
}

fn gr1b(s: &State, out: &mut Out) {
    for x in s.of_type("Participant") {
        for z in s.objs(&x, "provideAService") {
            for (y, z2) in s.pairs("performAService") {
                if z2 == z {
                    out.t(&x, "playRole", &y);
                }
            }
        }
    }
}

fn gr2(s: &State, out: &mut Out) {
    for x in s.of_type("Participant") {
        for y in s.objs(&x, "provideAService") {
            for a in s.objs(&y, "hasBusinessService") {
                out.t(&x, "provideBusinessService", &a);
            }
        }
    }
}

fn gr3(s: &State, out: &mut Out, provider: &str, consumer: &str) {
    for a in s.of_type("CollaborativeNetwork") {
        for z in s.objs(&a, "hasRelationship") {
            for y in s.objs(&z, provider) {
                for c in s.objs(&y, "provideBusinessService") {
                    for d in s.objs(&c, "hasOutput") {
                        for x in s.objs(&z, consumer) {
                            for b in s.objs(&x, "provideBusinessService") {
                                if !s.has(&b, "hasInput", &d) {
                                    continue;
                                }
                                for f in s.of_type("CoordinationService") {
                                    if !s.has(&f, "manipulateResource", &d) {
                                        continue;
                                    }
                                    let e = format!("dep--{c}--{b}--{d}");
                                    out.ty(&e, "DependencyBetweenBusinessServices");
                                    out.t(&e, "fromBusinessService", &c);
                                    out.t(&e, "toBusinessService", &b);
                                    out.t(&e, "containResource", &d);
                                    out.t(&e, "isCoordinatedBy", &f);
                                    out.ty(&f, "MISService");
                                    out.t(&a, "hasMISservice", &f);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn gr3seq(s: &State, out: &mut Out) {
    for e1 in s.of_type("DependencyBetweenBusinessServices") {
        for b in s.objs(&e1, "toBusinessService") {
            for f1 in s.objs(&e1, "isCoordinatedBy") {
                if !s.is(&f1, "MISService") {
                    continue;
                }
                for (p, b1) in s.pairs("provideBusinessService") {
                    if b1 != b {
                        continue;
                    }
                    for r in s.objs(&b, "hasOutput") {
                        for b2 in s.objs(&p, "provideBusinessService") {
                            if !s.has(&b2, "hasInput", &r) {
                                continue;
                            }
                            for (e2, from) in s.pairs("fromBusinessService") {
                                if from != b2 {
                                    continue;
                                }
                                for f2 in s.objs(&e2, "isCoordinatedBy") {
                                    if !s.is(&f2, "MISService") {
                                        continue;
                                    }
                                    let q = format!("seq--{e1}--{e2}");
                                    out.ty(&q, "DependencyBetweenMISServices");
                                    out.t(&q, "fromDependency", &e1);
                                    out.t(&q, "toDependency", &e2);
                                    out.t(&q, "containResource", &r);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}

fn first_word(text: &str) -> &str {
    text.split(' ').next().unwrap_or(text)
}

fn gr4(s: &State, out: &mut Out) {
    for x in s.of_type("CommonGoal") {
        for desc in s.lits(&x, "description") {
            let word = first_word(&desc).to_lowercase();
            if word.is_empty() {
                continue;
            }
            for b in s.of_type("AbstractService") {
                if s.lits(&b, "name").iter().any(|n| n.to_lowercase().contains(&word)) {
                    out.t(&x, "achievesAService", &b);
                }
            }
        }
    }
}

fn gr5(s: &State, out: &mut Out) {
    for x in s.of_type("Topology") {
        for (power, duration, kind) in
            [("central", "continuous", "star"), ("equal", "discontinuous", "P2P"), ("hierarchical", "continuous", "chain")]
        {
            if s.has(&x, "hasPower", power) && s.has(&x, "hasDuration", duration) {
                out.t(&x, "hasType", kind);
            }
        }
    }
}

/// Runs every rule over the whole state until a round adds nothing.
/// Returns the closure and the number of productive rounds.
pub fn naive_fixpoint(start: &State) -> (State, usize) {
    let mut s = start.clone();
    let mut rounds = 0;
    loop {
        let mut out = Out::default();
        gr1a(&s, &mut out);
        gr1b(&s, &mut out);
        gr2(&s, &mut out);
        gr3(&s, &mut out, "P1", "P2");
        gr3(&s, &mut out, "P2", "P1");
        gr3seq(&s, &mut out);
        gr4(&s, &mut out);
        gr5(&s, &mut out);
        let before = (s.types.len(), s.triples.len());
        s.types.extend(out.types);
        s.triples.extend(out.triples);
        if (s.types.len(), s.triples.len()) == before {
            return (s, rounds);
        }
        rounds += 1;
        assert!(rounds < 1000, "naive evaluation does not terminate");
    }
}

fn id(s: &str) -> Id {
    Id::new(s).unwrap()
}

const POOL: &[(Concept, &[&str])] = &[
    (Concept::CollaborativeNetwork, &["net1", "net2"]),
    (Concept::Participant, &["pa", "pb", "pc"]),
    (Concept::Role, &["role1", "role2"]),
    (Concept::AbstractService, &["as1", "as2", "as3"]),
    (Concept::BusinessService, &["bs1", "bs2", "bs3", "bs4"]),
    (Concept::Resource, &["res1", "res2", "res3"]),
    (Concept::CoordinationService, &["co1", "co2"]),
    (Concept::MisService, &["co2"]),
    (Concept::Relationship, &["rel1", "rel2"]),
    (Concept::Topology, &["top1", "top2"]),
    (Concept::CommonGoal, &["goal1", "goal2"]),
    (Concept::DependencyBetweenBusinessServices, &["depx"]),
];

const NAMES: &[&str] = &["buy", "Buy over internet", "sell product", "BUY IN A STORE", "sell", "order", "x"];
const DESCRIPTIONS: &[&str] = &["buy 100 bolts", "sell widgets fast", "buy", "order", " buy", "Sell"];

/// Predicates the rules read, drawn more often than the rest.
const HOT: &[Predicate] = &[
    Predicate::PlayRole,
    Predicate::PerformAService,
    Predicate::ProvideAService,
    Predicate::HasBusinessService,
    Predicate::ProvideBusinessService,
    Predicate::HasInput,
    Predicate::HasOutput,
    Predicate::HasRelationship,
    Predicate::P1,
    Predicate::P2,
    Predicate::ManipulateResource,
    Predicate::Name,
    Predicate::Description,
    Predicate::HasPower,
    Predicate::HasDuration,
];

fn members(concepts: &[Concept]) -> Vec<&'static str> {
    POOL.iter().filter(|(c, _)| concepts.contains(c)).flat_map(|(_, ids)| ids.iter().copied()).collect()
}

/// A random store with every pool instance and up to `max_facts` facts.
/// Subjects and objects are drawn from the predicate's declared domain and
/// range; the store still checks every fact and ill-typed picks are redrawn.
pub fn random_kb(rng: &mut impl Rng, max_facts: usize) -> KnowledgeBase {
    let mut kb = KnowledgeBase::new();
    for (concept, ids) in POOL {
        for i in *ids {
            kb.add_instance(id(i), i, &[*concept]).unwrap();
        }
    }
    if rng.gen_bool(0.5) {
        plant_collaboration(rng, &mut kb);
    }
    let all_ids: Vec<&str> = POOL.iter().flat_map(|(_, ids)| ids.iter().copied()).collect();
    let target = rng.gen_range(kb.fact_count()..=max_facts);
    let mut attempts = 0;
    while kb.fact_count() < target && attempts < 2000 {
        attempts += 1;
        let p = if rng.gen_bool(0.85) {
            *HOT.choose(rng).unwrap()
        } else {
            *Predicate::ALL.choose(rng).unwrap()
        };
        let sig = p.signature();
        let subjects = match sig.domain {
            Domain::Any => all_ids.clone(),
            Domain::Concepts(cs) => members(cs),
        };
        let Some(subject) = subjects.choose(rng) else { continue };
        let object: Value = match sig.range {
            Range::Literal if p == Predicate::Description => Value::literal(*DESCRIPTIONS.choose(rng).unwrap()),
            Range::Literal => Value::literal(*NAMES.choose(rng).unwrap()),
            Range::Enum(_) => (*EnumIndividual::ALL.choose(rng).unwrap()).into(),
            Range::Concepts(cs) => match members(cs).choose(rng) {
                Some(o) => Value::Id(id(o)),
                None => continue,
            },
        };
        let _ = kb.assert(&id(subject), p, object);
    }
    kb
}

/// Most of a two-partner exchange: a resource handed from one partner to the
/// other and a follow-up resource handed back. Each fact is kept with
/// probability 0.9 and picks may coincide, so some chains are broken.
fn plant_collaboration(rng: &mut impl Rng, kb: &mut KnowledgeBase) {
    let mut pick = |c: Concept| *members(&[c]).choose(rng).unwrap();
    let (net, z) = (pick(Concept::CollaborativeNetwork), pick(Concept::Relationship));
    let (y, x) = (pick(Concept::Participant), pick(Concept::Participant));
    let [c, b, b2, b3] = [(); 4].map(|_| pick(Concept::BusinessService));
    let [d, r, r2] = [(); 3].map(|_| pick(Concept::Resource));
    let (f, f2) = (pick(Concept::CoordinationService), pick(Concept::CoordinationService));
    use Predicate as P;
    let chain = [
        (net, P::HasRelationship, z),
        (z, P::P1, y),
        (z, P::P2, x),
        (y, P::ProvideBusinessService, c),
        (c, P::HasOutput, d),
        (x, P::ProvideBusinessService, b),
        (b, P::HasInput, d),
        (f, P::ManipulateResource, d),
        (b, P::HasOutput, r),
        (x, P::ProvideBusinessService, b2),
        (b2, P::HasInput, r),
        (b2, P::HasOutput, r2),
        (y, P::ProvideBusinessService, b3),
        (b3, P::HasInput, r2),
        (f2, P::ManipulateResource, r2),
    ];
    for (s, p, o) in chain {
        if rng.gen_bool(0.9) {
            kb.assert(&id(s), p, id(o)).unwrap();
        }
    }
}

/// Nodes reachable from `from` along the given edges, `from` excluded unless
/// it lies on a cycle.
pub fn bfs(edges: &[(String, String)], from: &str) -> BTreeSet<String> {
    let mut adj: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in edges {
        adj.entry(a).or_default().push(b);
    }
    let mut seen = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for &m in adj.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            if seen.insert(m.to_string()) {
                queue.push_back(m);
            }
        }
    }
    seen
}

pub fn sequence_edges(g: &ProcessGraph) -> Vec<(String, String)> {
    g.flows
        .iter()
        .filter(|f| f.kind == FlowKind::Sequence)
        .map(|f| (f.source.clone(), f.target.clone()))
        .collect()
}

pub const MIS_LANE: &str = "lane--mis";
pub const PARTNER_POOL: &str = "pool--partner";
pub const PARTNER_LANE: &str = "lane--partner";

/// A random mediation graph of `n` MIS tasks (`m00`..) with random sequence
/// flows, plus a partner pool whose tasks message some of them.
pub fn random_mediation_graph(rng: &mut impl Rng, n: usize) -> ProcessGraph {
    let mut g = ProcessGraph::new("rand");
    g.add_mediation_lane(Lane { id: MIS_LANE.into(), name: "mis".into(), reference: None });
    g.pools.push(Pool {
        id: PARTNER_POOL.into(),
        name: "partner".into(),
        participant: Some(id("partner")),
        lanes: vec![Lane { id: PARTNER_LANE.into(), name: "role".into(), reference: None }],
    });
    for i in 0..n {
        g.add_node(Node {
            id: format!("m{i:02}"),
            name: format!("m{i}"),
            lane: MIS_LANE.into(),
            kind: NodeKind::MisTask {
                dependency: id(&format!("dep{i}")),
                coordination_service: id("co"),
                resource: id("res"),
            },
        })
        .unwrap();
    }
    let density = rng.gen_range(0.05..0.35);
    for a in 0..n {
        for b in 0..n {
            // Mostly forward edges, with the odd back edge to make cycles.
            let p = if a < b { density } else { density / 6.0 };
            if a != b && rng.gen_bool(p) {
                g.add_flow(FlowKind::Sequence, &format!("m{a:02}"), &format!("m{b:02}")).unwrap();
            }
        }
    }
    let partners = rng.gen_range(0..=3);
    for k in 0..partners {
        let tid = format!("t{k}");
        g.add_node(Node {
            id: tid.clone(),
            name: tid.clone(),
            lane: PARTNER_LANE.into(),
            kind: NodeKind::Task {
                participant: id("partner"),
                business_service: id(&format!("bs{k}")),
                inputs: vec![],
                outputs: vec![id(&format!("out{k}"))],
            },
        })
        .unwrap();
        if n > 0 {
            let target = format!("m{:02}", rng.gen_range(0..n));
            g.add_flow(FlowKind::Message, &tid, &target).unwrap();
        }
    }
    g
}

/// Minimal element tree: raw tag names (prefix kept), attributes, trimmed text.
#[derive(Debug, Clone, Default)]
pub struct El {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub text: String,
    pub children: Vec<El>,
}

impl El {
    pub fn local(&self) -> &str {
        self.name.rsplit(':').next().unwrap()
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn walk<'a>(&'a self, out: &mut Vec<&'a El>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }
}

pub fn parse_tree(text: &str) -> El {
    use quick_xml::events::{BytesStart, Event};
    let open = |e: &BytesStart| El {
        name: String::from_utf8(e.name().as_ref().to_vec()).unwrap(),
        attrs: e
            .attributes()
            .map(|a| {
                let a = a.unwrap();
                (String::from_utf8(a.key.as_ref().to_vec()).unwrap(), a.unescape_value().unwrap().into_owned())
            })
            .collect(),
        ..El::default()
    };
    let mut reader = quick_xml::Reader::from_str(text);
    let mut stack: Vec<El> = vec![El::default()];
    loop {
        match reader.read_event().unwrap() {
            Event::Start(e) => stack.push(open(&e)),
            Event::Empty(e) => {
                let el = open(&e);
                stack.last_mut().unwrap().children.push(el);
            }
            Event::Text(t) => stack.last_mut().unwrap().text.push_str(t.unescape().unwrap().trim()),
            Event::End(_) => {
                let el = stack.pop().unwrap();
                stack.last_mut().unwrap().children.push(el);
            }
            Event::Eof => break,
            _ => {}
        }
    }
    let mut doc = stack.pop().unwrap();
    assert_eq!(doc.children.len(), 1, "one root element");
    doc.children.pop().unwrap()
}
