//! Collaborative network documents (XML and JSON) and their ingestion.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::error::IngestError;
use crate::kb::{Id, KnowledgeBase, Value};
use crate::vocab::{Concept, EnumIndividual, Predicate};
use crate::xml::{self, Element, Writer};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NetworkDoc {
    pub name: String,
    #[serde(default)]
    pub participants: Vec<ParticipantDecl>,
    #[serde(default)]
    pub relationships: Vec<RelationshipDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyDecl>,
    #[serde(default)]
    pub common_goals: Vec<GoalDecl>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ParticipantDecl {
    pub name: String,
    #[serde(default)]
    pub roles: Vec<String>,
    #[serde(default)]
    pub abstract_services: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationshipDecl {
    #[serde(rename = "type")]
    pub kind: String,
    pub p1: String,
    pub p2: String,
    pub duration: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyDecl {
    pub power: String,
    pub duration: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalDecl {
    pub description: String,
}

impl NetworkDoc {
    pub fn from_xml(text: &str) -> Result<Self, IngestError> {
        let root = xml::parse(text.as_bytes()).map_err(IngestError::Parse)?;
        from_element(&root).map_err(IngestError::Parse)
    }

    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::Parse(e.to_string()))
    }

    pub fn to_xml(&self) -> String {
        let mut w = Writer::new(true);
        w.start("network", &[("name", &self.name)]);
        for p in &self.participants {
            if p.roles.is_empty() && p.abstract_services.is_empty() {
                w.empty("participants", &[("name", &p.name)]);
                continue;
            }
            w.start("participants", &[("name", &p.name)]);
            for r in &p.roles {
                w.empty("role", &[("name", r)]);
            }
            for s in &p.abstract_services {
                w.empty("abstractService", &[("name", s)]);
            }
            w.end("participants");
        }
        for r in &self.relationships {
            w.empty(
                "relationship",
                &[("type", &r.kind), ("p1", &r.p1), ("p2", &r.p2), ("duration", &r.duration)],
            );
        }
        if let Some(t) = &self.topology {
            w.empty("topology", &[("power", &t.power), ("duration", &t.duration)]);
        }
        for g in &self.common_goals {
            w.empty("commonGoals", &[("description", &g.description)]);
        }
        w.end("network");
        w.finish()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network documents always serialize")
    }

    pub fn network_id(&self) -> Id {
        Id::from_name(&self.name)
    }
}

fn from_element(root: &Element) -> Result<NetworkDoc, String> {
    if root.name != "network" {
        return Err(format!("root element must be <network>, found <{}>", root.name));
    }
    let mut doc = NetworkDoc { name: root.require("name")?.to_string(), ..Default::default() };
    for child in &root.children {
        match child.name.as_str() {
            "participants" => {
                let mut p = ParticipantDecl { name: child.require("name")?.to_string(), ..Default::default() };
                for item in &child.children {
                    let name = item.require("name")?.to_string();
                    match item.name.as_str() {
                        "role" => p.roles.push(name),
                        "abstractService" => p.abstract_services.push(name),
                        other => return Err(format!("unexpected <{other}> inside <participants>")),
                    }
                }
                doc.participants.push(p);
            }
            "relationship" => doc.relationships.push(RelationshipDecl {
                kind: child.require("type")?.to_string(),
                p1: child.require("p1")?.to_string(),
                p2: child.require("p2")?.to_string(),
                duration: child.require("duration")?.to_string(),
            }),
            "topology" => {
                if doc.topology.is_some() {
                    return Err("more than one <topology>".into());
                }
                doc.topology = Some(TopologyDecl {
                    power: child.require("power")?.to_string(),
                    duration: child.require("duration")?.to_string(),
                });
            }
            "commonGoals" => {
                let description = match child.attr("description") {
                    Some(d) => d.to_string(),
                    None => child.text.trim().to_string(),
                };
                doc.common_goals.push(GoalDecl { description });
            }
            other => return Err(format!("unexpected <{other}> inside <network>")),
        }
    }
    Ok(doc)
}

enum Finding {
    Error(IngestError),
    Warning(&'static str, String),
}

fn untypable(power: EnumIndividual, duration: EnumIndividual) -> bool {
    use EnumIndividual::*;
    !matches!(
        (power, duration),
        (Central, Continuous) | (Equal, Discontinuous) | (Hierarchical, Continuous)
    )
}

fn findings(doc: &NetworkDoc, kb: Option<&KnowledgeBase>) -> Vec<Finding> {
    let mut out = Vec::new();
    let mut invalid = |msg: String| out.push(Finding::Error(IngestError::Validation(msg)));

    if doc.name.trim().is_empty() {
        invalid("the network needs a name".into());
    }
    if doc.participants.len() < 2 {
        invalid(format!(
            "a collaborative network needs at least two participants, found {}",
            doc.participants.len()
        ));
    }
    let mut names = BTreeSet::new();
    for p in &doc.participants {
        if p.name.trim().is_empty() {
            invalid("participant with an empty name".into());
        } else if !names.insert(Id::from_name(&p.name)) {
            invalid(format!("participant `{}` is declared twice", p.name));
        }
    }
    for r in &doc.relationships {
        if EnumIndividual::parse_relationship_type(&r.kind).is_err() {
            invalid(format!("unknown relationship type `{}`", r.kind));
        }
        if EnumIndividual::parse_duration(&r.duration).is_err() {
            invalid(format!("unknown relationship duration `{}`", r.duration));
        }
        for end in [&r.p1, &r.p2] {
            if !doc.participants.iter().any(|p| &p.name == end) {
                invalid(format!("relationship endpoint `{end}` is not a declared participant"));
            }
        }
        if r.p1 == r.p2 {
            invalid(format!("relationship links `{}` to itself", r.p1));
        }
    }
    let mut untypable_topology = None;
    if let Some(t) = &doc.topology {
        let power = EnumIndividual::parse_power(&t.power);
        let duration = EnumIndividual::parse_duration(&t.duration);
        if power.is_err() {
            invalid(format!("unknown topology power `{}`", t.power));
        }
        if duration.is_err() {
            invalid(format!("unknown topology duration `{}`", t.duration));
        }
        if let (Ok(p), Ok(d)) = (power, duration) {
            if untypable(p, d) {
                untypable_topology = Some(format!(
                    "untypable topology: no topology type is deduced for {p} power with {d} duration"
                ));
            }
        }
    }
    for g in &doc.common_goals {
        if g.description.trim().is_empty() {
            invalid("common goal with an empty description".into());
        }
    }
    if let Some(kb) = kb {
        for p in &doc.participants {
            for role in &p.roles {
                if !kb.has_concept(&Id::from_name(role), Concept::Role) {
                    out.push(Finding::Error(IngestError::UnknownRole(role.clone())));
                }
            }
            for s in &p.abstract_services {
                if !kb.has_concept(&Id::from_name(s), Concept::AbstractService) {
                    out.push(Finding::Error(IngestError::UnknownAbstractService(s.clone())));
                }
            }
        }
        for (id, concept, name) in planned_instances(doc) {
            if id.enum_individual().is_some() {
                out.push(Finding::Error(IngestError::Validation(format!(
                    "`{name}` clashes with a reserved vocabulary individual"
                ))));
                continue;
            }
            if let Some(existing) = kb.instance(&id) {
                if !existing.has(concept) || existing.label != name {
                    out.push(Finding::Error(IngestError::Validation(format!(
                        "`{name}` clashes with existing knowledge base entry `{}`",
                        existing.label
                    ))));
                }
            }
        }
    } else {
        for (id, _, name) in planned_instances(doc) {
            if id.enum_individual().is_some() {
                out.push(Finding::Error(IngestError::Validation(format!(
                    "`{name}` clashes with a reserved vocabulary individual"
                ))));
            }
        }
    }
    if let Some(msg) = untypable_topology {
        out.push(Finding::Warning("untypable-topology", msg));
    }
    out
}

fn code(err: &IngestError) -> &'static str {
    match err {
        IngestError::Validation(_) => "invalid-network",
        IngestError::UnknownRole(_) => "unknown-role",
        IngestError::UnknownAbstractService(_) => "unknown-abstract-service",
        IngestError::Parse(_) => "parse-error",
        IngestError::Kb(_) => "kb-error",
    }
}

fn to_diagnostics(findings: Vec<Finding>) -> Vec<Diagnostic> {
    findings
        .into_iter()
        .map(|f| match f {
            Finding::Error(e) => Diagnostic::error(code(&e), e.to_string()),
            Finding::Warning(code, msg) => Diagnostic::warning(code, msg),
        })
        .collect()
}

/// Structural checks only. Warnings do not block ingestion.
pub fn validate_network(doc: &NetworkDoc) -> Vec<Diagnostic> {
    to_diagnostics(findings(doc, None))
}

/// Structural checks plus resolution of roles and abstract services against
/// the seed knowledge base.
pub fn validate_network_against(doc: &NetworkDoc, kb: &KnowledgeBase) -> Vec<Diagnostic> {
    to_diagnostics(findings(doc, Some(kb)))
}

fn relationship_ids(doc: &NetworkDoc) -> Vec<Id> {
    let mut seen = BTreeSet::new();
    doc.relationships
        .iter()
        .map(|r| {
            let base = Id::skolem("rel", &[&Id::from_name(&r.p1), &Id::from_name(&r.p2)]);
            let mut id = base.clone();
            let mut n = 1;
            while !seen.insert(id.clone()) {
                n += 1;
                id = Id::new(format!("{base}--{n}")).expect("suffix keeps the id valid");
            }
            id
        })
        .collect()
}

fn topology_id(doc: &NetworkDoc) -> Id {
    Id::skolem("topology", &[&doc.network_id()])
}

fn goal_id(doc: &NetworkDoc, index: usize) -> Id {
    Id::new(format!("goal--{}--{}", doc.network_id(), index + 1)).expect("slug ids are valid")
}

/// Every instance the document will create, with its concept and label.
fn planned_instances(doc: &NetworkDoc) -> Vec<(Id, Concept, String)> {
    let mut out = vec![(doc.network_id(), Concept::CollaborativeNetwork, doc.name.clone())];
    for p in &doc.participants {
        out.push((Id::from_name(&p.name), Concept::Participant, p.name.clone()));
    }
    for (r, id) in doc.relationships.iter().zip(relationship_ids(doc)) {
        out.push((id, Concept::Relationship, format!("{} {} {}", r.p1, r.kind, r.p2)));
    }
    if doc.topology.is_some() {
        out.push((topology_id(doc), Concept::Topology, format!("topology of {}", doc.name)));
    }
    for (i, g) in doc.common_goals.iter().enumerate() {
        out.push((goal_id(doc, i), Concept::CommonGoal, g.description.clone()));
    }
    out
}

/// Asserts the document into `kb`. Fails without touching the store when any
/// error-level check fails. Re-ingesting the same document changes nothing.
pub fn ingest_network(kb: &mut KnowledgeBase, doc: &NetworkDoc) -> Result<(), IngestError> {
    if let Some(Finding::Error(e)) =
        findings(doc, Some(kb)).into_iter().find(|f| matches!(f, Finding::Error(_)))
    {
        return Err(e);
    }
    let mut staged = kb.clone();
    apply(&mut staged, doc)?;
    *kb = staged;
    Ok(())
}

fn apply(kb: &mut KnowledgeBase, doc: &NetworkDoc) -> Result<(), IngestError> {
    for (id, concept, label) in planned_instances(doc) {
        kb.add_instance(id, &label, &[concept])?;
    }
    let net = doc.network_id();
    kb.assert(&net, Predicate::Name, Value::literal(doc.name.clone()))?;
    for p in &doc.participants {
        let pid = Id::from_name(&p.name);
        kb.assert(&pid, Predicate::Name, Value::literal(p.name.clone()))?;
        for role in &p.roles {
            kb.assert(&pid, Predicate::PlayRole, Id::from_name(role))?;
        }
        for s in &p.abstract_services {
            kb.assert(&pid, Predicate::ProvideAService, Id::from_name(s))?;
        }
    }
    for (r, rid) in doc.relationships.iter().zip(relationship_ids(doc)) {
        let kind = EnumIndividual::parse_relationship_type(&r.kind).map_err(vocab)?;
        let duration = EnumIndividual::parse_duration(&r.duration).map_err(vocab)?;
        kb.assert(&net, Predicate::HasRelationship, rid.clone())?;
        kb.assert(&rid, Predicate::P1, Id::from_name(&r.p1))?;
        kb.assert(&rid, Predicate::P2, Id::from_name(&r.p2))?;
        kb.assert(&rid, Predicate::HasType, kind)?;
        kb.assert(&rid, Predicate::HasDuration, duration)?;
    }
    if let Some(t) = &doc.topology {
        let tid = topology_id(doc);
        kb.assert(&net, Predicate::HasTopology, tid.clone())?;
        kb.assert(&tid, Predicate::HasPower, EnumIndividual::parse_power(&t.power).map_err(vocab)?)?;
        kb.assert(
            &tid,
            Predicate::HasDuration,
            EnumIndividual::parse_duration(&t.duration).map_err(vocab)?,
        )?;
    }
    for (i, g) in doc.common_goals.iter().enumerate() {
        let gid = goal_id(doc, i);
        kb.assert(&net, Predicate::HasCommonGoal, gid.clone())?;
        kb.assert(&gid, Predicate::Description, Value::literal(g.description.clone()))?;
    }
    Ok(())
}

fn vocab(e: crate::error::VocabError) -> IngestError {
    IngestError::Validation(e.to_string())
}
