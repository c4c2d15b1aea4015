//! Checks a BPMN document against the shipped schema subset
//! (`schema/bpmn20-subset.xsd`) and against the structural rules the
//! exporter relies on. The content model below mirrors the XSD by hand.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::Diagnostic;
use crate::xml::{self, Element};

use super::BPMN_MODEL_NS;

pub const BPMN_SUBSET_XSD: &str = include_str!("../../schema/bpmn20-subset.xsd");

#[derive(Clone, Copy)]
enum Ty {
    Id,
    IdRef,
    QName,
    Str,
    Uri,
    Bool,
    Direction,
}

struct Rule {
    name: &'static str,
    attrs: &'static [(&'static str, Ty, bool)],
    /// Sequence of particles; each particle is a choice of element names
    /// with a minimum count and no upper bound.
    content: &'static [(&'static [&'static str], usize)],
    text: Option<Ty>,
}

const FLOW_NODES: &[&str] = &[
    "task",
    "startEvent",
    "endEvent",
    "parallelGateway",
    "eventBasedGateway",
    "exclusiveGateway",
    "inclusiveGateway",
];
const FLOW_ELEMENTS: &[&str] = &[
    "task",
    "startEvent",
    "endEvent",
    "parallelGateway",
    "eventBasedGateway",
    "exclusiveGateway",
    "inclusiveGateway",
    "sequenceFlow",
];
const DOC: (&[&str], usize) = (&["documentation"], 0);
const BASE: &[(&str, Ty, bool)] = &[("id", Ty::Id, false), ("name", Ty::Str, false)];
const GATEWAY: &[(&str, Ty, bool)] =
    &[("id", Ty::Id, false), ("name", Ty::Str, false), ("gatewayDirection", Ty::Direction, false)];
const FLOW: &[(&str, Ty, bool)] = &[
    ("id", Ty::Id, false),
    ("name", Ty::Str, false),
    ("sourceRef", Ty::IdRef, true),
    ("targetRef", Ty::IdRef, true),
];
const MESSAGE_FLOW: &[(&str, Ty, bool)] = &[
    ("id", Ty::Id, false),
    ("name", Ty::Str, false),
    ("sourceRef", Ty::QName, true),
    ("targetRef", Ty::QName, true),
];

const RULES: &[Rule] = &[
    Rule {
        name: "definitions",
        attrs: &[("id", Ty::Id, false), ("name", Ty::Str, false), ("targetNamespace", Ty::Uri, true)],
        content: &[DOC, (&["collaboration", "process"], 0)],
        text: None,
    },
    Rule { name: "documentation", attrs: &[("id", Ty::Id, false)], content: &[], text: Some(Ty::Str) },
    Rule { name: "collaboration", attrs: BASE, content: &[DOC, (&["participant"], 0), (&["messageFlow"], 0)], text: None },
    Rule {
        name: "participant",
        attrs: &[("id", Ty::Id, false), ("name", Ty::Str, false), ("processRef", Ty::QName, false)],
        content: &[DOC],
        text: None,
    },
    Rule { name: "messageFlow", attrs: MESSAGE_FLOW, content: &[DOC], text: None },
    Rule {
        name: "process",
        attrs: &[("id", Ty::Id, false), ("name", Ty::Str, false), ("isExecutable", Ty::Bool, false)],
        content: &[DOC, (&["laneSet"], 0), (FLOW_ELEMENTS, 0)],
        text: None,
    },
    Rule { name: "laneSet", attrs: BASE, content: &[DOC, (&["lane"], 0)], text: None },
    Rule { name: "lane", attrs: BASE, content: &[DOC, (&["flowNodeRef"], 0)], text: None },
    Rule { name: "flowNodeRef", attrs: &[], content: &[], text: Some(Ty::IdRef) },
    Rule { name: "sequenceFlow", attrs: FLOW, content: &[DOC], text: None },
    Rule { name: "task", attrs: BASE, content: &[DOC], text: None },
    Rule { name: "startEvent", attrs: BASE, content: &[DOC], text: None },
    Rule { name: "endEvent", attrs: BASE, content: &[DOC], text: None },
    Rule { name: "parallelGateway", attrs: GATEWAY, content: &[DOC], text: None },
    Rule { name: "eventBasedGateway", attrs: GATEWAY, content: &[DOC], text: None },
    Rule { name: "exclusiveGateway", attrs: GATEWAY, content: &[DOC], text: None },
    Rule { name: "inclusiveGateway", attrs: GATEWAY, content: &[DOC], text: None },
];

fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn is_qname(s: &str) -> bool {
    match s.split_once(':') {
        Some((p, l)) => is_ncname(p) && is_ncname(l),
        None => is_ncname(s),
    }
}

fn check_value(ty: Ty, v: &str) -> Result<(), String> {
    let ok = match ty {
        Ty::Id | Ty::IdRef => is_ncname(v),
        Ty::QName => is_qname(v),
        Ty::Str => true,
        Ty::Uri => !v.is_empty() && !v.chars().any(char::is_whitespace),
        Ty::Bool => matches!(v, "true" | "false" | "1" | "0"),
        Ty::Direction => matches!(v, "Unspecified" | "Converging" | "Diverging" | "Mixed"),
    };
    if ok {
        Ok(())
    } else {
        Err(format!("`{v}` is not a valid {}", match ty {
            Ty::Id => "ID",
            Ty::IdRef => "IDREF",
            Ty::QName => "QName",
            Ty::Str => "string",
            Ty::Uri => "anyURI",
            Ty::Bool => "boolean",
            Ty::Direction => "gatewayDirection",
        }))
    }
}

#[derive(Default)]
struct Schema {
    out: Vec<Diagnostic>,
    ids: BTreeSet<String>,
    idrefs: Vec<String>,
}

impl Schema {
    fn error(&mut self, code: &str, msg: String) {
        self.out.push(Diagnostic::error(code, msg));
    }

    fn element(&mut self, el: &Element, path: &str) {
        let path = format!("{path}/{}", el.name);
        if el.namespace.as_deref() != Some(BPMN_MODEL_NS) {
            self.error("schema-namespace", format!("{path}: element is not in the BPMN model namespace"));
            return;
        }
        let Some(rule) = RULES.iter().find(|r| r.name == el.name) else {
            self.error("schema-element", format!("{path}: element not allowed by the schema"));
            return;
        };
        for (key, value) in &el.attrs {
            if key == "xmlns" || key.starts_with("xmlns:") {
                continue;
            }
            match rule.attrs.iter().find(|(k, _, _)| k == key) {
                None => self.error("schema-attribute", format!("{path}: attribute `{key}` not allowed")),
                Some((_, ty, _)) => match check_value(*ty, value) {
                    Err(e) => self.error("schema-value", format!("{path}/@{key}: {e}")),
                    Ok(()) => self.note_value(*ty, value, &path),
                },
            }
        }
        for (key, _, required) in rule.attrs {
            if *required && el.attr(key).is_none() {
                self.error("schema-attribute", format!("{path}: missing required attribute `{key}`"));
            }
        }
        match rule.text {
            Some(ty) => {
                if !el.children.is_empty() {
                    self.error("schema-content", format!("{path}: element content not allowed"));
                }
                let v = if matches!(ty, Ty::Str) { el.text.as_str() } else { el.text.trim() };
                match check_value(ty, v) {
                    Err(e) => self.error("schema-value", format!("{path}: {e}")),
                    Ok(()) => self.note_value(ty, v, &path),
                }
            }
            None if !el.text.trim().is_empty() => {
                self.error("schema-content", format!("{path}: text content not allowed"))
            }
            None => {}
        }
        let mut particle = 0;
        for child in &el.children {
            while particle < rule.content.len() && !rule.content[particle].0.contains(&child.name.as_str()) {
                particle += 1;
            }
            if particle == rule.content.len() {
                self.error(
                    "schema-content",
                    format!("{path}: <{}> not allowed here", child.name),
                );
                break;
            }
        }
        for (names, min) in rule.content {
            let n = el.children.iter().filter(|c| names.contains(&c.name.as_str())).count();
            if n < *min {
                self.error("schema-content", format!("{path}: expected at least {min} of {names:?}"));
            }
        }
        for child in &el.children {
            self.element(child, &path);
        }
    }

    fn note_value(&mut self, ty: Ty, v: &str, path: &str) {
        match ty {
            Ty::Id => {
                if !self.ids.insert(v.to_string()) {
                    self.error("duplicate-id", format!("{path}: id `{v}` is not unique"));
                }
            }
            Ty::IdRef => self.idrefs.push(v.to_string()),
            _ => {}
        }
    }
}

/// Where each flow node and participant sits.
#[derive(Default)]
struct Index<'a> {
    /// Flow node id to (process id, element name).
    nodes: BTreeMap<&'a str, (&'a str, &'a str)>,
    participants: BTreeMap<&'a str, Option<&'a str>>,
    processes: BTreeSet<&'a str>,
}

fn structure(root: &Element, out: &mut Vec<Diagnostic>) {
    let mut idx = Index::default();
    let mut err = |code: &str, msg: String| out.push(Diagnostic::error(code, msg));
    for p in root.children_named("process") {
        let pid = p.attr("id").unwrap_or("");
        idx.processes.insert(pid);
        for n in p.children.iter().filter(|c| FLOW_NODES.contains(&c.name.as_str())) {
            if let Some(id) = n.attr("id") {
                idx.nodes.insert(id, (pid, n.name.as_str()));
            }
        }
    }
    for c in root.children_named("collaboration") {
        for part in c.children_named("participant") {
            let id = part.attr("id").unwrap_or("");
            let pref = part.attr("processRef");
            if let Some(r) = pref {
                if !idx.processes.contains(r) {
                    err("dangling-ref", format!("participant `{id}` refers to unknown process `{r}`"));
                }
            }
            idx.participants.insert(id, pref);
        }
    }
    let mut referenced = BTreeMap::<&str, usize>::new();
    for r in idx.participants.values().flatten() {
        *referenced.entry(r).or_default() += 1;
    }
    for (p, n) in &referenced {
        if *n > 1 {
            err("shared-process", format!("process `{p}` is referenced by {n} participants"));
        }
    }

    let pool_of = |id: &str| -> Option<&str> {
        idx.nodes.get(id).map(|(p, _)| *p).or_else(|| idx.participants.get(id).copied().flatten())
    };
    for c in root.children_named("collaboration") {
        for f in c.children_named("messageFlow") {
            let id = f.attr("id").unwrap_or("");
            let ends = [f.attr("sourceRef").unwrap_or(""), f.attr("targetRef").unwrap_or("")];
            let pools: Vec<Option<&str>> = ends.iter().map(|e| pool_of(e)).collect();
            for (e, p) in ends.iter().zip(&pools) {
                if p.is_none() {
                    err("dangling-ref", format!("message flow `{id}` refers to unknown node `{e}`"));
                }
            }
            if let [Some(a), Some(b)] = pools[..] {
                if a == b {
                    err("message-flow-within-pool", format!("message flow `{id}` stays inside `{a}`"));
                }
            }
        }
    }

    for p in root.children_named("process") {
        let pid = p.attr("id").unwrap_or("");
        let mut incoming = BTreeMap::<&str, usize>::new();
        let mut outgoing = BTreeMap::<&str, usize>::new();
        for f in p.children_named("sequenceFlow") {
            let id = f.attr("id").unwrap_or("");
            for (end, counter) in [("sourceRef", &mut outgoing), ("targetRef", &mut incoming)] {
                let e = f.attr(end).unwrap_or("");
                match idx.nodes.get(e) {
                    Some((owner, _)) if *owner == pid => *counter.entry(e).or_default() += 1,
                    Some((owner, _)) => err(
                        "sequence-flow-across-pools",
                        format!("sequence flow `{id}` in `{pid}` reaches `{e}` in `{owner}`"),
                    ),
                    None => err("dangling-ref", format!("sequence flow `{id}` refers to unknown node `{e}`")),
                }
            }
        }
        let lane_sets: Vec<&Element> = p.children_named("laneSet").collect();
        let mut placed = BTreeMap::<&str, usize>::new();
        for lane in lane_sets.iter().flat_map(|s| s.children_named("lane")) {
            for r in lane.children_named("flowNodeRef") {
                let r = r.text.trim();
                match idx.nodes.get(r) {
                    Some((owner, _)) if *owner == pid => *placed.entry(r).or_default() += 1,
                    _ => err("dangling-ref", format!("lane `{}` refers to `{r}` outside `{pid}`", lane.attr("id").unwrap_or(""))),
                }
            }
        }
        for (id, (owner, kind)) in &idx.nodes {
            if *owner != pid {
                continue;
            }
            if !lane_sets.is_empty() && placed.get(id).copied().unwrap_or(0) != 1 {
                err("lane-membership", format!("`{id}` must sit in exactly one lane of `{pid}`"));
            }
            let (i, o) = (incoming.get(id).copied().unwrap_or(0), outgoing.get(id).copied().unwrap_or(0));
            match *kind {
                "startEvent" if i > 0 => err("start-event-incoming", format!("start event `{id}` has incoming sequence flows")),
                "endEvent" if o > 0 => err("end-event-outgoing", format!("end event `{id}` has outgoing sequence flows")),
                _ => {}
            }
            let node = p.children.iter().find(|c| c.attr("id") == Some(id)).expect("indexed from this process");
            match node.attr("gatewayDirection") {
                Some("Diverging") if i > 1 || o < 1 => err(
                    "gateway-direction",
                    format!("diverging gateway `{id}` has {i} incoming and {o} outgoing flows"),
                ),
                Some("Converging") if o > 1 || i < 1 => err(
                    "gateway-direction",
                    format!("converging gateway `{id}` has {i} incoming and {o} outgoing flows"),
                ),
                _ => {}
            }
        }
    }
}

/// Empty iff `bytes` is a well-formed document accepted by the schema subset
/// with consistent references.
pub fn validate_bpmn(bytes: &[u8]) -> Vec<Diagnostic> {
    let root = match xml::parse(bytes) {
        Ok(r) => r,
        Err(e) => return vec![Diagnostic::error("malformed-xml", e)],
    };
    if root.name != "definitions" {
        return vec![Diagnostic::error("schema-element", format!("root element is <{}>, not <definitions>", root.name))];
    }
    let mut schema = Schema::default();
    schema.element(&root, "");
    for r in std::mem::take(&mut schema.idrefs) {
        if !schema.ids.contains(&r) {
            schema.error("dangling-ref", format!("IDREF `{r}` has no matching id"));
        }
    }
    let mut out = schema.out;
    if out.is_empty() {
        structure(&root, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::small_complete;
    use super::super::{export_bpmn, serialize_bpmn};
    use super::*;

    fn codes(text: &str) -> Vec<String> {
        validate_bpmn(text.as_bytes()).into_iter().map(|d| d.code).collect()
    }

    fn sample() -> String {
        serialize_bpmn(&export_bpmn(&small_complete()).unwrap(), true)
    }

    #[test]
    fn exported_documents_are_valid() {
        assert!(codes(&sample()).is_empty());
    }

    #[test]
    fn schema_violations_are_reported() {
        let s = sample();
        assert_eq!(codes("<a"), ["malformed-xml"]);
        assert!(codes(&s.replace("bpmn:task", "bpmn:userTask")).contains(&"schema-element".to_string()));
        assert!(codes(&s.replace(r#"isExecutable="false""#, r#"isExecutable="no""#)).contains(&"schema-value".to_string()));
        assert!(codes(&s.replace(r#"gatewayDirection="Diverging""#, r#"gatewayDirection="Out""#))
            .contains(&"schema-value".to_string()));
        assert!(codes(&s.replace(r#" targetNamespace="urn:cbp:process""#, "")).contains(&"schema-attribute".to_string()));
        assert!(codes(&s.replace(r#"id="n01""#, r#"id="n00""#)).contains(&"duplicate-id".to_string()));
        assert!(codes(&s.replace("MODEL", "MODEL2")).contains(&"schema-namespace".to_string()));
        let early = s.replacen("</bpmn:laneSet>", "</bpmn:laneSet><bpmn:laneSet id=\"extra\"/>", 1);
        assert!(codes(&early).is_empty(), "{:?}", validate_bpmn(early.as_bytes()));
        let late = s.replacen("</bpmn:process>", "<bpmn:laneSet id=\"extra\"/></bpmn:process>", 1);
        assert!(codes(&late).contains(&"schema-content".to_string()));
    }

    #[test]
    fn structural_violations_are_reported() {
        let s = sample();
        assert!(codes(&s.replace(r#"targetRef="n01""#, r#"targetRef="nope""#)).contains(&"dangling-ref".to_string()));
        assert!(codes(&s.replacen("<bpmn:flowNodeRef>n01</bpmn:flowNodeRef>", "", 1))
            .contains(&"lane-membership".to_string()));
        let reversed = s.replace(r#"sourceRef="start" targetRef="n00""#, r#"sourceRef="n00" targetRef="start""#);
        assert!(codes(&reversed).contains(&"start-event-incoming".to_string()));
    }
}
