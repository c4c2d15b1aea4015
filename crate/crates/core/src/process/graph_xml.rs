//! Project-internal XML form of a [`ProcessGraph`], using the source-side
//! element names of the BPMN mapping: `participants`, `CIS`, `role`,
//! `performsBusinessService`, `CISservices`, `gateways`, `events`, `flows`.

use crate::error::ProcessError;
use crate::kb::Id;
use crate::xml::{self, Element, Writer};

use super::{
    Direction, EventKind, Flow, FlowKind, GatewayType, Lane, Node, NodeKind, Pool, ProcessGraph,
};

fn ids(list: &[Id]) -> String {
    list.iter().map(Id::as_str).collect::<Vec<_>>().join(" ")
}

fn write_node(w: &mut Writer, n: &Node) {
    match &n.kind {
        NodeKind::Task { participant, business_service, inputs, outputs } => {
            let (inputs, outputs) = (ids(inputs), ids(outputs));
            let mut attrs = vec![
                ("id", n.id.as_str()),
                ("name", n.name.as_str()),
                ("participant", participant.as_str()),
                ("businessService", business_service.as_str()),
            ];
            if !inputs.is_empty() {
                attrs.push(("inputs", &inputs));
            }
            if !outputs.is_empty() {
                attrs.push(("outputs", &outputs));
            }
            w.empty("performsBusinessService", &attrs);
        }
        NodeKind::MisTask { dependency, coordination_service, resource } => w.empty(
            "CISservices",
            &[
                ("id", &n.id),
                ("name", &n.name),
                ("dependency", dependency.as_str()),
                ("coordinationService", coordination_service.as_str()),
                ("resource", resource.as_str()),
            ],
        ),
        NodeKind::Gateway { direction, gateway_type } => w.empty(
            "gateways",
            &[
                ("id", &n.id),
                ("direction", direction.as_str()),
                ("type", gateway_type.map_or("unset", GatewayType::as_str)),
            ],
        ),
        NodeKind::Event { event } => w.empty(
            "events",
            &[
                ("id", &n.id),
                ("name", &n.name),
                ("kind", match event {
                    EventKind::Start => "start",
                    EventKind::End => "end",
                }),
            ],
        ),
    }
}

impl ProcessGraph {
    pub fn to_xml(&self) -> String {
        let mut w = Writer::new(true);
        w.start("process", &[("name", &self.name)]);
        for pool in &self.pools {
            let tag = if pool.is_mediation() { "CIS" } else { "participants" };
            let mut attrs = vec![("id", pool.id.as_str()), ("name", pool.name.as_str())];
            if let Some(p) = &pool.participant {
                attrs.push(("participant", p.as_str()));
            }
            w.start(tag, &attrs);
            for lane in &pool.lanes {
                let mut attrs = vec![("id", lane.id.as_str()), ("name", lane.name.as_str())];
                if let Some(r) = &lane.reference {
                    attrs.push(("ref", r.as_str()));
                }
                let nodes: Vec<&Node> = self.nodes.iter().filter(|n| n.lane == lane.id).collect();
                if nodes.is_empty() {
                    w.empty("role", &attrs);
                    continue;
                }
                w.start("role", &attrs);
                for n in nodes {
                    write_node(&mut w, n);
                }
                w.end("role");
            }
            w.end(tag);
        }
        for f in &self.flows {
            let kind = match f.kind {
                FlowKind::Sequence => "seqFlow",
                FlowKind::Message => "msgFlow",
            };
            w.empty("flows", &[("id", &f.id), ("type", kind), ("source", &f.source), ("target", &f.target)]);
        }
        for a in &self.annotations {
            w.empty("annotation", &[("text", a)]);
        }
        w.end("process");
        w.finish()
    }

    pub fn from_xml(text: &str) -> Result<Self, ProcessError> {
        let root = xml::parse(text.as_bytes()).map_err(ProcessError::Malformed)?;
        let graph = decode(&root).map_err(ProcessError::Malformed)?;
        graph.validate()?;
        Ok(graph)
    }
}

fn id_attr(el: &Element, key: &str) -> Result<Id, String> {
    Id::new(el.require(key)?).map_err(|e| e.to_string())
}

fn id_list(el: &Element, key: &str) -> Result<Vec<Id>, String> {
    el.attr(key)
        .unwrap_or("")
        .split_whitespace()
        .map(|s| Id::new(s).map_err(|e| e.to_string()))
        .collect()
}

fn decode_node(el: &Element, lane: &str) -> Result<Node, String> {
    let id = el.require("id")?.to_string();
    let name = el.attr("name").unwrap_or("").to_string();
    let kind = match el.name.as_str() {
        "performsBusinessService" => NodeKind::Task {
            participant: id_attr(el, "participant")?,
            business_service: id_attr(el, "businessService")?,
            inputs: id_list(el, "inputs")?,
            outputs: id_list(el, "outputs")?,
        },
        "CISservices" => NodeKind::MisTask {
            dependency: id_attr(el, "dependency")?,
            coordination_service: id_attr(el, "coordinationService")?,
            resource: id_attr(el, "resource")?,
        },
        "gateways" => NodeKind::Gateway {
            direction: match el.require("direction")? {
                "diverging" => Direction::Diverging,
                "converging" => Direction::Converging,
                other => return Err(format!("unknown gateway direction `{other}`")),
            },
            gateway_type: match el.require("type")? {
                "unset" => None,
                t => Some(t.parse().map_err(|e: ProcessError| e.to_string())?),
            },
        },
        "events" => NodeKind::Event {
            event: match el.require("kind")? {
                "start" => EventKind::Start,
                "end" => EventKind::End,
                other => return Err(format!("unknown event kind `{other}`")),
            },
        },
        other => return Err(format!("unexpected <{other}> inside <role>")),
    };
    Ok(Node { id, name, lane: lane.to_string(), kind })
}

fn decode(root: &Element) -> Result<ProcessGraph, String> {
    if root.name != "process" {
        return Err(format!("root element must be <process>, found <{}>", root.name));
    }
    let mut graph = ProcessGraph {
        name: root.require("name")?.to_string(),
        pools: Vec::new(),
        nodes: Vec::new(),
        flows: Vec::new(),
        annotations: Vec::new(),
    };
    for child in &root.children {
        match child.name.as_str() {
            "participants" | "CIS" => {
                let participant = match child.name.as_str() {
                    "CIS" => None,
                    _ => Some(id_attr(child, "participant")?),
                };
                let mut pool = Pool {
                    id: child.require("id")?.to_string(),
                    name: child.require("name")?.to_string(),
                    participant,
                    lanes: Vec::new(),
                };
                for lane_el in &child.children {
                    if lane_el.name != "role" {
                        return Err(format!("unexpected <{}> inside <{}>", lane_el.name, child.name));
                    }
                    let lane = Lane {
                        id: lane_el.require("id")?.to_string(),
                        name: lane_el.require("name")?.to_string(),
                        reference: lane_el.attr("ref").map(Id::new).transpose().map_err(|e| e.to_string())?,
                    };
                    for node_el in &lane_el.children {
                        graph.nodes.push(decode_node(node_el, &lane.id)?);
                    }
                    pool.lanes.push(lane);
                }
                graph.pools.push(pool);
            }
            "flows" => {
                let kind = match child.require("type")? {
                    "seqFlow" => FlowKind::Sequence,
                    "msgFlow" => FlowKind::Message,
                    other => return Err(format!("unknown flow type `{other}`")),
                };
                let flow = Flow::new(kind, child.require("source")?, child.require("target")?);
                if flow.id != child.require("id")? {
                    return Err(format!("flow id `{}` does not match its endpoints", child.require("id")?));
                }
                graph.flows.push(flow);
            }
            "annotation" => graph.annotations.push(child.require("text")?.to_string()),
            other => return Err(format!("unexpected <{other}> inside <process>")),
        }
    }
    graph.nodes.sort_by(|a, b| a.id.cmp(&b.id));
    graph.flows.sort();
    Ok(graph)
}
