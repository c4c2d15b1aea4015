use crate::error::ExportError;
use crate::process::{Direction, GatewayType};
use crate::xml::{self, Element, Writer};

use super::{BpmnDocument, BpmnFlow, BpmnLane, BpmnNode, BpmnNodeKind, BpmnPool, BPMN_MODEL_NS};

pub(crate) const TARGET_NS: &str = "urn:cbp:process";

pub(crate) fn gateway_element(t: GatewayType) -> &'static str {
    match t {
        GatewayType::Parallel => "parallelGateway",
        GatewayType::EventBasedExclusive => "eventBasedGateway",
        GatewayType::DataBasedExclusive => "exclusiveGateway",
        GatewayType::DataBasedInclusive => "inclusiveGateway",
    }
}

fn gateway_from_element(name: &str) -> Option<GatewayType> {
    GatewayType::ALL.into_iter().find(|t| gateway_element(*t) == name)
}

fn direction_value(d: Direction) -> &'static str {
    match d {
        Direction::Diverging => "Diverging",
        Direction::Converging => "Converging",
    }
}

fn named<'a>(id: &'a str, name: &'a str) -> Vec<(&'a str, &'a str)> {
    let mut attrs = vec![("id", id)];
    if !name.is_empty() {
        attrs.push(("name", name));
    }
    attrs
}

fn write_flow(w: &mut Writer, tag: &str, f: &BpmnFlow) {
    w.empty(tag, &[("id", &f.id), ("sourceRef", &f.source), ("targetRef", &f.target)]);
}

/// Deterministic XML for `doc`; `pretty` indents, otherwise the body is a
/// single line.
pub fn serialize_bpmn(doc: &BpmnDocument, pretty: bool) -> String {
    let mut w = Writer::new(pretty);
    w.start(
        "bpmn:definitions",
        &[
            ("xmlns:bpmn", BPMN_MODEL_NS),
            ("id", "definitions"),
            ("name", &doc.name),
            ("targetNamespace", TARGET_NS),
        ],
    );
    for d in &doc.documentation {
        w.text_element("bpmn:documentation", &[], d);
    }
    w.start("bpmn:collaboration", &[("id", "collaboration")]);
    for p in &doc.pools {
        w.empty("bpmn:participant", &[("id", &p.id), ("name", &p.name), ("processRef", &p.process_id)]);
    }
    for f in &doc.message_flows {
        write_flow(&mut w, "bpmn:messageFlow", f);
    }
    w.end("bpmn:collaboration");
    for p in &doc.pools {
        w.start("bpmn:process", &[("id", &p.process_id), ("name", &p.name), ("isExecutable", "false")]);
        if !p.lanes.is_empty() {
            w.start("bpmn:laneSet", &[("id", &format!("laneset--{}", p.id))]);
            for lane in &p.lanes {
                if lane.node_refs.is_empty() {
                    w.empty("bpmn:lane", &named(&lane.id, &lane.name));
                    continue;
                }
                w.start("bpmn:lane", &named(&lane.id, &lane.name));
                for r in &lane.node_refs {
                    w.text_element("bpmn:flowNodeRef", &[], r);
                }
                w.end("bpmn:lane");
            }
            w.end("bpmn:laneSet");
        }
        for n in &p.nodes {
            let mut attrs = named(&n.id, &n.name);
            let tag = match n.kind {
                BpmnNodeKind::Task => "bpmn:task".to_string(),
                BpmnNodeKind::StartEvent => "bpmn:startEvent".to_string(),
                BpmnNodeKind::EndEvent => "bpmn:endEvent".to_string(),
                BpmnNodeKind::Gateway { gateway_type, direction } => {
                    attrs.push(("gatewayDirection", direction_value(direction)));
                    format!("bpmn:{}", gateway_element(gateway_type))
                }
            };
            w.empty(&tag, &attrs);
        }
        for f in &p.sequence_flows {
            write_flow(&mut w, "bpmn:sequenceFlow", f);
        }
        w.end("bpmn:process");
    }
    w.end("bpmn:definitions");
    w.finish()
}

fn flow(el: &Element) -> Result<BpmnFlow, String> {
    Ok(BpmnFlow {
        id: el.require("id")?.to_string(),
        source: el.require("sourceRef")?.to_string(),
        target: el.require("targetRef")?.to_string(),
    })
}

fn node(el: &Element) -> Result<Option<BpmnNode>, String> {
    let kind = match el.name.as_str() {
        "task" => BpmnNodeKind::Task,
        "startEvent" => BpmnNodeKind::StartEvent,
        "endEvent" => BpmnNodeKind::EndEvent,
        other => match gateway_from_element(other) {
            Some(gateway_type) => BpmnNodeKind::Gateway {
                gateway_type,
                direction: match el.require("gatewayDirection")? {
                    "Diverging" => Direction::Diverging,
                    "Converging" => Direction::Converging,
                    d => return Err(format!("unsupported gatewayDirection `{d}`")),
                },
            },
            None => return Ok(None),
        },
    };
    Ok(Some(BpmnNode {
        id: el.require("id")?.to_string(),
        name: el.attr("name").unwrap_or("").to_string(),
        kind,
    }))
}

fn decode(root: &Element) -> Result<BpmnDocument, String> {
    let collaboration = root.children_named("collaboration").next().ok_or("missing <collaboration>")?;
    let mut pools = Vec::new();
    for part in collaboration.children_named("participant") {
        let process_id = part.require("processRef")?;
        let process = root.children_named("process")
            .find(|p| p.attr("id") == Some(process_id))
            .ok_or_else(|| format!("participant refers to unknown process `{process_id}`"))?;
        let mut pool = BpmnPool {
            id: part.require("id")?.to_string(),
            name: part.require("name")?.to_string(),
            process_id: process_id.to_string(),
            lanes: Vec::new(),
            nodes: Vec::new(),
            sequence_flows: Vec::new(),
        };
        for lane in process.children_named("laneSet").flat_map(|s| s.children_named("lane")) {
            pool.lanes.push(BpmnLane {
                id: lane.require("id")?.to_string(),
                name: lane.attr("name").unwrap_or("").to_string(),
                node_refs: lane.children_named("flowNodeRef").map(|r| r.text.trim().to_string()).collect(),
            });
        }
        for el in &process.children {
            if el.name == "sequenceFlow" {
                pool.sequence_flows.push(flow(el)?);
            } else if let Some(n) = node(el)? {
                pool.nodes.push(n);
            }
        }
        pools.push(pool);
    }
    Ok(BpmnDocument {
        name: root.attr("name").unwrap_or("").to_string(),
        documentation: root.children_named("documentation").map(|d| d.text.clone()).collect(),
        pools,
        message_flows: collaboration.children_named("messageFlow").map(flow).collect::<Result<_, _>>()?,
    })
}

/// Reads a document produced by [`serialize_bpmn`] after checking it with
/// [`super::validate_bpmn`].
pub fn parse_bpmn(bytes: &[u8]) -> Result<BpmnDocument, ExportError> {
    let errors: Vec<String> =
        super::validate_bpmn(bytes).into_iter().filter(|d| d.is_error()).map(|d| d.to_string()).collect();
    if !errors.is_empty() {
        return Err(ExportError::Malformed(errors.join("; ")));
    }
    let root = xml::parse(bytes).map_err(ExportError::Malformed)?;
    decode(&root).map_err(ExportError::Malformed)
}

#[cfg(test)]
mod tests {
    use super::super::tests::small_complete;
    use super::super::{export_bpmn, validate_bpmn};
    use super::*;

    #[test]
    fn round_trips_in_both_layouts() {
        let mut g = small_complete();
        g.annotations.push("alternatives <a> & \"b\"".into());
        let doc = export_bpmn(&g).unwrap();
        for pretty in [true, false] {
            let text = serialize_bpmn(&doc, pretty);
            assert_eq!(validate_bpmn(text.as_bytes()), vec![], "{text}");
            assert_eq!(parse_bpmn(text.as_bytes()).unwrap(), doc);
        }
    }

    #[test]
    fn compact_layout_is_a_single_line() {
        let doc = export_bpmn(&small_complete()).unwrap();
        let text = serialize_bpmn(&doc, false);
        assert_eq!(text.trim_end().lines().count(), 1);
        assert_eq!(serialize_bpmn(&doc, false), text);
    }

    #[test]
    fn gateway_elements_follow_their_type() {
        for t in GatewayType::ALL {
            let mut g = small_complete();
            for id in g.gateway_assignments().into_keys().collect::<Vec<_>>() {
                g.assign_gateway_type(&id, t.as_str()).unwrap();
            }
            let text = serialize_bpmn(&export_bpmn(&g).unwrap(), true);
            assert!(text.contains(&format!("<bpmn:{} id=\"gw--div--n00\" gatewayDirection=\"Diverging\"/>", gateway_element(t))));
        }
    }
}
