//! BPMN 2.0 export of a completed process graph.
//!
//! | graph element              | BPMN element                     |
//! |----------------------------|----------------------------------|
//! | process                    | `definitions` + `collaboration`  |
//! | `participants`, `CIS`      | `participant` + `process` (pool) |
//! | `role`                     | `lane`                           |
//! | `performsBusinessService`, `CISservices` | `task`             |
//! | `gateways`                 | typed gateway element            |
//! | `events`                   | `startEvent` / `endEvent`        |
//! | `seqFlow`                  | `sequenceFlow`                   |
//! | `msgFlow`                  | `messageFlow`                    |

mod serialize;
mod validate;

use crate::error::ExportError;
use crate::process::{Direction, EventKind, FlowKind, GatewayType, NodeKind, ProcessGraph};

pub use serialize::{parse_bpmn, serialize_bpmn};
pub use validate::{validate_bpmn, BPMN_SUBSET_XSD};

pub const BPMN_MODEL_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpmnNodeKind {
    Task,
    Gateway { gateway_type: GatewayType, direction: Direction },
    StartEvent,
    EndEvent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnNode {
    pub id: String,
    pub name: String,
    pub kind: BpmnNodeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnFlow {
    pub id: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnLane {
    pub id: String,
    pub name: String,
    pub node_refs: Vec<String>,
}

/// A collaboration participant together with its process.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnPool {
    pub id: String,
    pub name: String,
    pub process_id: String,
    pub lanes: Vec<BpmnLane>,
    pub nodes: Vec<BpmnNode>,
    pub sequence_flows: Vec<BpmnFlow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnDocument {
    pub name: String,
    pub documentation: Vec<String>,
    pub pools: Vec<BpmnPool>,
    pub message_flows: Vec<BpmnFlow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BpmnCounts {
    pub pools: usize,
    pub lanes: usize,
    pub tasks: usize,
    pub gateways: usize,
    pub events: usize,
    pub sequence_flows: usize,
    pub message_flows: usize,
}

impl BpmnDocument {
    pub fn counts(&self) -> BpmnCounts {
        let mut c = BpmnCounts { pools: self.pools.len(), message_flows: self.message_flows.len(), ..Default::default() };
        for p in &self.pools {
            c.lanes += p.lanes.len();
            c.sequence_flows += p.sequence_flows.len();
            for n in &p.nodes {
                match n.kind {
                    BpmnNodeKind::Task => c.tasks += 1,
                    BpmnNodeKind::Gateway { .. } => c.gateways += 1,
                    BpmnNodeKind::StartEvent | BpmnNodeKind::EndEvent => c.events += 1,
                }
            }
        }
        c
    }
}

fn process_id(pool_id: &str) -> String {
    match pool_id.strip_prefix("pool--") {
        Some(rest) => format!("process--{rest}"),
        None => format!("process--{pool_id}"),
    }
}

/// Maps a complete graph onto BPMN. Pools and lanes keep graph order, nodes
/// and flows keep id order.
pub fn export_bpmn(graph: &ProcessGraph) -> Result<BpmnDocument, ExportError> {
    let problems = graph.completeness_check();
    if !problems.is_empty() {
        return Err(ExportError::IncompleteProcess(problems.iter().map(|d| d.message.clone()).collect()));
    }
    let mut pools = Vec::new();
    for pool in &graph.pools {
        let lane_ids: Vec<&str> = pool.lanes.iter().map(|l| l.id.as_str()).collect();
        let lanes = pool
            .lanes
            .iter()
            .map(|l| BpmnLane {
                id: l.id.clone(),
                name: l.name.clone(),
                node_refs: graph.nodes.iter().filter(|n| n.lane == l.id).map(|n| n.id.clone()).collect(),
            })
            .collect();
        let nodes = graph
            .nodes
            .iter()
            .filter(|n| lane_ids.contains(&n.lane.as_str()))
            .map(|n| {
                let kind = match &n.kind {
                    NodeKind::Task { .. } | NodeKind::MisTask { .. } => BpmnNodeKind::Task,
                    NodeKind::Gateway { direction, gateway_type } => BpmnNodeKind::Gateway {
                        gateway_type: gateway_type.expect("complete graphs have typed gateways"),
                        direction: *direction,
                    },
                    NodeKind::Event { event: EventKind::Start } => BpmnNodeKind::StartEvent,
                    NodeKind::Event { event: EventKind::End } => BpmnNodeKind::EndEvent,
                };
                BpmnNode { id: n.id.clone(), name: n.name.clone(), kind }
            })
            .collect::<Vec<_>>();
        let sequence_flows = graph
            .flows_of(FlowKind::Sequence)
            .filter(|f| nodes.iter().any(|n| n.id == f.source))
            .map(|f| BpmnFlow { id: f.id.clone(), source: f.source.clone(), target: f.target.clone() })
            .collect();
        pools.push(BpmnPool {
            id: pool.id.clone(),
            name: pool.name.clone(),
            process_id: process_id(&pool.id),
            lanes,
            nodes,
            sequence_flows,
        });
    }
    let message_flows = graph
        .flows_of(FlowKind::Message)
        .map(|f| BpmnFlow { id: f.id.clone(), source: f.source.clone(), target: f.target.clone() })
        .collect();
    Ok(BpmnDocument { name: graph.name.clone(), documentation: graph.annotations.clone(), pools, message_flows })
}
