//! Split/join gateway insertion and start/end event generation.

use super::{
    Direction, EventKind, Flow, FlowKind, Lane, Node, NodeKind, ProcessGraph, END_ID, START_ID,
};

/// Which partner tasks send the triggering message to the start event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    /// Tasks with no incoming message flow whose inputs no other task
    /// produces.
    #[default]
    Restricted,
    /// Every task with no incoming message flow.
    Literal,
}

fn gateway_id(direction: Direction, node: &str) -> String {
    match direction {
        Direction::Diverging => format!("gw--div--{node}"),
        Direction::Converging => format!("gw--conv--{node}"),
    }
}

/// Reroutes one side of `node` through its gateway when that side carries
/// more than one sequence flow.
fn split(graph: &mut ProcessGraph, node: &str, direction: Direction) {
    let gid = gateway_id(direction, node);
    let side: Vec<Flow> = graph
        .flows_of(FlowKind::Sequence)
        .filter(|f| match direction {
            Direction::Diverging => f.source == node,
            Direction::Converging => f.target == node,
        })
        .cloned()
        .collect();
    if side.len() <= 1 {
        return;
    }
    if graph.node(&gid).is_none() {
        let lane = graph.node(node).expect("caller passes existing nodes").lane.clone();
        graph
            .add_node(Node {
                id: gid.clone(),
                name: String::new(),
                lane,
                kind: NodeKind::Gateway { direction, gateway_type: None },
            })
            .expect("the lane exists");
    }
    for f in side {
        let (other, own) = match direction {
            Direction::Diverging => (&f.target, f.target == gid),
            Direction::Converging => (&f.source, f.source == gid),
        };
        if own {
            continue;
        }
        graph.remove_flow(&f.id);
        let moved = match direction {
            Direction::Diverging => Flow::new(FlowKind::Sequence, &gid, other),
            Direction::Converging => Flow::new(FlowKind::Sequence, other, &gid),
        };
        graph.insert_flow(moved);
    }
    let link = match direction {
        Direction::Diverging => Flow::new(FlowKind::Sequence, node, &gid),
        Direction::Converging => Flow::new(FlowKind::Sequence, &gid, node),
    };
    graph.insert_flow(link);
}

/// Gives every non-gateway mediation node at most one outgoing and one
/// incoming sequence flow by inserting untyped diverging/converging gateways.
pub fn insert_gateways(graph: &mut ProcessGraph) {
    let candidates: Vec<String> = graph
        .nodes
        .iter()
        .filter(|n| !n.is_gateway() && graph.is_mediation_node(&n.id))
        .map(|n| n.id.clone())
        .collect();
    for direction in [Direction::Diverging, Direction::Converging] {
        for id in &candidates {
            split(graph, id, direction);
        }
    }
}

pub fn generate_events(graph: &mut ProcessGraph) {
    generate_events_with(graph, StartRule::default());
}

/// Adds the start and end events and wires them; idempotent.
pub fn generate_events_with(graph: &mut ProcessGraph, rule: StartRule) {
    if graph.mediation_pool().lanes.is_empty() {
        graph.add_mediation_lane(Lane { id: "lane--mediation".into(), name: "mediation".into(), reference: None });
    }
    let first_lane = graph.mediation_pool().lanes[0].id.clone();
    for (id, event) in [(START_ID, EventKind::Start), (END_ID, EventKind::End)] {
        let name = match event {
            EventKind::Start => "start",
            EventKind::End => "end",
        };
        graph
            .add_node(Node {
                id: id.to_string(),
                name: name.to_string(),
                lane: first_lane.clone(),
                kind: NodeKind::Event { event },
            })
            .expect("the lane exists");
    }

    let terminals: Vec<String> = graph
        .nodes
        .iter()
        .filter(|n| n.event().is_none() && graph.is_mediation_node(&n.id))
        .filter(|n| graph.successors(&n.id).is_empty())
        .map(|n| n.id.clone())
        .collect();
    for t in terminals {
        graph.insert_flow(Flow::new(FlowKind::Sequence, &t, END_ID));
    }

    for (task, triggered) in initiators(graph, rule) {
        graph.insert_flow(Flow::new(FlowKind::Message, &task, START_ID));
        for occ in triggered {
            if !linked_via_gateways(graph, START_ID, &occ) {
                graph.insert_flow(Flow::new(FlowKind::Sequence, START_ID, &occ));
            }
        }
    }

    insert_gateways(graph);
    place_events(graph);
}

/// Whether `to` follows `from` directly or through gateways only, which is
/// how [`insert_gateways`] leaves a rerouted edge.
fn linked_via_gateways(graph: &ProcessGraph, from: &str, to: &str) -> bool {
    let mut stack = vec![from];
    let mut seen = std::collections::BTreeSet::new();
    while let Some(n) = stack.pop() {
        for next in graph.successors(n) {
            if next == to {
                return true;
            }
            if graph.node(next).is_some_and(Node::is_gateway) && seen.insert(next) {
                stack.push(next);
            }
        }
    }
    false
}

/// Initiating partner tasks with the mediation tasks their messages reach.
fn initiators(graph: &ProcessGraph, rule: StartRule) -> Vec<(String, Vec<String>)> {
    let produced_elsewhere = |task: &Node, input| {
        graph.nodes.iter().any(|other| {
            other.id != task.id
                && matches!(&other.kind, NodeKind::Task { outputs, .. } if outputs.contains(input))
        })
    };
    let mut out = Vec::new();
    for n in &graph.nodes {
        let NodeKind::Task { inputs, .. } = &n.kind else { continue };
        if graph.flows_of(FlowKind::Message).any(|f| f.target == n.id) {
            continue;
        }
        if rule == StartRule::Restricted && inputs.iter().any(|i| produced_elsewhere(n, i)) {
            continue;
        }
        let triggered: Vec<String> = graph
            .flows_of(FlowKind::Message)
            .filter(|f| f.source == n.id && f.target != START_ID)
            .filter(|f| matches!(graph.node(&f.target).map(|t| &t.kind), Some(NodeKind::MisTask { .. })))
            .map(|f| f.target.clone())
            .collect();
        if !triggered.is_empty() {
            out.push((n.id.clone(), triggered));
        }
    }
    out
}

/// Puts the start event in its first successor's lane and the end event in
/// its first predecessor's lane.
fn place_events(graph: &mut ProcessGraph) {
    for (id, forward) in [(START_ID, true), (END_ID, false)] {
        let neighbours = if forward { graph.successors(id) } else { graph.predecessors(id) };
        let lane = neighbours.iter().min().and_then(|n| graph.node(n)).map(|n| n.lane.clone());
        if let (Some(lane), Some(node)) = (lane, graph.node_mut(id)) {
            node.lane = lane;
        }
    }
}
