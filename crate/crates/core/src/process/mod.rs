//! The intermediate process graph: partner pools, the mediation pool, flows,
//! gateways and events.

mod assemble;
mod graph_xml;
mod shape;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diag::Diagnostic;
use crate::error::ProcessError;
use crate::kb::Id;

pub use assemble::assemble;
pub use shape::{generate_events, generate_events_with, insert_gateways, StartRule};

pub const START_ID: &str = "start";
pub const END_ID: &str = "end";
pub const MEDIATION_POOL_ID: &str = "pool--mediation";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Diverging,
    Converging,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Diverging => "diverging",
            Direction::Converging => "converging",
        }
    }
}

/// The gateway types a human may assign. Complex gateways are not offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GatewayType {
    Parallel,
    EventBasedExclusive,
    DataBasedExclusive,
    DataBasedInclusive,
}

impl GatewayType {
    pub const ALL: [GatewayType; 4] = [
        GatewayType::Parallel,
        GatewayType::EventBasedExclusive,
        GatewayType::DataBasedExclusive,
        GatewayType::DataBasedInclusive,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GatewayType::Parallel => "parallel",
            GatewayType::EventBasedExclusive => "event-based-exclusive",
            GatewayType::DataBasedExclusive => "data-based-exclusive",
            GatewayType::DataBasedInclusive => "data-based-inclusive",
        }
    }
}

impl fmt::Display for GatewayType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GatewayType {
    type Err = ProcessError;

    fn from_str(s: &str) -> Result<Self, ProcessError> {
        GatewayType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| ProcessError::UnsupportedType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Start,
    End,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum NodeKind {
    #[serde(rename_all = "camelCase")]
    Task {
        participant: Id,
        business_service: Id,
        inputs: Vec<Id>,
        outputs: Vec<Id>,
    },
    #[serde(rename_all = "camelCase")]
    MisTask {
        dependency: Id,
        coordination_service: Id,
        resource: Id,
    },
    #[serde(rename_all = "camelCase")]
    Gateway {
        direction: Direction,
        gateway_type: Option<GatewayType>,
    },
    Event {
        event: EventKind,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub name: String,
    pub lane: String,
    #[serde(flatten)]
    pub kind: NodeKind,
}

impl Node {
    pub fn is_gateway(&self) -> bool {
        matches!(self.kind, NodeKind::Gateway { .. })
    }

    pub fn event(&self) -> Option<EventKind> {
        match self.kind {
            NodeKind::Event { event } => Some(event),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lane {
    pub id: String,
    pub name: String,
    /// The role (partner pools) or coordination service (mediation pool).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<Id>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pool {
    pub id: String,
    pub name: String,
    /// `None` for the mediation pool.
    pub participant: Option<Id>,
    pub lanes: Vec<Lane>,
}

impl Pool {
    pub fn is_mediation(&self) -> bool {
        self.participant.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Sequence,
    Message,
}

impl FlowKind {
    fn prefix(self) -> &'static str {
        match self {
            FlowKind::Sequence => "seq",
            FlowKind::Message => "msg",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Flow {
    pub id: String,
    pub kind: FlowKind,
    pub source: String,
    pub target: String,
}

impl Flow {
    pub fn new(kind: FlowKind, source: &str, target: &str) -> Self {
        Flow {
            id: format!("{}--{source}--{target}", kind.prefix()),
            kind,
            source: source.to_string(),
            target: target.to_string(),
        }
    }
}

/// Nodes and flows are kept sorted by id, so equal graphs serialize
/// identically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProcessGraph {
    pub name: String,
    pub pools: Vec<Pool>,
    pub nodes: Vec<Node>,
    pub flows: Vec<Flow>,
    #[serde(default)]
    pub annotations: Vec<String>,
}

impl ProcessGraph {
    /// A graph with an empty mediation pool.
    pub fn new(name: &str) -> Self {
        ProcessGraph {
            name: name.to_string(),
            pools: vec![Pool {
                id: MEDIATION_POOL_ID.to_string(),
                name: format!("{name} mediation"),
                participant: None,
                lanes: Vec::new(),
            }],
            nodes: Vec::new(),
            flows: Vec::new(),
            annotations: Vec::new(),
        }
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.binary_search_by(|n| n.id.as_str().cmp(id)).ok().map(|i| &self.nodes[i])
    }

    fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        match self.nodes.binary_search_by(|n| n.id.as_str().cmp(id)) {
            Ok(i) => Some(&mut self.nodes[i]),
            Err(_) => None,
        }
    }

    pub fn mediation_pool(&self) -> &Pool {
        self.pools.iter().find(|p| p.is_mediation()).expect("graphs always have a mediation pool")
    }

    fn mediation_pool_mut(&mut self) -> &mut Pool {
        self.pools.iter_mut().find(|p| p.is_mediation()).expect("graphs always have a mediation pool")
    }

    pub fn pool_of_lane(&self, lane: &str) -> Option<&Pool> {
        self.pools.iter().find(|p| p.lanes.iter().any(|l| l.id == lane))
    }

    pub fn is_mediation_node(&self, id: &str) -> bool {
        self.node(id)
            .and_then(|n| self.pool_of_lane(&n.lane))
            .is_some_and(Pool::is_mediation)
    }

    /// Adds a lane to a pool unless one with that id exists.
    pub fn add_lane(&mut self, pool: &str, lane: Lane) -> Result<(), ProcessError> {
        if self.pool_of_lane(&lane.id).is_some() {
            return Ok(());
        }
        let pool = self
            .pools
            .iter_mut()
            .find(|p| p.id == pool)
            .ok_or_else(|| ProcessError::Malformed(format!("unknown pool `{pool}`")))?;
        pool.lanes.push(lane);
        Ok(())
    }

    pub fn add_mediation_lane(&mut self, lane: Lane) {
        if self.pool_of_lane(&lane.id).is_none() {
            self.mediation_pool_mut().lanes.push(lane);
        }
    }

    /// Adds a node; an existing node with the same id is left untouched.
    pub fn add_node(&mut self, node: Node) -> Result<(), ProcessError> {
        if self.pool_of_lane(&node.lane).is_none() {
            return Err(ProcessError::Malformed(format!("node `{}` names unknown lane `{}`", node.id, node.lane)));
        }
        if let Err(i) = self.nodes.binary_search_by(|n| n.id.cmp(&node.id)) {
            self.nodes.insert(i, node);
        }
        Ok(())
    }

    /// Adds a flow between existing nodes. Duplicates are ignored.
    pub fn add_flow(&mut self, kind: FlowKind, source: &str, target: &str) -> Result<(), ProcessError> {
        for end in [source, target] {
            if self.node(end).is_none() {
                return Err(ProcessError::Malformed(format!("flow endpoint `{end}` does not exist")));
            }
        }
        self.insert_flow(Flow::new(kind, source, target));
        Ok(())
    }

    fn insert_flow(&mut self, flow: Flow) {
        if let Err(i) = self.flows.binary_search_by(|f| f.id.cmp(&flow.id)) {
            self.flows.insert(i, flow);
        }
    }

    fn remove_flow(&mut self, id: &str) {
        if let Ok(i) = self.flows.binary_search_by(|f| f.id.as_str().cmp(id)) {
            self.flows.remove(i);
        }
    }

    pub fn flows_of(&self, kind: FlowKind) -> impl Iterator<Item = &Flow> {
        self.flows.iter().filter(move |f| f.kind == kind)
    }

    pub fn successors(&self, id: &str) -> Vec<&str> {
        self.flows_of(FlowKind::Sequence).filter(|f| f.source == id).map(|f| f.target.as_str()).collect()
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        self.flows_of(FlowKind::Sequence).filter(|f| f.target == id).map(|f| f.source.as_str()).collect()
    }

    pub fn gateways(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_gateway())
    }

    pub fn events(&self, kind: EventKind) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.event() == Some(kind))
    }

    /// Records a human-chosen gateway type; a later assignment overwrites.
    pub fn assign_gateway_type(&mut self, gateway: &str, gateway_type: &str) -> Result<(), ProcessError> {
        let node = self
            .node_mut(gateway)
            .filter(|n| n.is_gateway())
            .ok_or_else(|| ProcessError::UnknownGateway(gateway.to_string()))?;
        let parsed: GatewayType = gateway_type.parse()?;
        if let NodeKind::Gateway { gateway_type, .. } = &mut node.kind {
            *gateway_type = Some(parsed);
        }
        Ok(())
    }

    /// Types every still-unset gateway. Returns the ids that were filled.
    pub fn fill_unset_gateways(&mut self, gateway_type: GatewayType) -> Vec<String> {
        let mut filled = Vec::new();
        for node in &mut self.nodes {
            if let NodeKind::Gateway { gateway_type: slot @ None, .. } = &mut node.kind {
                *slot = Some(gateway_type);
                filled.push(node.id.clone());
            }
        }
        filled
    }

    /// Current gateway assignments, by gateway id.
    pub fn gateway_assignments(&self) -> BTreeMap<String, Option<GatewayType>> {
        self.gateways()
            .map(|n| match n.kind {
                NodeKind::Gateway { gateway_type, .. } => (n.id.clone(), gateway_type),
                _ => unreachable!("filtered to gateways"),
            })
            .collect()
    }

    fn reach(&self, from: &str, forward: bool) -> BTreeSet<String> {
        let mut seen = BTreeSet::from([from.to_string()]);
        let mut queue = VecDeque::from([from.to_string()]);
        while let Some(n) = queue.pop_front() {
            let next = if forward { self.successors(&n) } else { self.predecessors(&n) };
            for m in next {
                if seen.insert(m.to_string()) {
                    queue.push_back(m.to_string());
                }
            }
        }
        seen
    }

    /// Nodes reachable from `from` along sequence flows, `from` included.
    pub fn reachable_from(&self, from: &str) -> BTreeSet<String> {
        self.reach(from, true)
    }

    /// Empty iff every gateway is typed and the mediation flow runs from a
    /// single start event to a single end event through every node.
    pub fn completeness_check(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for (id, t) in self.gateway_assignments() {
            if t.is_none() {
                out.push(Diagnostic::error("untyped-gateway", format!("gateway `{id}` has no type")));
            }
        }
        let starts: Vec<&Node> = self.events(EventKind::Start).collect();
        let ends: Vec<&Node> = self.events(EventKind::End).collect();
        for (kind, found) in [("start", starts.len()), ("end", ends.len())] {
            if found != 1 {
                out.push(Diagnostic::error(
                    &format!("{kind}-event-count"),
                    format!("expected exactly one {kind} event, found {found}"),
                ));
            }
        }
        if let ([start], [end]) = (starts.as_slice(), ends.as_slice()) {
            let from_start = self.reach(&start.id, true);
            let to_end = self.reach(&end.id, false);
            for n in &self.nodes {
                if !self.is_mediation_node(&n.id) {
                    continue;
                }
                if !from_start.contains(&n.id) {
                    out.push(Diagnostic::error(
                        "unreachable-node",
                        format!("`{}` is not reachable from the start event", n.id),
                    ));
                }
                if !to_end.contains(&n.id) {
                    out.push(Diagnostic::error(
                        "dead-end-node",
                        format!("`{}` does not lead to the end event", n.id),
                    ));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("process graphs always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, ProcessError> {
        let graph: ProcessGraph =
            serde_json::from_str(text).map_err(|e| ProcessError::Malformed(e.to_string()))?;
        graph.validate()?;
        Ok(graph)
    }

    /// Checks the structural invariants a decoded graph must satisfy.
    pub fn validate(&self) -> Result<(), ProcessError> {
        let bad = |m: String| Err(ProcessError::Malformed(m));
        if self.pools.iter().filter(|p| p.is_mediation()).count() != 1 {
            return bad("a graph has exactly one mediation pool".into());
        }
        let mut ids = BTreeSet::new();
        for p in &self.pools {
            if !ids.insert(p.id.as_str()) {
                return bad(format!("duplicate id `{}`", p.id));
            }
            for l in &p.lanes {
                if !ids.insert(l.id.as_str()) {
                    return bad(format!("duplicate id `{}`", l.id));
                }
            }
        }
        for w in self.nodes.windows(2) {
            if w[0].id >= w[1].id {
                return bad(format!("nodes out of order or duplicated at `{}`", w[1].id));
            }
        }
        for n in &self.nodes {
            if !ids.insert(n.id.as_str()) {
                return bad(format!("duplicate id `{}`", n.id));
            }
            if self.pool_of_lane(&n.lane).is_none() {
                return bad(format!("node `{}` names unknown lane `{}`", n.id, n.lane));
            }
        }
        for w in self.flows.windows(2) {
            if w[0].id >= w[1].id {
                return bad(format!("flows out of order or duplicated at `{}`", w[1].id));
            }
        }
        for f in &self.flows {
            if f.id != Flow::new(f.kind, &f.source, &f.target).id {
                return bad(format!("flow id `{}` does not match its endpoints", f.id));
            }
            if self.node(&f.source).is_none() || self.node(&f.target).is_none() {
                return bad(format!("flow `{}` has a dangling endpoint", f.id));
            }
            let cross = self.is_mediation_node(&f.source) != self.is_mediation_node(&f.target);
            match f.kind {
                FlowKind::Sequence if !self.is_mediation_node(&f.source) || cross => {
                    return bad(format!("sequence flow `{}` leaves the mediation pool", f.id));
                }
                FlowKind::Message if !cross => {
                    return bad(format!("message flow `{}` does not cross the mediation boundary", f.id));
                }
                _ => {}
            }
        }
        Ok(())
    }
}
