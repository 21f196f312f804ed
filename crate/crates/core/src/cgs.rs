//! Controlled Greedy Sleep: the distributed election.
//!
//! One election per period, in three phases on a shared simulated clock:
//!
//! 1. every alive node broadcasts `Hello` with its position;
//! 2. every node builds its local graph from the Hellos it heard, computes its
//!    drowsiness and shout time delay (STD), and broadcasts `Std`;
//! 3. timers fire in ascending `(std, id)` order. A firing node sleeps if each
//!    of its cells is still covered `k` times by neighbors that either
//!    announced they stay awake or will decide after it; otherwise it stays
//!    awake and broadcasts `Awake`.
//!
//! A node never counts a neighbor it has not heard from, so lost messages can
//! only keep nodes awake.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::centralized::{coverage_ratio, drowsiness};
use crate::channel::Channel;
use crate::coverage::{local_subgraph, CoverageGraph, LocalModel, NodeId, Point2D, SensorNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Hello,
    Std,
    Awake,
}

impl MessageKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MessageKind::Hello => "hello",
            MessageKind::Std => "std",
            MessageKind::Awake => "awake",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolMessage {
    Hello { sender: NodeId, position: Point2D },
    Std { sender: NodeId, std: f64 },
    Awake { sender: NodeId },
}

impl ProtocolMessage {
    pub fn kind(&self) -> MessageKind {
        match self {
            ProtocolMessage::Hello { .. } => MessageKind::Hello,
            ProtocolMessage::Std { .. } => MessageKind::Std,
            ProtocolMessage::Awake { .. } => MessageKind::Awake,
        }
    }

    pub fn sender(&self) -> NodeId {
        match *self {
            ProtocolMessage::Hello { sender, .. }
            | ProtocolMessage::Std { sender, .. }
            | ProtocolMessage::Awake { sender } => sender,
        }
    }
}

/// One line of the message log.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageRecord {
    pub period: u32,
    pub time: f64,
    pub kind: MessageKind,
    pub sender: NodeId,
    pub receivers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Undecided,
    Sleep,
    Awake,
}

/// Maps drowsiness to a shout time delay in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StdParams {
    pub c: f64,
    pub max: f64,
}

/// Nodes that must stay awake (`D <= 0`) shout at time 0; everyone else
/// waits `min(c / D, max)`.
pub fn std_from_drowsiness(drowsiness: f64, c: f64, std_max: f64) -> f64 {
    if drowsiness <= 0.0 {
        0.0
    } else {
        (c / drowsiness).min(std_max)
    }
}

/// Total firing order: earlier STD first, lower id on ties.
pub fn fire_order(a: (f64, NodeId), b: (f64, NodeId)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborInfo {
    pub position: Point2D,
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgsNodeState {
    pub node: SensorNode,
    /// `S_s`: neighbors heard during the Hello phase.
    pub neighbors: BTreeMap<NodeId, NeighborInfo>,
    /// List of awake nodes: neighbors whose `Awake` message arrived.
    pub lan: BTreeSet<NodeId>,
    pub own_std: f64,
    pub own_drowsiness: f64,
    pub decision: Decision,
}

impl CgsNodeState {
    pub fn new(node: SensorNode) -> Self {
        Self {
            node,
            neighbors: BTreeMap::new(),
            lan: BTreeSet::new(),
            own_std: 0.0,
            own_drowsiness: -1.0,
            decision: Decision::Undecided,
        }
    }

    pub fn receive(&mut self, msg: &ProtocolMessage) {
        match *msg {
            ProtocolMessage::Hello { sender, position } => {
                self.neighbors.entry(sender).or_insert(NeighborInfo { position, std: None });
            }
            ProtocolMessage::Std { sender, std } => {
                if let Some(info) = self.neighbors.get_mut(&sender) {
                    info.std = Some(std);
                }
            }
            ProtocolMessage::Awake { sender } => {
                if self.neighbors.contains_key(&sender) {
                    self.lan.insert(sender);
                }
            }
        }
    }

    pub fn neighbor_positions(&self) -> Vec<(NodeId, Point2D)> {
        self.neighbors.iter().map(|(&id, info)| (id, info.position)).collect()
    }

    /// Whether `neighbor` may be relied upon when this node decides: it
    /// announced staying awake, or its known STD orders it after this node.
    pub fn is_available(&self, neighbor: NodeId) -> bool {
        if self.lan.contains(&neighbor) {
            return true;
        }
        match self.neighbors.get(&neighbor).and_then(|info| info.std) {
            Some(std) => fire_order((std, neighbor), (self.own_std, self.node.id)) == Ordering::Greater,
            None => false,
        }
    }

    fn commit(&mut self, decision: Decision) {
        assert_eq!(self.decision, Decision::Undecided, "node {} decided twice", self.node.id);
        self.decision = decision;
    }
}

/// Local drowsiness of the node at sensor index 0 of `local_graph`.
pub fn local_drowsiness(local_graph: &CoverageGraph, energy: f64, k: usize, alpha: f64) -> f64 {
    let ratios: Vec<f64> =
        local_graph.sensor_regions(0).iter().map(|&r| coverage_ratio(local_graph.degree(r), k)).collect();
    drowsiness(energy, alpha, &ratios)
}

/// The sleep rule, evaluated when the node's own timer fires. `local_graph`
/// has the deciding node at sensor index 0.
pub fn cgs_decide(state: &CgsNodeState, local_graph: &CoverageGraph, k: usize) -> Decision {
    let available: Vec<bool> =
        local_graph.sensors().iter().enumerate().map(|(i, &id)| i != 0 && state.is_available(id)).collect();
    let covered = (0..local_graph.region_count()).all(|r| local_graph.masked_degree(r, &available) >= k);
    if covered {
        Decision::Sleep
    } else {
        Decision::Awake
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionParams {
    pub k: usize,
    pub alpha: f64,
    pub std: StdParams,
    pub model: LocalModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionOutcome {
    /// Final state of every participant, in ascending id order.
    pub states: Vec<CgsNodeState>,
    /// Nodes that died between their Std broadcast and their timer.
    pub failed: Vec<NodeId>,
    pub messages: Vec<MessageRecord>,
}

impl ElectionOutcome {
    pub fn decision(&self, id: NodeId) -> Option<Decision> {
        self.states.iter().find(|s| s.node.id == id).map(|s| s.decision)
    }

    pub fn awake(&self) -> Vec<NodeId> {
        self.with_decision(Decision::Awake)
    }

    pub fn asleep(&self) -> Vec<NodeId> {
        self.with_decision(Decision::Sleep)
    }

    fn with_decision(&self, d: Decision) -> Vec<NodeId> {
        self.states.iter().filter(|s| s.decision == d).map(|s| s.node.id).collect()
    }

    /// Messages sent by each node during this election.
    pub fn sent_counts(&self) -> BTreeMap<NodeId, usize> {
        let mut counts: BTreeMap<NodeId, usize> = self.states.iter().map(|s| (s.node.id, 0)).collect();
        for m in &self.messages {
            *counts.entry(m.sender).or_default() += 1;
        }
        counts
    }
}

/// Runs one full election among `nodes`, all of which must be alive and
/// registered with `channel`. Nodes in `fail_after_std` die right after their
/// Std broadcast and take no further part.
pub fn run_election(
    nodes: &[SensorNode],
    channel: &mut Channel,
    params: &ElectionParams,
    fail_after_std: &BTreeSet<NodeId>,
    period: u32,
) -> ElectionOutcome {
    let mut sorted: Vec<SensorNode> = nodes.to_vec();
    sorted.sort_by_key(|n| n.id);
    let index: BTreeMap<NodeId, usize> = sorted.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut states: Vec<CgsNodeState> = sorted.into_iter().map(CgsNodeState::new).collect();
    let mut messages = Vec::new();

    let mut send = |states: &mut Vec<CgsNodeState>, channel: &mut Channel, msg: ProtocolMessage, time: f64| {
        let receivers = channel.broadcast(msg.sender());
        for r in &receivers {
            if let Some(&i) = index.get(r) {
                states[i].receive(&msg);
            }
        }
        messages.push(MessageRecord {
            period,
            time,
            kind: msg.kind(),
            sender: msg.sender(),
            receivers: receivers.len(),
        });
    };

    // Hello
    for i in 0..states.len() {
        let msg = ProtocolMessage::Hello { sender: states[i].node.id, position: states[i].node.position };
        send(&mut states, channel, msg, 0.0);
    }

    // local graphs, drowsiness, Std
    let mut graphs = Vec::with_capacity(states.len());
    for state in states.iter_mut() {
        let cells = params.model.cells_for(&state.node.position);
        let graph = local_subgraph(&state.node, &state.neighbor_positions(), &cells, params.model.half_side());
        state.own_drowsiness = local_drowsiness(&graph, state.node.energy, params.k, params.alpha);
        state.own_std = std_from_drowsiness(state.own_drowsiness, params.std.c, params.std.max);
        graphs.push(graph);
    }
    for i in 0..states.len() {
        let msg = ProtocolMessage::Std { sender: states[i].node.id, std: states[i].own_std };
        send(&mut states, channel, msg, 0.0);
    }

    let mut failed = Vec::new();
    for state in states.iter_mut() {
        if fail_after_std.contains(&state.node.id) {
            channel.kill(state.node.id);
            state.node.state = crate::coverage::NodeState::Dead;
            failed.push(state.node.id);
        }
    }

    // timers
    let mut order: Vec<usize> = (0..states.len()).filter(|&i| states[i].node.is_alive()).collect();
    order.sort_by(|&a, &b| fire_order((states[a].own_std, states[a].node.id), (states[b].own_std, states[b].node.id)));
    for i in order {
        let decision = cgs_decide(&states[i], &graphs[i], params.k);
        states[i].commit(decision);
        states[i].node.state = match decision {
            Decision::Awake => crate::coverage::NodeState::Awake,
            _ => crate::coverage::NodeState::Asleep,
        };
        if decision == Decision::Awake {
            let msg = ProtocolMessage::Awake { sender: states[i].node.id };
            let time = states[i].own_std;
            send(&mut states, channel, msg, time);
        }
    }

    ElectionOutcome { states, failed, messages }
}
