//! Single-hop unit-disk broadcast channel with independent Bernoulli loss.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::coverage::{NodeId, SensorNode};
use crate::rng::{substream, Stream};

/// Delivers one broadcast from `sender` to the `candidates` within its
/// communication radius; each in-range candidate independently receives with
/// probability `1 - loss_probability`. Returned ids are ascending.
pub fn broadcast<R: Rng + ?Sized>(
    sender: &SensorNode,
    candidates: &[SensorNode],
    loss_probability: f64,
    rng: &mut R,
) -> Vec<NodeId> {
    let mut in_range: Vec<NodeId> = candidates
        .iter()
        .filter(|c| c.id != sender.id && c.is_alive())
        .filter(|c| sender.position.distance(&c.position) <= sender.comm_radius)
        .map(|c| c.id)
        .collect();
    in_range.sort_unstable();
    deliver(&in_range, loss_probability, rng)
}

fn deliver<R: Rng + ?Sized>(in_range: &[NodeId], loss: f64, rng: &mut R) -> Vec<NodeId> {
    if loss <= 0.0 {
        return in_range.to_vec();
    }
    if loss >= 1.0 {
        return Vec::new();
    }
    in_range.iter().copied().filter(|_| rng.gen::<f64>() >= loss).collect()
}

/// Per-period channel state: who is in range of whom, who is still alive, and
/// the running message index that keys each broadcast's loss draws.
#[derive(Debug, Clone)]
pub struct Channel {
    loss_probability: f64,
    seed: u64,
    period: u64,
    next_message: u64,
    index: BTreeMap<NodeId, usize>,
    in_range: Vec<Vec<NodeId>>,
    alive: Vec<bool>,
    forced_drops: BTreeSet<(u64, NodeId)>,
}

impl Channel {
    pub fn new(nodes: &[SensorNode], loss_probability: f64, seed: u64, period: u64) -> Self {
        let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let in_range = nodes
            .iter()
            .map(|s| {
                let mut ids: Vec<NodeId> = nodes
                    .iter()
                    .filter(|c| c.id != s.id && s.position.distance(&c.position) <= s.comm_radius)
                    .map(|c| c.id)
                    .collect();
                ids.sort_unstable();
                ids
            })
            .collect();
        let alive = nodes.iter().map(SensorNode::is_alive).collect();
        Self { loss_probability, seed, period, next_message: 0, index, in_range, alive, forced_drops: BTreeSet::new() }
    }

    /// Deliveries that fail on top of the random loss, keyed by
    /// `(message index within the period, receiver)`.
    pub fn with_forced_drops(mut self, drops: BTreeSet<(u64, NodeId)>) -> Self {
        self.forced_drops = drops;
        self
    }

    /// Removes a node: it neither sends nor receives from now on.
    pub fn kill(&mut self, id: NodeId) {
        if let Some(&i) = self.index.get(&id) {
            self.alive[i] = false;
        }
    }

    pub fn is_alive(&self, id: NodeId) -> bool {
        self.index.get(&id).is_some_and(|&i| self.alive[i])
    }

    /// Alive in-range neighbors of `id`, regardless of loss.
    pub fn candidates(&self, id: NodeId) -> Vec<NodeId> {
        let Some(&i) = self.index.get(&id) else { return Vec::new() };
        self.in_range[i].iter().copied().filter(|c| self.alive[self.index[c]]).collect()
    }

    pub fn broadcast(&mut self, sender: NodeId) -> Vec<NodeId> {
        assert!(self.is_alive(sender), "dead node {sender} cannot broadcast");
        let msg = self.next_message;
        self.next_message += 1;
        let candidates = self.candidates(sender);
        let mut rng = substream(self.seed, Stream::Channel, &[self.period, msg]);
        let mut received = deliver(&candidates, self.loss_probability, &mut rng);
        if !self.forced_drops.is_empty() {
            received.retain(|r| !self.forced_drops.contains(&(msg, *r)));
        }
        received
    }

    pub fn messages_sent(&self) -> u64 {
        self.next_message
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::Point2D;
    use rand::SeedableRng;

    fn grid(n: u32) -> Vec<SensorNode> {
        (0..n * n)
            .map(|i| {
                let p = Point2D::new((i % n) as f64 * 10.0, (i / n) as f64 * 10.0);
                SensorNode::new(NodeId(i), p, 15.0, 40.0, 20.0).unwrap()
            })
            .collect()
    }

    #[test]
    fn lossless_and_total_loss() {
        let nodes = grid(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let all = broadcast(&nodes[55], &nodes, 0.0, &mut rng);
        assert!(!all.is_empty());
        assert!(broadcast(&nodes[55], &nodes, 1.0, &mut rng).is_empty());
    }

    #[test]
    fn interior_candidates_match_brute_force() {
        let nodes = grid(10);
        let ch = Channel::new(&nodes, 0.0, 3, 1);
        let center = &nodes[55];
        let mut expect = 0;
        for dy in -10i32..=10 {
            for dx in -10i32..=10 {
                let (x, y) = (5 + dx, 5 + dy);
                if (dx, dy) == (0, 0) || !(0..10).contains(&x) || !(0..10).contains(&y) {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64).sqrt() * 10.0 <= 40.0 {
                    expect += 1;
                }
            }
        }
        assert_eq!(ch.candidates(center.id).len(), expect);
        assert!(expect >= 44);
    }

    #[test]
    fn killed_nodes_drop_out() {
        let nodes = grid(3);
        let mut ch = Channel::new(&nodes, 0.0, 3, 1);
        ch.kill(NodeId(1));
        assert!(!ch.broadcast(NodeId(0)).contains(&NodeId(1)));
        assert_eq!(ch.messages_sent(), 1);
    }

    #[test]
    fn forced_drops_apply_per_message() {
        let nodes = grid(3);
        let drops = [(0, NodeId(1)), (1, NodeId(2))].into_iter().collect();
        let mut ch = Channel::new(&nodes, 0.0, 3, 1).with_forced_drops(drops);
        let first = ch.broadcast(NodeId(0));
        let second = ch.broadcast(NodeId(0));
        assert!(!first.contains(&NodeId(1)) && first.contains(&NodeId(2)));
        assert!(second.contains(&NodeId(1)) && !second.contains(&NodeId(2)));
    }
}
