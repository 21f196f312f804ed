//! Randomized independent sleeping: every alive node flips its own coin each
//! period. No messages, no coverage check.

use rand::Rng;

use crate::cgs::Decision;
use crate::coverage::SensorNode;
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPolicy {
    p_sleep: f64,
}

impl RandomPolicy {
    pub fn new(p_sleep: f64) -> Option<Self> {
        (0.0..=1.0).contains(&p_sleep).then_some(Self { p_sleep })
    }

    pub fn p_sleep(&self) -> f64 {
        self.p_sleep
    }
}

/// `draw` is uniform on `[0, 1)`.
pub fn decide_random(policy: &RandomPolicy, node: &SensorNode, draw: f64) -> Decision {
    debug_assert!(node.is_alive());
    if draw < policy.p_sleep {
        Decision::Sleep
    } else {
        Decision::Awake
    }
}

/// The draw for `node` in `period`, from its own substream.
pub fn node_draw(seed: u64, node: &SensorNode, period: u32) -> f64 {
    substream(seed, Stream::RandomSleep, &[node.id.0 as u64, period as u64]).gen()
}
