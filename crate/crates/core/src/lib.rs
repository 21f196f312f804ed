//! k-coverage sleep scheduling for dense sensor networks.
//!
//! The crate provides:
//!
//! - [`coverage`]: sensing disks, grid regions, the bipartite coverage graph
//!   and the per-node local graphs used by the distributed protocol;
//! - [`centralized`]: the drowsiness-greedy central scheduler;
//! - [`cgs`]: the Controlled Greedy Sleep election (Hello / Std / Awake);
//! - [`random`]: the communication-free random sleeping baseline;
//! - [`sim`]: a deterministic, seeded period-by-period simulator with
//!   message loss and node-death injection;
//! - [`metrics`]: area and region coverage ratios, k-lifetime, and cover
//!   verification oracles.

pub mod centralized;
pub mod cgs;
pub mod channel;
pub mod config;
pub mod coverage;
pub mod error;
pub mod metrics;
pub mod random;
pub mod rng;
pub mod sim;

pub use centralized::{centralized_schedule, coverage_ratio, drowsiness, Schedule};
pub use cgs::{
    cgs_decide, run_election, std_from_drowsiness, CgsNodeState, Decision, ElectionOutcome, ElectionParams,
    MessageKind, MessageRecord, ProtocolMessage, StdParams,
};
pub use channel::{broadcast, Channel};
pub use config::{generate_topology, FaultEvent, FaultPhase, NodeSpec, SchedulerKind, SimulationConfig, Topology};
pub use coverage::{
    build_coverage_graph, cell_covered_pessimistic, disk_covers_point, local_region_template, local_subgraph,
    CellOffset, CoverageGraph, CoverageMode, LocalModel, NodeId, NodeState, Point2D, Rect, RegionGrid, SensorNode,
};
pub use error::{ConfigError, InvalidCover, MetricsError, ModelError};
pub use metrics::{
    is_nonredundant, k_lifetime, theta_k, theta_prime_k, verify_k_cover, verify_local_cover, LifetimeRule, MetricsRow,
    MetricsTrace,
};
pub use random::{decide_random, RandomPolicy};
pub use sim::{run_simulation, PeriodRecord, SimulationOutput};
