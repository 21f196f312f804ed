//! Shared fixtures for the benchmarks.

use kcover::{generate_topology, NodeSpec, SensorNode, SimulationConfig};

/// The nodes of the 10 x 10 grid preset.
pub fn grid_nodes() -> Vec<SensorNode> {
    let c = SimulationConfig::default();
    let spec = NodeSpec { sensing_radius: c.sensing_radius_m, comm_radius: c.comm_radius_m, energy: c.initial_energy };
    generate_topology(&c.topology, c.seed, spec).expect("preset topology is valid")
}
