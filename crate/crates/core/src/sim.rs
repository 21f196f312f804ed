//! Period-driven simulation.
//!
//! Each period: apply start-of-period faults, retire nodes that cannot afford
//! another awake period, wake the rest, run the configured election, record
//! metrics for the resulting awake set, then charge the awake nodes.

use std::collections::BTreeSet;

use crate::centralized::centralized_schedule;
use crate::cgs::{run_election, Decision, ElectionParams, MessageRecord};
use crate::channel::Channel;
use crate::config::{generate_topology, FaultPhase, NodeSpec, SchedulerKind, SimulationConfig};
use crate::coverage::{build_coverage_graph, CoverageMode, NodeId, NodeState, RegionGrid, SensorNode};
use crate::error::ConfigError;
use crate::metrics::{CoverageIndex, MetricsRow, MetricsTrace, LEVELS};
use crate::random::{decide_random, node_draw, RandomPolicy};

/// What happened in one period beyond the metrics row.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodRecord {
    pub period: u32,
    pub awake: Vec<NodeId>,
    /// Region coverage fractions if every alive node were awake.
    pub alive_theta_prime: [f64; LEVELS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub trace: MetricsTrace,
    pub messages: Vec<MessageRecord>,
    pub periods: Vec<PeriodRecord>,
    pub initial_nodes: Vec<SensorNode>,
    pub final_nodes: Vec<SensorNode>,
    pub warnings: Vec<String>,
}

impl SimulationOutput {
    /// Total energy drawn from all batteries.
    pub fn energy_spent(&self) -> f64 {
        self.initial_nodes.iter().zip(&self.final_nodes).map(|(a, b)| a.energy - b.energy).sum()
    }
}

pub fn run_simulation(config: &SimulationConfig) -> Result<SimulationOutput, ConfigError> {
    let warnings = config.validate()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let spec = NodeSpec {
        sensing_radius: config.sensing_radius_m,
        comm_radius: config.comm_radius_m,
        energy: config.initial_energy,
    };
    let initial = generate_topology(&config.topology, config.seed, spec)?;
    let mut nodes = initial.clone();
    let n = nodes.len();

    let area = config.target_area();
    let grid = RegionGrid::covering(&area, config.region_cell_m)?;
    let index = CoverageIndex::new(
        &nodes,
        &area,
        config.metric_sample_spacing_m,
        build_coverage_graph(&nodes, &grid, CoverageMode::ExactCenter),
    );
    let election =
        ElectionParams { k: config.k, alpha: config.alpha, std: config.std_params(), model: config.local_model()? };
    let policy = match config.scheduler {
        SchedulerKind::Random { p_sleep } => RandomPolicy::new(p_sleep),
        _ => None,
    };

    let cost = config.awake_cost_per_period;
    let mut failed = vec![false; n];
    let mut trace = MetricsTrace::default();
    let mut messages = Vec::new();
    let mut periods = Vec::new();

    for period in 1..=config.max_periods {
        for f in config.death_schedule.iter().filter(|f| f.period == period && f.phase == FaultPhase::StartOfPeriod) {
            failed[f.node as usize] = true;
        }
        for (node, &gone) in nodes.iter_mut().zip(&failed) {
            node.state = if gone || node.energy < cost { NodeState::Dead } else { NodeState::Awake };
        }
        let alive_ids: Vec<usize> = (0..n).filter(|&i| nodes[i].is_alive()).collect();
        if alive_ids.is_empty() {
            for p in period..=config.max_periods {
                trace.rows.push(MetricsRow::empty(p));
                periods.push(PeriodRecord { period: p, awake: Vec::new(), alive_theta_prime: [0.0; LEVELS] });
            }
            break;
        }
        let alive_mask: Vec<bool> = nodes.iter().map(SensorNode::is_alive).collect();
        let alive_theta_prime = index.theta_prime(&alive_mask);
        let mut sent = vec![0u64; n];

        match config.scheduler {
            SchedulerKind::AlwaysOn => {}
            SchedulerKind::Random { .. } => {
                let policy = policy.expect("validated");
                for &i in &alive_ids {
                    if decide_random(&policy, &nodes[i], node_draw(config.seed, &nodes[i], period)) == Decision::Sleep {
                        nodes[i].state = NodeState::Asleep;
                    }
                }
            }
            SchedulerKind::Centralized => {
                let alive: Vec<SensorNode> = alive_ids.iter().map(|&i| nodes[i].clone()).collect();
                let graph = index.graph().restrict_sensors(&alive_mask);
                let schedule = centralized_schedule(&alive, &graph, config.k, config.alpha);
                for id in schedule.asleep {
                    nodes[id.index()].state = NodeState::Asleep;
                }
            }
            SchedulerKind::Cgs => {
                let alive: Vec<SensorNode> = alive_ids.iter().map(|&i| nodes[i].clone()).collect();
                let mut channel = Channel::new(&alive, config.loss_probability, config.seed, period as u64);
                let doomed: BTreeSet<NodeId> = config
                    .death_schedule
                    .iter()
                    .filter(|f| f.period == period && f.phase == FaultPhase::AfterStd)
                    .map(|f| NodeId(f.node))
                    .filter(|id| alive_mask[id.index()])
                    .collect();
                let outcome = run_election(&alive, &mut channel, &election, &doomed, period);
                for id in &outcome.failed {
                    failed[id.index()] = true;
                    nodes[id.index()].state = NodeState::Dead;
                }
                for state in &outcome.states {
                    if state.decision == Decision::Sleep {
                        nodes[state.node.id.index()].state = NodeState::Asleep;
                    }
                }
                for m in &outcome.messages {
                    sent[m.sender.index()] += 1;
                }
                messages.extend(outcome.messages);
            }
        }

        let awake_mask: Vec<bool> = nodes.iter().map(SensorNode::is_awake).collect();
        let awake: Vec<NodeId> = nodes.iter().filter(|n| n.is_awake()).map(|n| n.id).collect();
        trace.rows.push(MetricsRow {
            period,
            alive: nodes.iter().filter(|n| n.is_alive()).count(),
            awake: awake.len(),
            theta: index.theta(&awake_mask),
            theta_prime: index.theta_prime(&awake_mask),
            messages: sent.iter().sum(),
        });
        periods.push(PeriodRecord { period, awake, alive_theta_prime });

        for (node, &count) in nodes.iter_mut().zip(&sent) {
            let mut charge = count as f64 * config.message_cost;
            if node.is_awake() {
                charge += cost;
            }
            node.energy = (node.energy - charge).max(0.0);
        }
    }

    Ok(SimulationOutput { trace, messages, periods, initial_nodes: initial, final_nodes: nodes, warnings })
}
