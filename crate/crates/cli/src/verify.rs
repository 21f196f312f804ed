//! Seeded random instances and the oracle checks run by `kcover verify`.

use std::collections::BTreeSet;

use kcover::rng::{substream, Stream};
use kcover::{
    build_coverage_graph, centralized_schedule, generate_topology, is_nonredundant, run_election, run_simulation,
    theta_k, theta_prime_k, verify_k_cover, verify_local_cover, Channel, CoverageGraph, CoverageMode, ElectionOutcome,
    ElectionParams, NodeId, NodeSpec, RegionGrid, SensorNode, SimulationConfig, Topology,
};
use rand::Rng;

/// Keys the instance generators away from simulation substreams.
const INSTANCE_SALT: u64 = 0x6b63_6f76;

fn instance_rng(seed: u64, family: u64) -> rand_chacha::ChaCha8Rng {
    substream(seed ^ INSTANCE_SALT, Stream::Topology, &[family])
}

/// A small centralized-scheduling instance whose regions are all feasible and
/// whose sensors each cover at least one region.
#[derive(Debug, Clone)]
pub struct CentralizedInstance {
    pub nodes: Vec<SensorNode>,
    pub graph: CoverageGraph,
    pub k: usize,
    pub alpha: f64,
}

/// Up to 15 nodes with random energies in a 30 m square, 36 candidate cells
/// of 5 m; cells with fewer than `k` coverers are dropped, then the first 40
/// remaining cells are kept.
pub fn centralized_instance(seed: u64) -> CentralizedInstance {
    let mut rng = instance_rng(seed, 1);
    let k = rng.gen_range(1..=3);
    let n = rng.gen_range(k + 2..=15);
    let radius = rng.gen_range(8.0..16.0);
    let nodes: Vec<SensorNode> = (0..n)
        .map(|i| {
            let p = kcover::Point2D::new(rng.gen_range(0.0..30.0), rng.gen_range(0.0..30.0));
            SensorNode::new(NodeId(i as u32), p, radius, 2.0 * radius, rng.gen_range(1.0..20.0)).unwrap()
        })
        .collect();
    let grid = RegionGrid::new(kcover::Point2D::new(0.0, 0.0), 5.0, 6, 6).unwrap();
    let full = build_coverage_graph(&nodes, &grid, CoverageMode::ExactCenter);
    let regions: Vec<usize> = (0..full.region_count()).filter(|&r| full.degree(r) >= k).take(40).collect();
    let covering: Vec<bool> = (0..nodes.len()).map(|s| regions.iter().any(|&r| full.covers(r, s))).collect();
    let kept: Vec<SensorNode> = nodes.iter().zip(&covering).filter(|(_, &c)| c).map(|(n, _)| n.clone()).collect();
    let remap: Vec<usize> = covering
        .iter()
        .scan(0, |next, &c| {
            let i = *next;
            *next += usize::from(c);
            Some(i)
        })
        .collect();
    let graph = CoverageGraph::from_region_lists(
        kept.iter().map(|n| n.id).collect(),
        regions.iter().map(|&r| full.region_center(r)).collect(),
        regions.iter().map(|&r| full.region_sensors(r).iter().map(|&s| remap[s]).collect()).collect(),
    );
    CentralizedInstance { nodes: kept, graph, k, alpha: rng.gen_range(0.5..3.0) }
}

/// A randomized CGS election: grid or uniform deployment of 20-100 nodes with
/// random energies and a loss probability in [0, 0.3].
#[derive(Debug, Clone)]
pub struct ElectionCase {
    pub config: SimulationConfig,
    pub nodes: Vec<SensorNode>,
}

pub fn election_case(seed: u64) -> ElectionCase {
    let mut rng = instance_rng(seed, 2);
    let mut config = SimulationConfig {
        seed,
        k: rng.gen_range(1..=3),
        loss_probability: rng.gen_range(0.0..=0.3),
        ..SimulationConfig::default()
    };
    config.topology = if rng.gen_bool(0.5) {
        let rows = rng.gen_range(4..=10u32);
        let cols = rng.gen_range((20u32.div_ceil(rows)).max(2)..=10);
        Topology::Grid { rows, cols, spacing_m: rng.gen_range(6.0..12.0) }
    } else {
        let side = rng.gen_range(40.0..100.0);
        Topology::UniformRandom { n: rng.gen_range(20..=100), width_m: side, height_m: side }
    };
    let spec = NodeSpec { sensing_radius: config.sensing_radius_m, comm_radius: config.comm_radius_m, energy: 20.0 };
    let mut nodes = generate_topology(&config.topology, seed, spec).unwrap();
    for n in &mut nodes {
        n.energy = rng.gen_range(1.0..20.0);
    }
    ElectionCase { config, nodes }
}

impl ElectionCase {
    pub fn params(&self) -> ElectionParams {
        ElectionParams {
            k: self.config.k,
            alpha: self.config.alpha,
            std: self.config.std_params(),
            model: self.config.local_model().unwrap(),
        }
    }

    pub fn run(&self) -> ElectionOutcome {
        let mut channel = Channel::new(&self.nodes, self.config.loss_probability, self.config.seed, 1);
        run_election(&self.nodes, &mut channel, &self.params(), &BTreeSet::new(), 1)
    }
}

/// Message-count violations: a node sending more than three messages, or a
/// sleeper that did not send exactly two.
pub fn message_bound_violations(outcome: &ElectionOutcome) -> Vec<String> {
    let counts = outcome.sent_counts();
    let asleep: BTreeSet<NodeId> = outcome.asleep().into_iter().collect();
    counts
        .iter()
        .filter_map(|(id, &c)| {
            if c > 3 {
                Some(format!("node {id} sent {c} messages"))
            } else if asleep.contains(id) && c != 2 {
                Some(format!("sleeping node {id} sent {c} messages"))
            } else {
                None
            }
        })
        .collect()
}

/// Largest |theta'_k - theta_k| for k = 1..=3 on a uniform deployment of
/// `n` nodes over a 100 m square, at the default resolutions.
pub fn estimator_gap(seed: u64, n: u32) -> f64 {
    let config = SimulationConfig {
        topology: Topology::UniformRandom { n, width_m: 100.0, height_m: 100.0 },
        seed,
        ..SimulationConfig::default()
    };
    let spec = NodeSpec { sensing_radius: config.sensing_radius_m, comm_radius: config.comm_radius_m, energy: 20.0 };
    let nodes = generate_topology(&config.topology, seed, spec).unwrap();
    let area = config.target_area();
    let grid = RegionGrid::covering(&area, config.region_cell_m).unwrap();
    let graph = build_coverage_graph(&nodes, &grid, CoverageMode::ExactCenter);
    (1..=3)
        .map(|k| (theta_prime_k(&graph, k) - theta_k(&nodes, &area, config.metric_sample_spacing_m, k)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs every oracle check on `instances` seeded cases each.
pub fn run_checks(instances: u64) -> Vec<CheckResult> {
    let mut results = Vec::new();

    let mut failures = Vec::new();
    for seed in 0..instances {
        let inst = centralized_instance(seed);
        let schedule = centralized_schedule(&inst.nodes, &inst.graph, inst.k, inst.alpha);
        if !verify_k_cover(&schedule.awake, &inst.graph, inst.k) {
            failures.push(format!("seed {seed}: awake set is not a k-cover"));
        } else if is_nonredundant(&schedule.awake, &inst.graph, inst.k) != Ok(true) {
            failures.push(format!("seed {seed}: awake set is redundant"));
        }
    }
    results.push(CheckResult { name: "centralized cover is minimal", cases: instances as usize, failures });

    let mut cover = Vec::new();
    let mut bound = Vec::new();
    for seed in 0..instances {
        let case = election_case(seed);
        let outcome = case.run();
        let awake: BTreeSet<NodeId> = outcome.awake().into_iter().collect();
        let v = verify_local_cover(&case.nodes, &awake, &case.params().model, case.config.k);
        if !v.is_empty() {
            cover.push(format!("seed {seed}: {} under-covered cells, first {:?}", v.len(), v[0]));
        }
        bound.extend(message_bound_violations(&outcome).into_iter().map(|m| format!("seed {seed}: {m}")));
    }
    results.push(CheckResult {
        name: "cgs keeps local k-coverage under loss",
        cases: instances as usize,
        failures: cover,
    });
    results.push(CheckResult { name: "cgs message bound", cases: instances as usize, failures: bound });

    let failures = (0..instances.min(20))
        .filter_map(|seed| {
            let gap = estimator_gap(seed, 20);
            (gap > 0.1).then(|| format!("seed {seed}: gap {gap:.4}"))
        })
        .collect();
    results.push(CheckResult { name: "area and region estimators agree", cases: instances.min(20) as usize, failures });

    let config = SimulationConfig { max_periods: 25, loss_probability: 0.1, ..SimulationConfig::default() };
    let failures = match (run_simulation(&config), run_simulation(&config)) {
        (Ok(a), Ok(b)) if a == b => Vec::new(),
        _ => vec!["two identical runs differ".to_string()],
    };
    results.push(CheckResult { name: "simulation is deterministic", cases: 1, failures });
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centralized_instances_are_feasible() {
        for seed in 0..30 {
            let inst = centralized_instance(seed);
            assert!(inst.nodes.len() <= 15 && inst.graph.region_count() <= 40);
            assert!((0..inst.graph.region_count()).all(|r| inst.graph.degree(r) >= inst.k));
            assert!((0..inst.nodes.len()).all(|s| !inst.graph.sensor_regions(s).is_empty()));
            assert_eq!(inst.graph.sensors(), inst.nodes.iter().map(|n| n.id).collect::<Vec<_>>());
        }
    }

    #[test]
    fn election_cases_span_the_ranges() {
        for seed in 0..30 {
            let case = election_case(seed);
            assert!((20..=100).contains(&case.nodes.len()), "{}", case.nodes.len());
            assert!((0.0..=0.3).contains(&case.config.loss_probability));
        }
    }

    #[test]
    fn checks_pass_on_a_few_instances() {
        for r in run_checks(5) {
            assert!(r.passed(), "{}: {:?}", r.name, r.failures);
        }
    }
}
