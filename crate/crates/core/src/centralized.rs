//! Centralized drowsiness-greedy scheduler.
//!
//! Each round the scheduler scores every still-awake sensor by its drowsiness
//! and sends the single most drowsy one to sleep, then rescores. It stops when
//! no sensor has positive drowsiness, which happens exactly when every awake
//! sensor touches a region that is not over-covered.

use crate::coverage::{CoverageGraph, NodeId, SensorNode};

/// `Phi_r`: `1 / (c_r - k)` for over-covered regions, `-1` otherwise.
pub fn coverage_ratio(degree: usize, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if degree > k {
        1.0 / (degree - k) as f64
    } else {
        -1.0
    }
}

/// `D_s`: the summed coverage ratios of the sensor's regions scaled by
/// `1 / E^alpha`, or `-1` if any region is not over-covered (or there are none).
pub fn drowsiness(energy: f64, alpha: f64, adjacent_ratios: &[f64]) -> f64 {
    if adjacent_ratios.is_empty() || adjacent_ratios.iter().any(|&r| r <= 0.0) {
        return -1.0;
    }
    let sum: f64 = adjacent_ratios.iter().sum();
    sum / energy.powf(alpha)
}

/// Drowsiness of graph sensor `sensor` given the current region degrees.
pub(crate) fn drowsiness_in(
    graph: &CoverageGraph,
    degrees: &[usize],
    sensor: usize,
    energy: f64,
    k: usize,
    alpha: f64,
) -> f64 {
    let regions = graph.sensor_regions(sensor);
    if regions.is_empty() {
        return -1.0;
    }
    let mut sum = 0.0;
    for &r in regions {
        let phi = coverage_ratio(degrees[r], k);
        if phi <= 0.0 {
            return -1.0;
        }
        sum += phi;
    }
    sum / energy.powf(alpha)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    /// Awake sensors in ascending id order.
    pub awake: Vec<NodeId>,
    /// Sleepers in the order they were selected.
    pub asleep: Vec<NodeId>,
    /// Drowsiness of each sleeper at the moment it was selected.
    pub selection_drowsiness: Vec<f64>,
}

/// Greedy sleep selection over `graph`, which must be built over exactly the
/// `alive` nodes. Ties in drowsiness go to the lowest id.
pub fn centralized_schedule(alive: &[SensorNode], graph: &CoverageGraph, k: usize, alpha: f64) -> Schedule {
    let n = graph.sensors().len();
    let energy: Vec<f64> = graph
        .sensors()
        .iter()
        .map(|id| {
            alive
                .iter()
                .find(|node| node.id == *id)
                .map(|node| node.energy)
                .unwrap_or_else(|| panic!("graph sensor {id} is not among the alive nodes"))
        })
        .collect();
    // visit sensors in id order so strict comparison keeps the lowest id on ties
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| graph.sensors()[i]);

    let mut degrees: Vec<usize> = (0..graph.region_count()).map(|r| graph.degree(r)).collect();
    let mut awake = vec![true; n];
    let mut schedule = Schedule::default();

    loop {
        let mut best: Option<(usize, f64)> = None;
        for &s in &order {
            if !awake[s] {
                continue;
            }
            let d = drowsiness_in(graph, &degrees, s, energy[s], k, alpha);
            if d > 0.0 && best.is_none_or(|(_, b)| d > b) {
                best = Some((s, d));
            }
        }
        let Some((s, d)) = best else { break };
        awake[s] = false;
        for &r in graph.sensor_regions(s) {
            degrees[r] -= 1;
        }
        schedule.asleep.push(graph.sensors()[s]);
        schedule.selection_drowsiness.push(d);
    }

    schedule.awake = order.iter().filter(|&&s| awake[s]).map(|&s| graph.sensors()[s]).collect();
    schedule
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::Point2D;
    use approx::assert_relative_eq;

    #[test]
    fn ratio_values() {
        assert_eq!(coverage_ratio(4, 3), 1.0);
        assert_eq!(coverage_ratio(3, 3), -1.0);
        assert_eq!(coverage_ratio(0, 1), -1.0);
        assert_relative_eq!(coverage_ratio(6, 3), 1.0 / 3.0);
    }

    #[test]
    fn drowsiness_values() {
        assert_relative_eq!(drowsiness(1.0, 2.0, &[1.0, 0.5]), 1.5);
        assert_relative_eq!(drowsiness(2.0, 2.0, &[1.0, 0.5]), 0.375);
        assert_eq!(drowsiness(0.1, 2.0, &[1.0, -1.0]), -1.0);
        assert_eq!(drowsiness(5.0, 2.0, &[]), -1.0);
    }

    fn one_region(n: usize, energies: &[f64]) -> (Vec<SensorNode>, CoverageGraph) {
        let nodes: Vec<SensorNode> = (0..n)
            .map(|i| SensorNode::new(NodeId(i as u32), Point2D::new(0.0, 0.0), 1.0, 2.0, energies[i]).unwrap())
            .collect();
        let graph = CoverageGraph::from_region_lists(
            nodes.iter().map(|n| n.id).collect(),
            vec![Point2D::new(0.0, 0.0)],
            vec![(0..n).collect()],
        );
        (nodes, graph)
    }

    #[test]
    fn three_coverers_one_region_k1() {
        // c=3: all D = 0.5, id 0 sleeps; c=2: D = 1 for ids 1,2, id 1 sleeps; c=1 stops.
        let (nodes, graph) = one_region(3, &[1.0, 1.0, 1.0]);
        let s = centralized_schedule(&nodes, &graph, 1, 2.0);
        assert_eq!(s.asleep, vec![NodeId(0), NodeId(1)]);
        assert_eq!(s.awake, vec![NodeId(2)]);
        assert_eq!(s.selection_drowsiness, vec![0.5, 1.0]);
    }

    #[test]
    fn lowest_energy_sleeps_first() {
        let (nodes, graph) = one_region(3, &[3.0, 1.0, 2.0]);
        let s = centralized_schedule(&nodes, &graph, 1, 2.0);
        assert_eq!(s.asleep, vec![NodeId(1), NodeId(2)]);
        assert_eq!(s.awake, vec![NodeId(0)]);
    }

    #[test]
    fn exact_k_coverage_keeps_everyone_awake() {
        let (nodes, graph) = one_region(3, &[1.0, 1.0, 1.0]);
        let s = centralized_schedule(&nodes, &graph, 3, 2.0);
        assert!(s.asleep.is_empty());
        assert_eq!(s.awake.len(), 3);
    }

    #[test]
    fn sensor_without_regions_stays_awake() {
        let nodes: Vec<SensorNode> =
            (0..2).map(|i| SensorNode::new(NodeId(i), Point2D::new(0.0, 0.0), 1.0, 2.0, 1.0).unwrap()).collect();
        let graph =
            CoverageGraph::from_region_lists(vec![NodeId(0), NodeId(1)], vec![Point2D::new(0.0, 0.0)], vec![vec![0]]);
        let s = centralized_schedule(&nodes, &graph, 1, 2.0);
        assert_eq!(s.awake, vec![NodeId(0), NodeId(1)]);
    }
}
