//! Brute-force cross-checks against independent computations.

use std::collections::BTreeSet;

use kcover::*;

fn node(id: u32, x: f64, y: f64, r: f64) -> SensorNode {
    SensorNode::new(NodeId(id), Point2D::new(x, y), r, 2.0 * r, 20.0).unwrap()
}

fn grid_nodes() -> Vec<SensorNode> {
    (0..100).map(|i| node(i, (i % 10) as f64 * 10.0, (i / 10) as f64 * 10.0, 15.0)).collect()
}

#[test]
fn four_overlapping_disks_match_pairwise_check() {
    let nodes =
        [node(0, 10.0, 10.0, 8.0), node(1, 18.0, 10.0, 8.0), node(2, 14.0, 17.0, 8.0), node(3, 30.0, 30.0, 5.0)];
    let grid = RegionGrid::new(Point2D::new(0.0, 0.0), 1.0, 40, 40).unwrap();
    let g = build_coverage_graph(&nodes, &grid, CoverageMode::ExactCenter);
    let mut seen_triple = false;
    for row in 0..40 {
        for col in 0..40 {
            let (x, y) = (col as f64 + 0.5, row as f64 + 0.5);
            let expect = nodes
                .iter()
                .filter(|n| (n.position.x - x).powi(2) + (n.position.y - y).powi(2) <= n.sensing_radius.powi(2))
                .count();
            assert_eq!(g.degree(row * 40 + col), expect, "cell ({col}, {row})");
            seen_triple |= expect == 3;
        }
    }
    assert!(seen_triple);
}

#[test]
fn template_counts_match_integer_enumeration() {
    for (res, tau) in [(6u32, 0.86), (10, 0.9), (10, 0.86), (7, 0.8), (12, 1.0)] {
        // offsets are (2i + 1 - res) * R / res; keep when the squared norm is within (tau * res)^2 in those units
        let limit = (tau * res as f64).powi(2);
        let expect = (0..res)
            .flat_map(|i| (0..res).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                let (a, b) = (2 * i as i64 + 1 - res as i64, 2 * j as i64 + 1 - res as i64);
                ((a * a + b * b) as f64) <= limit
            })
            .count();
        assert_eq!(local_region_template(15.0, res, tau).unwrap().len(), expect, "resolution {res}, tau {tau}");
    }
}

#[test]
fn interior_local_degrees_match_distance_count() {
    let nodes = grid_nodes();
    let me = &nodes[55];
    let model = LocalModel::new(15.0, 6, 0.86).unwrap();
    let cells = model.cells_for(&me.position);
    assert_eq!(cells.len(), 24);
    let neighbors: Vec<(NodeId, Point2D)> =
        nodes.iter().filter(|n| n.id != me.id).map(|n| (n.id, n.position)).collect();
    let g = local_subgraph(me, &neighbors, &cells, model.half_side());
    let threshold = 15.0 - 2f64.sqrt() * 2.5;
    for (r, c) in cells.iter().enumerate() {
        let (cx, cy) = (me.position.x + c.dx, me.position.y + c.dy);
        let others = nodes
            .iter()
            .filter(|n| n.id != me.id && ((n.position.x - cx).powi(2) + (n.position.y - cy).powi(2)).sqrt() < threshold)
            .count();
        assert_eq!(g.degree(r), 1 + others, "cell {c:?}");
    }
}

#[test]
fn square_centers_have_only_their_corners() {
    // Each 10 m square's center is within 15 m of its 4 corners and no other grid node.
    let nodes = grid_nodes();
    for row in 0..9 {
        for col in 0..9 {
            let c = Point2D::new(col as f64 * 10.0 + 5.0, row as f64 * 10.0 + 5.0);
            let covering: Vec<u32> =
                nodes.iter().filter(|n| disk_covers_point(&n.position, 15.0, &c)).map(|n| n.id.0).collect();
            let base = row * 10 + col;
            assert_eq!(covering, vec![base, base + 1, base + 10, base + 11]);
        }
    }
}

#[test]
fn lossless_grid_election_is_optimal() {
    // At most one corner of each square may sleep, so sleepers form an independent
    // set of the 10 x 10 king graph: at most 25 of them.
    let config = SimulationConfig::default();
    let nodes = grid_nodes();
    let params = ElectionParams { k: 3, alpha: 2.0, std: config.std_params(), model: config.local_model().unwrap() };
    let mut channel = Channel::new(&nodes, 0.0, 1, 1);
    let out = run_election(&nodes, &mut channel, &params, &BTreeSet::new(), 1);
    let asleep: BTreeSet<u32> = out.asleep().iter().map(|id| id.0).collect();
    assert_eq!(asleep.len(), 25);
    for &a in &asleep {
        for &b in &asleep {
            let (dx, dy) = ((a % 10) as i32 - (b % 10) as i32, (a / 10) as i32 - (b / 10) as i32);
            assert!(a == b || dx.abs() > 1 || dy.abs() > 1, "{a} and {b} are king neighbors");
        }
    }
    let area = config.target_area();
    let awake: Vec<SensorNode> = nodes.iter().filter(|n| !asleep.contains(&n.id.0)).cloned().collect();
    assert_eq!(theta_k(&awake, &area, 1.0, 3), 1.0);
    let grid = RegionGrid::covering(&area, config.region_cell_m).unwrap();
    assert_eq!(theta_prime_k(&build_coverage_graph(&awake, &grid, CoverageMode::ExactCenter), 3), 1.0);
}

#[test]
fn centralized_matches_on_the_grid() {
    // 2 m cells put a region center on every square center, so 75 is a lower bound.
    // 2.5 m cells miss those points and let more nodes sleep.
    let area = SimulationConfig::default().target_area();
    let nodes = grid_nodes();
    for (side, awake) in [(2.0, 75), (2.5, 64)] {
        let g = build_coverage_graph(&nodes, &RegionGrid::covering(&area, side).unwrap(), CoverageMode::ExactCenter);
        let s = centralized_schedule(&nodes, &g, 3, 2.0);
        assert_eq!(s.awake.len(), awake, "cell side {side}");
        assert!(verify_k_cover(&s.awake, &g, 3));
        assert_eq!(is_nonredundant(&s.awake, &g, 3), Ok(true));
    }
}

#[test]
fn estimators_coincide_on_a_shared_lattice() {
    let nodes: Vec<SensorNode> = generate_topology(
        &Topology::UniformRandom { n: 25, width_m: 60.0, height_m: 60.0 },
        4,
        NodeSpec { sensing_radius: 12.0, comm_radius: 30.0, energy: 1.0 },
    )
    .unwrap();
    let area = Rect::new(Point2D::new(0.0, 0.0), Point2D::new(60.0, 60.0));
    for side in [1.0, 2.5, 3.0] {
        let g = build_coverage_graph(&nodes, &RegionGrid::covering(&area, side).unwrap(), CoverageMode::ExactCenter);
        for k in 1..=3 {
            assert_eq!(theta_prime_k(&g, k), theta_k(&nodes, &area, side, k), "side {side}, k {k}");
        }
    }
}

#[test]
fn loss_does_not_touch_topology_or_random_draws() {
    let base = SimulationConfig {
        topology: Topology::UniformRandom { n: 40, width_m: 70.0, height_m: 70.0 },
        scheduler: SchedulerKind::Random { p_sleep: 0.3 },
        max_periods: 15,
        ..SimulationConfig::default()
    };
    let a = run_simulation(&base).unwrap();
    let b = run_simulation(&SimulationConfig { loss_probability: 0.5, ..base.clone() }).unwrap();
    assert_eq!(a, b);
    let c = run_simulation(&SimulationConfig { scheduler: SchedulerKind::Cgs, loss_probability: 0.5, ..base.clone() })
        .unwrap();
    assert_eq!(a.initial_nodes, c.initial_nodes);
}

/// Drops one Hello or Std delivery at a time from a lossless election and
/// looks for a node that was awake and now sleeps. Such a flip is allowed:
/// a node kept awake by the loss announces itself, and a later node can then
/// rely on it. Coverage must still hold in every replay.
#[test]
fn single_extra_loss_can_let_another_node_sleep() {
    let mut flips = 0;
    for (cols, energies_seed) in [(4u32, 1u64), (5, 2), (4, 3)] {
        let config = SimulationConfig {
            topology: Topology::Grid { rows: 4, cols, spacing_m: 10.0 },
            k: 2,
            ..SimulationConfig::default()
        };
        let mut nodes =
            generate_topology(&config.topology, 0, NodeSpec { sensing_radius: 15.0, comm_radius: 40.0, energy: 20.0 })
                .unwrap();
        for n in &mut nodes {
            n.energy = 5.0 + ((n.id.0 as u64 * 7 + energies_seed * 13) % 11) as f64;
        }
        let params =
            ElectionParams { k: 2, alpha: 2.0, std: config.std_params(), model: config.local_model().unwrap() };
        let base_channel = Channel::new(&nodes, 0.0, 1, 1);
        let base = run_election(&nodes, &mut base_channel.clone(), &params, &BTreeSet::new(), 1);
        let n = nodes.len() as u64;
        for msg in 0..2 * n {
            let sender = NodeId((msg % n) as u32);
            for r in base_channel.candidates(sender) {
                let mut ch = base_channel.clone().with_forced_drops([(msg, r)].into_iter().collect());
                let out = run_election(&nodes, &mut ch, &params, &BTreeSet::new(), 1);
                let awake: BTreeSet<NodeId> = out.awake().into_iter().collect();
                assert!(verify_local_cover(&nodes, &awake, &params.model, 2).is_empty());
                flips += nodes
                    .iter()
                    .filter(|s| {
                        base.decision(s.id) == Some(Decision::Awake) && out.decision(s.id) == Some(Decision::Sleep)
                    })
                    .count();
            }
        }
    }
    assert!(flips > 0, "no awake-to-sleep flip found");
}
