//! Quality-of-service metrics and coverage verification.
//!
//! `theta` is the k-covered fraction of the target area, estimated on a
//! lattice of sample points. `theta_prime` is the k-covered fraction of
//! regions. Both are recorded for k = 1, 2, 3 in every trace row.

use std::collections::BTreeSet;

use crate::coverage::{
    cell_covered_pessimistic, disk_covers_point, CoverageGraph, LocalModel, NodeId, Point2D, Rect, RegionGrid,
    SensorNode,
};
use crate::error::{InvalidCover, MetricsError};

/// Number of coverage levels carried by a trace row.
pub const LEVELS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub period: u32,
    pub alive: usize,
    pub awake: usize,
    pub theta: [f64; LEVELS],
    pub theta_prime: [f64; LEVELS],
    pub messages: u64,
}

impl MetricsRow {
    pub fn empty(period: u32) -> Self {
        Self { period, alive: 0, awake: 0, theta: [0.0; LEVELS], theta_prime: [0.0; LEVELS], messages: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsTrace {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTrace {
    pub fn row(&self, period: u32) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.period == period)
    }

    /// Last period in which any node was alive, or 0.
    pub fn network_lifetime(&self) -> u32 {
        self.rows.iter().filter(|r| r.alive > 0).map(|r| r.period).max().unwrap_or(0)
    }
}

/// Sample points at the cell centers of the grid of side `spacing` covering `area`.
pub fn sample_points(area: &Rect, spacing: f64) -> Vec<Point2D> {
    RegionGrid::covering(area, spacing).map(|g| g.centers().collect()).unwrap_or_default()
}

/// Fraction of sample points covered by at least `k` of the `awake` disks.
pub fn theta_k(awake: &[SensorNode], area: &Rect, spacing: f64, k: usize) -> f64 {
    let points = sample_points(area, spacing);
    if points.is_empty() {
        return 0.0;
    }
    let covered = points
        .iter()
        .filter(|p| awake.iter().filter(|n| disk_covers_point(&n.position, n.sensing_radius, p)).count() >= k)
        .count();
    covered as f64 / points.len() as f64
}

/// Fraction of regions of `graph` with degree at least `k`.
pub fn theta_prime_k(graph: &CoverageGraph, k: usize) -> f64 {
    let n = graph.region_count();
    if n == 0 {
        log::warn!("theta' requested on a graph without regions");
        return 0.0;
    }
    (0..n).filter(|&r| graph.degree(r) >= k).count() as f64 / n as f64
}

/// Precomputed sample-point and region coverage lists for a fixed deployment,
/// so per-period metrics only count awake coverers.
#[derive(Debug, Clone)]
pub struct CoverageIndex {
    sample_coverers: Vec<Vec<u32>>,
    graph: CoverageGraph,
}

impl CoverageIndex {
    /// `nodes` are addressed by slice position in later masks; `graph` must be
    /// built over the same slice.
    pub fn new(nodes: &[SensorNode], area: &Rect, spacing: f64, graph: CoverageGraph) -> Self {
        let sample_coverers = sample_points(area, spacing)
            .iter()
            .map(|p| {
                nodes
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| disk_covers_point(&n.position, n.sensing_radius, p))
                    .map(|(i, _)| i as u32)
                    .collect()
            })
            .collect();
        Self { sample_coverers, graph }
    }

    pub fn graph(&self) -> &CoverageGraph {
        &self.graph
    }

    pub fn theta(&self, mask: &[bool]) -> [f64; LEVELS] {
        fractions(self.sample_coverers.iter().map(|c| c.iter().filter(|&&i| mask[i as usize]).count()))
    }

    pub fn theta_prime(&self, mask: &[bool]) -> [f64; LEVELS] {
        fractions((0..self.graph.region_count()).map(|r| self.graph.masked_degree(r, mask)))
    }
}

fn fractions(counts: impl Iterator<Item = usize>) -> [f64; LEVELS] {
    let mut hits = [0usize; LEVELS];
    let mut total = 0usize;
    for c in counts {
        total += 1;
        for (level, h) in hits.iter_mut().enumerate() {
            if c > level {
                *h += 1;
            }
        }
    }
    if total == 0 {
        return [0.0; LEVELS];
    }
    hits.map(|h| h as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LifetimeRule {
    /// Longest prefix of periods with `theta_k > lambda`.
    #[default]
    Prefix,
    /// Last period with `theta_k > lambda`.
    LastAbove,
}

/// k-lifetime `L_k(lambda)` in periods, measured on the area fraction.
pub fn k_lifetime(trace: &MetricsTrace, k: usize, lambda: f64, rule: LifetimeRule) -> Result<u32, MetricsError> {
    if trace.rows.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }
    if !(1..=LEVELS).contains(&k) {
        return Err(MetricsError::UnrecordedLevel(k));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(MetricsError::Lambda);
    }
    let above = |row: &MetricsRow| row.theta[k - 1] > lambda;
    Ok(match rule {
        LifetimeRule::Prefix => trace.rows.iter().take_while(|r| above(r)).last().map_or(0, |r| r.period),
        LifetimeRule::LastAbove => trace.rows.iter().filter(|r| above(r)).map(|r| r.period).max().unwrap_or(0),
    })
}

fn awake_mask(graph: &CoverageGraph, awake: &[NodeId]) -> Vec<bool> {
    let set: BTreeSet<NodeId> = awake.iter().copied().collect();
    graph.sensors().iter().map(|id| set.contains(id)).collect()
}

fn cover_violation(graph: &CoverageGraph, mask: &[bool], k: usize) -> Option<InvalidCover> {
    (0..graph.region_count()).find_map(|r| {
        let alive = graph.degree(r);
        let awake = graph.masked_degree(r, mask);
        (alive >= k && awake < k).then_some(InvalidCover { region: r, awake, alive })
    })
}

/// True iff every region with at least `k` coverers in `graph` (built over the
/// alive nodes) keeps at least `k` coverers among `awake`.
pub fn verify_k_cover(awake: &[NodeId], graph: &CoverageGraph, k: usize) -> bool {
    cover_violation(graph, &awake_mask(graph, awake), k).is_none()
}

/// True iff dropping any single awake node breaks the k-cover.
///
/// Coverage is monotone in the sensor set, so the single-removal test agrees
/// with the subset definition. Fails if `awake` is not a k-cover to begin with.
pub fn is_nonredundant(awake: &[NodeId], graph: &CoverageGraph, k: usize) -> Result<bool, InvalidCover> {
    let mut mask = awake_mask(graph, awake);
    if let Some(v) = cover_violation(graph, &mask, k) {
        return Err(v);
    }
    for s in 0..mask.len() {
        if !mask[s] {
            continue;
        }
        mask[s] = false;
        let still_cover = cover_violation(graph, &mask, k).is_none();
        mask[s] = true;
        if still_cover {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A cell of some node's local model left under-covered after an election.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalViolation {
    pub owner: NodeId,
    pub cell_center: Point2D,
    pub alive_coverers: usize,
    pub awake_coverers: usize,
}

/// Checks the distributed guarantee against ground truth: for every alive
/// node and each of its cells, if the owner plus the alive nodes that
/// pessimistically cover the cell number at least `k`, then at least `k` of
/// them are awake.
pub fn verify_local_cover(
    alive: &[SensorNode],
    awake: &BTreeSet<NodeId>,
    model: &LocalModel,
    k: usize,
) -> Vec<LocalViolation> {
    let half = model.half_side();
    let mut out = Vec::new();
    for s in alive {
        for cell in model.cells_for(&s.position) {
            let mut alive_count = 1;
            let mut awake_count = usize::from(awake.contains(&s.id));
            for w in alive.iter().filter(|w| w.id != s.id) {
                if cell_covered_pessimistic(&s.position, cell, &w.position, model.sensing_radius, half) {
                    alive_count += 1;
                    awake_count += usize::from(awake.contains(&w.id));
                }
            }
            if alive_count >= k && awake_count < k {
                out.push(LocalViolation {
                    owner: s.id,
                    cell_center: s.position.offset(cell),
                    alive_coverers: alive_count,
                    awake_coverers: awake_count,
                });
            }
        }
    }
    out
}
