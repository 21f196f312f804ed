//! Geometric coverage primitives.
//!
//! Sensing is modeled with disks. The monitored area is discretized into
//! square cells ("regions"), and the sensing assignment is the bipartite graph
//! between regions and the sensors that cover them. Two edge rules exist:
//!
//! - [`CoverageMode::ExactCenter`]: a sensor covers a cell when the cell center
//!   lies in its closed sensing disk.
//! - [`CoverageMode::Pessimistic`]: a sensor covers a cell only when the whole
//!   square provably fits inside its disk, `R - sqrt(2)*half_side > d`.
//!
//! Each node in the distributed protocol reasons over a local graph built from
//! its own cells (see [`LocalModel`]) and the pessimistic rule.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(&self, offset: CellOffset) -> Point2D {
        Point2D::new(self.x + offset.dx, self.y + offset.dy)
    }
}

impl fmt::Display for Point2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Offset of a cell center from the node that owns it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellOffset {
    pub dx: f64,
    pub dy: f64,
}

impl CellOffset {
    pub fn norm(&self) -> f64 {
        self.dx.hypot(self.dy)
    }
}

/// Axis-aligned rectangle, closed on all sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2D,
    pub max: Point2D,
}

impl Rect {
    pub fn new(min: Point2D, max: Point2D) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeState {
    Awake,
    Asleep,
    Dead,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    pub id: NodeId,
    pub position: Point2D,
    pub sensing_radius: f64,
    pub comm_radius: f64,
    pub energy: f64,
    pub state: NodeState,
}

impl SensorNode {
    pub fn new(
        id: NodeId,
        position: Point2D,
        sensing_radius: f64,
        comm_radius: f64,
        energy: f64,
    ) -> Result<Self, ModelError> {
        if !position.is_finite() {
            return Err(ModelError::NonFinitePosition(id));
        }
        if !(sensing_radius > 0.0 && sensing_radius.is_finite()) {
            return Err(ModelError::InvalidRadius { id, what: "sensing", value: sensing_radius });
        }
        if !(comm_radius > 0.0 && comm_radius.is_finite()) {
            return Err(ModelError::InvalidRadius { id, what: "communication", value: comm_radius });
        }
        if !(energy >= 0.0 && energy.is_finite()) {
            return Err(ModelError::InvalidEnergy { id, value: energy });
        }
        Ok(Self { id, position, sensing_radius, comm_radius, energy, state: NodeState::Awake })
    }

    /// A node is alive while it can afford one more awake period and has not failed.
    pub fn is_alive(&self) -> bool {
        self.state != NodeState::Dead
    }

    pub fn is_awake(&self) -> bool {
        self.state == NodeState::Awake
    }
}

/// Closed-disk membership: the boundary counts as covered.
pub fn disk_covers_point(center: &Point2D, radius: f64, p: &Point2D) -> bool {
    center.distance(p) <= radius
}

/// Pessimistic containment test for a square cell of half-side `half_side`
/// centered at `s_pos + cell_offset`, against a disk of radius `radius` at `w_pos`.
///
/// The inequality is strict and carries no epsilon slack.
pub fn cell_covered_pessimistic(
    s_pos: &Point2D,
    cell_offset: CellOffset,
    w_pos: &Point2D,
    radius: f64,
    half_side: f64,
) -> bool {
    let center = s_pos.offset(cell_offset);
    radius - std::f64::consts::SQRT_2 * half_side > center.distance(w_pos)
}

/// Regular lattice of square cells.
///
/// Cell `(i, j)` has center `origin + ((i + 0.5) * cell_side, (j + 0.5) * cell_side)`
/// and linear index `j * n_cols + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    origin: Point2D,
    cell_side: f64,
    n_cols: usize,
    n_rows: usize,
}

impl RegionGrid {
    pub fn new(origin: Point2D, cell_side: f64, n_cols: usize, n_rows: usize) -> Result<Self, ModelError> {
        if !(cell_side > 0.0 && cell_side.is_finite()) {
            return Err(ModelError::InvalidCellSide(cell_side));
        }
        if n_cols == 0 || n_rows == 0 {
            return Err(ModelError::EmptyGrid);
        }
        if !origin.is_finite() {
            return Err(ModelError::InvalidCellSide(f64::NAN));
        }
        Ok(Self { origin, cell_side, n_cols, n_rows })
    }

    /// Smallest grid anchored at `area.min` whose cells tile the whole area.
    /// Degenerate (zero-extent) areas still get one cell per axis.
    pub fn covering(area: &Rect, cell_side: f64) -> Result<Self, ModelError> {
        if !(cell_side > 0.0 && cell_side.is_finite()) {
            return Err(ModelError::InvalidCellSide(cell_side));
        }
        let count = |extent: f64| ((extent / cell_side).ceil() as usize).max(1);
        Self::new(area.min, cell_side, count(area.width()), count(area.height()))
    }

    pub fn origin(&self) -> Point2D {
        self.origin
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn half_side(&self) -> f64 {
        self.cell_side / 2.0
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn len(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, col: usize, row: usize) -> Point2D {
        Point2D::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_side,
            self.origin.y + (row as f64 + 0.5) * self.cell_side,
        )
    }

    pub fn centers(&self) -> impl Iterator<Item = Point2D> + '_ {
        (0..self.n_rows).flat_map(move |row| (0..self.n_cols).map(move |col| self.center(col, row)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageMode {
    ExactCenter,
    Pessimistic,
}

/// Bipartite region/sensor adjacency.
///
/// Sensors are addressed by their position in [`CoverageGraph::sensors`]; the
/// adjacency is stored in both directions.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGraph {
    sensors: Vec<NodeId>,
    region_centers: Vec<Point2D>,
    region_sensors: Vec<Vec<usize>>,
    sensor_regions: Vec<Vec<usize>>,
}

impl CoverageGraph {
    /// Builds a graph from the region -> sensor-index lists. Sensor lists are
    /// sorted and deduplicated.
    pub fn from_region_lists(
        sensors: Vec<NodeId>,
        region_centers: Vec<Point2D>,
        mut region_sensors: Vec<Vec<usize>>,
    ) -> Self {
        assert_eq!(region_centers.len(), region_sensors.len());
        let mut sensor_regions = vec![Vec::new(); sensors.len()];
        for (r, list) in region_sensors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            for &s in list.iter() {
                assert!(s < sensors.len(), "sensor index {s} out of range");
                sensor_regions[s].push(r);
            }
        }
        Self { sensors, region_centers, region_sensors, sensor_regions }
    }

    pub fn sensors(&self) -> &[NodeId] {
        &self.sensors
    }

    pub fn sensor_index(&self, id: NodeId) -> Option<usize> {
        self.sensors.iter().position(|&s| s == id)
    }

    pub fn region_count(&self) -> usize {
        self.region_sensors.len()
    }

    pub fn region_center(&self, region: usize) -> Point2D {
        self.region_centers[region]
    }

    /// `c_r`: the number of sensors covering `region`.
    pub fn degree(&self, region: usize) -> usize {
        self.region_sensors[region].len()
    }

    pub fn region_sensors(&self, region: usize) -> &[usize] {
        &self.region_sensors[region]
    }

    pub fn sensor_regions(&self, sensor: usize) -> &[usize] {
        &self.sensor_regions[sensor]
    }

    pub fn covers(&self, region: usize, sensor: usize) -> bool {
        self.region_sensors[region].binary_search(&sensor).is_ok()
    }

    /// Number of sensors covering `region` among those flagged in `mask`.
    pub fn masked_degree(&self, region: usize, mask: &[bool]) -> usize {
        self.region_sensors[region].iter().filter(|&&s| mask[s]).count()
    }

    /// Keeps only the sensors flagged in `keep`, re-indexing the survivors.
    pub fn restrict_sensors(&self, keep: &[bool]) -> CoverageGraph {
        let mut remap = vec![usize::MAX; self.sensors.len()];
        let mut sensors = Vec::new();
        for (i, &id) in self.sensors.iter().enumerate() {
            if keep[i] {
                remap[i] = sensors.len();
                sensors.push(id);
            }
        }
        let region_sensors = self
            .region_sensors
            .iter()
            .map(|list| list.iter().filter(|&&s| keep[s]).map(|&s| remap[s]).collect())
            .collect();
        CoverageGraph::from_region_lists(sensors, self.region_centers.clone(), region_sensors)
    }
}

/// Builds the global coverage graph of `nodes` over every cell of `grid`.
pub fn build_coverage_graph(nodes: &[SensorNode], grid: &RegionGrid, mode: CoverageMode) -> CoverageGraph {
    let half = grid.half_side();
    let centers: Vec<Point2D> = grid.centers().collect();
    let zero = CellOffset { dx: 0.0, dy: 0.0 };
    let region_sensors = centers
        .iter()
        .map(|c| {
            nodes
                .iter()
                .enumerate()
                .filter(|(_, n)| match mode {
                    CoverageMode::ExactCenter => disk_covers_point(&n.position, n.sensing_radius, c),
                    CoverageMode::Pessimistic => cell_covered_pessimistic(c, zero, &n.position, n.sensing_radius, half),
                })
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    CoverageGraph::from_region_lists(nodes.iter().map(|n| n.id).collect(), centers, region_sensors)
}

/// Cell offsets approximating a sensing disk of radius `radius`.
///
/// The disk's bounding box is split into a `resolution x resolution` lattice of
/// squares of side `2 * radius / resolution`; cells whose center lies within
/// `tau * radius` of the node are kept. Resolution 6 with tau 0.86 yields the
/// familiar 24-cell layout.
pub fn local_region_template(radius: f64, resolution: u32, tau: f64) -> Result<Vec<CellOffset>, ModelError> {
    if resolution < 2 {
        return Err(ModelError::TemplateResolution(resolution));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(ModelError::TemplateTau(tau));
    }
    let side = 2.0 * radius / resolution as f64;
    let limit = tau * radius;
    let coord = |i: u32| -radius + (i as f64 + 0.5) * side;
    let mut out = Vec::new();
    for j in 0..resolution {
        for i in 0..resolution {
            let off = CellOffset { dx: coord(i), dy: coord(j) };
            if off.norm() <= limit {
                out.push(off);
            }
        }
    }
    Ok(out)
}

/// How a node discretizes its own sensing area.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    pub sensing_radius: f64,
    pub resolution: u32,
    pub tau: f64,
    /// When set, cells snap to the global lattice of side `2R/resolution`
    /// anchored here instead of being centered on the node.
    pub anchor: Option<Point2D>,
    /// When set, only cells whose center lies inside the area are kept.
    pub bounds: Option<Rect>,
}

impl LocalModel {
    pub fn new(sensing_radius: f64, resolution: u32, tau: f64) -> Result<Self, ModelError> {
        local_region_template(sensing_radius, resolution, tau)?;
        Ok(Self { sensing_radius, resolution, tau, anchor: None, bounds: None })
    }

    pub fn with_anchor(mut self, anchor: Point2D) -> Self {
        self.anchor = Some(anchor);
        self
    }

    pub fn with_bounds(mut self, bounds: Rect) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn cell_side(&self) -> f64 {
        2.0 * self.sensing_radius / self.resolution as f64
    }

    pub fn half_side(&self) -> f64 {
        self.sensing_radius / self.resolution as f64
    }

    /// Whether every pessimistically covered cell also belongs to the
    /// covering node's own cell set (`1 - sqrt(2)/resolution <= tau`). The
    /// distributed coverage guarantee depends on it when cells are anchored.
    pub fn is_self_consistent(&self) -> bool {
        1.0 - std::f64::consts::SQRT_2 / self.resolution as f64 <= self.tau
    }

    /// The cells owned by a node at `pos`, as offsets from `pos`.
    pub fn cells_for(&self, pos: &Point2D) -> Vec<CellOffset> {
        let cells = match self.anchor {
            None => local_region_template(self.sensing_radius, self.resolution, self.tau)
                .expect("validated at construction"),
            Some(anchor) => self.anchored_cells(pos, &anchor),
        };
        match &self.bounds {
            None => cells,
            Some(b) => cells.into_iter().filter(|c| b.contains(&pos.offset(*c))).collect(),
        }
    }

    fn anchored_cells(&self, pos: &Point2D, anchor: &Point2D) -> Vec<CellOffset> {
        let side = self.cell_side();
        let limit = self.tau * self.sensing_radius;
        let range = |p: f64, a: f64| {
            let lo = ((p - limit - a) / side - 0.5).floor() as i64;
            let hi = ((p + limit - a) / side - 0.5).ceil() as i64;
            lo..=hi
        };
        let mut out = Vec::new();
        for j in range(pos.y, anchor.y) {
            let cy = anchor.y + (j as f64 + 0.5) * side;
            for i in range(pos.x, anchor.x) {
                let cx = anchor.x + (i as f64 + 0.5) * side;
                let off = CellOffset { dx: cx - pos.x, dy: cy - pos.y };
                if off.norm() <= limit {
                    out.push(off);
                }
            }
        }
        out
    }
}

/// Builds `G_s`: the node's own cells, with `node` at sensor index 0 covering
/// all of them and each neighbor covering the cells that satisfy the
/// pessimistic test. `neighbors` must not contain `node`.
pub fn local_subgraph(
    node: &SensorNode,
    neighbors: &[(NodeId, Point2D)],
    cells: &[CellOffset],
    half_side: f64,
) -> CoverageGraph {
    debug_assert!(neighbors.iter().all(|(id, _)| *id != node.id));
    let mut sensors = Vec::with_capacity(neighbors.len() + 1);
    sensors.push(node.id);
    sensors.extend(neighbors.iter().map(|(id, _)| *id));
    let radius = node.sensing_radius;
    let centers = cells.iter().map(|c| node.position.offset(*c)).collect();
    let region_sensors = cells
        .iter()
        .map(|&off| {
            std::iter::once(0)
                .chain(
                    neighbors
                        .iter()
                        .enumerate()
                        .filter(|(_, (_, w))| cell_covered_pessimistic(&node.position, off, w, radius, half_side))
                        .map(|(i, _)| i + 1),
                )
                .collect()
        })
        .collect();
    CoverageGraph::from_region_lists(sensors, centers, region_sensors)
}
