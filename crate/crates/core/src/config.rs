//! Run parameters and deployment generation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cgs::StdParams;
use crate::coverage::{LocalModel, NodeId, Point2D, Rect, SensorNode};
use crate::error::ConfigError;
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Topology {
    /// `rows x cols` lattice with ids in row-major order; node `(col, row)`
    /// sits at `(col * spacing_m, row * spacing_m)`.
    Grid { rows: u32, cols: u32, spacing_m: f64 },
    /// `n` independent uniform positions in `[0, width_m] x [0, height_m]`.
    UniformRandom { n: u32, width_m: f64, height_m: f64 },
}

impl Topology {
    pub fn node_count(&self) -> usize {
        match *self {
            Topology::Grid { rows, cols, .. } => rows as usize * cols as usize,
            Topology::UniformRandom { n, .. } => n as usize,
        }
    }

    /// The monitored area: the node hull for grids, the sampling box otherwise.
    pub fn target_area(&self) -> Rect {
        let origin = Point2D::new(0.0, 0.0);
        match *self {
            Topology::Grid { rows, cols, spacing_m } => Rect::new(
                origin,
                Point2D::new(cols.saturating_sub(1) as f64 * spacing_m, rows.saturating_sub(1) as f64 * spacing_m),
            ),
            Topology::UniformRandom { width_m, height_m, .. } => Rect::new(origin, Point2D::new(width_m, height_m)),
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { name, expected: "positive", value: v })
            }
        };
        match *self {
            Topology::Grid { spacing_m, .. } => positive("spacing_m", spacing_m)?,
            Topology::UniformRandom { width_m, height_m, .. } => {
                positive("width_m", width_m)?;
                positive("height_m", height_m)?;
            }
        }
        if self.node_count() == 0 {
            return Err(ConfigError::NoNodes);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchedulerKind {
    Centralized,
    Cgs,
    Random {
        p_sleep: f64,
    },
    /// Every alive node stays awake every period.
    AlwaysOn,
}

impl SchedulerKind {
    /// Short stable label, used in file names and CSV summaries.
    pub fn label(&self) -> String {
        match self {
            SchedulerKind::Centralized => "centralized".into(),
            SchedulerKind::Cgs => "cgs".into(),
            SchedulerKind::Random { p_sleep } => format!("random_{p_sleep:.2}"),
            SchedulerKind::AlwaysOn => "always_on".into(),
        }
    }
}

impl std::str::FromStr for SchedulerKind {
    type Err = String;

    /// Accepts `cgs`, `centralized`, `always_on`, `random` (p = 0.4) and `random:<p>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cgs" => Ok(SchedulerKind::Cgs),
            "centralized" => Ok(SchedulerKind::Centralized),
            "always_on" | "always-on" => Ok(SchedulerKind::AlwaysOn),
            "random" => Ok(SchedulerKind::Random { p_sleep: 0.4 }),
            other => match other.strip_prefix("random:").or_else(|| other.strip_prefix("random_")) {
                Some(p) => p
                    .parse::<f64>()
                    .map(|p_sleep| SchedulerKind::Random { p_sleep })
                    .map_err(|e| format!("bad sleep probability in {other:?}: {e}")),
                None => Err(format!("unknown scheduler {other:?}")),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultPhase {
    /// Dies after broadcasting its Std message, before its timer fires.
    AfterStd,
    /// Dies before the Hello phase.
    StartOfPeriod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultEvent {
    pub node: u32,
    pub period: u32,
    pub phase: FaultPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub k: usize,
    pub alpha: f64,
    pub sensing_radius_m: f64,
    pub comm_radius_m: f64,
    pub initial_energy: f64,
    pub awake_cost_per_period: f64,
    /// Energy charged per message sent; 0 treats the election as free.
    pub message_cost: f64,
    pub max_periods: u32,
    pub loss_probability: f64,
    pub std_c: f64,
    pub std_max: f64,
    pub template_resolution: u32,
    pub template_tau: f64,
    /// Snap local cells to a lattice anchored at the target area corner.
    pub template_anchored: bool,
    /// Drop local cells whose center falls outside the target area.
    pub template_clip: bool,
    /// Side of the global region cells used by the centralized scheduler and theta'.
    pub region_cell_m: f64,
    pub metric_sample_spacing_m: f64,
    pub seed: u64,
    pub topology: Topology,
    pub scheduler: SchedulerKind,
    pub death_schedule: Vec<FaultEvent>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self::figure5(SchedulerKind::Cgs)
    }
}

impl SimulationConfig {
    /// The 10 x 10 grid comparison: 10 m spacing, 15 m sensing, 40 m radio,
    /// 20 units of energy, 1 unit per awake period, k = 3, alpha = 2.
    pub fn figure5(scheduler: SchedulerKind) -> Self {
        Self {
            k: 3,
            alpha: 2.0,
            sensing_radius_m: 15.0,
            comm_radius_m: 40.0,
            initial_energy: 20.0,
            awake_cost_per_period: 1.0,
            message_cost: 0.0,
            max_periods: 60,
            loss_probability: 0.0,
            std_c: 1.0,
            std_max: 10.0,
            template_resolution: 6,
            template_tau: 0.86,
            template_anchored: true,
            template_clip: true,
            region_cell_m: 2.5,
            metric_sample_spacing_m: 1.0,
            seed: 1,
            topology: Topology::Grid { rows: 10, cols: 10, spacing_m: 10.0 },
            scheduler,
            death_schedule: Vec::new(),
        }
    }

    pub fn target_area(&self) -> Rect {
        self.topology.target_area()
    }

    pub fn std_params(&self) -> StdParams {
        StdParams { c: self.std_c, max: self.std_max }
    }

    pub fn local_model(&self) -> Result<LocalModel, ConfigError> {
        let area = self.target_area();
        let mut model = LocalModel::new(self.sensing_radius_m, self.template_resolution, self.template_tau)?;
        if self.template_anchored {
            model = model.with_anchor(area.min);
        }
        if self.template_clip {
            model = model.with_bounds(area);
        }
        Ok(model)
    }

    /// Checks every parameter; returns the warnings a valid config still merits.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        fn range(name: &'static str, v: f64, ok: bool, expected: &'static str) -> Result<(), ConfigError> {
            if ok && !v.is_nan() {
                Ok(())
            } else {
                Err(ConfigError::OutOfRange { name, expected, value: v })
            }
        }
        let pos = |name, v: f64| range(name, v, v > 0.0 && v.is_finite(), "positive");
        let prob = |name, v: f64| range(name, v, (0.0..=1.0).contains(&v), "in [0, 1]");

        if self.k == 0 {
            return Err(ConfigError::ZeroK);
        }
        pos("alpha", self.alpha)?;
        pos("sensing_radius_m", self.sensing_radius_m)?;
        pos("comm_radius_m", self.comm_radius_m)?;
        range("initial_energy", self.initial_energy, self.initial_energy >= 0.0, "non-negative")?;
        pos("awake_cost_per_period", self.awake_cost_per_period)?;
        range("message_cost", self.message_cost, self.message_cost >= 0.0, "non-negative")?;
        prob("loss_probability", self.loss_probability)?;
        pos("std_c", self.std_c)?;
        pos("std_max", self.std_max)?;
        pos("region_cell_m", self.region_cell_m)?;
        pos("metric_sample_spacing_m", self.metric_sample_spacing_m)?;
        if let SchedulerKind::Random { p_sleep } = self.scheduler {
            prob("p_sleep", p_sleep)?;
        }
        self.topology.validate()?;
        let model = self.local_model()?;

        let count = self.topology.node_count();
        for f in &self.death_schedule {
            if f.node as usize >= count {
                return Err(ConfigError::UnknownNode { node: f.node, count });
            }
            if f.phase == FaultPhase::AfterStd && self.scheduler != SchedulerKind::Cgs {
                return Err(ConfigError::AfterStdWithoutCgs(f.node));
            }
        }

        let mut warnings = Vec::new();
        if self.comm_radius_m < 2.0 * self.sensing_radius_m {
            warnings.push(format!(
                "comm_radius_m = {} is below twice the sensing radius ({}); sensing coverage no longer implies connectivity",
                self.comm_radius_m,
                2.0 * self.sensing_radius_m
            ));
        }
        if self.template_anchored && !model.is_self_consistent() {
            warnings.push(format!(
                "template_tau = {} is below 1 - sqrt(2)/{}; the distributed coverage guarantee does not hold",
                self.template_tau, self.template_resolution
            ));
        }
        Ok(warnings)
    }
}

/// Per-node physical parameters shared by a deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec {
    pub sensing_radius: f64,
    pub comm_radius: f64,
    pub energy: f64,
}

pub fn generate_topology(topology: &Topology, seed: u64, spec: NodeSpec) -> Result<Vec<SensorNode>, ConfigError> {
    topology.validate()?;
    let positions: Vec<Point2D> = match *topology {
        Topology::Grid { rows, cols, spacing_m } => (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Point2D::new(c as f64 * spacing_m, r as f64 * spacing_m)))
            .collect(),
        Topology::UniformRandom { n, width_m, height_m } => {
            let mut rng = substream(seed, Stream::Topology, &[]);
            (0..n).map(|_| Point2D::new(rng.gen_range(0.0..=width_m), rng.gen_range(0.0..=height_m))).collect()
        }
    };
    positions
        .into_iter()
        .enumerate()
        .map(|(i, p)| SensorNode::new(NodeId(i as u32), p, spec.sensing_radius, spec.comm_radius, spec.energy))
        .collect::<Result<_, _>>()
        .map_err(ConfigError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPEC: NodeSpec = NodeSpec { sensing_radius: 15.0, comm_radius: 40.0, energy: 20.0 };

    #[test]
    fn grid_layout() {
        let nodes = generate_topology(&Topology::Grid { rows: 10, cols: 10, spacing_m: 10.0 }, 0, SPEC).unwrap();
        assert_eq!(nodes.len(), 100);
        assert_eq!(nodes[0].position, Point2D::new(0.0, 0.0));
        assert_eq!(nodes[99].position, Point2D::new(90.0, 90.0));
        assert_eq!(nodes[12].position, Point2D::new(20.0, 10.0));
        let single = generate_topology(&Topology::Grid { rows: 1, cols: 1, spacing_m: 5.0 }, 0, SPEC).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].position, Point2D::new(0.0, 0.0));
    }

    #[test]
    fn uniform_is_bounded_and_seeded() {
        let t = Topology::UniformRandom { n: 50, width_m: 100.0, height_m: 100.0 };
        let a = generate_topology(&t, 9, SPEC).unwrap();
        let b = generate_topology(&t, 9, SPEC).unwrap();
        let c = generate_topology(&t, 10, SPEC).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        assert_ne!(a, c);
        let area = t.target_area();
        assert!(a.iter().all(|n| area.contains(&n.position)));
    }

    #[test]
    fn empty_topology_rejected() {
        let t = Topology::UniformRandom { n: 0, width_m: 1.0, height_m: 1.0 };
        assert_eq!(generate_topology(&t, 0, SPEC), Err(ConfigError::NoNodes));
        assert_eq!(
            generate_topology(&Topology::Grid { rows: 0, cols: 3, spacing_m: 1.0 }, 0, SPEC),
            Err(ConfigError::NoNodes)
        );
    }

    #[test]
    fn validation() {
        let ok = SimulationConfig::default();
        assert_eq!(ok.validate(), Ok(vec![]));
        let mut c = ok.clone();
        c.k = 0;
        assert_eq!(c.validate(), Err(ConfigError::ZeroK));
        let mut c = ok.clone();
        c.loss_probability = 1.5;
        assert!(matches!(c.validate(), Err(ConfigError::OutOfRange { name: "loss_probability", .. })));
        let mut c = ok.clone();
        c.comm_radius_m = 20.0;
        assert_eq!(c.validate().unwrap().len(), 1);
        let mut c = ok.clone();
        c.scheduler = SchedulerKind::Random { p_sleep: 0.3 };
        c.death_schedule.push(FaultEvent { node: 1, period: 1, phase: FaultPhase::AfterStd });
        assert_eq!(c.validate(), Err(ConfigError::AfterStdWithoutCgs(1)));
        let mut c = ok;
        c.death_schedule.push(FaultEvent { node: 100, period: 1, phase: FaultPhase::StartOfPeriod });
        assert!(matches!(c.validate(), Err(ConfigError::UnknownNode { .. })));
    }

    #[test]
    fn scheduler_labels_parse() {
        assert_eq!("cgs".parse::<SchedulerKind>(), Ok(SchedulerKind::Cgs));
        assert_eq!("random:0.25".parse::<SchedulerKind>(), Ok(SchedulerKind::Random { p_sleep: 0.25 }));
        assert_eq!(SchedulerKind::Random { p_sleep: 0.25 }.label(), "random_0.25");
        assert_eq!("random_0.25".parse::<SchedulerKind>(), Ok(SchedulerKind::Random { p_sleep: 0.25 }));
        assert!("bogus".parse::<SchedulerKind>().is_err());
    }
}
