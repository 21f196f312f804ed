use thiserror::Error;

use crate::coverage::NodeId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("node {0} has a non-finite position")]
    NonFinitePosition(NodeId),
    #[error("node {id}: {what} radius must be positive and finite, got {value}")]
    InvalidRadius { id: NodeId, what: &'static str, value: f64 },
    #[error("node {id}: energy must be non-negative and finite, got {value}")]
    InvalidEnergy { id: NodeId, value: f64 },
    #[error("cell side must be positive and finite, got {0}")]
    InvalidCellSide(f64),
    #[error("region grid must have at least one row and one column")]
    EmptyGrid,
    #[error("template resolution must be at least 2, got {0}")]
    TemplateResolution(u32),
    #[error("template inclusion factor must be positive, got {0}")]
    TemplateTau(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("{name} must be {expected}, got {value}")]
    OutOfRange { name: &'static str, expected: &'static str, value: f64 },
    #[error("topology has no nodes")]
    NoNodes,
    #[error("death schedule names node {node}, but the topology has {count} nodes")]
    UnknownNode { node: u32, count: usize },
    #[error("AfterStd faults require the cgs scheduler (node {0})")]
    AfterStdWithoutCgs(u32),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Raised when a non-redundancy check is asked about a set that is not a cover.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("awake set is not a valid k-cover: region {region} has {awake} of {alive} feasible coverers awake")]
pub struct InvalidCover {
    pub region: usize,
    pub awake: usize,
    pub alive: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("trace is empty")]
    EmptyTrace,
    #[error("coverage level {0} is not recorded (levels 1..=3)")]
    UnrecordedLevel(usize),
    #[error("lambda must lie in (0, 1]")]
    Lambda,
}
