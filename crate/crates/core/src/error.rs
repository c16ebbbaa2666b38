use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain field `{field}`: {reason}")]
    InvalidDomain { field: String, reason: String },

    #[error("point ({x}, {y}) is not inside the domain")]
    PointOutsideDomain { x: f64, y: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("node budget exceeded: refinement needs more than {limit} nodes")]
    NodeBudgetExceeded { limit: usize },

    #[error(
        "graph is disconnected: {components} components, largest has {largest} of {total} nodes \
         (h_coarse too coarse for the narrowest gaps?)"
    )]
    DisconnectedGraph {
        components: usize,
        largest: usize,
        total: usize,
    },

    #[error("node {to} unreachable from node {from}")]
    Unreachable { from: usize, to: usize },

    #[error("path has no nodes")]
    EmptyPath,

    #[error("degenerate pair: endpoints coincide")]
    DegeneratePair,

    #[error("too few pairs: need at least {needed}, got {got}")]
    TooFewPairs { needed: usize, got: usize },

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("no interior proxy reachable from boundary anchor ({x}, {y})")]
    AnchorApproachFailure { x: f64, y: f64 },

    #[error("waypoint ({x}, {y}) has no sampled image within {tolerance} (nearest at {distance})")]
    UnmatchedWaypoint {
        x: f64,
        y: f64,
        distance: f64,
        tolerance: f64,
    },

    #[error("input constraint violated: {0}")]
    InputConstraint(String),

    #[error("cannot invert eta: {0}")]
    EtaInversion(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
