//! Quasihyperbolic metric geometry on discretized planar domains.
//!
//! The crate builds boundary-adapted graphs over bounded planar domains and
//! measures the inner metric, the quasihyperbolic metric and its conformal
//! deformations on them. On top of those distances it estimates cigar and
//! turning coefficients, Gromov products and four-point hyperbolicity,
//! visual metametrics on boundary anchors, distortion envelopes of sampled
//! maps, and evaluates a log-space ledger of explicit structural constants.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditions;
pub mod constants;
pub mod discretize;
pub mod domains;
pub mod error;
pub mod geometry;
pub mod gromov;
pub mod inequalities;
pub mod maps;
pub mod metrics;

pub use conditions::{CigarReport, CigarVariant, UniformityEstimate, UniformityMode};
pub use constants::{compute_ledger, ConstantLedger, Eta, Tower};
pub use discretize::{GridParams, MetricGraph, Node, NodeId, Stencil};
pub use domains::{BoundaryAnchor, Domain, DomainSpec};
pub use error::{Error, Result};
pub use geometry::{BoundingBox, Point, Segment};
pub use gromov::{BasePoint, DeltaEstimate, DistanceMatrix, Quadruples, VisualTable};
pub use maps::{PropertyVerdict, QsEnvelope, SampledMap};
pub use metrics::{DeformSpec, MetricKind, PathRecord};
