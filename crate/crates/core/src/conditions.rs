//! Cigar and turning conditions on paths, and sampled John / uniform /
//! inner-uniform coefficient estimates.

use crate::discretize::{MetricGraph, NodeId};
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::metrics::{node_distance, node_geodesic, MetricKind, PathRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CigarVariant {
    Length,
    Diameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CigarReport {
    pub coefficient: f64,
    /// Index into the path of the node attaining the maximum.
    pub witness: usize,
    pub variant: CigarVariant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniformityMode {
    John,
    Uniform,
    InnerUniform,
}

impl UniformityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            UniformityMode::John => "john",
            UniformityMode::Uniform => "uniform",
            UniformityMode::InnerUniform => "inner_uniform",
        }
    }
}

impl fmt::Display for UniformityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UniformityMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "john" => Ok(UniformityMode::John),
            "uniform" => Ok(UniformityMode::Uniform),
            "inner_uniform" | "inner-uniform" => Ok(UniformityMode::InnerUniform),
            other => Err(Error::Parse(format!(
                "unknown mode `{other}` (expected john, uniform or inner_uniform)"
            ))),
        }
    }
}

/// Outcome for one evaluated point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairEvaluation {
    pub x: Point,
    pub y: Point,
    pub cigar: f64,
    /// Zero in john mode, where turning is not part of the condition.
    pub turning: f64,
    pub m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityEstimate {
    /// `None` when no usable pair was found. Otherwise at least 1.
    pub m_hat: Option<f64>,
    pub pair_count: usize,
    pub skipped: usize,
    pub worst_pair: Option<(Point, Point)>,
    pub mode: UniformityMode,
    #[serde(skip)]
    pub pairs: Vec<PairEvaluation>,
}

/// `max_z min{ℓ(γ[x,z]), ℓ(γ[z,y])} / δ(z)` (length variant) or the same
/// with subpath diameters (diameter variant).
pub fn cigar_coefficient(path: &PathRecord, variant: CigarVariant) -> Result<CigarReport> {
    let n = path.len();
    if n == 0 {
        return Err(Error::EmptyPath);
    }
    let (prefix, suffix) = match variant {
        CigarVariant::Length => {
            let s = path.arclengths();
            let total = s[n - 1];
            let suffix = s.iter().map(|a| (total - a).max(0.0)).collect();
            (s, suffix)
        }
        CigarVariant::Diameter => (running_diameters(path.points.iter()), {
            let mut d = running_diameters(path.points.iter().rev());
            d.reverse();
            d
        }),
    };
    let mut best = CigarReport {
        coefficient: 0.0,
        witness: 0,
        variant,
    };
    for i in 0..n {
        let c = prefix[i].min(suffix[i]) / path.deltas[i];
        if c > best.coefficient {
            best.coefficient = c;
            best.witness = i;
        }
    }
    Ok(best)
}

/// Diameter of each prefix of the point sequence.
fn running_diameters<'a>(points: impl Iterator<Item = &'a Point>) -> Vec<f64> {
    let pts: Vec<&Point> = points.collect();
    let mut out = Vec::with_capacity(pts.len());
    let mut diam: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..i {
            diam = diam.max(pts[i].dist(pts[j]));
        }
        out.push(diam);
    }
    out
}

/// `inner_len / euclid_chord`.
pub fn turning_coefficient(path: &PathRecord) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if path.euclid_chord == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok(path.inner_len / path.euclid_chord)
}

/// `inner_len / sigma`, where `sigma` is the inner distance of the endpoints.
pub fn inner_turning_coefficient(path: &PathRecord, sigma: f64) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    if !(sigma > 0.0) {
        return Err(Error::DegeneratePair);
    }
    Ok(path.inner_len / sigma)
}

/// Evaluates the condition for `mode` on the quasihyperbolic geodesic
/// between two nodes. `None` for pairs closer than two cells.
fn evaluate_nodes(
    graph: &MetricGraph,
    mode: UniformityMode,
    a: NodeId,
    b: NodeId,
) -> Result<Option<(f64, f64)>> {
    let (na, nb) = (graph.node(a), graph.node(b));
    if a == b || na.point.dist(&nb.point) < 2.0 * na.side.max(nb.side) {
        return Ok(None);
    }
    let path = node_geodesic(graph, &MetricKind::Quasihyperbolic, a, b)?;
    let cigar = cigar_coefficient(&path, CigarVariant::Length)?.coefficient;
    let turning = match mode {
        UniformityMode::John => 0.0,
        UniformityMode::Uniform => turning_coefficient(&path)?,
        UniformityMode::InnerUniform => {
            let sigma = node_distance(graph, &MetricKind::Inner, a, b)?;
            inner_turning_coefficient(&path, sigma)?
        }
    };
    Ok(Some((cigar, turning)))
}

/// Coefficient estimate over explicit point pairs. Degenerate pairs are
/// skipped and counted.
pub fn estimate_uniformity_on_pairs(
    graph: &MetricGraph,
    mode: UniformityMode,
    pairs: &[(Point, Point)],
) -> Result<UniformityEstimate> {
    if pairs.is_empty() {
        return Err(invalid("pairs", "at least one pair is required"));
    }
    let snapped = pairs
        .iter()
        .map(|(x, y)| Ok((graph.snap(x)?, graph.snap(y)?)))
        .collect::<Result<Vec<_>>>()?;
    let results = snapped
        .par_iter()
        .map(|&(a, b)| evaluate_nodes(graph, mode, a, b))
        .collect::<Result<Vec<_>>>()?;

    let mut evals = Vec::new();
    let mut worst: Option<(f64, (Point, Point))> = None;
    for ((x, y), r) in pairs.iter().zip(results) {
        let Some((cigar, turning)) = r else { continue };
        let m = cigar.max(turning);
        if worst.is_none_or(|(w, _)| m > w) {
            worst = Some((m, (*x, *y)));
        }
        evals.push(PairEvaluation {
            x: *x,
            y: *y,
            cigar,
            turning,
            m,
        });
    }
    Ok(UniformityEstimate {
        m_hat: worst.map(|(m, _)| m.max(1.0)),
        pair_count: evals.len(),
        skipped: pairs.len() - evals.len(),
        worst_pair: worst.map(|(_, p)| p),
        mode,
        pairs: evals,
    })
}

/// Draws a snappable area-uniform interior point.
pub(crate) fn sample_snapped(graph: &MetricGraph, rng: &mut ChaCha8Rng) -> Result<(Point, NodeId)> {
    let mut last = Error::TooFewPoints { needed: 1, got: 0 };
    for _ in 0..256 {
        let p = graph.domain().sample_interior(rng);
        match graph.snap(&p) {
            Ok(id) => return Ok((p, id)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Seeded pair sample for `estimate_uniformity`.
pub fn sample_pairs(graph: &MetricGraph, pairs: usize, seed: u64) -> Result<Vec<(Point, Point)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..pairs)
        .map(|_| {
            let (x, _) = sample_snapped(graph, &mut rng)?;
            let (y, _) = sample_snapped(graph, &mut rng)?;
            Ok((x, y))
        })
        .collect()
}

/// Sampled coefficient estimate; a lower bound on the true coefficient.
pub fn estimate_uniformity(
    graph: &MetricGraph,
    mode: UniformityMode,
    pairs: usize,
    seed: u64,
) -> Result<UniformityEstimate> {
    if pairs == 0 {
        return Err(invalid("pairs", "must be >= 1"));
    }
    let sample = sample_pairs(graph, pairs, seed)?;
    estimate_uniformity_on_pairs(graph, mode, &sample)
}
