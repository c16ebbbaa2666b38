//! Batch checks of the basic quasihyperbolic lower bounds and of the local
//! upper bounds on seeded samples.
//!
//! Every row carries a `residual` that is nonnegative exactly when the
//! inequality, including its slack, holds.

use crate::conditions::sample_snapped;
use crate::discretize::{MetricGraph, NodeId};
use crate::domains::Domain;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::metrics::{node_distance, MetricKind, PathRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default relative discretization tolerance.
pub const DEFAULT_TOL: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub x: Point,
    pub y: Point,
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub rows: Vec<CheckRow>,
    pub violations: usize,
    /// Samples dropped because they did not meet the premise.
    pub skipped: usize,
}

impl CheckReport {
    fn new(check: &str, rows: Vec<CheckRow>, skipped: usize) -> Self {
        let violations = rows.iter().filter(|r| r.residual < 0.0).count();
        CheckReport {
            check: check.to_string(),
            rows,
            violations,
            skipped,
        }
    }

    pub fn min_residual(&self) -> Option<f64> {
        self.rows.iter().map(|r| r.residual).reduce(f64::min)
    }
}

fn lower(x: Point, y: Point, measured: f64, bound: f64, slack: f64) -> CheckRow {
    CheckRow {
        x,
        y,
        measured,
        bound,
        slack,
        residual: measured - (bound - slack),
    }
}

fn upper(x: Point, y: Point, measured: f64, bound: f64, slack: f64) -> CheckRow {
    CheckRow {
        x,
        y,
        measured,
        bound,
        slack,
        residual: bound + slack - measured,
    }
}

/// Seeded node pairs; draws that snap both ends to one node are redrawn
/// and counted.
fn distinct_pairs(
    graph: &MetricGraph,
    pairs: usize,
    seed: u64,
) -> Result<(Vec<(NodeId, NodeId)>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(pairs);
    let mut skipped = 0;
    while out.len() < pairs {
        let (a, b) = (
            sample_snapped(graph, &mut rng)?.1,
            sample_snapped(graph, &mut rng)?.1,
        );
        if a == b {
            skipped += 1;
            if skipped > 100 * pairs {
                return Err(Error::TooFewPairs {
                    needed: pairs,
                    got: out.len(),
                });
            }
        } else {
            out.push((a, b));
        }
    }
    Ok((out, skipped))
}

/// `k ≥ log(1 + σ/min δ)` and `k ≥ |log(δ_x/δ_y)|` on seeded node pairs,
/// with slack `tol·RHS` and `tol·max(1, RHS)` respectively.
pub fn basic_lower_bounds(
    graph: &MetricGraph,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<[CheckReport; 2]> {
    if pairs == 0 {
        return Err(invalid("pairs", "must be >= 1"));
    }
    let (nodes, skipped) = distinct_pairs(graph, pairs, seed)?;
    let rows = nodes
        .par_iter()
        .map(|&(a, b)| {
            let k = node_distance(graph, &MetricKind::Quasihyperbolic, a, b)?;
            let s = node_distance(graph, &MetricKind::Inner, a, b)?;
            let (na, nb) = (graph.node(a), graph.node(b));
            let r1 = (s / na.delta.min(nb.delta)).ln_1p();
            let r2 = (na.delta / nb.delta).ln().abs();
            Ok((
                lower(na.point, nb.point, k, r1, tol * r1),
                lower(na.point, nb.point, k, r2, tol * r2.max(1.0)),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (first, second): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok([
        CheckReport::new("log_ratio_lower", first, skipped),
        CheckReport::new("delta_ratio_lower", second, skipped),
    ])
}

/// For `|x₁ − x₂| ≤ δ(x₁)/a`: `k(x₁, x₂) ≤ a·|x₁ − x₂| / ((a − 1)·δ(x₁))`,
/// with slack `tol·bound`. Pairs are drawn inside the premise ball and
/// re-checked after snapping; draws failing the premise or collapsing to a
/// single node are redrawn.
pub fn local_upper_bound(
    graph: &MetricGraph,
    a: f64,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    if !(a > 1.0) {
        return Err(invalid("a", "must be > 1"));
    }
    if pairs == 0 {
        return Err(invalid("pairs", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cand = Vec::with_capacity(pairs);
    let mut skipped = 0;
    while cand.len() < pairs {
        if skipped > 100 * pairs {
            break;
        }
        let (p, n1) = sample_snapped(graph, &mut rng)?;
        let r = rng.gen::<f64>() * graph.node(n1).delta / a;
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let q = p + Point::new(th.cos(), th.sin()) * r;
        let Ok(n2) = graph.snap(&q) else {
            skipped += 1;
            continue;
        };
        let (u, v) = (graph.node(n1), graph.node(n2));
        if n1 == n2 || u.point.dist(&v.point) > u.delta / a {
            skipped += 1;
            continue;
        }
        cand.push((n1, n2));
    }
    let rows = cand
        .par_iter()
        .map(|&(n1, n2)| {
            let k = node_distance(graph, &MetricKind::Quasihyperbolic, n1, n2)?;
            let (u, v) = (graph.node(n1), graph.node(n2));
            let bound = a * u.point.dist(&v.point) / ((a - 1.0) * u.delta);
            Ok(upper(u.point, v.point, k, bound, tol * bound))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new(
        &format!("local_upper_a{a}"),
        rows,
        skipped,
    ))
}

/// A straight polyline from a random interior point, sampled finely with
/// exact boundary distances, together with its premise constant
/// `a = max(1, max_x ℓ(α[x₁, x]) / δ(x))`.
pub fn constructed_path(
    domain: &Domain,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Option<(PathRecord, f64)> {
    let p = domain.sample_interior(rng);
    let th = rng.gen::<f64>() * std::f64::consts::TAU;
    let dir = Point::new(th.cos(), th.sin());
    let len = rng.gen::<f64>() * 0.5 * domain.bbox().diagonal();
    let q = p + dir * len;
    if !domain.contains(&q) || !domain.segment_inside(&p, &q) {
        return None;
    }
    let points: Vec<Point> = (0..=samples)
        .map(|i| p + dir * (len * i as f64 / samples as f64))
        .collect();
    let deltas: Vec<f64> = points
        .iter()
        .map(|x| domain.distance_to_boundary(x))
        .collect();
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return None;
    }
    let path = PathRecord::polyline(points, deltas).ok()?;
    let arcs = path.arclengths();
    let a = arcs
        .iter()
        .zip(&path.deltas)
        .map(|(l, d)| l / d)
        .fold(1.0, f64::max);
    Some((path, a))
}

/// Curves with `ℓ(α[x₁, x]) ≤ a·δ(x)` satisfy
/// `ℓ_k(α) ≤ 4a·log(1 + ℓ(α)/δ(x₁))`; slack `tol·bound`.
pub fn curve_upper_bound(
    domain: &Domain,
    paths: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    if paths == 0 {
        return Err(invalid("paths", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(paths);
    let mut skipped = 0;
    while rows.len() < paths {
        if skipped > 1000 * paths {
            break;
        }
        let Some((path, a)) = constructed_path(domain, &mut rng, 400) else {
            skipped += 1;
            continue;
        };
        let bound = 4.0 * a * (path.inner_len / path.deltas[0]).ln_1p();
        let (x, y) = (path.points[0], *path.points.last().unwrap());
        rows.push(upper(x, y, path.qh_len, bound, tol * bound));
    }
    Ok(CheckReport::new("curve_upper", rows, skipped))
}

/// For an `M`-uniform domain: `k(u, v) ≤ 4M²·log(1 + |u − v|/min δ)`;
/// slack `tol·bound`.
pub fn uniform_upper_bound(
    graph: &MetricGraph,
    m: f64,
    pairs: usize,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    if !(m >= 1.0) {
        return Err(invalid("m", "must be >= 1"));
    }
    if pairs == 0 {
        return Err(invalid("pairs", "must be >= 1"));
    }
    let (nodes, skipped) = distinct_pairs(graph, pairs, seed)?;
    let rows = nodes
        .par_iter()
        .map(|&(a, b)| {
            let k = node_distance(graph, &MetricKind::Quasihyperbolic, a, b)?;
            let (u, v) = (graph.node(a), graph.node(b));
            let bound = 4.0 * m * m * (u.point.dist(&v.point) / u.delta.min(v.delta)).ln_1p();
            Ok(upper(u.point, v.point, k, bound, tol * bound))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::new("uniform_upper", rows, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::GridParams;
    use crate::domains::DomainSpec;

    fn disk() -> MetricGraph {
        MetricGraph::build(
            &Domain::new(DomainSpec::disk(Point::new(0.0, 0.0), 1.0)).unwrap(),
            GridParams::with_h(0.05),
        )
        .unwrap()
    }

    #[test]
    fn lower_bounds_hold_on_disk() {
        let g = disk();
        for r in basic_lower_bounds(&g, 100, 4, DEFAULT_TOL).unwrap() {
            assert_eq!(r.violations, 0, "{}", r.check);
            assert_eq!(r.rows.len(), 100);
        }
    }

    #[test]
    fn local_bound_holds_on_disk() {
        let g = disk();
        let r = local_upper_bound(&g, 4.0, 50, 2, DEFAULT_TOL).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.rows.len(), 50);
        assert!(local_upper_bound(&g, 1.0, 5, 2, DEFAULT_TOL).is_err());
    }

    #[test]
    fn constructed_paths_meet_premise() {
        let d = Domain::new(DomainSpec::disk(Point::new(0.0, 0.0), 1.0)).unwrap();
        let r = curve_upper_bound(&d, 20, 5, 0.0).unwrap();
        assert_eq!(r.rows.len(), 20);
        assert_eq!(r.violations, 0);
    }
}
