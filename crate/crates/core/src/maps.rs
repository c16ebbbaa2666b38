//! Sampled maps between discretized domains: quasihyperbolicity, rough
//! quasi-isometry, quasisymmetry envelopes, pulled-back geodesics and the
//! Property A / Property B verdicts.

use crate::conditions::{cigar_coefficient, estimate_uniformity, CigarVariant, UniformityMode};
use crate::constants::{ConstantLedger, Tower};
use crate::discretize::{MetricGraph, NodeId};
use crate::domains::Domain;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::gromov::{
    anchor_proxy, choose_base_point, estimate_delta_with_pool, node_matrix, visual_table,
    BasePoint, DEFAULT_DELTA_POOL, DEFAULT_QUADRUPLES,
};
use crate::metrics::{node_geodesic, path_record, MetricKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Finite samples of a map `f: G → Y` and of its boundary extension.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampledMap {
    #[serde(default)]
    pub label: String,
    pub interior_pairs: Vec<(Point, Point)>,
    #[serde(default)]
    pub boundary_pairs: Vec<(Point, Point)>,
}

impl SampledMap {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("sampled map: {e}")))
    }

    /// Checks containment, boundary placement and uniqueness of sources.
    pub fn validate(&self, g: &Domain, y: &Domain) -> Result<()> {
        let mut seen = HashSet::new();
        for (p, q) in &self.interior_pairs {
            if !g.contains(p) {
                return Err(Error::PointOutsideDomain { x: p.x, y: p.y });
            }
            if !y.contains(q) {
                return Err(Error::PointOutsideDomain { x: q.x, y: q.y });
            }
            if !seen.insert((p.x.to_bits(), p.y.to_bits())) {
                return Err(invalid(
                    "interior_pairs",
                    format!("duplicate source ({}, {})", p.x, p.y),
                ));
            }
        }
        let mut seen = HashSet::new();
        for (p, q) in &self.boundary_pairs {
            for (pt, d) in [(p, g), (q, y)] {
                let tol = 1e-9 * d.bbox().diagonal();
                if d.distance_to_boundary(pt) > tol {
                    return Err(invalid(
                        "boundary_pairs",
                        format!("({}, {}) is not on the boundary", pt.x, pt.y),
                    ));
                }
            }
            if !seen.insert((p.x.to_bits(), p.y.to_bits())) {
                return Err(invalid(
                    "boundary_pairs",
                    format!("duplicate source ({}, {})", p.x, p.y),
                ));
            }
        }
        Ok(())
    }

    /// Samples `interior` seeded points of `g` (keeping those whose image
    /// lies in `y`) and `boundary` boundary points of `g`, mapped by `f` and
    /// `f_boundary` respectively. Boundary images that are `None` are
    /// dropped.
    #[allow(clippy::too_many_arguments)]
    pub fn from_fn<F, B>(
        g: &Domain,
        y: &Domain,
        f: F,
        f_boundary: B,
        interior: usize,
        boundary: usize,
        seed: u64,
        label: &str,
    ) -> Result<Self>
    where
        F: Fn(Point) -> Point,
        B: Fn(Point) -> Option<Point>,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut interior_pairs = Vec::with_capacity(interior);
        let mut seen = HashSet::new();
        let mut attempts = 0;
        while interior_pairs.len() < interior {
            attempts += 1;
            if attempts > 100 * interior.max(1) {
                return Err(Error::TooFewPoints {
                    needed: interior,
                    got: interior_pairs.len(),
                });
            }
            let p = g.sample_interior(&mut rng);
            let q = f(p);
            if y.contains(&q) && seen.insert((p.x.to_bits(), p.y.to_bits())) {
                interior_pairs.push((p, q));
            }
        }
        let boundary_pairs = if boundary == 0 {
            Vec::new()
        } else {
            g.boundary_sample(boundary.max(2), seed)?
                .into_iter()
                .take(boundary)
                .filter_map(|p| f_boundary(p).map(|q| (p, q)))
                .collect()
        };
        Ok(SampledMap {
            label: label.to_string(),
            interior_pairs,
            boundary_pairs,
        })
    }
}

/// First boundary point hit when walking from `from` along `dir` while
/// staying inside; `None` if `from` is not inside.
pub fn ray_exit(domain: &Domain, from: &Point, dir: &Point) -> Option<Point> {
    if !domain.contains(from) {
        return None;
    }
    let norm = dir.norm();
    if !(norm > 0.0) {
        return None;
    }
    let u = *dir * (1.0 / norm);
    let (mut lo, mut hi) = (0.0, 2.0 * domain.bbox().diagonal());
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if domain.segment_inside(from, &(*from + u * mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(*from + u * hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasihyperbolicityEstimate {
    /// `None` when every pair falls below the resolution floor.
    pub l_hat: Option<f64>,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
    /// Indices into `interior_pairs`.
    pub worst_pair: Option<(usize, usize)>,
}

/// Smallest `L ≥ 1` with `k_G/L ≤ k_Y ≤ L·k_G` over all pairs of sampled
/// interior points. Pairs whose distance on either side is below three
/// times the largest incident edge weight are skipped.
pub fn quasihyperbolicity_coefficient(
    g: &MetricGraph,
    y: &MetricGraph,
    map: &SampledMap,
) -> Result<QuasihyperbolicityEstimate> {
    let n = map.interior_pairs.len();
    if n < 2 {
        return Err(Error::TooFewPairs { needed: 2, got: n });
    }
    let gs = map
        .interior_pairs
        .iter()
        .map(|(p, _)| g.snap(p))
        .collect::<Result<Vec<_>>>()?;
    let ys = map
        .interior_pairs
        .iter()
        .map(|(_, q)| y.snap(q))
        .collect::<Result<Vec<_>>>()?;
    let kg = node_matrix(g, &gs, MetricKind::Quasihyperbolic);
    let ky = node_matrix(y, &ys, MetricKind::Quasihyperbolic);
    let floor = |graph: &MetricGraph, a: NodeId, b: NodeId| {
        3.0 * graph.max_incident_qh(a).max(graph.max_incident_qh(b))
    };
    let mut best: Option<(f64, (usize, usize))> = None;
    let mut used = 0;
    let mut skipped = 0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (kg.get(i, j), ky.get(i, j));
            if a < floor(g, gs[i], gs[j]) || b < floor(y, ys[i], ys[j]) {
                skipped += 1;
                continue;
            }
            used += 1;
            let r = (a / b).max(b / a);
            if best.is_none_or(|(m, _)| r > m) {
                best = Some((r, (i, j)));
            }
        }
    }
    Ok(QuasihyperbolicityEstimate {
        l_hat: best.map(|(r, _)| r.max(1.0)),
        pairs_used: used,
        pairs_skipped: skipped,
        worst_pair: best.map(|(_, w)| w),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughQi {
    pub l: f64,
    pub k: f64,
}

/// Candidate multiplicative constants: `1, 1.005, …, 16`.
fn l_grid() -> impl Iterator<Item = f64> {
    (0..=3000).map(|i| 1.0 + 0.005 * i as f64)
}

/// Smallest additive constant making `d/L − K ≤ d′ ≤ L·d + K` hold on
/// every pair, for a fixed `L`.
pub fn rough_qi_k(dx: &[f64], dy: &[f64], l: f64) -> f64 {
    dx.iter()
        .zip(dy)
        .map(|(&d, &e)| (e - l * d).max(d / l - e))
        .fold(0.0, f64::max)
}

/// Fits `(L, K)` for a rough quasi-isometry between two pair-distance
/// tables indexed alike. Over the grid of `L`, minimizes `K(L)/S + (L − 1)`
/// with `S` the mean source distance, so additive slack and multiplicative
/// slack are traded at the scale of the data; ties go to the smaller `L`.
pub fn rough_qi_parameters(dx: &[f64], dy: &[f64]) -> Result<RoughQi> {
    if dx.len() != dy.len() {
        return Err(invalid("tables", "distance tables must have equal length"));
    }
    if dx.len() < 2 {
        return Err(Error::TooFewPairs {
            needed: 2,
            got: dx.len(),
        });
    }
    if dx.iter().chain(dy).any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(invalid(
            "tables",
            "distances must be finite and nonnegative",
        ));
    }
    let mean = dx.iter().sum::<f64>() / dx.len() as f64;
    let scale = if mean > 0.0 { mean } else { 1.0 };
    let mut best: Option<(f64, RoughQi)> = None;
    for l in l_grid() {
        let k = rough_qi_k(dx, dy, l);
        let j = k / scale + (l - 1.0);
        if best.is_none_or(|(b, _)| j < b) {
            best = Some((j, RoughQi { l, k }));
        }
    }
    Ok(best.expect("grid is nonempty").1)
}

/// Square table of pairwise distances between indexed samples.
pub type DistTable = Vec<Vec<f64>>;

pub const DEFAULT_BINS: usize = 60;
pub const DEFAULT_TRIPLES: usize = 20_000;
const T_MIN: f64 = 1e-3;
const T_MAX: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsBin {
    pub t_low: f64,
    pub t_high: f64,
    /// Largest image ratio seen in this bin; `None` if empty.
    pub max_ratio: Option<f64>,
    pub count: usize,
}

/// Binned empirical upper envelope `t ↦ max t′` of a boundary
/// correspondence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsEnvelope {
    pub bins: Vec<QsBin>,
    pub triple_count: usize,
    pub out_of_range: usize,
    pub degenerate: usize,
}

impl QsEnvelope {
    fn bin_of(&self, t: f64) -> Option<usize> {
        let n = self.bins.len();
        if !(T_MIN..T_MAX).contains(&t) {
            return None;
        }
        let pos = (t / T_MIN).ln() / (T_MAX / T_MIN).ln() * n as f64;
        Some((pos as usize).min(n - 1))
    }

    pub fn populated(&self) -> usize {
        self.bins.iter().filter(|b| b.max_ratio.is_some()).count()
    }

    /// Monotone majorant evaluated at `u`: the running maximum over all
    /// bins up to the one containing `u`, plus the next bin, since
    /// `t ≤ u` can fall anywhere in `u`'s bin.
    pub fn eval_upper(&self, u: f64) -> Option<f64> {
        let last = if u >= T_MAX {
            self.bins.len() - 1
        } else if u < T_MIN {
            0
        } else {
            (self.bin_of(u)? + 1).min(self.bins.len() - 1)
        };
        self.bins[..=last]
            .iter()
            .filter_map(|b| b.max_ratio)
            .reduce(f64::max)
    }
}

fn check_table(t: &[Vec<f64>], name: &'static str) -> Result<()> {
    let n = t.len();
    if t.iter().any(|r| r.len() != n) {
        return Err(invalid(name, "table must be square"));
    }
    Ok(())
}

/// Distortion envelope of the correspondence `i ↦ i` between two boundary
/// distance tables. Off-diagonal entries only are read, so metametrics
/// with positive diagonals are accepted.
pub fn qs_envelope(
    src: &[Vec<f64>],
    dst: &[Vec<f64>],
    triples: usize,
    seed: u64,
    bins: usize,
) -> Result<QsEnvelope> {
    check_table(src, "src")?;
    check_table(dst, "dst")?;
    let n = src.len();
    if n != dst.len() {
        return Err(invalid("dst", "tables must cover the same index set"));
    }
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    if bins == 0 {
        return Err(invalid("bins", "must be >= 1"));
    }
    if triples == 0 {
        return Err(invalid("triples", "must be >= 1"));
    }
    let ratio = (T_MAX / T_MIN).powf(1.0 / bins as f64);
    let mut env = QsEnvelope {
        bins: (0..bins)
            .map(|i| QsBin {
                t_low: T_MIN * ratio.powi(i as i32),
                t_high: T_MIN * ratio.powi(i as i32 + 1),
                max_ratio: None,
                count: 0,
            })
            .collect(),
        triple_count: 0,
        out_of_range: 0,
        degenerate: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..triples {
        let a = rng.gen_range(0..n);
        let x = (a + 1 + rng.gen_range(0..n - 1)) % n;
        let b = loop {
            let b = rng.gen_range(0..n);
            if b != a && b != x {
                break b;
            }
        };
        let (den, den2) = (src[x][b], dst[x][b]);
        if den == 0.0 || den2 == 0.0 {
            env.degenerate += 1;
            continue;
        }
        let t = src[a][x] / den;
        let tp = dst[a][x] / den2;
        match env.bin_of(t) {
            None => env.out_of_range += 1,
            Some(i) => {
                let bin = &mut env.bins[i];
                bin.count += 1;
                bin.max_ratio = Some(bin.max_ratio.map_or(tp, |m| m.max(tp)));
                env.triple_count += 1;
            }
        }
    }
    Ok(env)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullbackReport {
    pub pairs: usize,
    pub degenerate: usize,
    pub max_length_cigar: f64,
    pub max_diameter_cigar: f64,
    pub worst_pair: Option<(Point, Point)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerComparison {
    pub log_length_cigar: f64,
    pub log_length_bound: Tower,
    pub log_diameter_cigar: f64,
    pub log_diameter_bound: Tower,
    pub within_bounds: bool,
}

/// Compares pulled-back cigar coefficients with `8A₀B₀` (length) and `B₀`
/// (diameter) in log space.
pub fn compare_with_ledger(report: &PullbackReport, ledger: &ConstantLedger) -> LedgerComparison {
    let ll = report.max_length_cigar.max(f64::MIN_POSITIVE).ln();
    let ld = report.max_diameter_cigar.max(f64::MIN_POSITIVE).ln();
    LedgerComparison {
        log_length_cigar: ll,
        log_length_bound: ledger.log_thm5_coeff,
        log_diameter_cigar: ld,
        log_diameter_bound: ledger.log_b0,
        within_bounds: Tower::real(ll) <= ledger.log_thm5_coeff && Tower::real(ld) <= ledger.log_b0,
    }
}

/// Pulls a `k_Y` geodesic back to `G` through the sampled correspondence
/// and joins the waypoints by `k_G` geodesics.
fn pullback_path(
    g: &MetricGraph,
    y: &MetricGraph,
    map: &SampledMap,
    i: usize,
    j: usize,
) -> Result<Vec<NodeId>> {
    let qh = MetricKind::Quasihyperbolic;
    let (a, b) = (
        y.snap(&map.interior_pairs[i].1)?,
        y.snap(&map.interior_pairs[j].1)?,
    );
    let geo = node_geodesic(y, &qh, a, b)?;
    let mut waypoints: Vec<NodeId> = Vec::with_capacity(geo.len());
    let last = geo.len() - 1;
    for (k, (pt, delta)) in geo.points.iter().zip(&geo.deltas).enumerate() {
        let src = if k == 0 {
            map.interior_pairs[i].0
        } else if k == last {
            map.interior_pairs[j].0
        } else {
            let (dist, idx) = map
                .interior_pairs
                .iter()
                .enumerate()
                .map(|(idx, (_, q))| (q.dist(pt), idx))
                .min_by(|u, v| u.0.total_cmp(&v.0).then(u.1.cmp(&v.1)))
                .expect("nonempty map");
            let tol = 0.5 * delta;
            if dist > tol {
                return Err(Error::UnmatchedWaypoint {
                    x: pt.x,
                    y: pt.y,
                    distance: dist,
                    tolerance: tol,
                });
            }
            map.interior_pairs[idx].0
        };
        let node = g.snap(&src)?;
        if waypoints.last() != Some(&node) {
            waypoints.push(node);
        }
    }
    let mut nodes = vec![waypoints[0]];
    for w in waypoints.windows(2) {
        if g.edge_slot(w[0], w[1]).is_some() {
            nodes.push(w[1]);
        } else {
            let seg = node_geodesic(g, &qh, w[0], w[1])?;
            nodes.extend_from_slice(&seg.nodes[1..]);
        }
    }
    Ok(nodes)
}

/// Cigar coefficients of pulled-back `k_Y` geodesics between seeded pairs
/// of sampled images.
pub fn pullback_geodesic_cigar(
    g: &MetricGraph,
    y: &MetricGraph,
    map: &SampledMap,
    pairs: usize,
    seed: u64,
) -> Result<PullbackReport> {
    if pairs == 0 {
        return Err(invalid("pairs", "must be >= 1"));
    }
    let n = map.interior_pairs.len();
    if n == 0 {
        return Err(Error::TooFewPairs { needed: 1, got: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx: Vec<(usize, usize)> = (0..pairs)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    let results = idx
        .par_iter()
        .map(|&(i, j)| {
            let nodes = pullback_path(g, y, map, i, j)?;
            let rec = path_record(g, &MetricKind::Quasihyperbolic, nodes)?;
            Ok((
                cigar_coefficient(&rec, CigarVariant::Length)?.coefficient,
                cigar_coefficient(&rec, CigarVariant::Diameter)?.coefficient,
                rec.len() == 1,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = PullbackReport {
        pairs,
        degenerate: 0,
        max_length_cigar: 0.0,
        max_diameter_cigar: 0.0,
        worst_pair: None,
    };
    for (&(i, j), (l, d, degenerate)) in idx.iter().zip(results) {
        if degenerate {
            report.degenerate += 1;
        }
        if l > report.max_length_cigar {
            report.max_length_cigar = l;
            report.worst_pair = Some((map.interior_pairs[i].1, map.interior_pairs[j].1));
        }
        report.max_diameter_cigar = report.max_diameter_cigar.max(d);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropertyKind {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub measured: Option<f64>,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    fn upper_bound(name: &str, measured: Option<f64>, threshold: f64, detail: String) -> Check {
        let status = match measured {
            None => CheckStatus::Inconclusive,
            Some(v) if v <= threshold => CheckStatus::Pass,
            Some(_) => CheckStatus::Fail,
        };
        Check {
            name: name.to_string(),
            status,
            measured,
            threshold,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: PropertyKind,
    pub checks: Vec<Check>,
    pub overall: CheckStatus,
}

impl PropertyVerdict {
    fn new(property: PropertyKind, checks: Vec<Check>) -> Self {
        let overall = if checks.iter().any(|c| c.status == CheckStatus::Fail) {
            CheckStatus::Fail
        } else if checks.iter().any(|c| c.status == CheckStatus::Inconclusive) {
            CheckStatus::Inconclusive
        } else {
            CheckStatus::Pass
        };
        PropertyVerdict {
            property,
            checks,
            overall,
        }
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| c.status == CheckStatus::Fail)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Thresholds and sample sizes for the Property B verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropertyBConfig {
    pub uniformity_max: f64,
    pub quasihyperbolicity_max: f64,
    pub eta_at_one_max: f64,
    pub min_populated_bins: usize,
    pub uniformity_pairs: usize,
    pub triples: usize,
    pub bins: usize,
    pub approach_depth: u32,
    pub seed: u64,
}

impl Default for PropertyBConfig {
    fn default() -> Self {
        PropertyBConfig {
            uniformity_max: 20.0,
            quasihyperbolicity_max: 4.0,
            eta_at_one_max: 4.0,
            min_populated_bins: 3,
            uniformity_pairs: 100,
            triples: DEFAULT_TRIPLES,
            bins: DEFAULT_BINS,
            approach_depth: 6,
            seed: 1,
        }
    }
}

/// Thresholds and sample sizes for the Property A verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropertyAConfig {
    pub delta_max: f64,
    pub eta_at_one_max: f64,
    pub min_populated_bins: usize,
    pub quadruples: usize,
    pub pool: usize,
    pub triples: usize,
    pub bins: usize,
    pub approach_depth: u32,
    pub seed: u64,
}

impl Default for PropertyAConfig {
    fn default() -> Self {
        PropertyAConfig {
            delta_max: 2.0,
            eta_at_one_max: 4.0,
            min_populated_bins: 3,
            quadruples: DEFAULT_QUADRUPLES,
            pool: DEFAULT_DELTA_POOL,
            triples: DEFAULT_TRIPLES,
            bins: DEFAULT_BINS,
            approach_depth: 6,
            seed: 1,
        }
    }
}

/// Inner distances between the interior proxies of boundary points.
fn proxy_inner_table(
    graph: &MetricGraph,
    base: &BasePoint,
    points: &[Point],
    depth: u32,
) -> Result<Vec<Vec<f64>>> {
    let proxies = points
        .iter()
        .map(|p| anchor_proxy(graph, base, p, depth))
        .collect::<Result<Vec<_>>>()?;
    Ok(matrix_rows(&node_matrix(
        graph,
        &proxies,
        MetricKind::Inner,
    )))
}

/// Distance tables for the boundary correspondence of `map`: inner
/// distances between interior proxies of the source points, and Euclidean
/// distances between their images.
pub fn boundary_tables(
    g: &MetricGraph,
    map: &SampledMap,
    approach_depth: u32,
) -> Result<(DistTable, DistTable)> {
    let base = choose_base_point(g);
    let src_pts: Vec<Point> = map.boundary_pairs.iter().map(|(p, _)| *p).collect();
    let src = proxy_inner_table(g, &base, &src_pts, approach_depth)?;
    let dst = map
        .boundary_pairs
        .iter()
        .map(|(_, a)| map.boundary_pairs.iter().map(|(_, b)| a.dist(b)).collect())
        .collect();
    Ok((src, dst))
}

fn matrix_rows(m: &crate::gromov::DistanceMatrix) -> Vec<Vec<f64>> {
    (0..m.len())
        .map(|i| (0..m.len()).map(|j| m.get(i, j)).collect())
        .collect()
}

fn envelope_check(env: &QsEnvelope, threshold: f64, min_bins: usize) -> Check {
    let populated = env.populated();
    let measured = if populated >= min_bins {
        env.eval_upper(1.0)
    } else {
        None
    };
    Check::upper_bound(
        "boundary_quasisymmetry",
        measured,
        threshold,
        format!(
            "eta_hat(1) from monotone majorant; {populated} populated bins, {} triples",
            env.triple_count
        ),
    )
}

/// Property B: `Y` uniform, `f` quasihyperbolic on `G`, and the boundary
/// correspondence `(∂G, σ) → (∂Y, |·|)` quasisymmetric.
pub fn property_b_verdict(
    g: &MetricGraph,
    y: &MetricGraph,
    map: &SampledMap,
    cfg: &PropertyBConfig,
) -> Result<PropertyVerdict> {
    let mut checks = Vec::new();

    let u = estimate_uniformity(y, UniformityMode::Uniform, cfg.uniformity_pairs, cfg.seed)?;
    checks.push(Check::upper_bound(
        "uniformity",
        u.m_hat,
        cfg.uniformity_max,
        format!(
            "uniform-mode estimate on the target over {} pairs",
            u.pair_count
        ),
    ));

    let qh = if map.interior_pairs.len() < 2 {
        None
    } else {
        Some(quasihyperbolicity_coefficient(g, y, map)?)
    };
    checks.push(Check::upper_bound(
        "quasihyperbolicity",
        qh.as_ref().and_then(|q| q.l_hat),
        cfg.quasihyperbolicity_max,
        match &qh {
            Some(q) => format!(
                "{} pairs used, {} below resolution",
                q.pairs_used, q.pairs_skipped
            ),
            None => "fewer than 2 interior pairs".to_string(),
        },
    ));

    if map.boundary_pairs.is_empty() {
        checks.push(Check::upper_bound(
            "boundary_quasisymmetry",
            None,
            cfg.eta_at_one_max,
            "missing: no boundary pairs".to_string(),
        ));
    } else {
        let (src, dst) = boundary_tables(g, map, cfg.approach_depth)?;
        let env = qs_envelope(&src, &dst, cfg.triples, cfg.seed, cfg.bins)?;
        checks.push(envelope_check(
            &env,
            cfg.eta_at_one_max,
            cfg.min_populated_bins,
        ));
    }
    Ok(PropertyVerdict::new(PropertyKind::B, checks))
}

/// Property A: `(G, k_G)` hyperbolic and the correspondence between
/// `(∂G, σ)` and the visual metametric quasisymmetric.
pub fn property_a_verdict(
    graph: &MetricGraph,
    base: &BasePoint,
    tau: f64,
    anchors: &[Point],
    cfg: &PropertyAConfig,
) -> Result<PropertyVerdict> {
    let table = visual_table(graph, base, tau, anchors, cfg.approach_depth)?;
    if anchors.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: anchors.len(),
        });
    }
    let delta = estimate_delta_with_pool(graph, cfg.quadruples, cfg.seed, cfg.pool)?;
    let mut checks = vec![Check::upper_bound(
        "hyperbolicity",
        Some(delta.delta_hat),
        cfg.delta_max,
        format!(
            "four-point estimate over {} quadruples",
            delta.quadruple_count
        ),
    )];
    let sigma = matrix_rows(&node_matrix(graph, &table.proxies, MetricKind::Inner));
    let env = qs_envelope(&sigma, &table.rho, cfg.triples, cfg.seed, cfg.bins)?;
    checks.push(envelope_check(
        &env,
        cfg.eta_at_one_max,
        cfg.min_populated_bins,
    ));
    Ok(PropertyVerdict::new(PropertyKind::A, checks))
}
