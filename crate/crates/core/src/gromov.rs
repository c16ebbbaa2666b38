//! Gromov products, four-point hyperbolicity, visual metametrics on
//! boundary anchors and rough-starlikeness probing, all in `(G, k_G)`.

use crate::conditions::sample_snapped;
use crate::discretize::{MetricGraph, NodeId};
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use crate::metrics::{
    distances_from, distances_to_set, node_distance, node_geodesic, qh_table, MetricKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const DEFAULT_TAU: f64 = 0.2;
pub const DEFAULT_TAU_CAP: f64 = 1.0;
pub const DEFAULT_DELTA_POOL: usize = 40;
pub const DEFAULT_QUADRUPLES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub node: NodeId,
    pub point: Point,
    pub delta_sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta_hat: f64,
    pub quadruple_count: usize,
    /// `[x, y, z, p]`, as graph node ids or matrix indices. `None` when no
    /// quadruple has a positive residual.
    pub worst_quadruple: Option<[usize; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualTable {
    pub tau: f64,
    pub base: BasePoint,
    pub anchors: Vec<Point>,
    /// Interior node standing in for each anchor.
    pub proxies: Vec<NodeId>,
    pub approach_depth: u32,
    pub products: Vec<Vec<f64>>,
    pub rho: Vec<Vec<f64>>,
    /// Anchors are identified with boundary classes heuristically; exact only
    /// for inner-uniform domains.
    pub heuristic_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarlikenessEstimate {
    pub k_hat: f64,
    pub samples: usize,
    pub anchors: usize,
    pub worst_point: Option<Point>,
}

/// Node with the largest boundary distance; ties go to the smallest id.
pub fn choose_base_point(graph: &MetricGraph) -> BasePoint {
    let mut best = 0;
    for (i, n) in graph.nodes().iter().enumerate() {
        if n.delta > graph.node(best).delta {
            best = i;
        }
    }
    let n = graph.node(best);
    BasePoint {
        node: best,
        point: n.point,
        delta_sigma: n.delta,
    }
}

/// `½(d(x,p) + d(y,p) − d(x,y))`.
pub fn gromov_product_from_distances(d_xp: f64, d_yp: f64, d_xy: f64) -> f64 {
    0.5 * (d_xp + d_yp - d_xy)
}

/// `(x|y)_p` with respect to `k_G`.
pub fn gromov_product(graph: &MetricGraph, p: &Point, x: &Point, y: &Point) -> Result<f64> {
    let (pn, xn, yn) = (graph.snap(p)?, graph.snap(x)?, graph.snap(y)?);
    node_gromov_product(graph, pn, xn, yn)
}

pub fn node_gromov_product(graph: &MetricGraph, p: NodeId, x: NodeId, y: NodeId) -> Result<f64> {
    let qh = MetricKind::Quasihyperbolic;
    let d_xp = node_distance(graph, &qh, x, p)?;
    let d_yp = node_distance(graph, &qh, y, p)?;
    let d_xy = node_distance(graph, &qh, x, y)?;
    Ok(gromov_product_from_distances(d_xp, d_yp, d_xy))
}

/// A symmetric distance matrix; input to the matrix mode of the
/// hyperbolicity estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(invalid(
                    "matrix",
                    format!("row {i} has {} entries, expected {n}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        let m = DistanceMatrix { n, data };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(invalid("matrix", format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let d = m.get(i, j);
                if !(d.is_finite() && d >= 0.0) || d != m.get(j, i) {
                    return Err(invalid(
                        "matrix",
                        format!("entry ({i}, {j}) is not a symmetric finite distance"),
                    ));
                }
            }
        }
        Ok(m)
    }

    /// Metric of a path graph with unit edges: `d(i, j) = |i − j|`.
    pub fn path_graph(n: usize) -> Self {
        let data = (0..n * n).map(|k| (k / n).abs_diff(k % n) as f64).collect();
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn product(&self, x: usize, y: usize, p: usize) -> f64 {
        gromov_product_from_distances(self.get(x, p), self.get(y, p), self.get(x, y))
    }

    /// `min{(x|z)_p, (z|y)_p} − (x|y)_p`.
    fn residual(&self, q: [usize; 4]) -> f64 {
        let [x, y, z, p] = q;
        self.product(x, z, p).min(self.product(z, y, p)) - self.product(x, y, p)
    }
}

/// How quadruples are chosen from a distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadruples {
    /// Every ordered quadruple.
    Exhaustive,
    /// The first `count` quadruples of a seeded stream; a larger count
    /// extends the same sequence.
    Sampled { count: usize, seed: u64 },
}

fn reduce(items: impl Iterator<Item = ([usize; 4], f64)>) -> (f64, Option<[usize; 4]>, usize) {
    let mut best = 0.0;
    let mut worst = None;
    let mut count = 0;
    for (q, r) in items {
        count += 1;
        if r > best {
            best = r;
            worst = Some(q);
        }
    }
    (best, worst, count)
}

pub fn estimate_delta_matrix(m: &DistanceMatrix, mode: Quadruples) -> Result<DeltaEstimate> {
    let n = m.len();
    if n == 0 {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let (delta_hat, worst, count) = match mode {
        Quadruples::Exhaustive => {
            // Parallel over p; each row reduces in a fixed order.
            let rows: Vec<(f64, Option<[usize; 4]>, usize)> = (0..n)
                .into_par_iter()
                .map(|p| {
                    reduce((0..n * n * n).map(move |k| {
                        let q = [k / (n * n), (k / n) % n, k % n, p];
                        (q, m.residual(q))
                    }))
                })
                .collect();
            let mut best = (0.0, None, 0);
            for (b, w, c) in rows {
                best.2 += c;
                if b > best.0 {
                    best.0 = b;
                    best.1 = w;
                }
            }
            best
        }
        Quadruples::Sampled { count, seed } => {
            if count == 0 {
                return Err(invalid("quadruples", "must be >= 1"));
            }
            let qs = quadruple_stream(n, count, seed);
            reduce(qs.into_iter().map(|q| (q, m.residual(q))))
        }
    };
    Ok(DeltaEstimate {
        delta_hat,
        quadruple_count: count,
        worst_quadruple: worst,
    })
}

fn quadruple_stream(n: usize, count: usize, seed: u64) -> Vec<[usize; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            [
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            ]
        })
        .collect()
}

/// Four-point hyperbolicity of `(G, k_G)` over a default-size point pool.
pub fn estimate_delta(graph: &MetricGraph, quadruples: usize, seed: u64) -> Result<DeltaEstimate> {
    estimate_delta_with_pool(graph, quadruples, seed, DEFAULT_DELTA_POOL)
}

/// Samples `pool` distinct snapped interior nodes, computes their pairwise
/// `k_G` distances, and evaluates seeded quadruples on that matrix.
/// Reported quadruples are graph node ids.
pub fn estimate_delta_with_pool(
    graph: &MetricGraph,
    quadruples: usize,
    seed: u64,
    pool: usize,
) -> Result<DeltaEstimate> {
    if quadruples == 0 {
        return Err(invalid("quadruples", "must be >= 1"));
    }
    if pool < 4 {
        return Err(invalid("pool", "must be >= 4"));
    }
    let nodes = sample_distinct_nodes(graph, pool, seed)?;
    let m = node_matrix(graph, &nodes, MetricKind::Quasihyperbolic);
    let est = estimate_delta_matrix(
        &m,
        Quadruples::Sampled {
            count: quadruples,
            seed: seed.wrapping_add(1),
        },
    )?;
    Ok(DeltaEstimate {
        worst_quadruple: est.worst_quadruple.map(|q| q.map(|i| nodes[i])),
        ..est
    })
}

fn sample_distinct_nodes(graph: &MetricGraph, count: usize, seed: u64) -> Result<Vec<NodeId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<NodeId> = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 64 * count {
            return Err(Error::TooFewPoints {
                needed: count,
                got: out.len(),
            });
        }
        let (_, id) = sample_snapped(graph, &mut rng)?;
        if !out.contains(&id) {
            out.push(id);
        }
    }
    Ok(out)
}

/// Symmetric distance matrix over `nodes`, reading each entry from the
/// table of the smaller index. Tables are not cached.
pub(crate) fn node_matrix(
    graph: &MetricGraph,
    nodes: &[NodeId],
    metric: MetricKind,
) -> DistanceMatrix {
    let tables: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&s| distances_from(graph, &metric, s).expect("valid node"))
        .collect();
    let n = nodes.len();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = tables[i][nodes[j]];
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

/// Interior proxy for a boundary anchor: the deepest point
/// `ξ + n·δ_σ·2^-(j+1)`, `j < depth`, that lies inside, sees `ξ` along a
/// clear segment, and snaps to a node.
pub fn anchor_proxy(
    graph: &MetricGraph,
    base: &BasePoint,
    anchor: &Point,
    depth: u32,
) -> Result<NodeId> {
    let fail = || Error::AnchorApproachFailure {
        x: anchor.x,
        y: anchor.y,
    };
    let domain = graph.domain();
    let normal = domain.inward_normal(anchor).map_err(|_| fail())?;
    let near = *anchor + normal * (1e-9 * domain.bbox().diagonal());
    for j in (0..depth).rev() {
        let q = *anchor + normal * (base.delta_sigma * 0.5f64.powi(j as i32 + 1));
        if !domain.contains(&q) || !domain.segment_inside(&near, &q) {
            continue;
        }
        if let Ok(id) = graph.snap(&q) {
            return Ok(id);
        }
    }
    Err(fail())
}

fn check_tau(tau: f64, cap: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= cap) {
        return Err(invalid("tau", format!("must lie in (0, {cap}], got {tau}")));
    }
    Ok(())
}

/// Visual metametric `e^{−τ(ξ_i|ξ_j)_{w₀}}` between boundary anchors, with
/// the default cap on `τ`.
pub fn visual_table(
    graph: &MetricGraph,
    base: &BasePoint,
    tau: f64,
    anchors: &[Point],
    approach_depth: u32,
) -> Result<VisualTable> {
    visual_table_capped(graph, base, tau, anchors, approach_depth, DEFAULT_TAU_CAP)
}

pub fn visual_table_capped(
    graph: &MetricGraph,
    base: &BasePoint,
    tau: f64,
    anchors: &[Point],
    approach_depth: u32,
    tau_cap: f64,
) -> Result<VisualTable> {
    check_tau(tau, tau_cap)?;
    if approach_depth == 0 {
        return Err(invalid("approach_depth", "must be >= 1"));
    }
    if anchors.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    let proxies = anchors
        .iter()
        .map(|a| anchor_proxy(graph, base, a, approach_depth))
        .collect::<Result<Vec<_>>>()?;
    let products = proxy_products(graph, base, &proxies);
    let rho = products
        .iter()
        .map(|row| row.iter().map(|g| (-tau * g).exp()).collect())
        .collect();
    Ok(VisualTable {
        tau,
        base: *base,
        anchors: anchors.to_vec(),
        proxies,
        approach_depth,
        products,
        rho,
        heuristic_boundary: true,
    })
}

/// Gromov products `(a|b)_{w₀}` between proxy nodes.
pub(crate) fn proxy_products(
    graph: &MetricGraph,
    base: &BasePoint,
    proxies: &[NodeId],
) -> Vec<Vec<f64>> {
    let from_base = qh_table(graph, base.node);
    let m = node_matrix(graph, proxies, MetricKind::Quasihyperbolic);
    let n = proxies.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = gromov_product_from_distances(
                from_base[proxies[i]],
                from_base[proxies[j]],
                m.get(i, j),
            );
        }
    }
    out
}

/// Largest `k_G` distance from a sampled node to the nearest
/// `w₀`-to-anchor geodesic.
pub fn starlikeness_probe(
    graph: &MetricGraph,
    base: &BasePoint,
    anchors: &[Point],
    samples: usize,
    seed: u64,
) -> Result<StarlikenessEstimate> {
    if anchors.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if samples == 0 {
        return Err(invalid("samples", "must be >= 1"));
    }
    let qh = MetricKind::Quasihyperbolic;
    let depth = 8;
    let proxies = anchors
        .iter()
        .map(|a| anchor_proxy(graph, base, a, depth))
        .collect::<Result<Vec<_>>>()?;
    let tables = proxies
        .par_iter()
        .map(|&t| {
            let ray = node_geodesic(graph, &qh, base.node, t)?;
            distances_to_set(graph, &qh, &ray.nodes)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k_hat = 0.0;
    let mut worst = None;
    for _ in 0..samples {
        let (p, id) = sample_snapped(graph, &mut rng)?;
        let d = tables.iter().map(|t| t[id]).fold(f64::INFINITY, f64::min);
        if worst.is_none() || d > k_hat {
            k_hat = d;
            worst = Some(p);
        }
    }
    Ok(StarlikenessEstimate {
        k_hat,
        samples,
        anchors: anchors.len(),
        worst_point: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::GridParams;
    use crate::domains::{Domain, DomainSpec};

    fn disk(h: f64) -> MetricGraph {
        MetricGraph::build(
            &Domain::new(DomainSpec::disk(Point::new(0.0, 0.0), 1.0)).unwrap(),
            GridParams::with_h(h),
        )
        .unwrap()
    }

    #[test]
    fn collinear_reals_product() {
        assert_eq!(gromov_product_from_distances(3.0, 5.0, 2.0), 3.0);
    }

    #[test]
    fn star_tree_is_zero_hyperbolic() {
        let m = DistanceMatrix::new(vec![
            vec![0.0, 1.0, 1.0, 1.0],
            vec![1.0, 0.0, 2.0, 2.0],
            vec![1.0, 2.0, 0.0, 2.0],
            vec![1.0, 2.0, 2.0, 0.0],
        ])
        .unwrap();
        let e = estimate_delta_matrix(&m, Quadruples::Exhaustive).unwrap();
        assert_eq!(e.delta_hat, 0.0);
        assert_eq!(e.quadruple_count, 256);
    }

    #[test]
    fn four_cycle_has_positive_delta() {
        let m = DistanceMatrix::new(vec![
            vec![0.0, 1.0, 2.0, 1.0],
            vec![1.0, 0.0, 1.0, 2.0],
            vec![2.0, 1.0, 0.0, 1.0],
            vec![1.0, 2.0, 1.0, 0.0],
        ])
        .unwrap();
        let e = estimate_delta_matrix(&m, Quadruples::Exhaustive).unwrap();
        assert_eq!(e.delta_hat, 1.0);
        assert!(DistanceMatrix::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn sampled_estimate_is_monotone_in_count() {
        let g = disk(0.1);
        let small = estimate_delta(&g, 50, 9).unwrap().delta_hat;
        let large = estimate_delta(&g, 500, 9).unwrap().delta_hat;
        assert!(small <= large);
    }

    #[test]
    fn base_point_of_disk_is_central() {
        let g = disk(0.05);
        let b = choose_base_point(&g);
        assert!(b.point.norm() <= g.node(b.node).side);
    }

    #[test]
    fn product_vanishes_at_base_and_is_symmetric() {
        let g = disk(0.05);
        let p = Point::new(0.1, 0.0);
        let x = Point::new(-0.4, 0.3);
        let y = Point::new(0.6, -0.5);
        assert_eq!(gromov_product(&g, &p, &p, &y).unwrap(), 0.0);
        assert_eq!(
            gromov_product(&g, &p, &x, &y).unwrap(),
            gromov_product(&g, &p, &y, &x).unwrap()
        );
    }

    #[test]
    fn visual_table_shape() {
        let g = disk(0.05);
        let b = choose_base_point(&g);
        let anchors: Vec<Point> = (0..6)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 6.0;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let t = visual_table(&g, &b, 0.5, &anchors, 4).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(t.rho[i][j], t.rho[j][i]);
                assert!(t.rho[i][j] > 0.0);
            }
        }
        let deeper = visual_table(&g, &b, 0.5, &anchors, 6).unwrap();
        assert!(deeper.rho[0][0] < t.rho[0][0]);
        assert!(visual_table(&g, &b, 0.0, &anchors, 4).is_err());
        assert!(visual_table(&g, &b, 1.5, &anchors, 4).is_err());
        assert!(visual_table_capped(&g, &b, 1.5, &anchors, 4, 2.0).is_ok());
    }

    #[test]
    fn starlikeness_weakly_decreases_with_more_anchors() {
        let g = disk(0.05);
        let b = choose_base_point(&g);
        let anchors: Vec<Point> = (0..16)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 16.0;
                Point::new(t.cos(), t.sin())
            })
            .collect();
        let few: Vec<Point> = anchors.iter().step_by(4).copied().collect();
        let k_few = starlikeness_probe(&g, &b, &few, 100, 2).unwrap().k_hat;
        let k_all = starlikeness_probe(&g, &b, &anchors, 100, 2).unwrap().k_hat;
        assert!(k_all <= k_few && k_all.is_finite());
    }
}
