//! Shortest-path engine: inner distance, quasihyperbolic distance,
//! conformally deformed distance, and geodesic extraction.

use crate::discretize::{MetricGraph, NodeId};
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

/// Which path metric a distance or geodesic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    Inner,
    Quasihyperbolic,
    /// Density `exp(-ε·k(·, p))` applied to the quasihyperbolic length
    /// element.
    Deformed {
        epsilon: f64,
        base: NodeId,
    },
}

/// Base point and exponent of a conformal deformation of `(G, k_G)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformSpec {
    pub base: NodeId,
    pub epsilon: f64,
}

impl DeformSpec {
    pub fn new(base: NodeId, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(invalid(
                "epsilon",
                format!("must be finite and > 0, got {epsilon}"),
            ));
        }
        Ok(DeformSpec { base, epsilon })
    }

    pub fn metric(&self) -> MetricKind {
        MetricKind::Deformed {
            epsilon: self.epsilon,
            base: self.base,
        }
    }
}

/// A path with its lengths under every metric.
///
/// `nodes` holds graph node ids when the path is carried by a graph and is
/// empty for free-standing polylines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub metric: MetricKind,
    pub nodes: Vec<NodeId>,
    pub points: Vec<Point>,
    pub deltas: Vec<f64>,
    pub euclid_chord: f64,
    pub inner_len: f64,
    pub qh_len: f64,
    /// Length under `metric`.
    pub metric_len: f64,
}

impl PathRecord {
    /// A polyline not tied to any graph; quasihyperbolic length uses the
    /// trapezoid rule on `1/δ`.
    pub fn polyline(points: Vec<Point>, deltas: Vec<f64>) -> Result<PathRecord> {
        if points.is_empty() {
            return Err(Error::EmptyPath);
        }
        if points.len() != deltas.len() {
            return Err(invalid(
                "deltas",
                "one boundary distance per point is required",
            ));
        }
        if deltas.iter().any(|d| !(*d > 0.0)) {
            return Err(invalid("deltas", "boundary distances must be positive"));
        }
        let mut inner = 0.0;
        let mut qh = 0.0;
        for i in 1..points.len() {
            let len = points[i - 1].dist(&points[i]);
            inner += len;
            qh += len * 0.5 * (1.0 / deltas[i - 1] + 1.0 / deltas[i]);
        }
        Ok(PathRecord {
            metric: MetricKind::Inner,
            nodes: Vec::new(),
            euclid_chord: points[0].dist(points.last().unwrap()),
            points,
            deltas,
            inner_len: inner,
            qh_len: qh,
            metric_len: inner,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cumulative inner length at each node.
    pub fn arclengths(&self) -> Vec<f64> {
        let mut acc = Vec::with_capacity(self.points.len());
        let mut s = 0.0;
        for i in 0..self.points.len() {
            if i > 0 {
                s += self.points[i - 1].dist(&self.points[i]);
            }
            acc.push(s);
        }
        acc
    }
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    node: NodeId,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NO_PRED: usize = usize::MAX;

pub(crate) struct ShortestPaths {
    pub dist: Vec<f64>,
    pub pred: Vec<usize>,
}

/// Binary-heap Dijkstra from a set of sources. Equal-length alternatives
/// keep the smaller predecessor id. Stops early once `target` is settled.
pub(crate) fn dijkstra<W>(
    graph: &MetricGraph,
    sources: &[(NodeId, f64)],
    weight: W,
    target: Option<NodeId>,
) -> ShortestPaths
where
    W: Fn(NodeId, NodeId, usize) -> f64,
{
    let n = graph.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![NO_PRED; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &(s, d0) in sources {
        if d0 < dist[s] {
            dist[s] = d0;
            heap.push(State { dist: d0, node: s });
        }
    }
    while let Some(State { dist: d, node: u }) = heap.pop() {
        if done[u] || d > dist[u] {
            continue;
        }
        done[u] = true;
        if Some(u) == target {
            break;
        }
        for (v, e) in graph.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + weight(u, v, e);
            if nd < dist[v] {
                dist[v] = nd;
                pred[v] = u;
                heap.push(State { dist: nd, node: v });
            } else if nd == dist[v] && u < pred[v] {
                pred[v] = u;
            }
        }
    }
    ShortestPaths { dist, pred }
}

/// Edge weight function for a metric; deformed metrics need the
/// quasihyperbolic distance table of their base point.
enum Weights {
    Inner,
    Qh,
    Deformed { epsilon: f64, table: Arc<Vec<f64>> },
}

impl Weights {
    fn for_metric(graph: &MetricGraph, metric: &MetricKind) -> Result<Weights> {
        Ok(match *metric {
            MetricKind::Inner => Weights::Inner,
            MetricKind::Quasihyperbolic => Weights::Qh,
            MetricKind::Deformed { epsilon, base } => {
                DeformSpec::new(base, epsilon)?;
                check_node(graph, base)?;
                Weights::Deformed {
                    epsilon,
                    table: qh_table(graph, base),
                }
            }
        })
    }

    fn run(
        &self,
        graph: &MetricGraph,
        sources: &[(NodeId, f64)],
        target: Option<NodeId>,
    ) -> ShortestPaths {
        match self {
            Weights::Inner => dijkstra(graph, sources, |_, _, e| graph.euclid_len(e), target),
            Weights::Qh => dijkstra(graph, sources, |_, _, e| graph.qh_len(e), target),
            Weights::Deformed { epsilon, table } => dijkstra(
                graph,
                sources,
                |u, v, e| graph.qh_len(e) * (-epsilon * 0.5 * (table[u] + table[v])).exp(),
                target,
            ),
        }
    }

    fn edge(&self, graph: &MetricGraph, u: NodeId, v: NodeId, e: usize) -> f64 {
        match self {
            Weights::Inner => graph.euclid_len(e),
            Weights::Qh => graph.qh_len(e),
            Weights::Deformed { epsilon, table } => {
                graph.qh_len(e) * (-epsilon * 0.5 * (table[u] + table[v])).exp()
            }
        }
    }
}

fn check_node(graph: &MetricGraph, id: NodeId) -> Result<()> {
    if id < graph.node_count() {
        Ok(())
    } else {
        Err(invalid("node", format!("node id {id} out of range")))
    }
}

/// Quasihyperbolic distances from `source` to every node, computed once per
/// graph and shared afterwards.
pub fn qh_table(graph: &MetricGraph, source: NodeId) -> Arc<Vec<f64>> {
    if let Some(t) = graph.cached_qh_table(source) {
        return t;
    }
    let sp = dijkstra(graph, &[(source, 0.0)], |_, _, e| graph.qh_len(e), None);
    graph.publish_qh_table(source, Arc::new(sp.dist))
}

/// Distances from `source` to every node.
pub fn distances_from(
    graph: &MetricGraph,
    metric: &MetricKind,
    source: NodeId,
) -> Result<Vec<f64>> {
    check_node(graph, source)?;
    let w = Weights::for_metric(graph, metric)?;
    Ok(w.run(graph, &[(source, 0.0)], None).dist)
}

/// Distance from every node to the nearest node of `set`.
pub fn distances_to_set(
    graph: &MetricGraph,
    metric: &MetricKind,
    set: &[NodeId],
) -> Result<Vec<f64>> {
    for &s in set {
        check_node(graph, s)?;
    }
    let w = Weights::for_metric(graph, metric)?;
    let sources: Vec<(NodeId, f64)> = set.iter().map(|&s| (s, 0.0)).collect();
    Ok(w.run(graph, &sources, None).dist)
}

pub fn node_distance(
    graph: &MetricGraph,
    metric: &MetricKind,
    a: NodeId,
    b: NodeId,
) -> Result<f64> {
    check_node(graph, a)?;
    check_node(graph, b)?;
    if a == b {
        return Ok(0.0);
    }
    let w = Weights::for_metric(graph, metric)?;
    // Always search from the smaller id so the result is exactly symmetric.
    let (s, t) = (a.min(b), a.max(b));
    let d = w.run(graph, &[(s, 0.0)], Some(t)).dist[t];
    if d.is_finite() {
        Ok(d)
    } else {
        Err(Error::Unreachable { from: a, to: b })
    }
}

/// Shortest path between two nodes under `metric`.
pub fn node_geodesic(
    graph: &MetricGraph,
    metric: &MetricKind,
    a: NodeId,
    b: NodeId,
) -> Result<PathRecord> {
    check_node(graph, a)?;
    check_node(graph, b)?;
    let w = Weights::for_metric(graph, metric)?;
    if a == b {
        return record_with(graph, &w, *metric, vec![a]);
    }
    let (s, t) = (a.min(b), a.max(b));
    let sp = w.run(graph, &[(s, 0.0)], Some(t));
    if !sp.dist[t].is_finite() {
        return Err(Error::Unreachable { from: a, to: b });
    }
    let mut nodes = vec![t];
    let mut cur = t;
    while cur != s {
        cur = sp.pred[cur];
        nodes.push(cur);
    }
    nodes.reverse();
    let mut rec = record_with(graph, &w, *metric, nodes)?;
    if s != a {
        rec.nodes.reverse();
        rec.points.reverse();
        rec.deltas.reverse();
    }
    Ok(rec)
}

/// PathRecord for an explicit node sequence; consecutive nodes must be
/// adjacent.
pub fn path_record(
    graph: &MetricGraph,
    metric: &MetricKind,
    nodes: Vec<NodeId>,
) -> Result<PathRecord> {
    if nodes.is_empty() {
        return Err(Error::EmptyPath);
    }
    for &n in &nodes {
        check_node(graph, n)?;
    }
    let w = Weights::for_metric(graph, metric)?;
    record_with(graph, &w, *metric, nodes)
}

fn record_with(
    graph: &MetricGraph,
    w: &Weights,
    metric: MetricKind,
    nodes: Vec<NodeId>,
) -> Result<PathRecord> {
    let mut inner = 0.0;
    let mut qh = 0.0;
    let mut len = 0.0;
    for pair in nodes.windows(2) {
        let (u, v) = (pair[0], pair[1]);
        let e = graph
            .edge_slot(u, v)
            .ok_or_else(|| invalid("nodes", format!("nodes {u} and {v} are not adjacent")))?;
        inner += graph.euclid_len(e);
        qh += graph.qh_len(e);
        len += w.edge(graph, u, v, e);
    }
    let points: Vec<Point> = nodes.iter().map(|&n| graph.node(n).point).collect();
    let deltas = nodes.iter().map(|&n| graph.node(n).delta).collect();
    Ok(PathRecord {
        metric,
        euclid_chord: points[0].dist(points.last().unwrap()),
        nodes,
        points,
        deltas,
        inner_len: inner,
        qh_len: qh,
        metric_len: len,
    })
}

fn snapped_distance(graph: &MetricGraph, metric: &MetricKind, x: &Point, y: &Point) -> Result<f64> {
    let a = graph.snap(x)?;
    let b = graph.snap(y)?;
    node_distance(graph, metric, a, b)
}

/// Inner (intrinsic Euclidean) distance `σ` between the snapped nodes.
pub fn inner_distance(graph: &MetricGraph, x: &Point, y: &Point) -> Result<f64> {
    snapped_distance(graph, &MetricKind::Inner, x, y)
}

/// Quasihyperbolic distance `k_G` between the snapped nodes.
pub fn quasihyperbolic_distance(graph: &MetricGraph, x: &Point, y: &Point) -> Result<f64> {
    snapped_distance(graph, &MetricKind::Quasihyperbolic, x, y)
}

/// Distance in the ε-deformation of `(G, k_G)` based at `d.base`.
pub fn deformed_distance(graph: &MetricGraph, d: &DeformSpec, x: &Point, y: &Point) -> Result<f64> {
    DeformSpec::new(d.base, d.epsilon)?;
    snapped_distance(graph, &d.metric(), x, y)
}

pub fn geodesic(
    graph: &MetricGraph,
    x: &Point,
    y: &Point,
    metric: &MetricKind,
) -> Result<PathRecord> {
    let a = graph.snap(x)?;
    let b = graph.snap(y)?;
    node_geodesic(graph, metric, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::GridParams;
    use crate::domains::{Domain, DomainSpec};

    fn graph(spec: DomainSpec, h: f64) -> MetricGraph {
        MetricGraph::build(&Domain::new(spec).unwrap(), GridParams::with_h(h)).unwrap()
    }

    fn unit_square() -> DomainSpec {
        DomainSpec::rectangle(Point::new(0.0, 0.0), Point::new(1.0, 1.0))
    }

    #[test]
    fn convex_inner_distance_close_to_euclidean() {
        let g = graph(unit_square(), 0.02);
        let path = geodesic(
            &g,
            &Point::new(0.2, 0.2),
            &Point::new(0.8, 0.8),
            &MetricKind::Inner,
        )
        .unwrap();
        let e = path.euclid_chord;
        assert!(
            path.inner_len >= e * (1.0 - 1e-12) && path.inner_len <= e * 1.09,
            "{} vs {e}",
            path.inner_len
        );
    }

    #[test]
    fn zero_distance_on_identical_points() {
        let g = graph(unit_square(), 0.05);
        let p = Point::new(0.3, 0.6);
        assert_eq!(inner_distance(&g, &p, &p).unwrap(), 0.0);
        assert_eq!(quasihyperbolic_distance(&g, &p, &p).unwrap(), 0.0);
        let path = geodesic(&g, &p, &p, &MetricKind::Quasihyperbolic).unwrap();
        assert_eq!(path.len(), 1);
        assert_eq!(
            (path.inner_len, path.qh_len, path.euclid_chord),
            (0.0, 0.0, 0.0)
        );
        let dspec = DeformSpec::new(0, 0.3).unwrap();
        assert_eq!(deformed_distance(&g, &dspec, &p, &p).unwrap(), 0.0);
    }

    #[test]
    fn geodesic_lengths_match_distance_exactly() {
        let g = graph(DomainSpec::comb(2), 0.0625);
        let x = Point::new(0.9, 0.5);
        let y = Point::new(0.2, 0.5);
        for metric in [MetricKind::Inner, MetricKind::Quasihyperbolic] {
            let d = snapped_distance(&g, &metric, &x, &y).unwrap();
            let p = geodesic(&g, &x, &y, &metric).unwrap();
            assert_eq!(p.metric_len, d);
            assert_eq!(snapped_distance(&g, &metric, &y, &x).unwrap(), d);
            let q = geodesic(&g, &y, &x, &metric).unwrap();
            assert_eq!(q.metric_len, d);
            assert_eq!(q.points[0], p.points[p.len() - 1]);
            assert!(p.inner_len >= p.euclid_chord);
        }
    }

    #[test]
    fn deformation_vanishes_as_epsilon_shrinks() {
        let g = graph(DomainSpec::disk(Point::new(0.0, 0.0), 1.0), 0.05);
        let base = g.snap(&Point::new(0.0, 0.0)).unwrap();
        let x = Point::new(-0.6, 0.1);
        let y = Point::new(0.5, -0.4);
        let k = quasihyperbolic_distance(&g, &x, &y).unwrap();
        let dd = deformed_distance(&g, &DeformSpec::new(base, 1e-9).unwrap(), &x, &y).unwrap();
        assert!(((dd - k) / k).abs() < 1e-6);
        assert!(DeformSpec::new(base, 0.0).is_err());
        assert!(DeformSpec::new(base, -1.0).is_err());
    }

    #[test]
    fn polyline_lengths() {
        let p = PathRecord::polyline(
            vec![Point::new(0.0, 1.0), Point::new(0.0, 2.0)],
            vec![1.0, 2.0],
        )
        .unwrap();
        assert_eq!(p.inner_len, 1.0);
        assert_eq!(p.qh_len, 0.75);
        assert!(PathRecord::polyline(vec![], vec![]).is_err());
    }

    #[test]
    fn path_record_rejects_non_adjacent_nodes() {
        let g = graph(unit_square(), 0.1);
        let far = g.node_count() - 1;
        assert!(path_record(&g, &MetricKind::Inner, vec![0, far]).is_err());
        assert_eq!(
            path_record(&g, &MetricKind::Inner, vec![]),
            Err(Error::EmptyPath)
        );
    }
}
