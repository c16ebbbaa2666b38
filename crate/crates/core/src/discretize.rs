//! Boundary-adapted quadtree graph over a domain.
//!
//! Base cells of side `h_coarse` cover the bounding box. A cell of side `s`
//! becomes a node when its center lies in the domain and
//! `s <= whitney_c * (δ(center) - s/√2)`; otherwise it is split dyadically
//! until `max_depth`, and cells that still fail are dropped. Leaves are
//! joined along the chosen stencil, measured in each leaf's own side
//! length, and every edge is checked against the boundary.

use crate::domains::Domain;
use crate::error::{invalid, Error, Result};
use crate::geometry::Point;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::{Arc, RwLock};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Axis4,
    King8,
    Knight16,
}

impl Stencil {
    fn offsets(self) -> &'static [(i32, i32)] {
        const AXIS: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
        const KING: [(i32, i32); 8] = [
            (1, 0),
            (0, 1),
            (-1, 0),
            (0, -1),
            (1, 1),
            (-1, 1),
            (-1, -1),
            (1, -1),
        ];
        const KNIGHT: [(i32, i32); 16] = [
            (1, 0),
            (0, 1),
            (-1, 0),
            (0, -1),
            (1, 1),
            (-1, 1),
            (-1, -1),
            (1, -1),
            (2, 1),
            (1, 2),
            (-1, 2),
            (-2, 1),
            (-2, -1),
            (-1, -2),
            (1, -2),
            (2, -1),
        ];
        match self {
            Stencil::Axis4 => &AXIS,
            Stencil::King8 => &KING,
            Stencil::Knight16 => &KNIGHT,
        }
    }
}

impl std::str::FromStr for Stencil {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "axis4" => Ok(Stencil::Axis4),
            "king8" => Ok(Stencil::King8),
            "knight16" => Ok(Stencil::Knight16),
            _ => Err(invalid("stencil", format!("unknown stencil `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub h_coarse: f64,
    pub whitney_c: f64,
    pub max_nodes: usize,
    pub stencil: Stencil,
    /// Number of dyadic splits allowed below the base grid.
    pub max_depth: u8,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            h_coarse: 0.05,
            whitney_c: 0.5,
            max_nodes: 4_000_000,
            stencil: Stencil::King8,
            max_depth: 5,
        }
    }
}

impl GridParams {
    pub fn with_h(h_coarse: f64) -> Self {
        GridParams {
            h_coarse,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h_coarse.is_finite() && self.h_coarse > 0.0) {
            return Err(invalid("h_coarse", "must be finite and > 0"));
        }
        if !(self.whitney_c > 0.0 && self.whitney_c <= 1.0) {
            return Err(invalid("whitney_c", "must lie in (0, 1]"));
        }
        if self.max_nodes < 2 {
            return Err(invalid("max_nodes", "must be at least 2"));
        }
        if self.max_depth > 30 {
            return Err(invalid("max_depth", "must be at most 30"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub point: Point,
    /// Boundary distance `δ_G` at the node.
    pub delta: f64,
    /// Side length of the quadtree leaf the node represents.
    pub side: f64,
    pub level: u8,
}

#[derive(Debug, Clone, Copy)]
enum Cell {
    Leaf(NodeId),
    Split,
}

type CellKey = (u8, i64, i64);

/// Immutable weighted graph over domain sample points.
#[derive(Debug)]
pub struct MetricGraph {
    domain: Domain,
    params: GridParams,
    nodes: Vec<Node>,
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    euclid: Vec<f64>,
    qh: Vec<f64>,
    origin: Point,
    cells: HashMap<CellKey, Cell>,
    buckets: HashMap<(i64, i64), Vec<NodeId>>,
    qh_tables: RwLock<HashMap<NodeId, Arc<Vec<f64>>>>,
}

struct Builder<'a> {
    domain: &'a Domain,
    params: GridParams,
    origin: Point,
    nodes: Vec<Node>,
    cells: HashMap<CellKey, Cell>,
}

impl Builder<'_> {
    fn side(&self, level: u8) -> f64 {
        self.params.h_coarse / f64::from(1u32 << level)
    }

    fn visit(&mut self, level: u8, i: i64, j: i64) -> Result<()> {
        let s = self.side(level);
        let center = Point::new(
            self.origin.x + (i as f64 + 0.5) * s,
            self.origin.y + (j as f64 + 0.5) * s,
        );
        let d = self.domain.distance_to_boundary(&center);
        let inside = self.domain.contains(&center);
        let half_diag = s * FRAC_1_SQRT_2;
        if !inside && d >= half_diag {
            return Ok(());
        }
        if inside && s <= self.params.whitney_c * (d - half_diag) {
            let id = self.nodes.len();
            if id >= self.params.max_nodes {
                return Err(Error::NodeBudgetExceeded {
                    limit: self.params.max_nodes,
                });
            }
            self.nodes.push(Node {
                point: center,
                delta: d,
                side: s,
                level,
            });
            self.cells.insert((level, i, j), Cell::Leaf(id));
            return Ok(());
        }
        if level < self.params.max_depth {
            self.cells.insert((level, i, j), Cell::Split);
            for (di, dj) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                self.visit(level + 1, 2 * i + di, 2 * j + dj)?;
            }
        }
        Ok(())
    }
}

impl MetricGraph {
    /// Deterministic boundary-adapted graph over `domain`.
    pub fn build(domain: &Domain, params: GridParams) -> Result<MetricGraph> {
        params.validate()?;
        let bbox = domain.bbox();
        let h = params.h_coarse;
        let nx = ((bbox.width() / h).ceil() as i64).max(1);
        let ny = ((bbox.height() / h).ceil() as i64).max(1);
        let mut b = Builder {
            domain,
            params,
            origin: bbox.min,
            nodes: Vec::new(),
            cells: HashMap::new(),
        };
        for j in 0..ny {
            for i in 0..nx {
                b.visit(0, i, j)?;
            }
        }
        let Builder {
            origin,
            nodes,
            cells,
            ..
        } = b;

        let mut graph = MetricGraph {
            domain: domain.clone(),
            params,
            nodes,
            offsets: Vec::new(),
            targets: Vec::new(),
            euclid: Vec::new(),
            qh: Vec::new(),
            origin,
            cells,
            buckets: HashMap::new(),
            qh_tables: RwLock::new(HashMap::new()),
        };
        if graph.nodes.len() < 2 {
            return Err(Error::DisconnectedGraph {
                components: graph.nodes.len(),
                largest: graph.nodes.len(),
                total: graph.nodes.len(),
            });
        }
        graph.connect();
        graph.check_connected()?;
        for (id, n) in graph.nodes.iter().enumerate() {
            graph
                .buckets
                .entry(graph.bucket_of(&n.point))
                .or_default()
                .push(id);
        }
        Ok(graph)
    }

    /// Rebuild with `h_coarse / factor`.
    pub fn refine(&self, factor: f64) -> Result<MetricGraph> {
        if !(factor.is_finite() && factor > 1.0) {
            return Err(invalid("factor", "refinement factor must be > 1"));
        }
        let params = GridParams {
            h_coarse: self.params.h_coarse / factor,
            ..self.params
        };
        MetricGraph::build(&self.domain, params)
    }

    fn connect(&mut self) {
        let stencil = self.params.stencil.offsets();
        let this = &*self;
        let mut pairs: Vec<(NodeId, NodeId)> = self
            .nodes
            .par_iter()
            .enumerate()
            .flat_map_iter(|(u, n)| {
                stencil.iter().filter_map(move |&(dx, dy)| {
                    let q = Point::new(
                        n.point.x + f64::from(dx) * n.side,
                        n.point.y + f64::from(dy) * n.side,
                    );
                    match this.locate(&q) {
                        Some(v) if v != u => Some((u.min(v), u.max(v))),
                        _ => None,
                    }
                })
            })
            .collect();
        pairs.par_sort_unstable();
        pairs.dedup();
        let nodes = &self.nodes;
        let domain = &self.domain;
        let kept: Vec<(NodeId, NodeId, f64)> = pairs
            .into_par_iter()
            .filter_map(|(u, v)| {
                let (a, b) = (&nodes[u], &nodes[v]);
                let len = a.point.dist(&b.point);
                let clear = len < a.delta.max(b.delta) || domain.segment_inside(&a.point, &b.point);
                clear.then_some((u, v, len))
            })
            .collect();

        let n = self.nodes.len();
        let mut degree = vec![0usize; n];
        for &(u, v, _) in &kept {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let m = offsets[n];
        let mut fill = offsets.clone();
        let mut targets = vec![0; m];
        let mut euclid = vec![0.0; m];
        let mut qh = vec![0.0; m];
        for &(u, v, len) in &kept {
            let w = len * 0.5 * (1.0 / self.nodes[u].delta + 1.0 / self.nodes[v].delta);
            for (a, b) in [(u, v), (v, u)] {
                let slot = fill[a];
                targets[slot] = b;
                euclid[slot] = len;
                qh[slot] = w;
                fill[a] += 1;
            }
        }
        self.offsets = offsets;
        self.targets = targets;
        self.euclid = euclid;
        self.qh = qh;
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut comp = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let c = sizes.len();
            let mut size = 0;
            let mut queue = VecDeque::from([start]);
            comp[start] = c;
            while let Some(u) = queue.pop_front() {
                size += 1;
                for (v, _) in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = c;
                        queue.push_back(v);
                    }
                }
            }
            sizes.push(size);
        }
        if sizes.len() > 1 {
            return Err(Error::DisconnectedGraph {
                components: sizes.len(),
                largest: sizes.iter().copied().max().unwrap_or(0),
                total: n,
            });
        }
        Ok(())
    }

    /// Leaf cell containing `p`, if it was retained.
    fn locate(&self, p: &Point) -> Option<NodeId> {
        for level in 0..=self.params.max_depth {
            let s = self.params.h_coarse / f64::from(1u32 << level);
            let key = (
                level,
                ((p.x - self.origin.x) / s).floor() as i64,
                ((p.y - self.origin.y) / s).floor() as i64,
            );
            match self.cells.get(&key)? {
                Cell::Leaf(id) => return Some(*id),
                Cell::Split => continue,
            }
        }
        None
    }

    fn bucket_of(&self, p: &Point) -> (i64, i64) {
        let h = self.params.h_coarse;
        (
            ((p.x - self.origin.x) / h).floor() as i64,
            ((p.y - self.origin.y) / h).floor() as i64,
        )
    }

    /// Nearest node within 1.5 of its own cell size that sees `p` along a
    /// straight segment. Ties go to the smaller node id.
    pub fn snap(&self, p: &Point) -> Result<NodeId> {
        if !self.domain.contains(p) {
            return Err(Error::PointOutsideDomain { x: p.x, y: p.y });
        }
        let (bi, bj) = self.bucket_of(p);
        let mut candidates: Vec<(f64, NodeId)> = Vec::new();
        for dj in -2..=2 {
            for di in -2..=2 {
                if let Some(ids) = self.buckets.get(&(bi + di, bj + dj)) {
                    for &id in ids {
                        let n = &self.nodes[id];
                        let d = n.point.dist(p);
                        if d <= 1.5 * n.side {
                            candidates.push((d, id));
                        }
                    }
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        candidates
            .into_iter()
            .find(|&(d, id)| d == 0.0 || self.domain.segment_inside(p, &self.nodes[id].point))
            .map(|(_, id)| id)
            .ok_or(Error::PointOutsideDomain { x: p.x, y: p.y })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn params(&self) -> &GridParams {
        &self.params
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// `(neighbor, edge slot)` pairs of `u`, sorted by neighbor id.
    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        (self.offsets[u]..self.offsets[u + 1]).map(move |e| (self.targets[e], e))
    }

    pub fn euclid_len(&self, slot: usize) -> f64 {
        self.euclid[slot]
    }

    pub fn qh_len(&self, slot: usize) -> f64 {
        self.qh[slot]
    }

    pub fn edge_slot(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.targets[range.clone()]
            .binary_search(&v)
            .ok()
            .map(|i| range.start + i)
    }

    /// Largest quasihyperbolic edge weight incident to `u`.
    pub fn max_incident_qh(&self, u: NodeId) -> f64 {
        self.neighbors(u)
            .map(|(_, e)| self.qh[e])
            .fold(0.0, f64::max)
    }

    pub(crate) fn cached_qh_table(&self, source: NodeId) -> Option<Arc<Vec<f64>>> {
        self.qh_tables.read().ok()?.get(&source).cloned()
    }

    pub(crate) fn publish_qh_table(&self, source: NodeId, table: Arc<Vec<f64>>) -> Arc<Vec<f64>> {
        match self.qh_tables.write() {
            Ok(mut map) => map.entry(source).or_insert(table).clone(),
            Err(_) => table,
        }
    }

    /// Versioned JSON dump for external visualization.
    pub fn dump(&self) -> GraphDump {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| DumpNode {
                id,
                x: n.point.x,
                y: n.point.y,
                delta: n.delta,
                side: n.side,
            })
            .collect();
        let mut edges = Vec::with_capacity(self.edge_count());
        for u in 0..self.nodes.len() {
            for (v, e) in self.neighbors(u) {
                if u < v {
                    edges.push(DumpEdge {
                        u,
                        v,
                        euclid_len: self.euclid[e],
                        qh_len: self.qh[e],
                    });
                }
            }
        }
        GraphDump {
            schema: GRAPH_SCHEMA.to_string(),
            domain: self.domain.spec().clone(),
            params: self.params,
            nodes,
            edges,
        }
    }
}

pub const GRAPH_SCHEMA: &str = "qhgeo.graph/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDump {
    pub schema: String,
    pub domain: crate::domains::DomainSpec,
    pub params: GridParams,
    pub nodes: Vec<DumpNode>,
    pub edges: Vec<DumpEdge>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpNode {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub delta: f64,
    pub side: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpEdge {
    pub u: NodeId,
    pub v: NodeId,
    pub euclid_len: f64,
    pub qh_len: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::DomainSpec;

    fn disk() -> Domain {
        Domain::new(DomainSpec::disk(Point::new(0.0, 0.0), 1.0)).unwrap()
    }

    #[test]
    fn disk_graph_invariants() {
        let params = GridParams {
            h_coarse: 0.1,
            stencil: Stencil::Axis4,
            ..Default::default()
        };
        let g = MetricGraph::build(&disk(), params).unwrap();
        for (u, n) in g.nodes().iter().enumerate() {
            assert!(g.domain().contains(&n.point));
            assert!(n.delta > 0.0);
            assert!(n.side <= params.whitney_c * n.delta);
            for (v, e) in g.neighbors(u) {
                let m = g.node(v);
                let len = n.point.dist(&m.point);
                assert!((g.euclid_len(e) - len).abs() <= 1e-12 * len);
                let lo = len / n.delta.max(m.delta);
                let hi = len / n.delta.min(m.delta);
                assert!(g.qh_len(e) >= lo * (1.0 - 1e-12) && g.qh_len(e) <= hi * (1.0 + 1e-12));
                assert_eq!(
                    g.edge_slot(v, u).map(|s| g.euclid_len(s)),
                    Some(g.euclid_len(e))
                );
            }
        }
    }

    #[test]
    fn comb_build_reaches_both_sides_of_slits() {
        let comb = Domain::new(DomainSpec::comb(3)).unwrap();
        let params = GridParams {
            h_coarse: 0.2,
            max_depth: 7,
            ..Default::default()
        };
        match MetricGraph::build(&comb, params) {
            Ok(g) => {
                for n in 1..=3 {
                    let x = 0.5f64.powi(n);
                    let left = g
                        .nodes()
                        .iter()
                        .any(|p| p.point.x < x && p.point.x > x - 0.01);
                    let right = g
                        .nodes()
                        .iter()
                        .any(|p| p.point.x > x && p.point.x < x + 0.01);
                    assert!(left && right, "tooth {n}");
                }
            }
            Err(e) => assert!(matches!(e, Error::DisconnectedGraph { .. })),
        }
    }

    #[test]
    fn coarse_rectangle_refines_to_interior_nodes() {
        let r = Domain::new(DomainSpec::rectangle(
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
        ))
        .unwrap();
        match MetricGraph::build(&r, GridParams::with_h(2.0)) {
            Ok(g) => assert!(g.node_count() >= 2),
            Err(e) => assert!(matches!(
                e,
                Error::DisconnectedGraph { .. } | Error::NodeBudgetExceeded { .. }
            )),
        }
    }

    #[test]
    fn node_budget_is_enforced() {
        let params = GridParams {
            max_nodes: 10,
            ..GridParams::with_h(0.1)
        };
        assert_eq!(
            MetricGraph::build(&disk(), params).unwrap_err(),
            Error::NodeBudgetExceeded { limit: 10 }
        );
    }

    #[test]
    fn bad_params_rejected() {
        for p in [
            GridParams::with_h(0.0),
            GridParams {
                whitney_c: 1.5,
                ..Default::default()
            },
            GridParams {
                max_nodes: 1,
                ..Default::default()
            },
        ] {
            assert!(matches!(
                MetricGraph::build(&disk(), p),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn refine_increases_nodes_and_rejects_unit_factor() {
        let g = MetricGraph::build(&disk(), GridParams::with_h(0.2)).unwrap();
        let f = g.refine(2.0).unwrap();
        assert!(f.node_count() > g.node_count());
        assert!(matches!(g.refine(1.0), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn deterministic_builds() {
        let comb = Domain::new(DomainSpec::comb(2)).unwrap();
        let p = GridParams {
            h_coarse: 0.0625,
            ..Default::default()
        };
        let a = MetricGraph::build(&comb, p).unwrap();
        let b = MetricGraph::build(&comb, p).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_eq!(a.targets, b.targets);
        assert_eq!(a.qh, b.qh);
    }

    #[test]
    fn snapping_rules() {
        let g = MetricGraph::build(&disk(), GridParams::with_h(0.1)).unwrap();
        let id = g.snap(&Point::new(0.01, 0.02)).unwrap();
        assert!(g.node(id).point.dist(&Point::new(0.01, 0.02)) <= 1.5 * g.node(id).side);
        assert!(matches!(
            g.snap(&Point::new(2.0, 0.0)),
            Err(Error::PointOutsideDomain { .. })
        ));
    }

    #[test]
    fn snapping_never_crosses_a_slit() {
        let text = r#"{"kind":"slit_polygon","outer":[[0,0],[1,0],[1,1],[0,1]],
                       "slits":[[[0.5,0.0],[0.5,0.8]]]}"#;
        let d = Domain::from_json(text).unwrap();
        let g = MetricGraph::build(&d, GridParams::with_h(0.05)).unwrap();
        for x in [0.49, 0.499, 0.501, 0.51] {
            let p = Point::new(x, 0.4);
            if let Ok(id) = g.snap(&p) {
                assert_eq!(g.node(id).point.x < 0.5, x < 0.5);
            }
        }
    }

    #[test]
    fn dump_has_schema_and_all_edges() {
        let g = MetricGraph::build(&disk(), GridParams::with_h(0.25)).unwrap();
        let dump = g.dump();
        assert_eq!(dump.schema, GRAPH_SCHEMA);
        assert_eq!(dump.nodes.len(), g.node_count());
        assert_eq!(dump.edges.len(), g.edge_count());
        let text = serde_json::to_string(&dump).unwrap();
        assert!(text.contains("\"schema\":\"qhgeo.graph/1\""));
    }
}
