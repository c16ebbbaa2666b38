//! The domain zoo: bounded planar domains, membership and the boundary
//! distance field `δ_G`.
//!
//! Slits are closed segments removed from an open region. They are
//! one-dimensional, so a point on a slit is outside the domain and both
//! sides of a slit see the same point-segment distance.

use crate::error::{Error, Result};
use crate::geometry::{polygon_contains, signed_area2, BoundingBox, Point, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Declarative description of a bounded planar domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk {
        center: Point,
        radius: f64,
    },
    Rectangle {
        min: Point,
        max: Point,
    },
    Annulus {
        center: Point,
        r_inner: f64,
        r_outer: f64,
    },
    /// Unit square minus the teeth `L_n = {x = 2^-n, 0 < y ≤ 2/3}` and
    /// `K_n = {x = 2^-n + 2^-(n+2), 1/3 ≤ y < 1}` for `n = 1..=teeth`.
    Comb {
        teeth: u32,
    },
    SlitPolygon {
        outer: Vec<Point>,
        #[serde(default)]
        slits: Vec<Segment>,
    },
}

impl DomainSpec {
    pub fn disk(center: Point, radius: f64) -> Self {
        DomainSpec::Disk { center, radius }
    }

    pub fn rectangle(min: Point, max: Point) -> Self {
        DomainSpec::Rectangle { min, max }
    }

    pub fn annulus(center: Point, r_inner: f64, r_outer: f64) -> Self {
        DomainSpec::Annulus {
            center,
            r_inner,
            r_outer,
        }
    }

    pub fn comb(teeth: u32) -> Self {
        DomainSpec::Comb { teeth }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Short identifier used in reports, e.g. `comb5` or `disk`.
    pub fn id(&self) -> String {
        match self {
            DomainSpec::Disk { .. } => "disk".into(),
            DomainSpec::Rectangle { .. } => "rectangle".into(),
            DomainSpec::Annulus { .. } => "annulus".into(),
            DomainSpec::Comb { teeth } => format!("comb{teeth}"),
            DomainSpec::SlitPolygon { .. } => "slit_polygon".into(),
        }
    }

    /// The image of this domain under `p ↦ factor·p`.
    pub fn scaled(&self, factor: f64) -> DomainSpec {
        match self {
            DomainSpec::Disk { center, radius } => DomainSpec::Disk {
                center: *center * factor,
                radius: radius * factor,
            },
            DomainSpec::Rectangle { min, max } => DomainSpec::Rectangle {
                min: *min * factor,
                max: *max * factor,
            },
            DomainSpec::Annulus {
                center,
                r_inner,
                r_outer,
            } => DomainSpec::Annulus {
                center: *center * factor,
                r_inner: r_inner * factor,
                r_outer: r_outer * factor,
            },
            DomainSpec::Comb { teeth } => {
                let (outer, slits) = comb_geometry(*teeth);
                DomainSpec::SlitPolygon { outer, slits }.scaled(factor)
            }
            DomainSpec::SlitPolygon { outer, slits } => DomainSpec::SlitPolygon {
                outer: outer.iter().map(|p| *p * factor).collect(),
                slits: slits
                    .iter()
                    .map(|s| Segment::new(s.a * factor, s.b * factor))
                    .collect(),
            },
        }
    }
}

fn comb_geometry(teeth: u32) -> (Vec<Point>, Vec<Segment>) {
    let outer = vec![
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let mut slits = Vec::with_capacity(2 * teeth as usize);
    for n in 1..=teeth as i32 {
        let x_l = 2f64.powi(-n);
        let x_k = x_l + 2f64.powi(-(n + 2));
        slits.push(Segment::new(
            Point::new(x_l, 0.0),
            Point::new(x_l, 2.0 / 3.0),
        ));
        slits.push(Segment::new(
            Point::new(x_k, 1.0 / 3.0),
            Point::new(x_k, 1.0),
        ));
    }
    (outer, slits)
}

#[derive(Debug, Clone)]
enum Shape {
    Disk {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    /// Counter-clockwise outer ring plus removed slits.
    Polygonal {
        ring: Vec<Point>,
        edges: Vec<Segment>,
        slits: Vec<Segment>,
    },
}

/// A boundary point together with the inward unit normal of the side it
/// was sampled from. Slit points carry the normal of one particular side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAnchor {
    pub point: Point,
    pub normal: Point,
}

/// A validated domain.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    shape: Shape,
    bbox: BoundingBox,
}

fn field_err(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidDomain {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn check_point(field: &str, p: &Point) -> Result<()> {
    if p.is_finite() {
        Ok(())
    } else {
        Err(field_err(field, "coordinates must be finite"))
    }
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(field_err(field, format!("must be finite and > 0, got {v}")))
    }
}

impl Domain {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let shape = match &spec {
            DomainSpec::Disk { center, radius } => {
                check_point("center", center)?;
                check_positive("radius", *radius)?;
                Shape::Disk {
                    center: *center,
                    radius: *radius,
                }
            }
            DomainSpec::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                check_point("center", center)?;
                check_positive("r_inner", *r_inner)?;
                check_positive("r_outer", *r_outer)?;
                if r_inner >= r_outer {
                    return Err(field_err("r_inner", "must be smaller than r_outer"));
                }
                Shape::Annulus {
                    center: *center,
                    inner: *r_inner,
                    outer: *r_outer,
                }
            }
            DomainSpec::Rectangle { min, max } => {
                check_point("min", min)?;
                check_point("max", max)?;
                if !(min.x < max.x && min.y < max.y) {
                    return Err(field_err(
                        "max",
                        "corners must be strictly ordered in x and y",
                    ));
                }
                let ring = vec![
                    *min,
                    Point::new(max.x, min.y),
                    *max,
                    Point::new(min.x, max.y),
                ];
                polygonal(ring, Vec::new())
            }
            DomainSpec::Comb { teeth } => {
                if *teeth < 1 {
                    return Err(field_err("teeth", "must be at least 1"));
                }
                if *teeth > 40 {
                    return Err(field_err("teeth", "at most 40 teeth are representable"));
                }
                let (ring, slits) = comb_geometry(*teeth);
                polygonal(ring, slits)
            }
            DomainSpec::SlitPolygon { outer, slits } => validate_slit_polygon(outer, slits)?,
        };
        let bbox = match &shape {
            Shape::Disk { center, radius } => square_box(*center, *radius),
            Shape::Annulus { center, outer, .. } => square_box(*center, *outer),
            Shape::Polygonal { ring, .. } => {
                let mut min = ring[0];
                let mut max = ring[0];
                for p in ring {
                    min = Point::new(min.x.min(p.x), min.y.min(p.y));
                    max = Point::new(max.x.max(p.x), max.y.max(p.y));
                }
                BoundingBox { min, max }
            }
        };
        Ok(Domain { spec, shape, bbox })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Domain::new(DomainSpec::from_json(text)?)
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Disk { radius, .. } => PI * radius * radius,
            Shape::Annulus { inner, outer, .. } => PI * (outer * outer - inner * inner),
            Shape::Polygonal { ring, .. } => signed_area2(ring).abs() / 2.0,
        }
    }

    /// True iff `p` lies in the open domain, strictly off every slit.
    pub fn contains(&self, p: &Point) -> bool {
        if !p.is_finite() {
            return false;
        }
        match &self.shape {
            Shape::Disk { center, radius } => p.dist(center) < *radius,
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = p.dist(center);
                r > *inner && r < *outer
            }
            Shape::Polygonal { ring, .. } => {
                polygon_contains(ring, p) && self.distance_to_boundary(p) > 0.0
            }
        }
    }

    /// Euclidean distance from any point of the plane to the topological
    /// boundary (outer boundary and slits).
    pub fn distance_to_boundary(&self, p: &Point) -> f64 {
        match &self.shape {
            Shape::Disk { center, radius } => (radius - p.dist(center)).abs(),
            Shape::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = p.dist(center);
                (r - inner).abs().min((outer - r).abs())
            }
            Shape::Polygonal { edges, slits, .. } => edges
                .iter()
                .chain(slits)
                .map(|s| s.distance_to(p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// `δ_G(p)`; fails for points outside the open domain.
    pub fn boundary_distance(&self, p: &Point) -> Result<f64> {
        if !self.contains(p) {
            return Err(Error::PointOutsideDomain { x: p.x, y: p.y });
        }
        Ok(self.distance_to_boundary(p))
    }

    /// Whether the segment between two domain points stays inside the
    /// domain. Touching the boundary, including a slit endpoint, counts as
    /// leaving it.
    pub fn segment_inside(&self, a: &Point, b: &Point) -> bool {
        match &self.shape {
            Shape::Disk { .. } => true,
            Shape::Annulus { center, inner, .. } => {
                Segment::new(*a, *b).distance_to(center) > *inner
            }
            Shape::Polygonal { edges, slits, .. } => {
                let seg = Segment::new(*a, *b);
                !edges.iter().chain(slits).any(|s| s.intersects(&seg))
            }
        }
    }

    /// Seeded boundary sample, arclength-proportional over components.
    pub fn boundary_sample(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        Ok(self
            .boundary_anchors(count, seed)?
            .into_iter()
            .map(|a| a.point)
            .collect())
    }

    /// Like [`Domain::boundary_sample`] but keeps the inward normal of the
    /// sampled side. Slits count with both sides, so their weight is twice
    /// their length.
    pub fn boundary_anchors(&self, count: usize, seed: u64) -> Result<Vec<BoundaryAnchor>> {
        if count < 2 {
            return Err(crate::error::invalid(
                "count",
                "boundary sample needs count >= 2",
            ));
        }
        let components = self.boundary_components();
        let weights: Vec<f64> = components.iter().map(|c| c.length()).collect();
        let alloc = allocate(count, &weights);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for (comp, &n) in components.iter().zip(&alloc) {
            for i in 0..n {
                let u: f64 = rng.gen();
                out.push(comp.at((i as f64 + u) / n as f64));
            }
        }
        Ok(out)
    }

    fn boundary_components(&self) -> Vec<Component> {
        match &self.shape {
            Shape::Disk { center, radius } => vec![Component::Circle {
                center: *center,
                radius: *radius,
                inward: -1.0,
            }],
            Shape::Annulus {
                center,
                inner,
                outer,
            } => vec![
                Component::Circle {
                    center: *center,
                    radius: *outer,
                    inward: -1.0,
                },
                Component::Circle {
                    center: *center,
                    radius: *inner,
                    inward: 1.0,
                },
            ],
            Shape::Polygonal { edges, slits, .. } => {
                let mut v = vec![Component::Ring(edges.clone())];
                v.extend(slits.iter().map(|s| Component::Slit(*s)));
                v
            }
        }
    }

    /// Inward direction at a boundary point, found by probing a small
    /// circle around it and keeping the deepest inside direction.
    pub fn inward_normal(&self, p: &Point) -> Result<Point> {
        let r = 1e-7 * self.bbox.diagonal();
        let mut best: Option<(f64, Point)> = None;
        for i in 0..64 {
            let theta = 2.0 * PI * i as f64 / 64.0;
            let dir = Point::new(theta.cos(), theta.sin());
            let q = *p + dir * r;
            if self.contains(&q) {
                let d = self.distance_to_boundary(&q);
                if best.is_none_or(|(bd, _)| d > bd) {
                    best = Some((d, dir));
                }
            }
        }
        best.map(|(_, dir)| dir)
            .ok_or(Error::AnchorApproachFailure { x: p.x, y: p.y })
    }

    /// Uniform point of the domain by rejection from the bounding box.
    pub fn sample_interior<R: Rng>(&self, rng: &mut R) -> Point {
        let b = self.bbox;
        loop {
            let p = Point::new(
                b.min.x + rng.gen::<f64>() * b.width(),
                b.min.y + rng.gen::<f64>() * b.height(),
            );
            if self.contains(&p) {
                return p;
            }
        }
    }
}

fn square_box(center: Point, r: f64) -> BoundingBox {
    BoundingBox {
        min: Point::new(center.x - r, center.y - r),
        max: Point::new(center.x + r, center.y + r),
    }
}

fn polygonal(mut ring: Vec<Point>, slits: Vec<Segment>) -> Shape {
    if signed_area2(&ring) < 0.0 {
        ring.reverse();
    }
    let n = ring.len();
    let edges = (0..n)
        .map(|i| Segment::new(ring[i], ring[(i + 1) % n]))
        .collect();
    Shape::Polygonal { ring, edges, slits }
}

fn validate_slit_polygon(outer: &[Point], slits: &[Segment]) -> Result<Shape> {
    if outer.len() < 3 {
        return Err(field_err("outer", "polygon needs at least 3 vertices"));
    }
    for p in outer {
        check_point("outer", p)?;
    }
    if signed_area2(outer).abs() <= 0.0 {
        return Err(field_err("outer", "polygon has zero area"));
    }
    let n = outer.len();
    let edges: Vec<Segment> = (0..n)
        .map(|i| Segment::new(outer[i], outer[(i + 1) % n]))
        .collect();
    for i in 0..n {
        if edges[i].length() == 0.0 {
            return Err(field_err("outer", format!("repeated vertex at index {i}")));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if edges[i].intersects(&edges[j]) {
                return Err(field_err(
                    "outer",
                    format!("polygon is not simple: edges {i} and {j} intersect"),
                ));
            }
        }
    }
    let shape = polygonal(outer.to_vec(), slits.to_vec());
    if let Shape::Polygonal { ring, edges, .. } = &shape {
        let inside_closed = |p: &Point| {
            polygon_contains(ring, p) || edges.iter().any(|e| e.distance_to(p) <= 1e-12)
        };
        for (k, s) in slits.iter().enumerate() {
            check_point("slits", &s.a)?;
            check_point("slits", &s.b)?;
            if s.length() == 0.0 {
                return Err(field_err("slits", format!("slit {k} has zero length")));
            }
            if !inside_closed(&s.a) || !inside_closed(&s.b) || !polygon_contains(ring, &s.at(0.5)) {
                return Err(field_err(
                    "slits",
                    format!("slit {k} leaves the outer polygon"),
                ));
            }
        }
    }
    Ok(shape)
}

#[derive(Debug, Clone)]
enum Component {
    Circle {
        center: Point,
        radius: f64,
        inward: f64,
    },
    Ring(Vec<Segment>),
    Slit(Segment),
}

impl Component {
    fn length(&self) -> f64 {
        match self {
            Component::Circle { radius, .. } => 2.0 * PI * radius,
            Component::Ring(edges) => edges.iter().map(Segment::length).sum(),
            Component::Slit(s) => 2.0 * s.length(),
        }
    }

    /// Anchor at arclength fraction `t ∈ [0, 1)`.
    fn at(&self, t: f64) -> BoundaryAnchor {
        match self {
            Component::Circle {
                center,
                radius,
                inward,
            } => {
                let theta = 2.0 * PI * t;
                let radial = Point::new(theta.cos(), theta.sin());
                BoundaryAnchor {
                    point: *center + radial * *radius,
                    normal: radial * *inward,
                }
            }
            Component::Ring(edges) => {
                let total: f64 = edges.iter().map(Segment::length).sum();
                let mut s = t * total;
                for e in edges {
                    let len = e.length();
                    if s <= len {
                        return edge_anchor(e, s / len, 1.0);
                    }
                    s -= len;
                }
                let last = edges.last().expect("ring has edges");
                edge_anchor(last, 1.0, 1.0)
            }
            Component::Slit(seg) => {
                if t < 0.5 {
                    edge_anchor(seg, 2.0 * t, 1.0)
                } else {
                    edge_anchor(seg, 2.0 * t - 1.0, -1.0)
                }
            }
        }
    }
}

fn edge_anchor(e: &Segment, t: f64, side: f64) -> BoundaryAnchor {
    let d = e.b - e.a;
    let len = d.norm();
    BoundaryAnchor {
        point: e.at(t),
        normal: Point::new(-d.y / len, d.x / len) * side,
    }
}

/// Largest-remainder allocation of `count` items proportional to `weights`,
/// giving every component at least one item when there are enough.
fn allocate(count: usize, weights: &[f64]) -> Vec<usize> {
    let k = weights.len();
    let total: f64 = weights.iter().sum();
    let floor_each = usize::from(count >= k);
    let spare = count - floor_each * k;
    let raw: Vec<f64> = weights.iter().map(|w| w / total * spare as f64).collect();
    let mut alloc: Vec<usize> = raw
        .iter()
        .map(|r| floor_each + r.floor() as usize)
        .collect();
    let mut left = count - alloc.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let fa = raw[a] - raw[a].floor();
        let fb = raw[b] - raw[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        alloc[i] += 1;
        left -= 1;
    }
    alloc
}
