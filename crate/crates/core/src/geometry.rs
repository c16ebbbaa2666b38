//! Planar primitives: points, segments and the exact predicates the domain
//! and graph code rely on.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A point of the plane. Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: &Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point::new(c[0], c[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// A closed segment `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Point; 2]", into = "[Point; 2]")]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl From<[Point; 2]> for Segment {
    fn from(s: [Point; 2]) -> Self {
        Segment { a: s[0], b: s[1] }
    }
}

impl From<Segment> for [Point; 2] {
    fn from(s: Segment) -> Self {
        [s.a, s.b]
    }
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    /// Point at arclength fraction `t ∈ [0, 1]`.
    pub fn at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    pub fn distance_to(&self, p: &Point) -> f64 {
        let d = self.b - self.a;
        let len2 = d.dot(&d);
        if len2 == 0.0 {
            return self.a.dist(p);
        }
        let t = ((*p - self.a).dot(&d) / len2).clamp(0.0, 1.0);
        self.at(t).dist(p)
    }

    /// Closed-segment intersection test; touching counts as intersecting.
    pub fn intersects(&self, other: &Segment) -> bool {
        let (p1, p2, p3, p4) = (self.a, self.b, other.a, other.b);
        let d1 = orient(p3, p4, p1);
        let d2 = orient(p3, p4, p2);
        let d3 = orient(p1, p2, p3);
        let d4 = orient(p1, p2, p4);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && on_segment(p3, p4, p1))
            || (d2 == 0.0 && on_segment(p3, p4, p2))
            || (d3 == 0.0 && on_segment(p1, p2, p3))
            || (d4 == 0.0 && on_segment(p1, p2, p4))
    }
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(&(c - a))
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.min.dist(&self.max)
    }
}

/// Even-odd point-in-polygon test on an implicitly closed vertex ring.
/// Points on the ring may be classified either way; callers exclude them
/// with a distance check.
pub fn polygon_contains(ring: &[Point], p: &Point) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Twice the signed area of a vertex ring (positive for counter-clockwise).
pub fn signed_area2(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| ring[i].cross(&ring[(i + 1) % n])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distance_cases() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(s.distance_to(&Point::new(0.5, 2.0)), 2.0);
        assert_eq!(s.distance_to(&Point::new(-3.0, 4.0)), 5.0);
        let dot = Segment::new(Point::new(1.0, 1.0), Point::new(1.0, 1.0));
        assert_eq!(dot.distance_to(&Point::new(4.0, 5.0)), 5.0);
    }

    #[test]
    fn intersection_includes_touching() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(2.0, 2.0));
        let crossing = Segment::new(Point::new(0.0, 2.0), Point::new(2.0, 0.0));
        let grazing = Segment::new(Point::new(1.0, 1.0), Point::new(3.0, 0.0));
        let apart = Segment::new(Point::new(3.0, 0.0), Point::new(4.0, 0.0));
        let collinear = Segment::new(Point::new(1.5, 1.5), Point::new(5.0, 5.0));
        assert!(s.intersects(&crossing));
        assert!(s.intersects(&grazing));
        assert!(!s.intersects(&apart));
        assert!(s.intersects(&collinear));
    }

    #[test]
    fn polygon_membership() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert!(polygon_contains(&square, &Point::new(0.5, 0.5)));
        assert!(!polygon_contains(&square, &Point::new(1.5, 0.5)));
        assert_eq!(signed_area2(&square), 2.0);
    }

    #[test]
    fn point_serializes_as_pair() {
        let p = Point::new(0.25, -1.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[0.25,-1.0]");
        let q: Point = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }
}
