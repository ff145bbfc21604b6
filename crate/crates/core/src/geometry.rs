//! Planar primitives: points, boundary segments (lines and circular arcs) and
//! closed boundary loops with exact signed distance, winding and area.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(p: [f64; 2]) -> Self {
        Point { x: p[0], y: p[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Counterclockwise rotation by a right angle.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        Point::new(self.x / n, self.y / n)
    }

    pub fn polar(r: f64, angle: f64) -> Point {
        Point::new(r * angle.cos(), r * angle.sin())
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
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

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Signed angle in (-pi, pi] from `a` to `b`.
pub fn signed_angle(a: Point, b: Point) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Reduces an angle to [0, 2pi).
pub fn wrap_positive(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// One piece of a boundary curve. Arcs carry a signed sweep: positive means
/// counterclockwise traversal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Segment {
    Line {
        a: Point,
        b: Point,
    },
    Arc {
        center: Point,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Segment {
    pub fn line(a: Point, b: Point) -> Self {
        Segment::Line { a, b }
    }

    pub fn arc(center: Point, radius: f64, start: f64, sweep: f64) -> Self {
        Segment::Arc {
            center,
            radius,
            start,
            sweep,
        }
    }

    pub fn is_full_circle(&self) -> bool {
        matches!(self, Segment::Arc { sweep, .. } if sweep.abs() >= TAU - 1e-12)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => a.dist(b),
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn point_at(&self, t: f64) -> Point {
        match *self {
            Segment::Line { a, b } => a.lerp(b, t),
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + Point::polar(radius, start + t * sweep),
        }
    }

    pub fn start_point(&self) -> Point {
        self.point_at(0.0)
    }

    pub fn end_point(&self) -> Point {
        self.point_at(1.0)
    }

    /// Unit tangent in the direction of traversal.
    pub fn tangent_at(&self, t: f64) -> Point {
        match *self {
            Segment::Line { a, b } => (b - a).normalized(),
            Segment::Arc { start, sweep, .. } => {
                let ang = start + t * sweep;
                Point::new(-ang.sin(), ang.cos()) * sweep.signum()
            }
        }
    }

    /// Closest point on the segment and its parameter.
    pub fn closest(&self, p: Point) -> (Point, f64) {
        match *self {
            Segment::Line { a, b } => {
                let ab = b - a;
                let len2 = ab.dot(ab);
                let t = if len2 > 0.0 {
                    ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                (a.lerp(b, t), t)
            }
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let v = p - center;
                if v.norm() == 0.0 {
                    return (self.point_at(0.0), 0.0);
                }
                let phi = v.y.atan2(v.x);
                let offset = wrap_positive((phi - start) * sweep.signum());
                if offset <= sweep.abs() {
                    let t = offset / sweep.abs();
                    (center + v.normalized() * radius, t)
                } else {
                    let (s, e) = (self.point_at(0.0), self.point_at(1.0));
                    if p.dist(s) <= p.dist(e) {
                        (s, 0.0)
                    } else {
                        (e, 1.0)
                    }
                }
            }
        }
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.closest(p).0.dist(p)
    }

    /// Contribution of this piece to the winding angle of a closed loop about `p`.
    pub fn winding_angle(&self, p: Point) -> f64 {
        match *self {
            Segment::Line { a, b } => signed_angle(a - p, b - p),
            Segment::Arc {
                center,
                radius,
                sweep,
                ..
            } => {
                let inside_disk = p.dist(center) < radius;
                if self.is_full_circle() {
                    return if inside_disk {
                        TAU * sweep.signum()
                    } else {
                        0.0
                    };
                }
                let a = self.start_point();
                let b = self.end_point();
                let chord = signed_angle(a - p, b - p);
                let mid = self.point_at(0.5);
                let side_p = (b - a).cross(p - a);
                let side_m = (b - a).cross(mid - a);
                if inside_disk && side_p * side_m > 0.0 {
                    chord + TAU * sweep.signum()
                } else {
                    chord
                }
            }
        }
    }

    /// Contribution to the enclosed area, 1/2 of the line integral of x dy - y dx.
    pub fn area_contribution(&self) -> f64 {
        match *self {
            Segment::Line { a, b } => 0.5 * a.cross(b),
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let end = start + sweep;
                let lin = radius
                    * (center.x * (end.sin() - start.sin()) + center.y * (start.cos() - end.cos()));
                0.5 * (lin + radius * radius * sweep)
            }
        }
    }

    pub fn scaled(&self, s: f64) -> Segment {
        match *self {
            Segment::Line { a, b } => Segment::Line { a: a * s, b: b * s },
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => Segment::Arc {
                center: center * s,
                radius: radius * s,
                start,
                sweep,
            },
        }
    }

    /// Parameters in (eps, 1 - eps) of transversal crossings of the open query
    /// segment `p -> q` with this piece.
    fn crosses(&self, p: Point, q: Point) -> bool {
        const EPS: f64 = 1e-9;
        let d = q - p;
        match *self {
            Segment::Line { a, b } => {
                let e = b - a;
                let denom = d.cross(e);
                if denom.abs() <= 1e-14 * d.norm() * e.norm() {
                    return false;
                }
                let t = (a - p).cross(e) / denom;
                let s = (a - p).cross(d) / denom;
                t > EPS && t < 1.0 - EPS && s > -EPS && s < 1.0 + EPS
            }
            Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let f = p - center;
                let aa = d.dot(d);
                let bb = 2.0 * f.dot(d);
                let cc = f.dot(f) - radius * radius;
                let disc = bb * bb - 4.0 * aa * cc;
                if disc <= 1e-12 * aa * radius * radius {
                    return false;
                }
                let sq = disc.sqrt();
                [(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)]
                    .into_iter()
                    .any(|t| {
                        if t <= EPS || t >= 1.0 - EPS {
                            return false;
                        }
                        let x = p + d * t - center;
                        let off = wrap_positive((x.y.atan2(x.x) - start) * sweep.signum());
                        off <= sweep.abs() + 1e-12
                    })
            }
        }
    }
}

/// A point on the boundary together with the segment it lies on.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub point: Point,
    pub segment: usize,
    pub t: f64,
}

/// Closed, counterclockwise boundary loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pub segments: Vec<Segment>,
}

/// Classification of a junction between consecutive boundary segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Junction {
    Smooth,
    ConvexCorner,
    ReflexCorner,
}

impl Boundary {
    pub fn new(segments: Vec<Segment>) -> Self {
        Boundary { segments }
    }

    pub fn area(&self) -> f64 {
        self.segments.iter().map(Segment::area_contribution).sum()
    }

    pub fn perimeter(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    pub fn winding_number(&self, p: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| s.winding_angle(p))
            .sum::<f64>()
            / TAU
    }

    pub fn contains(&self, p: Point) -> bool {
        self.winding_number(p).abs() > 0.5
    }

    pub fn distance(&self, p: Point) -> f64 {
        self.segments
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    /// Nearest boundary point with its segment index.
    pub fn project(&self, p: Point) -> (Point, usize) {
        let mut best = (p, 0, f64::INFINITY);
        for (i, s) in self.segments.iter().enumerate() {
            let (q, _) = s.closest(p);
            let d = q.dist(p);
            if d < best.2 {
                best = (q, i, d);
            }
        }
        (best.0, best.1)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in self.sample(self.perimeter() / 2048.0) {
            lo = Point::new(lo.x.min(s.point.x), lo.y.min(s.point.y));
            hi = Point::new(hi.x.max(s.point.x), hi.y.max(s.point.y));
        }
        // Arc extremes between samples.
        for seg in &self.segments {
            if let Segment::Arc {
                center,
                radius,
                start,
                sweep,
            } = *seg
            {
                for k in 0..4 {
                    let ang = k as f64 * PI / 2.0;
                    let off = wrap_positive((ang - start) * sweep.signum());
                    if off <= sweep.abs() {
                        let p = center + Point::polar(radius, ang);
                        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
                    }
                }
            }
        }
        (lo, hi)
    }

    /// Samples every segment with pieces no longer than `step`; each segment's
    /// end point is omitted because it is the next segment's start.
    pub fn sample(&self, step: f64) -> Vec<BoundarySample> {
        let mut out = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let n = (seg.length() / step).ceil().max(1.0) as usize;
            for j in 0..n {
                let t = j as f64 / n as f64;
                out.push(BoundarySample {
                    point: seg.point_at(t),
                    segment: i,
                    t,
                });
            }
        }
        out
    }

    pub fn junctions(&self) -> Vec<Junction> {
        let n = self.segments.len();
        (0..n)
            .map(|i| {
                let prev = &self.segments[(i + n - 1) % n];
                let next = &self.segments[i];
                let t_in = prev.tangent_at(1.0);
                let t_out = next.tangent_at(0.0);
                let turn = signed_angle(t_in, t_out);
                if turn.abs() < 1e-9 {
                    Junction::Smooth
                } else if turn > 0.0 {
                    Junction::ConvexCorner
                } else {
                    Junction::ReflexCorner
                }
            })
            .collect()
    }

    /// True when every arc turns left and no junction turns right, with a total
    /// turning of one full revolution.
    pub fn is_convex(&self) -> bool {
        let arcs_ok = self.segments.iter().all(|s| match s {
            Segment::Arc { sweep, .. } => *sweep > 0.0,
            Segment::Line { .. } => true,
        });
        let corners_ok = self
            .junctions()
            .iter()
            .all(|j| *j != Junction::ReflexCorner);
        let mut turning: f64 = self
            .segments
            .iter()
            .map(|s| match s {
                Segment::Arc { sweep, .. } => *sweep,
                Segment::Line { .. } => 0.0,
            })
            .sum();
        let n = self.segments.len();
        for i in 0..n {
            let prev = &self.segments[(i + n - 1) % n];
            turning += signed_angle(prev.tangent_at(1.0), self.segments[i].tangent_at(0.0));
        }
        arcs_ok && corners_ok && (turning - TAU).abs() < 1e-6
    }

    /// Whether the closed segment `p q` stays inside the closed domain. Grazing
    /// contact with the boundary is allowed.
    pub fn segment_inside(&self, p: Point, q: Point, tol: f64) -> bool {
        if self.segments.iter().any(|s| s.crosses(p, q)) {
            return false;
        }
        self.signed_distance(p.lerp(q, 0.5)) <= tol
    }

    pub fn scaled(&self, s: f64) -> Boundary {
        Boundary {
            segments: self.segments.iter().map(|g| g.scaled(s)).collect(),
        }
    }
}

/// Twice the signed area of the triangle `a b c`.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Proper intersection of the closed segments `a b` and `c d`, excluding
/// contacts at shared endpoints.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    let shared = |p: Point| p == a || p == b;
    (d1 == 0.0 && on(c, d, a) && !(a == c || a == d))
        || (d2 == 0.0 && on(c, d, b) && !(b == c || b == d))
        || (d3 == 0.0 && on(a, b, c) && !shared(c))
        || (d4 == 0.0 && on(a, b, d) && !shared(d))
}
