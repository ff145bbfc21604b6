//! Domain descriptions, generators and geometric invariants.
//!
//! A [`DomainSpec`] is the serialisable description (the `kind`, a map of
//! named parameters and a convexity hint). [`generate_domain`] validates it
//! and produces a [`Domain`]: a closed boundary loop for planar domains, or a
//! model surface (flat torus, surface of revolution) that is handled by the
//! closed-form oracles instead of the mesher.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{segments_intersect, Boundary, Junction, Point, Segment};
use crate::oracle::RevolutionSurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Polygon,
    Disk,
    RoundedRectangle,
    Dumbbell,
    AnnulusSector,
    Torus,
    Revolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Points(Vec<[f64; 2]>),
    Flag(bool),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub parameters: BTreeMap<String, ParamValue>,
    #[serde(default)]
    pub convex_hint: bool,
}

impl DomainSpec {
    fn with(kind: DomainKind, convex_hint: bool, params: &[(&str, f64)]) -> Self {
        DomainSpec {
            kind,
            parameters: params
                .iter()
                .map(|(k, v)| (k.to_string(), ParamValue::Number(*v)))
                .collect(),
            convex_hint,
        }
    }

    pub fn polygon(vertices: &[[f64; 2]]) -> Self {
        let mut parameters = BTreeMap::new();
        parameters.insert(
            "vertices".to_string(),
            ParamValue::Points(vertices.to_vec()),
        );
        let convex_hint =
            polygon_is_convex(&vertices.iter().map(|&v| Point::from(v)).collect::<Vec<_>>());
        DomainSpec {
            kind: DomainKind::Polygon,
            parameters,
            convex_hint,
        }
    }

    pub fn rectangle(a: f64, b: f64) -> Self {
        Self::polygon(&[[0.0, 0.0], [a, 0.0], [a, b], [0.0, b]])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(1.0, 1.0)
    }

    /// Regular polygon centred at the origin with a vertex on the positive x axis.
    pub fn regular_polygon(sides: usize, circumradius: f64) -> Self {
        let v: Vec<[f64; 2]> = (0..sides)
            .map(|i| {
                let a = TAU * i as f64 / sides as f64;
                [circumradius * a.cos(), circumradius * a.sin()]
            })
            .collect();
        Self::polygon(&v)
    }

    pub fn disk(radius: f64) -> Self {
        Self::with(DomainKind::Disk, true, &[("radius", radius)])
    }

    pub fn rounded_rectangle(length: f64, width: f64, corner_radius: f64) -> Self {
        Self::with(
            DomainKind::RoundedRectangle,
            true,
            &[
                ("length", length),
                ("width", width),
                ("corner_radius", corner_radius),
            ],
        )
    }

    /// Rounded rectangle whose short sides are full semicircles.
    pub fn stadium(length: f64, width: f64) -> Self {
        Self::rounded_rectangle(length, width, width / 2.0)
    }

    pub fn dumbbell(ball_radius: f64, neck_width: f64, neck_length: f64) -> Self {
        Self::with(
            DomainKind::Dumbbell,
            false,
            &[
                ("ball_radius", ball_radius),
                ("neck_width", neck_width),
                ("neck_length", neck_length),
            ],
        )
    }

    pub fn annulus_sector(inner_radius: f64, outer_radius: f64, angle: f64) -> Self {
        Self::with(
            DomainKind::AnnulusSector,
            false,
            &[
                ("inner_radius", inner_radius),
                ("outer_radius", outer_radius),
                ("angle", angle),
            ],
        )
    }

    pub fn torus(a: f64, b: f64) -> Self {
        Self::with(DomainKind::Torus, false, &[("a", a), ("b", b)])
    }

    pub fn revolution(r: f64) -> Self {
        Self::with(DomainKind::Revolution, false, &[("R", r)])
    }

    pub fn number(&self, name: &str) -> Result<f64> {
        match self.parameters.get(name) {
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(*v),
            Some(_) => Err(Error::InvalidDomain(format!(
                "parameter '{name}' must be a finite number"
            ))),
            None => Err(Error::InvalidDomain(format!(
                "missing parameter '{name}' for {:?}",
                self.kind
            ))),
        }
    }

    fn number_or(&self, name: &str, default: f64) -> Result<f64> {
        if self.parameters.contains_key(name) {
            self.number(name)
        } else {
            Ok(default)
        }
    }

    fn flag(&self, name: &str) -> Result<bool> {
        match self.parameters.get(name) {
            None => Ok(false),
            Some(ParamValue::Flag(b)) => Ok(*b),
            Some(_) => Err(Error::InvalidDomain(format!(
                "parameter '{name}' must be a boolean"
            ))),
        }
    }

    fn vertices(&self) -> Result<Vec<Point>> {
        match self.parameters.get("vertices") {
            Some(ParamValue::Points(v)) => Ok(v.iter().map(|&p| Point::from(p)).collect()),
            _ => Err(Error::InvalidDomain(
                "polygon requires a 'vertices' list of [x, y] pairs".into(),
            )),
        }
    }
}

/// Geometric realisation of a [`DomainSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Planar(Boundary),
    /// Flat torus R^2 / (aZ x bZ).
    FlatTorus {
        a: f64,
        b: f64,
    },
    Revolution(RevolutionSurface),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub spec: DomainSpec,
    pub shape: Shape,
    pub convex: bool,
}

impl Domain {
    pub fn boundary(&self) -> Option<&Boundary> {
        match &self.shape {
            Shape::Planar(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_planar(&self) -> bool {
        matches!(self.shape, Shape::Planar(_))
    }

    pub fn signed_distance(&self, p: Point) -> f64 {
        match &self.shape {
            Shape::Planar(b) => b.signed_distance(p),
            _ => f64::NAN,
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        self.boundary().is_some_and(|b| b.contains(p))
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Planar(b) => b.area(),
            Shape::FlatTorus { a, b } => a * b,
            Shape::Revolution(s) => s.area(),
        }
    }

    /// Exact extrinsic diameter with a pair of points realising it.
    pub fn diameter(&self) -> (f64, [Point; 2]) {
        let spec = &self.spec;
        let num = |k: &str| spec.number(k).unwrap_or(f64::NAN);
        match (&self.shape, spec.kind) {
            (Shape::Planar(_), DomainKind::Polygon) => {
                let v = spec.vertices().unwrap_or_default();
                let mut best = (0.0, [v[0], v[0]]);
                for i in 0..v.len() {
                    for j in i + 1..v.len() {
                        let d = v[i].dist(v[j]);
                        if d > best.0 {
                            best = (d, [v[i], v[j]]);
                        }
                    }
                }
                best
            }
            (Shape::Planar(_), DomainKind::Disk) => {
                let r = num("radius");
                (2.0 * r, [Point::new(-r, 0.0), Point::new(r, 0.0)])
            }
            (Shape::Planar(_), DomainKind::RoundedRectangle) => {
                let (l, w, r) = (num("length"), num("width"), num("corner_radius"));
                let c0 = Point::new(r, r);
                let c1 = Point::new(l - r, w - r);
                let span = c1.dist(c0);
                if span == 0.0 {
                    return (2.0 * r, [Point::new(0.0, r), Point::new(2.0 * r, r)]);
                }
                let u = (c1 - c0).normalized();
                (span + 2.0 * r, [c0 - u * r, c1 + u * r])
            }
            (Shape::Planar(_), DomainKind::Dumbbell) => {
                let (big_r, w, len) = (num("ball_radius"), num("neck_width"), num("neck_length"));
                let a = (big_r * big_r - w * w / 4.0).sqrt();
                let half = len / 2.0 + a + big_r;
                (2.0 * half, [Point::new(-half, 0.0), Point::new(half, 0.0)])
            }
            (Shape::Planar(b), _) => sampled_diameter(b, b.perimeter() / 4000.0),
            (Shape::FlatTorus { a, b }, _) => {
                let d = a.hypot(*b) / 2.0;
                (d, [Point::new(0.0, 0.0), Point::new(a / 2.0, b / 2.0)])
            }
            (Shape::Revolution(s), _) => (s.extrinsic_diameter(), [Point::default(); 2]),
        }
    }

    /// Smallest distance between two non-adjacent boundary pieces: the width
    /// of the thinnest neck or strip a mesh has to resolve.
    pub fn feature_size(&self) -> f64 {
        let Some(b) = self.boundary() else {
            return f64::INFINITY;
        };
        let n = b.segments.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                best = best.min(segment_gap(&b.segments[i], &b.segments[j]));
            }
        }
        best
    }
}

fn segment_gap(s: &Segment, t: &Segment) -> f64 {
    let samples = 512;
    let mut best = f64::INFINITY;
    for k in 0..=samples {
        let u = k as f64 / samples as f64;
        best = best
            .min(t.distance(s.point_at(u)))
            .min(s.distance(t.point_at(u)));
    }
    best
}

fn sampled_diameter(b: &Boundary, step: f64) -> (f64, [Point; 2]) {
    let mut pts: Vec<Point> = b.sample(step).into_iter().map(|s| s.point).collect();
    pts.extend(b.segments.iter().map(Segment::end_point));
    let mut best = (0.0, [pts[0], pts[0]]);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].dist(pts[j]);
            if d > best.0 {
                best = (d, [pts[i], pts[j]]);
            }
        }
    }
    best
}

fn polygon_is_convex(v: &[Point]) -> bool {
    let n = v.len();
    n >= 3
        && (0..n).all(|i| {
            let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
            (b - a).cross(c - b) >= -1e-12 * (b - a).norm() * (c - b).norm()
        })
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidDomain(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

/// Validates a spec and builds its boundary representation.
pub fn generate_domain(spec: &DomainSpec) -> Result<Domain> {
    let shape = match spec.kind {
        DomainKind::Polygon => Shape::Planar(polygon_boundary(&spec.vertices()?)?),
        DomainKind::Disk => {
            let r = positive("radius", spec.number("radius")?)?;
            Shape::Planar(Boundary::new(vec![Segment::arc(
                Point::default(),
                r,
                0.0,
                TAU,
            )]))
        }
        DomainKind::RoundedRectangle => {
            let l = positive("length", spec.number("length")?)?;
            let w = positive("width", spec.number("width")?)?;
            let r = spec.number("corner_radius")?;
            if r < 0.0 {
                return Err(Error::InvalidDomain(
                    "corner_radius must be non-negative".into(),
                ));
            }
            if r > w / 2.0 + 1e-15 || r > l / 2.0 + 1e-15 {
                return Err(Error::InvalidDomain(format!(
                    "corner_radius {r} exceeds half the width ({}) or half the length ({})",
                    w / 2.0,
                    l / 2.0
                )));
            }
            Shape::Planar(rounded_rectangle_boundary(
                l,
                w,
                r.min(w / 2.0).min(l / 2.0),
            ))
        }
        DomainKind::Dumbbell => {
            let big_r = positive("ball_radius", spec.number("ball_radius")?)?;
            let w = positive("neck_width", spec.number("neck_width")?)?;
            let len = positive("neck_length", spec.number("neck_length")?)?;
            if w >= 2.0 * big_r {
                return Err(Error::InvalidDomain(format!(
                    "neck_width {w} must be smaller than twice the ball radius {big_r}"
                )));
            }
            Shape::Planar(dumbbell_boundary(big_r, w, len))
        }
        DomainKind::AnnulusSector => {
            let r1 = positive("inner_radius", spec.number("inner_radius")?)?;
            let r2 = positive("outer_radius", spec.number("outer_radius")?)?;
            let ang = positive("angle", spec.number("angle")?)?;
            if r1 >= r2 {
                return Err(Error::InvalidDomain(
                    "inner_radius must be below outer_radius".into(),
                ));
            }
            if ang >= TAU {
                return Err(Error::InvalidDomain(
                    "sector angle must be below 2 pi".into(),
                ));
            }
            let dir = Point::polar(1.0, ang);
            Shape::Planar(Boundary::new(vec![
                Segment::arc(Point::default(), r2, 0.0, ang),
                Segment::line(dir * r2, dir * r1),
                Segment::arc(Point::default(), r1, ang, -ang),
                Segment::line(Point::new(r1, 0.0), Point::new(r2, 0.0)),
            ]))
        }
        DomainKind::Torus => {
            let a = positive("a", spec.number("a")?)?;
            let b = positive("b", spec.number("b")?)?;
            if a < b {
                return Err(Error::InvalidDomain(format!(
                    "torus periods must satisfy a >= b, got a={a}, b={b}"
                )));
            }
            Shape::FlatTorus { a, b }
        }
        DomainKind::Revolution => {
            let r = positive("R", spec.number("R")?)?;
            if spec.flag("thickness")? {
                return Err(Error::InvalidDomain(
                    "thickened (3D shell) surfaces of revolution are not supported; use the surface itself".into(),
                ));
            }
            let scale = positive("scale", spec.number_or("scale", 1.0)?)?;
            Shape::Revolution(RevolutionSurface::new(r)?.with_scale(scale))
        }
    };
    let convex = match &shape {
        Shape::Planar(b) => b.is_convex(),
        _ => false,
    };
    if spec.convex_hint && !convex {
        return Err(Error::InvalidDomain(format!(
            "{:?} marked convex but fails the convexity test",
            spec.kind
        )));
    }
    Ok(Domain {
        spec: spec.clone(),
        shape,
        convex,
    })
}

fn polygon_boundary(v: &[Point]) -> Result<Boundary> {
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidDomain(
            "polygon needs at least three vertices".into(),
        ));
    }
    for i in 0..n {
        if v[i].dist(v[(i + 1) % n]) == 0.0 {
            return Err(Error::InvalidDomain(format!(
                "repeated vertex at index {i}"
            )));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return Err(Error::InvalidDomain(format!(
                    "polygon self-intersects: edges {i} and {j}"
                )));
            }
        }
    }
    let b = Boundary::new(
        (0..n)
            .map(|i| Segment::line(v[i], v[(i + 1) % n]))
            .collect(),
    );
    let area = b.area();
    if area.abs() < 1e-14 {
        return Err(Error::Degenerate("polygon has zero area".into()));
    }
    if area < 0.0 {
        return Err(Error::InvalidDomain(
            "polygon vertices must be listed counterclockwise".into(),
        ));
    }
    Ok(b)
}

fn rounded_rectangle_boundary(l: f64, w: f64, r: f64) -> Boundary {
    let p = Point::new;
    let mut segs = Vec::new();
    let push_line = |a: Point, b: Point, segs: &mut Vec<Segment>| {
        if a.dist(b) > 1e-14 * l.max(w) {
            segs.push(Segment::line(a, b));
        }
    };
    push_line(p(r, 0.0), p(l - r, 0.0), &mut segs);
    if r > 0.0 {
        segs.push(Segment::arc(p(l - r, r), r, -PI / 2.0, PI / 2.0));
    }
    push_line(p(l, r), p(l, w - r), &mut segs);
    if r > 0.0 {
        segs.push(Segment::arc(p(l - r, w - r), r, 0.0, PI / 2.0));
    }
    push_line(p(l - r, w), p(r, w), &mut segs);
    if r > 0.0 {
        segs.push(Segment::arc(p(r, w - r), r, PI / 2.0, PI / 2.0));
    }
    push_line(p(0.0, w - r), p(0.0, r), &mut segs);
    if r > 0.0 {
        segs.push(Segment::arc(p(r, r), r, PI, PI / 2.0));
    }
    Boundary::new(segs)
}

/// Two discs of radius `big_r` joined by a straight neck of width `w` whose
/// straight part has length `len`, symmetric about both axes.
fn dumbbell_boundary(big_r: f64, w: f64, len: f64) -> Boundary {
    let a = (big_r * big_r - w * w / 4.0).sqrt();
    let delta = (w / 2.0).atan2(a);
    let half = len / 2.0;
    let right = Point::new(half + a, 0.0);
    let left = Point::new(-half - a, 0.0);
    Boundary::new(vec![
        Segment::line(Point::new(-half, -w / 2.0), Point::new(half, -w / 2.0)),
        Segment::arc(right, big_r, -PI + delta, TAU - 2.0 * delta),
        Segment::line(Point::new(half, w / 2.0), Point::new(-half, w / 2.0)),
        Segment::arc(left, big_r, delta, TAU - 2.0 * delta),
    ])
}

/// Dilates every length parameter by `t`.
pub fn scale_domain(domain: &Domain, t: f64) -> Result<Domain> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "scale factor must be positive, got {t}"
        )));
    }
    let mut spec = domain.spec.clone();
    let lengths: &[&str] = match spec.kind {
        DomainKind::Polygon => &[],
        DomainKind::Disk => &["radius"],
        DomainKind::RoundedRectangle => &["length", "width", "corner_radius"],
        DomainKind::Dumbbell => &["ball_radius", "neck_width", "neck_length"],
        DomainKind::AnnulusSector => &["inner_radius", "outer_radius"],
        DomainKind::Torus => &["a", "b"],
        DomainKind::Revolution => &[],
    };
    for key in lengths {
        let v = spec.number(key)?;
        spec.parameters
            .insert(key.to_string(), ParamValue::Number(v * t));
    }
    match spec.kind {
        DomainKind::Polygon => {
            let v = spec.vertices()?;
            spec.parameters.insert(
                "vertices".into(),
                ParamValue::Points(v.iter().map(|p| [p.x * t, p.y * t]).collect()),
            );
        }
        DomainKind::Revolution => {
            let s = spec.number_or("scale", 1.0)?;
            spec.parameters
                .insert("scale".into(), ParamValue::Number(s * t));
        }
        _ => {}
    }
    generate_domain(&spec)
}

/// Geometric quantities entering the eigenvalue inequalities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricInvariants {
    pub n: usize,
    pub d: f64,
    pub d_bar: f64,
    pub inradius_rho: f64,
    pub rad: f64,
    pub vol: f64,
    pub kappa: f64,
    pub inj_inverse: f64,
    /// Planar domain passing the convexity test.
    pub convex: bool,
    /// Closed surface (no boundary).
    pub closed: bool,
    /// Grid/sampling resolution the approximate quantities were computed at.
    pub resolution: f64,
    /// One-sided error bound of `d_bar` (sampling step of the visibility graph).
    pub d_bar_error: f64,
    pub diameter_endpoints: [Point; 2],
    pub inradius_center: Option<Point>,
}

impl GeometricInvariants {
    /// `0 <= rad <= inradius <= d/2 <= d_bar/2`, checked up to `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        self.rad >= 0.0
            && self.rad <= self.inradius_rho + tol
            && self.inradius_rho <= self.d / 2.0 + tol
            && self.d <= self.d_bar + tol
            && self.vol > 0.0
    }
}

/// Computes the invariants of a domain. `resolution` sets the boundary sampling
/// step and the inradius search grid.
pub fn invariants(domain: &Domain, resolution: f64) -> Result<GeometricInvariants> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let vol = domain.area();
    if !(vol > 0.0) {
        return Err(Error::Degenerate(format!(
            "domain area {vol} is not positive"
        )));
    }
    let (d, ends) = domain.diameter();
    match &domain.shape {
        Shape::Planar(b) => {
            let (inradius_rho, center) = inradius(b, resolution);
            let rad = rolling_radius(b, resolution, d);
            let (d_graph, d_bar_error) = intrinsic_diameter(b, resolution, domain.convex);
            Ok(GeometricInvariants {
                n: 2,
                d,
                d_bar: d_graph.max(d),
                inradius_rho,
                rad,
                vol,
                kappa: 0.0,
                inj_inverse: 0.0,
                convex: domain.convex,
                closed: false,
                resolution,
                d_bar_error,
                diameter_endpoints: ends,
                inradius_center: Some(center),
            })
        }
        Shape::FlatTorus { a: _, b } => Ok(GeometricInvariants {
            n: 2,
            d,
            d_bar: d,
            inradius_rho: b / 2.0,
            rad: b / 2.0,
            vol,
            kappa: 0.0,
            inj_inverse: 2.0 / b,
            convex: false,
            closed: true,
            resolution,
            d_bar_error: 0.0,
            diameter_endpoints: ends,
            inradius_center: None,
        }),
        Shape::Revolution(s) => {
            let half_meridian = s.meridian_length() / 2.0;
            Ok(GeometricInvariants {
                n: 2,
                d,
                d_bar: s.intrinsic_diameter(resolution).max(d),
                inradius_rho: half_meridian,
                rad: half_meridian,
                vol,
                kappa: 0.0,
                inj_inverse: 0.0,
                convex: false,
                closed: false,
                resolution,
                d_bar_error: resolution,
                diameter_endpoints: ends,
                inradius_center: None,
            })
        }
    }
}

/// Largest inscribed disc: grid search followed by a compass search.
fn inradius(b: &Boundary, resolution: f64) -> (f64, Point) {
    let (lo, hi) = b.bbox();
    let nx = ((hi.x - lo.x) / resolution).ceil().max(1.0) as usize;
    let ny = ((hi.y - lo.y) / resolution).ceil().max(1.0) as usize;
    let mut cands: Vec<(f64, Point)> = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            let p = Point::new(
                lo.x + (hi.x - lo.x) * i as f64 / nx as f64,
                lo.y + (hi.y - lo.y) * j as f64 / ny as f64,
            );
            let s = -b.signed_distance(p);
            if s > 0.0 {
                cands.push((s, p));
            }
        }
    }
    if cands.is_empty() {
        let p = b.segments[0].point_at(0.5);
        cands.push((0.0, p));
    }
    cands.sort_by(|x, y| y.0.total_cmp(&x.0));
    cands.truncate(8);
    let f = |p: Point| -b.signed_distance(p);
    let mut best = cands[0];
    for (v0, p0) in cands {
        let (mut v, mut p) = (v0, p0);
        let mut step = resolution;
        while step > 1e-13 * (1.0 + hi.x - lo.x) {
            let mut moved = false;
            for k in 0..8 {
                let dir = Point::polar(step, k as f64 * PI / 4.0);
                let q = p + dir;
                let fq = f(q);
                if fq > v {
                    v = fq;
                    p = q;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, p);
        }
    }
    best
}

/// Minimum over boundary samples of the largest interior disc tangent at the
/// sample, found by bisection on `dist(p + t n) - t`, which is non-increasing in
/// `t`. Any convex corner forces zero.
fn rolling_radius(b: &Boundary, resolution: f64, diameter: f64) -> f64 {
    if b.junctions().contains(&Junction::ConvexCorner) {
        return 0.0;
    }
    let eps = 1e-9 * diameter;
    let mut best = f64::INFINITY;
    for s in b.sample(resolution) {
        let seg = &b.segments[s.segment];
        let normal = seg.tangent_at(s.t).perp();
        let g = |t: f64| b.distance(s.point + normal * t) - t;
        let (mut lo, mut hi) = (0.0, diameter);
        if g(hi) >= -eps {
            best = best.min(hi);
            continue;
        }
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= -eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        best = best.min(lo);
    }
    best
}

/// Longest shortest path inside the domain, over a visibility graph on
/// boundary samples. Returns the estimate and the sampling step.
fn intrinsic_diameter(b: &Boundary, resolution: f64, convex: bool) -> (f64, f64) {
    let step = resolution.max(b.perimeter() / 600.0);
    let mut pts: Vec<Point> = b.sample(step).into_iter().map(|s| s.point).collect();
    pts.dedup_by(|a, c| a.dist(*c) < 1e-14);
    let n = pts.len();
    if convex {
        let mut best: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(pts[i].dist(pts[j]));
            }
        }
        return (best, step);
    }
    let scale = b.perimeter();
    let mut visible = vec![false; n * n];
    for i in 0..n {
        visible[i * n + i] = true;
        for j in i + 1..n {
            let v = b.segment_inside(pts[i], pts[j], 1e-9 * scale);
            visible[i * n + j] = v;
            visible[j * n + i] = v;
        }
    }
    let mut best: f64 = 0.0;
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for src in 0..n {
        dist.fill(f64::INFINITY);
        done.fill(false);
        dist[src] = 0.0;
        for _ in 0..n {
            let mut u = usize::MAX;
            let mut du = f64::INFINITY;
            for (k, (&dk, &fk)) in dist.iter().zip(&done).enumerate() {
                if !fk && dk < du {
                    du = dk;
                    u = k;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for v in 0..n {
                if !done[v] && visible[u * n + v] {
                    let alt = du + pts[u].dist(pts[v]);
                    if alt < dist[v] {
                        dist[v] = alt;
                    }
                }
            }
        }
        best = best.max(
            dist.iter()
                .cloned()
                .filter(|d| d.is_finite())
                .fold(0.0, f64::max),
        );
    }
    (best, step)
}

/// Shortest paths on a weighted grid graph; shared by the surface-of-revolution
/// intrinsic diameter.
pub(crate) fn dijkstra_grid<F>(nodes: usize, source: usize, mut neighbors: F) -> Vec<f64>
where
    F: FnMut(usize, &mut Vec<(usize, f64)>),
{
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> Ordering {
            o.0.total_cmp(&self.0)
        }
    }
    let mut dist = vec![f64::INFINITY; nodes];
    let mut heap = BinaryHeap::new();
    let mut buf = Vec::new();
    dist[source] = 0.0;
    heap.push(Item(0.0, source));
    while let Some(Item(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        buf.clear();
        neighbors(u, &mut buf);
        for &(v, w) in &buf {
            let alt = d + w;
            if alt < dist[v] {
                dist[v] = alt;
                heap.push(Item(alt, v));
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_generator() {
        let d = generate_domain(&DomainSpec::unit_square()).unwrap();
        let b = d.boundary().unwrap();
        assert_eq!(b.segments.len(), 4);
        assert!(d.convex);
        assert!(b.signed_distance(Point::new(0.5, 0.5)) < 0.0);
    }

    #[test]
    fn rounded_rectangle_area() {
        let d = generate_domain(&DomainSpec::rounded_rectangle(1.0, 0.2, 0.1)).unwrap();
        let expected = 1.0 * 0.2 - (4.0 - PI) * 0.01;
        assert!((d.area() - expected).abs() < 1e-14);
        assert!(d.convex);
    }

    #[test]
    fn dumbbell_shape() {
        let d = generate_domain(&DomainSpec::dumbbell(1.0, 0.05, 1.0)).unwrap();
        assert!(!d.convex);
        let b = d.boundary().unwrap();
        assert_eq!(
            b.segments
                .iter()
                .filter(|s| matches!(s, Segment::Arc { .. }))
                .count(),
            2
        );
        // Closed loop.
        for i in 0..b.segments.len() {
            let e = b.segments[i].end_point();
            let s = b.segments[(i + 1) % b.segments.len()].start_point();
            assert!(e.dist(s) < 1e-12);
        }
        assert!(d.contains(Point::new(0.0, 0.0)));
        assert!(!d.contains(Point::new(0.0, 0.1)));
        assert!((d.feature_size() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_domain(&DomainSpec::rounded_rectangle(1.0, 0.2, 0.15)).is_err());
        assert!(generate_domain(&DomainSpec::dumbbell(1.0, 2.5, 1.0)).is_err());
        assert!(generate_domain(&DomainSpec::torus(0.5, 1.0)).is_err());
        assert!(generate_domain(&DomainSpec::revolution(-1.0)).is_err());
        let bowtie = DomainSpec::polygon(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(
            generate_domain(&bowtie),
            Err(Error::InvalidDomain(_))
        ));
        let clockwise = DomainSpec::polygon(&[[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]);
        assert!(generate_domain(&clockwise).is_err());
        let mut lying =
            DomainSpec::polygon(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [2.0, 1.0], [0.0, 1.0]]);
        lying.convex_hint = true;
        assert!(generate_domain(&lying).is_err());
    }

    #[test]
    fn square_invariants() {
        let d = generate_domain(&DomainSpec::unit_square()).unwrap();
        let inv = invariants(&d, 0.01).unwrap();
        assert!((inv.d - 2f64.sqrt()).abs() < 1e-15);
        assert!((inv.inradius_rho - 0.5).abs() < 1e-9);
        assert_eq!(inv.rad, 0.0);
        assert!((inv.vol - 1.0).abs() < 1e-15);
        assert!((inv.d_bar - inv.d).abs() <= 2.0 * 0.01);
        assert!(inv.chain_holds(1e-12));
    }

    #[test]
    fn disk_invariants() {
        let d = generate_domain(&DomainSpec::disk(1.0)).unwrap();
        let inv = invariants(&d, 0.01).unwrap();
        assert_eq!(inv.d, 2.0);
        assert!((inv.d_bar - 2.0).abs() < 2e-2);
        assert!((inv.inradius_rho - 1.0).abs() < 1e-9);
        assert!((inv.rad - 1.0).abs() < 1e-6);
        assert!((inv.vol - PI).abs() < 1e-12);
    }

    #[test]
    fn rounded_rectangle_invariants_match_brute_force() {
        let d = generate_domain(&DomainSpec::rounded_rectangle(1.0, 0.2, 0.1)).unwrap();
        let inv = invariants(&d, 0.005).unwrap();
        assert!((inv.rad - 0.1).abs() < 1e-6);
        assert!((inv.inradius_rho - 0.1).abs() < 1e-9);
        // Brute force: max pairwise distance over a dense boundary sampling.
        let (brute, _) = sampled_diameter(d.boundary().unwrap(), 1e-4);
        assert!((inv.d - brute).abs() < 1e-6, "{} vs {}", inv.d, brute);
        assert!((inv.d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dumbbell_invariants() {
        let d = generate_domain(&DomainSpec::dumbbell(1.0, 0.1, 1.0)).unwrap();
        let inv = invariants(&d, 0.01).unwrap();
        assert!((inv.rad - 0.05).abs() < 1e-6, "rad {}", inv.rad);
        assert!((inv.inradius_rho - 1.0).abs() < 1e-9);
        let a = (1.0f64 - 0.0025).sqrt();
        assert!((inv.d - (1.0 + 2.0 * a + 2.0)).abs() < 1e-12);
        assert!((inv.d_bar - inv.d).abs() < 0.05);
        assert!(inv.chain_holds(1e-9));
    }

    #[test]
    fn annulus_sector_intrinsic_exceeds_extrinsic() {
        // Three-quarter annulus: shortest paths between the two radial ends
        // must wrap around the hole.
        let d = generate_domain(&DomainSpec::annulus_sector(0.5, 1.0, 1.5 * PI)).unwrap();
        assert!(!d.convex);
        let inv = invariants(&d, 0.01).unwrap();
        assert_eq!(inv.rad, 0.0);
        assert!(inv.d_bar > inv.d + 0.1, "d_bar {} d {}", inv.d_bar, inv.d);
        assert!(inv.chain_holds(1e-9));
    }

    #[test]
    fn scaling_parameters() {
        let d = generate_domain(&DomainSpec::dumbbell(1.0, 0.05, 1.0)).unwrap();
        let s = scale_domain(&d, 3.0).unwrap();
        assert_eq!(s.spec.number("ball_radius").unwrap(), 3.0);
        assert!((s.spec.number("neck_width").unwrap() - 0.15).abs() < 1e-15);
        assert_eq!(s.spec.number("neck_length").unwrap(), 3.0);
        assert!(scale_domain(&d, 0.0).is_err());
        assert!(scale_domain(&d, -1.0).is_err());
        let sq = scale_domain(&generate_domain(&DomainSpec::unit_square()).unwrap(), 2.0).unwrap();
        assert!((sq.diameter().0 - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = DomainSpec::rounded_rectangle(1.0, 0.2, 0.1);
        let js = serde_json::to_string(&spec).unwrap();
        assert!(js.contains("\"kind\":\"rounded_rectangle\""));
        assert!(js.contains("\"convex_hint\":true"));
        let back: DomainSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, spec);
        let poly: DomainSpec =
            serde_json::from_str(r#"{"kind":"polygon","parameters":{"vertices":[[0,0],[1,0],[0,1]]},"convex_hint":true}"#)
                .unwrap();
        assert!(generate_domain(&poly).unwrap().convex);
    }
}
