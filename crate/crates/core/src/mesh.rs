//! Conforming triangle meshes of planar domains.
//!
//! The boundary is sampled (arcs finely enough that chords stay within
//! `h^2/8` of the curve), the interior is seeded with a hexagonal lattice, and
//! the constrained Delaunay triangulation is refined to a minimum angle and
//! maximum area before the quality bounds are checked.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::geometry::{orient, Boundary, Point, Segment};

/// Largest edge allowed relative to the target size.
pub const MAX_EDGE_FACTOR: f64 = 1.5;
/// Smallest interior angle, in degrees.
pub const MIN_ANGLE_DEG: f64 = 20.0;

/// Which boundary conditions an edge can carry. All edges of a planar domain
/// boundary carry both; Neumann is natural and needs no marking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeTag {
    DirichletCapable,
    NeumannCapable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: EdgeTag,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
    /// Exact boundary used to re-project midpoints on refinement.
    #[serde(skip)]
    pub boundary: Option<Boundary>,
}

/// Mesh quality figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quality {
    pub max_edge: f64,
    pub min_angle_deg: f64,
    pub min_area: f64,
}

impl TriMesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [i, j, k] = self.triangles[t];
        [self.vertices[i], self.vertices[j], self.vertices[k]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn boundary_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            flags[e.a] = true;
            flags[e.b] = true;
        }
        flags
    }

    pub fn edges(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    pub fn quality(&self) -> Quality {
        let mut q = Quality {
            max_edge: 0.0,
            min_angle_deg: 180.0,
            min_area: f64::INFINITY,
        };
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            q.min_area = q.min_area.min(self.triangle_area(t));
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                q.max_edge = q.max_edge.max(a.dist(b));
                let (u, v) = (b - a, c - a);
                let ang = u.cross(v).atan2(u.dot(v)).abs().to_degrees();
                q.min_angle_deg = q.min_angle_deg.min(ang);
            }
        }
        q
    }

    /// Structural checks: positive orientation, manifold edges, closed boundary
    /// loops, and the Euler characteristic of a disk.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::InvalidMesh(format!(
                    "triangle {t} has non-positive area"
                )));
            }
        }
        let edges = self.edges();
        let mut on_boundary = 0;
        for (&(a, b), &count) in &edges {
            match count {
                1 => on_boundary += 1,
                2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge ({a}, {b}) shared by {count} triangles"
                    )))
                }
            }
        }
        if on_boundary != self.boundary_edges.len() {
            return Err(Error::InvalidMesh(format!(
                "{} boundary edges listed but {on_boundary} edges belong to one triangle",
                self.boundary_edges.len()
            )));
        }
        let mut degree = vec![0usize; n];
        for e in &self.boundary_edges {
            if edges.get(&(e.a.min(e.b), e.a.max(e.b))) != Some(&1) {
                return Err(Error::InvalidMesh(format!(
                    "boundary edge ({}, {}) is not a hull edge",
                    e.a, e.b
                )));
            }
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        if degree.iter().any(|&d| d != 0 && d != 2) {
            return Err(Error::InvalidMesh(
                "boundary edges do not form closed loops".into(),
            ));
        }
        let used = {
            let mut u = vec![false; n];
            self.triangles.iter().flatten().for_each(|&i| u[i] = true);
            u
        };
        if used.iter().any(|u| !u) {
            return Err(Error::InvalidMesh("mesh has unreferenced vertices".into()));
        }
        let euler = n as i64 - edges.len() as i64 + self.triangles.len() as i64;
        if euler != 1 {
            return Err(Error::InvalidMesh(format!(
                "Euler characteristic V - E + T = {euler}, expected 1"
            )));
        }
        Ok(())
    }

    /// Text format: `V T B` header, then vertex, triangle and boundary lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} {} {}",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for v in &self.vertices {
            let _ = writeln!(s, "{:e} {:e}", v.x, v.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
        }
        for e in &self.boundary_edges {
            let _ = writeln!(s, "{} {}", e.a, e.b);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<TriMesh> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| -> Result<&str> {
            tokens
                .next()
                .ok_or_else(|| Error::Parse(format!("mesh file ended while reading {what}")))
        };
        fn int(s: &str) -> Result<usize> {
            s.parse()
                .map_err(|_| Error::Parse(format!("expected an index, found {s:?}")))
        }
        fn real(s: &str) -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("expected a number, found {s:?}")))
        }
        let (nv, nt, nb) = (
            int(next("header")?)?,
            int(next("header")?)?,
            int(next("header")?)?,
        );
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push(Point::new(
                real(next("vertices")?)?,
                real(next("vertices")?)?,
            ));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            triangles.push([
                int(next("triangles")?)?,
                int(next("triangles")?)?,
                int(next("triangles")?)?,
            ]);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let a = int(next("boundary edges")?)?;
            let b = int(next("boundary edges")?)?;
            boundary_edges.push(BoundaryEdge {
                a,
                b,
                tag: EdgeTag::DirichletCapable,
            });
        }
        if tokens.next().is_some() {
            return Err(Error::Parse("trailing data after mesh".into()));
        }
        let mut mesh = TriMesh {
            vertices,
            triangles,
            boundary_edges,
            h: 0.0,
            boundary: None,
        };
        mesh.validate()?;
        mesh.h = mesh.quality().max_edge;
        Ok(mesh)
    }

    /// The mesh dilated by `t` about the origin.
    pub fn scaled(&self, t: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&p| p * t).collect(),
            triangles: self.triangles.clone(),
            boundary_edges: self.boundary_edges.clone(),
            h: self.h * t,
            boundary: self.boundary.as_ref().map(|b| b.scaled(t)),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }

    pub fn read(path: &Path) -> Result<TriMesh> {
        TriMesh::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Boundary points, each segment divided into equal pieces of at most `h`
/// (and at most `h sqrt(radius)` on arcs, keeping the chord error below `h^2/8`).
fn boundary_points(b: &Boundary, h: f64) -> Vec<Point> {
    let mut pts = Vec::new();
    for seg in &b.segments {
        let step = match seg {
            Segment::Line { .. } => h,
            Segment::Arc { radius, .. } => h * radius.sqrt().min(1.0),
        };
        let n = (seg.length() / step).ceil().max(1.0) as usize;
        let n = if seg.is_full_circle() { n.max(8) } else { n };
        for j in 0..n {
            pts.push(seg.point_at(j as f64 / n as f64));
        }
    }
    pts
}

/// Hexagonal lattice points with spacing `h` at depth at least `margin`.
fn interior_points(b: &Boundary, h: f64, margin: f64) -> Vec<Point> {
    let (lo, hi) = b.bbox();
    let dy = h * 3f64.sqrt() / 2.0;
    let mut out = Vec::new();
    let mut row = 0;
    let mut y = lo.y + 0.5 * dy;
    while y < hi.y {
        let shift = if row % 2 == 0 { 0.0 } else { 0.5 * h };
        let mut x = lo.x + shift + 0.25 * h;
        while x < hi.x {
            let p = Point::new(x, y);
            if b.signed_distance(p) < -margin {
                out.push(p);
            }
            x += h;
        }
        y += dy;
        row += 1;
    }
    out
}

fn build(b: &Boundary, h: f64, max_area: f64) -> Result<TriMesh> {
    let bpts = boundary_points(b, h);
    let nb = bpts.len();
    let mut pts = bpts.clone();
    pts.extend(interior_points(b, h, 0.6 * h));
    let verts: Vec<Point2<f64>> = pts.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(verts, edges)
        .map_err(|e| Error::InvalidMesh(format!("triangulation failed: {e:?}")))?;
    let result = cdt.refine(
        RefinementParameters::new()
            .with_angle_limit(AngleLimit::from_deg(25.0))
            .with_max_allowed_area(max_area)
            .with_max_additional_vertices(40 * pts.len() + 10_000)
            .exclude_outer_faces(true),
    );
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    let mut index = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let tri = face.vertices().map(|v| {
            let id = v.fix().index();
            *index.entry(id).or_insert_with(|| {
                let p = v.position();
                vertices.push(Point::new(p.x, p.y));
                vertices.len() - 1
            })
        });
        triangles.push(tri);
    }
    let mut mesh = TriMesh {
        vertices,
        triangles,
        boundary_edges: Vec::new(),
        h,
        boundary: Some(b.clone()),
    };
    mesh.boundary_edges = hull_edges(&mesh.triangles);
    // Refinement splits boundary chords; put the new points back on arcs.
    for (v, on) in mesh.boundary_flags().into_iter().enumerate() {
        if on {
            let (q, seg) = b.project(mesh.vertices[v]);
            if matches!(b.segments[seg], Segment::Arc { .. }) {
                mesh.vertices[v] = q;
            }
        }
    }
    Ok(mesh)
}

/// Edges that belong to exactly one triangle, oriented as in that triangle.
fn hull_edges(triangles: &[[usize; 3]]) -> Vec<BoundaryEdge> {
    let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            count.entry((a.min(b), a.max(b))).or_insert((0, (a, b))).0 += 1;
        }
    }
    let mut out: Vec<BoundaryEdge> = count
        .into_values()
        .filter(|(c, _)| *c == 1)
        .map(|(_, (a, b))| BoundaryEdge {
            a,
            b,
            tag: EdgeTag::DirichletCapable,
        })
        .collect();
    out.sort_by_key(|e| (e.a, e.b));
    out
}

/// Triangulates a planar domain with target edge length `h`.
pub fn triangulate(domain: &Domain, h: f64) -> Result<TriMesh> {
    let Some(b) = domain.boundary() else {
        return Err(Error::InvalidArgument(format!(
            "{:?} is a closed model surface; use the oracle spectra instead of meshing",
            domain.spec.kind
        )));
    };
    let (d, _) = domain.diameter();
    if !(h > 0.0 && h < d) {
        return Err(Error::InvalidArgument(format!(
            "mesh size h = {h} must lie in (0, {d})"
        )));
    }
    let feature = domain.feature_size();
    if h > feature {
        return Err(Error::FeatureSize { h, feature });
    }
    let mut max_area = 0.4 * h * h;
    for _ in 0..6 {
        let mesh = build(b, h, max_area)?;
        let q = mesh.quality();
        if q.max_edge <= MAX_EDGE_FACTOR * h && q.min_angle_deg >= MIN_ANGLE_DEG {
            mesh.validate()?;
            return Ok(mesh);
        }
        max_area *= 0.6;
    }
    Err(Error::InvalidMesh(format!(
        "could not reach the quality bounds at h = {h}"
    )))
}

/// Uniform 1-to-4 refinement. Midpoints of boundary edges on arcs are moved
/// onto the exact curve.
pub fn refine(mesh: &TriMesh) -> TriMesh {
    let mut vertices = mesh.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let boundary: std::collections::HashSet<(usize, usize)> = mesh
        .boundary_edges
        .iter()
        .map(|e| (e.a.min(e.b), e.a.max(e.b)))
        .collect();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let mut p = vertices[a].lerp(vertices[b], 0.5);
            if boundary.contains(&key) {
                if let Some(bd) = &mesh.boundary {
                    let (q, seg) = bd.project(p);
                    if matches!(bd.segments[seg], Segment::Arc { .. }) {
                        p = q;
                    }
                }
            }
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[i, j, k] in &mesh.triangles {
        let a = midpoint(i, j, &mut vertices);
        let b = midpoint(j, k, &mut vertices);
        let c = midpoint(k, i, &mut vertices);
        triangles.extend([[i, a, c], [a, j, b], [c, b, k], [a, b, c]]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let m = mid[&(e.a.min(e.b), e.a.max(e.b))];
        boundary_edges.push(BoundaryEdge {
            a: e.a,
            b: m,
            tag: e.tag,
        });
        boundary_edges.push(BoundaryEdge {
            a: m,
            b: e.b,
            tag: e.tag,
        });
    }
    TriMesh {
        vertices,
        triangles,
        boundary_edges,
        h: mesh.h / 2.0,
        boundary: mesh.boundary.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{generate_domain, DomainSpec};
    use std::f64::consts::PI;

    fn square() -> Domain {
        generate_domain(&DomainSpec::unit_square()).unwrap()
    }

    #[test]
    fn square_mesh_is_exact() {
        let m = triangulate(&square(), 0.5).unwrap();
        assert!(m.triangles.len() >= 8);
        assert!((m.area() - 1.0).abs() < 1e-14);
        let q = m.quality();
        assert!(q.max_edge <= 0.75 && q.min_angle_deg >= 20.0);
    }

    #[test]
    fn disk_area_and_refinement() {
        let disk = generate_domain(&DomainSpec::disk(1.0)).unwrap();
        let m = triangulate(&disk, 0.1).unwrap();
        assert!((m.area() - PI).abs() < 0.02 * PI);
        let r = refine(&triangulate(&disk, 0.2).unwrap());
        r.validate().unwrap();
        for e in &r.boundary_edges {
            assert!((r.vertices[e.a].norm() - 1.0).abs() < 1e-12);
        }
        assert!(r.area() > m.area() - 0.02);
    }

    #[test]
    fn refinement_quadruples() {
        let m = triangulate(&square(), 0.5).unwrap();
        let r = refine(&refine(&m));
        assert_eq!(r.triangles.len(), 16 * m.triangles.len());
        assert_eq!(r.h, 0.125);
        assert!((r.area() - 1.0).abs() < 1e-14);
        r.validate().unwrap();
    }

    #[test]
    fn thin_neck_is_rejected() {
        let d = generate_domain(&DomainSpec::dumbbell(1.0, 0.05, 1.0)).unwrap();
        assert!(matches!(
            triangulate(&d, 0.1),
            Err(Error::FeatureSize { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let m = triangulate(&square(), 0.3).unwrap();
        let back = TriMesh::from_text(&m.to_text()).unwrap();
        assert_eq!(back.triangles, m.triangles);
        assert_eq!(back.vertices, m.vertices);
        assert!(TriMesh::from_text("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n2 0\n").is_ok());
        assert!(TriMesh::from_text("3 1 3\n0 0\n1 0\n0 1\n0 1 2\n0 1\n1 2\n").is_err());
        assert!(TriMesh::from_text("3 1 3\n0 0\n1 0\n0 1\n0 2 1\n0 1\n1 2\n2 0\n").is_err());
    }

    #[test]
    fn quality_on_curved_and_nonconvex() {
        for spec in [
            DomainSpec::rounded_rectangle(1.0, 0.2, 0.1),
            DomainSpec::dumbbell(1.0, 0.2, 1.0),
            DomainSpec::annulus_sector(0.5, 1.0, 1.5),
        ] {
            let d = generate_domain(&spec).unwrap();
            let m = triangulate(&d, 0.05).unwrap();
            let q = m.quality();
            assert!(
                q.max_edge <= 0.075 && q.min_angle_deg >= 20.0,
                "{spec:?}: {q:?}"
            );
            assert!((m.area() - d.area()).abs() < 0.02 * d.area());
        }
    }
}
