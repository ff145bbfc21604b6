//! P1 finite elements: exact stiffness and mass matrices, boundary conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::TriMesh;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Self::Dirichlet),
            "neumann" => Ok(Self::Neumann),
            _ => Err(Error::InvalidArgument(format!(
                "unknown boundary condition {s:?}"
            ))),
        }
    }
}

impl std::fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dirichlet => "dirichlet",
            Self::Neumann => "neumann",
        })
    }
}

/// The pencil `K u = lambda M u` on the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct AssembledProblem {
    pub k: CsrMatrix,
    pub m: CsrMatrix,
    pub bc: BoundaryCondition,
    /// Row of each mesh vertex, `None` for eliminated Dirichlet vertices.
    pub dof_map: Vec<Option<usize>>,
    pub h: f64,
}

const MIN_AREA: f64 = 1e-14;

/// Element stiffness and mass for one triangle.
pub fn element_matrices(p: [Point; 3]) -> Result<([[f64; 3]; 3], [[f64; 3]; 3])> {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    if !(area >= MIN_AREA) {
        return Err(Error::InvalidMesh(format!(
            "degenerate triangle of area {area:e}"
        )));
    }
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let mut ke = [[0.0; 3]; 3];
    let mut me = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ke[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            me[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    Ok((ke, me))
}

impl AssembledProblem {
    pub fn dim(&self) -> usize {
        self.k.n
    }

    /// Extends a dof vector to all mesh vertices (zero on eliminated ones).
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        self.dof_map
            .iter()
            .map(|d| d.map_or(0.0, |i| u[i]))
            .collect()
    }

    /// Restricts nodal values to the free degrees of freedom.
    pub fn restrict(&self, nodal: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.dim()];
        for (v, d) in self.dof_map.iter().enumerate() {
            if let Some(i) = d {
                u[*i] = nodal[v];
            }
        }
        u
    }
}

/// Assembles `K` and `M` on `mesh`; Dirichlet vertices are eliminated.
pub fn assemble(mesh: &TriMesh, bc: BoundaryCondition) -> Result<AssembledProblem> {
    let nv = mesh.vertices.len();
    let on_boundary = mesh.boundary_flags();
    let mut dof_map = vec![None; nv];
    let mut next = 0;
    for v in 0..nv {
        if bc == BoundaryCondition::Neumann || !on_boundary[v] {
            dof_map[v] = Some(next);
            next += 1;
        }
    }
    if next == 0 {
        return Err(Error::InvalidMesh("no free degrees of freedom".into()));
    }
    // Per-chunk triplet lists, concatenated in chunk order so the result is
    // independent of scheduling.
    let chunks: Vec<Result<(Vec<(usize, usize, f64)>, Vec<(usize, usize, f64)>)>> = mesh
        .triangles
        .par_chunks(2048)
        .enumerate()
        .map(|(c, tris)| {
            let mut kt = Vec::with_capacity(9 * tris.len());
            let mut mt = Vec::with_capacity(9 * tris.len());
            for (o, tri) in tris.iter().enumerate() {
                let (ke, me) = element_matrices(mesh.triangle_points(c * 2048 + o))?;
                for a in 0..3 {
                    let Some(i) = dof_map[tri[a]] else { continue };
                    for b in 0..3 {
                        let Some(j) = dof_map[tri[b]] else { continue };
                        kt.push((i, j, ke[a][b]));
                        mt.push((i, j, me[a][b]));
                    }
                }
            }
            Ok((kt, mt))
        })
        .collect();
    let mut kt = Vec::new();
    let mut mt = Vec::new();
    for chunk in chunks {
        let (k, m) = chunk?;
        kt.extend(k);
        mt.extend(m);
    }
    Ok(AssembledProblem {
        k: CsrMatrix::from_triplets(next, kt),
        m: CsrMatrix::from_triplets(next, mt),
        bc,
        dof_map,
        h: mesh.h,
    })
}

/// `u^T K u / u^T M u` for a dof vector.
pub fn rayleigh_quotient(problem: &AssembledProblem, u: &[f64]) -> Result<f64> {
    if u.len() != problem.dim() {
        return Err(Error::InvalidArgument(format!(
            "vector has length {}, expected {}",
            u.len(),
            problem.dim()
        )));
    }
    let den = problem.m.quadratic_form(u);
    if !(den > 0.0) {
        return Err(Error::InvalidArgument("vector has zero mass norm".into()));
    }
    Ok((problem.k.quadratic_form(u) / den).max(0.0))
}

/// Nodal interpolant of `f`, restricted to the free dofs.
pub fn interpolate<F: Fn(Point) -> f64>(
    mesh: &TriMesh,
    problem: &AssembledProblem,
    f: F,
) -> Vec<f64> {
    let nodal: Vec<f64> = mesh.vertices.iter().map(|&p| f(p)).collect();
    problem.restrict(&nodal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{generate_domain, DomainSpec};
    use crate::mesh::{triangulate, BoundaryEdge, EdgeTag};
    use std::f64::consts::PI;

    fn single_triangle() -> TriMesh {
        let e = |a, b| BoundaryEdge {
            a,
            b,
            tag: EdgeTag::DirichletCapable,
        };
        TriMesh {
            vertices: vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
            ],
            triangles: vec![[0, 1, 2]],
            boundary_edges: vec![e(0, 1), e(1, 2), e(2, 0)],
            h: 1.0,
            boundary: None,
        }
    }

    #[test]
    fn hand_assembled_element() {
        let p = assemble(&single_triangle(), BoundaryCondition::Neumann).unwrap();
        let k = [[2.0, -1.0, -1.0], [-1.0, 1.0, 0.0], [-1.0, 0.0, 1.0]];
        let m = [[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.k.get(i, j) - 0.5 * k[i][j]).abs() < 1e-15);
                assert!((p.m.get(i, j) - m[i][j] / 24.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn kernel_and_partition_of_unity() {
        let d = generate_domain(&DomainSpec::disk(1.0)).unwrap();
        let mesh = triangulate(&d, 0.15).unwrap();
        let p = assemble(&mesh, BoundaryCondition::Neumann).unwrap();
        let scale = p.k.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(p.k.row_sums().iter().all(|s| s.abs() <= 1e-12 * scale));
        assert!((p.m.total() - mesh.area()).abs() < 1e-12);
        assert!(p.k.is_symmetric(1e-14) && p.m.is_symmetric(1e-14));
        let ones = vec![1.0; p.dim()];
        assert!(rayleigh_quotient(&p, &ones).unwrap() < 1e-12);
        let dir = assemble(&mesh, BoundaryCondition::Dirichlet).unwrap();
        assert!(dir.dim() < p.dim());
        assert!(crate::sparse::EnvelopeCholesky::factor(&dir.k).is_ok());
    }

    #[test]
    fn square_eigenfunction_quotients() {
        let d = generate_domain(&DomainSpec::unit_square()).unwrap();
        let mesh = triangulate(&d, 0.02).unwrap();
        let n = assemble(&mesh, BoundaryCondition::Neumann).unwrap();
        let u = interpolate(&mesh, &n, |p| (PI * p.x).cos());
        let q = rayleigh_quotient(&n, &u).unwrap();
        assert!((q - PI * PI).abs() < 0.01 * PI * PI, "{q}");
        let dd = assemble(&mesh, BoundaryCondition::Dirichlet).unwrap();
        let u = interpolate(&mesh, &dd, |p| (PI * p.x).sin() * (PI * p.y).sin());
        let q = rayleigh_quotient(&dd, &u).unwrap();
        assert!((q - 2.0 * PI * PI).abs() < 0.02 * PI * PI, "{q}");
        assert!(rayleigh_quotient(&dd, &vec![0.0; dd.dim()]).is_err());
    }

    #[test]
    fn coordinate_dump_header() {
        let p = assemble(&single_triangle(), BoundaryCondition::Neumann).unwrap();
        let text = p.k.to_coordinate_text();
        assert!(text.starts_with("3 6 sym\n"));
    }
}
