//! End-to-end spectra for a domain, and the parametric families that show
//! which hypotheses of the eigenvalue bounds are necessary.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundId;
use crate::domain::{generate_domain, invariants, Domain, DomainKind, DomainSpec, Shape};
use crate::eigen::{richardson, solve_lowest, SpectrumSummary};
use crate::error::{Error, Result};
use crate::fem::{assemble, BoundaryCondition};
use crate::geometry::Point;
use crate::mesh::{refine, triangulate, TriMesh};
use crate::oracle::{
    disk_spectrum, oracle_summary, rectangle_spectrum, revolution_spectrum, torus_spectrum,
};

/// Default eigensolver tolerance of the pipeline.
pub const DEFAULT_TOL: f64 = 1e-9;

/// FEM spectrum on the nested pair `2h`, `h` with Richardson extrapolation.
/// Returns the fine mesh together with the summary, whose eigenvectors live
/// on that mesh.
pub fn fem_spectrum_on_mesh(
    domain: &Domain,
    bc: BoundaryCondition,
    h: f64,
    k_max: usize,
    tol: f64,
) -> Result<(TriMesh, SpectrumSummary)> {
    let coarse_mesh = triangulate(domain, 2.0 * h)?;
    let fine_mesh = refine(&coarse_mesh);
    let coarse = solve_lowest(&assemble(&coarse_mesh, bc)?, k_max, tol)?;
    let fine = solve_lowest(&assemble(&fine_mesh, bc)?, k_max, tol)?;
    let mut out = richardson(&coarse, &fine);
    out.source = "fem".to_string();
    Ok((fine_mesh, out))
}

pub fn fem_spectrum(
    domain: &Domain,
    bc: BoundaryCondition,
    h: f64,
    k_max: usize,
    tol: f64,
) -> Result<SpectrumSummary> {
    fem_spectrum_on_mesh(domain, bc, h, k_max, tol).map(|(_, s)| s)
}

/// Side lengths of an axis-aligned rectangle given as a polygon.
pub fn rectangle_sides(spec: &DomainSpec) -> Option<(f64, f64)> {
    if spec.kind != DomainKind::Polygon {
        return None;
    }
    let v: Vec<Point> = match spec.parameters.get("vertices") {
        Some(crate::domain::ParamValue::Points(v)) => v.iter().map(|&p| Point::from(p)).collect(),
        _ => return None,
    };
    if v.len() != 4 {
        return None;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = v.iter().map(|p| (p.x, p.y)).unzip();
    let lo = Point::new(
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        ys.iter().cloned().fold(f64::INFINITY, f64::min),
    );
    let hi = Point::new(
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let tol = 1e-12 * (hi - lo).norm();
    let on_corner = |p: &Point| {
        ((p.x - lo.x).abs() <= tol || (p.x - hi.x).abs() <= tol)
            && ((p.y - lo.y).abs() <= tol || (p.y - hi.y).abs() <= tol)
    };
    let distinct = (0..4).all(|i| (i + 1..4).all(|j| v[i].dist(v[j]) > tol));
    (v.iter().all(on_corner) && distinct).then_some((hi.x - lo.x, hi.y - lo.y))
}

/// Closed-form spectrum (`count` values) when the domain has one: rectangles,
/// disks, flat tori and the surfaces of revolution.
pub fn oracle_spectrum(
    domain: &Domain,
    bc: BoundaryCondition,
    count: usize,
) -> Option<Result<SpectrumSummary>> {
    let spec = &domain.spec;
    let vals = match (&domain.shape, spec.kind) {
        (Shape::FlatTorus { a, b }, _) => Ok(torus_spectrum(*a, *b, count)),
        (Shape::Revolution(s), _) => revolution_spectrum(s, 32, count),
        (_, DomainKind::Disk) => Ok(disk_spectrum(spec.number("radius").ok()?, bc, count)),
        _ => {
            let (a, b) = rectangle_sides(spec)?;
            Ok(rectangle_spectrum(a, b, bc, count))
        }
    };
    Some(vals.map(|v| oracle_summary(bc, v)))
}

/// The spectrum a check should use: FEM on planar domains, the oracle on the
/// closed model surfaces, which cannot be meshed.
pub fn domain_spectrum(
    domain: &Domain,
    bc: BoundaryCondition,
    h: f64,
    k_max: usize,
) -> Result<SpectrumSummary> {
    if domain.is_planar() {
        fem_spectrum(domain, bc, h, k_max, DEFAULT_TOL)
    } else {
        oracle_spectrum(domain, bc, k_max + 1).expect("model surfaces always have an oracle")
    }
}

/// The convex test corpus: square, disk, stadium, regular hexagon and a
/// rounded rectangle of width 0.4.
pub fn convex_corpus() -> Vec<(&'static str, DomainSpec)> {
    vec![
        ("square", DomainSpec::unit_square()),
        ("disk", DomainSpec::disk(1.0)),
        ("stadium", DomainSpec::stadium(2.0, 1.0)),
        ("hexagon", DomainSpec::regular_polygon(6, 1.0)),
        (
            "rounded_rectangle",
            DomainSpec::rounded_rectangle(1.0, 0.4, 0.1),
        ),
    ]
}

/// Parametric families along which a hypothesis of some bound degenerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Two unit disks joined by a neck of length 1 whose width goes to zero.
    Dumbbell,
    /// Stadium of length 1 whose width goes to zero.
    RoundedRectangle,
    /// Exponential surface of revolution with `R` growing.
    Revolution,
    /// Flat torus `1 x b` with `b` going to zero.
    Torus,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::Dumbbell,
        Family::RoundedRectangle,
        Family::Revolution,
        Family::Torus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Dumbbell => "dumbbell",
            Family::RoundedRectangle => "rounded_rectangle",
            Family::Revolution => "revolution",
            Family::Torus => "torus",
        }
    }

    /// The bound whose hypothesis the family removes.
    pub fn bound_id(self) -> BoundId {
        match self {
            Family::Dumbbell => BoundId::LiYau,
            Family::RoundedRectangle => BoundId::ChengDp,
            Family::Revolution => BoundId::Ourcheng,
            Family::Torus => BoundId::ChengClosed,
        }
    }

    pub fn default_parameters(self) -> Vec<f64> {
        match self {
            Family::Dumbbell => vec![0.2, 0.1, 0.05],
            Family::RoundedRectangle => vec![0.4, 0.2, 0.1],
            Family::Revolution => vec![4.0, 8.0, 16.0],
            Family::Torus => vec![0.5, 0.25, 0.125],
        }
    }

    pub fn spec(self, p: f64) -> DomainSpec {
        match self {
            Family::Dumbbell => DomainSpec::dumbbell(1.0, p, 1.0),
            Family::RoundedRectangle => DomainSpec::stadium(1.0, p),
            Family::Revolution => DomainSpec::revolution(p),
            Family::Torus => DomainSpec::torus(1.0, p),
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family {s:?}")))
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub parameter: f64,
    pub eigenvalue: f64,
    /// The scale-invariant ratio the family drives to a limit.
    pub ratio: f64,
    /// A second ratio that stays bounded, when the family has one.
    pub control: Option<f64>,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessitySeries {
    pub family: Family,
    pub bound_id: BoundId,
    pub ratio_name: String,
    pub control_name: Option<String>,
    pub points: Vec<SeriesPoint>,
    /// The series behaves as claimed (direction, size of the change, bounds).
    pub demonstrated: bool,
    pub notes: Vec<String>,
}

impl NecessitySeries {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("family,parameter,eigenvalue,ratio,control,d\n");
        for p in &self.points {
            let control = p.control.map_or(String::new(), |c| format!("{c}"));
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.family, p.parameter, p.eigenvalue, p.ratio, control, p.d
            ));
        }
        out
    }
}

fn strictly_monotone(v: &[f64], increasing: bool) -> bool {
    v.windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn first_nonzero(s: &SpectrumSummary) -> Result<f64> {
    let vals = s.best_values();
    vals.get(1).copied().ok_or(Error::InsufficientSpectrum {
        largest: s.largest(),
    })
}

/// Runs a family with its default parameters.
pub fn necessity_suite(family: Family) -> Result<NecessitySeries> {
    necessity_suite_with(family, &family.default_parameters())
}

pub fn necessity_suite_with(family: Family, parameters: &[f64]) -> Result<NecessitySeries> {
    if parameters.is_empty() {
        return Err(Error::InvalidArgument(
            "necessity family needs at least one parameter".into(),
        ));
    }
    let mut points = Vec::with_capacity(parameters.len());
    let mut notes = Vec::new();
    for &p in parameters {
        let domain = generate_domain(&family.spec(p))?;
        let point = match family {
            Family::Dumbbell => {
                let h = (p / 4.0).min(0.05);
                let s = fem_spectrum(&domain, BoundaryCondition::Neumann, h, 2, DEFAULT_TOL)?;
                let (d, _) = domain.diameter();
                let l1 = first_nonzero(&s)?;
                SeriesPoint {
                    parameter: p,
                    eigenvalue: l1,
                    ratio: l1 * d * d,
                    control: None,
                    d,
                }
            }
            Family::RoundedRectangle => {
                let h = p / 8.0;
                let s = fem_spectrum(&domain, BoundaryCondition::Dirichlet, h, 1, DEFAULT_TOL)?;
                let inv = invariants(&domain, h / 2.0)?;
                let nu0 = s.best_values()[0];
                SeriesPoint {
                    parameter: p,
                    eigenvalue: nu0,
                    ratio: nu0 * inv.d_bar * inv.d_bar,
                    control: Some(nu0 * inv.rad * inv.rad),
                    d: inv.d_bar,
                }
            }
            Family::Revolution => {
                let s = oracle_spectrum(&domain, BoundaryCondition::Neumann, 4).expect("oracle")?;
                let l1 = first_nonzero(&s)?;
                let (d, _) = domain.diameter();
                let floor = p * p / 8.0;
                if l1 < 1.05 * floor {
                    notes.push(format!(
                        "R = {p}: lambda_1 = {l1:.4} is within 5% of R^2/8 = {floor:.4}"
                    ));
                }
                SeriesPoint {
                    parameter: p,
                    eigenvalue: l1,
                    ratio: l1 * d * d,
                    control: Some(l1 / floor),
                    d,
                }
            }
            Family::Torus => {
                // k ranges up to a multiple of 1/b, where the modes along the
                // short side start to appear.
                let k_top = (4.0 / p).ceil() as usize;
                let s = oracle_spectrum(&domain, BoundaryCondition::Neumann, k_top + 1)
                    .expect("oracle")?;
                let (d, _) = domain.diameter();
                let vals = s.best_values();
                let min = (1..=k_top)
                    .map(|k| vals[k] * d * d / (k * k) as f64)
                    .fold(f64::INFINITY, f64::min);
                SeriesPoint {
                    parameter: p,
                    eigenvalue: vals[1],
                    ratio: min,
                    control: Some(k_top as f64),
                    d,
                }
            }
        };
        points.push(point);
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).collect();
    let (first, last) = (ratios[0], ratios[ratios.len() - 1]);
    let (ratio_name, control_name, demonstrated) = match family {
        Family::Dumbbell => {
            let ok = strictly_monotone(&ratios, false) && last / first < 0.5;
            ("lambda_1*d^2", None, ok)
        }
        Family::RoundedRectangle => {
            let controls_ok = points
                .iter()
                .all(|p| p.control.is_some_and(|c| (1.5..=3.5).contains(&c)));
            let ok = strictly_monotone(&ratios, true) && last / first > 2.0 && controls_ok;
            ("nu_0*d_bar^2", Some("nu_0*rad^2"), ok)
        }
        Family::Revolution => {
            let floors_ok = points
                .iter()
                .all(|p| p.control.is_some_and(|c| c >= 1.05) && p.d >= 1.0);
            (
                "lambda_1*d^2",
                Some("lambda_1/(R^2/8)"),
                strictly_monotone(&ratios, true) && floors_ok,
            )
        }
        Family::Torus => {
            let ok = ratios.iter().all(|&r| r > 0.0 && r >= 0.5 * first);
            ("min_k lambda_k*d^2/k^2", Some("k_max"), ok)
        }
    };
    if family == Family::RoundedRectangle {
        notes.push(format!(
            "thin-strip limit of nu_0*rad^2 is pi^2/4 = {:.4}",
            PI * PI / 4.0
        ));
    }
    Ok(NecessitySeries {
        family,
        bound_id: family.bound_id(),
        ratio_name: ratio_name.to_string(),
        control_name: control_name.map(str::to_string),
        points,
        demonstrated,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_detection() {
        assert_eq!(
            rectangle_sides(&DomainSpec::rectangle(2.0, 0.5)),
            Some((2.0, 0.5))
        );
        assert_eq!(rectangle_sides(&DomainSpec::regular_polygon(4, 1.0)), None);
        assert_eq!(rectangle_sides(&DomainSpec::disk(1.0)), None);
    }

    #[test]
    fn oracle_dispatch() {
        let torus = generate_domain(&DomainSpec::torus(1.0, 1.0)).unwrap();
        let s = oracle_spectrum(&torus, BoundaryCondition::Neumann, 5)
            .unwrap()
            .unwrap();
        assert_eq!(s.eigenvalues.len(), 5);
        assert!((s.eigenvalues[1] - 4.0 * PI * PI).abs() < 1e-9);
        let hex = generate_domain(&DomainSpec::regular_polygon(6, 1.0)).unwrap();
        assert!(oracle_spectrum(&hex, BoundaryCondition::Neumann, 5).is_none());
    }

    #[test]
    fn fem_pipeline_on_square() {
        let sq = generate_domain(&DomainSpec::unit_square()).unwrap();
        let s = fem_spectrum(&sq, BoundaryCondition::Dirichlet, 0.05, 3, DEFAULT_TOL).unwrap();
        let best = s.best_values();
        assert!((best[0] - 2.0 * PI * PI).abs() / (2.0 * PI * PI) < 1e-3);
        assert!(s.eigenvalues[0] >= 2.0 * PI * PI);
    }

    #[test]
    fn torus_family_stays_bounded() {
        let series = necessity_suite(Family::Torus).unwrap();
        assert!(series.demonstrated);
        for p in &series.points {
            assert!(p.ratio > 0.5, "{p:?}");
        }
    }

    #[test]
    fn unknown_family_is_rejected() {
        assert!("annulus".parse::<Family>().is_err());
        assert_eq!("dumbbell".parse::<Family>().unwrap(), Family::Dumbbell);
    }
}
