//! Ball packings and coverings, plateau test functions, the segment and
//! Neumann–Poincaré inequalities, and the rank of the ball-averaging map on
//! low eigenspaces.
//!
//! Everything here runs in the Euclidean plane: geodesics are straight
//! segments and curvature enters only through the closed-form comparison
//! factors at the bottom of the module.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::domain::Domain;
use crate::eigen::{count_below, SpectrumSummary};
use crate::error::{Error, Result};
use crate::fem::{assemble, interpolate, rayleigh_quotient, BoundaryCondition};
use crate::geometry::{signed_angle, Point};
use crate::mesh::TriMesh;

/// Largest point sample the packing routines will build.
const MAX_SAMPLES: usize = 4_000_000;

fn planar_boundary(domain: &Domain) -> Result<&crate::geometry::Boundary> {
    domain.boundary().ok_or_else(|| {
        Error::InvalidArgument(format!("{:?} is not a planar domain", domain.spec.kind))
    })
}

/// Grid points of spacing `spacing` inside the domain plus boundary samples at
/// the same step: a sample of the closed domain.
pub fn sample_closure(domain: &Domain, spacing: f64) -> Result<Vec<Point>> {
    let b = planar_boundary(domain)?;
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sample spacing must be positive, got {spacing}"
        )));
    }
    let (lo, hi) = b.bbox();
    let nx = ((hi.x - lo.x) / spacing).floor() as usize + 1;
    let ny = ((hi.y - lo.y) / spacing).floor() as usize + 1;
    if nx.saturating_mul(ny) > MAX_SAMPLES {
        return Err(Error::Refused(format!(
            "a sample at spacing {spacing} would need {nx} x {ny} grid points"
        )));
    }
    let mut pts: Vec<Point> = b.sample(spacing).into_iter().map(|s| s.point).collect();
    for j in 0..ny {
        for i in 0..nx {
            let p = Point::new(lo.x + i as f64 * spacing, lo.y + j as f64 * spacing);
            if b.signed_distance(p) < 0.0 {
                pts.push(p);
            }
        }
    }
    Ok(pts)
}

/// Uniform grid of point indices for radius queries.
struct Buckets {
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl Buckets {
    fn new(points: &[Point], cell: f64) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if points.is_empty() {
            lo = Point::default();
            hi = Point::default();
        }
        let span = (hi - lo).norm().max(f64::MIN_POSITIVE);
        let cell = cell.max(span / 2048.0);
        let nx = ((hi.x - lo.x) / cell) as usize + 1;
        let ny = ((hi.y - lo.y) / cell) as usize + 1;
        let mut b = Buckets {
            lo,
            cell,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
        };
        for (i, &p) in points.iter().enumerate() {
            let (cx, cy) = b.cell_of(p);
            b.cells[cy * nx + cx].push(i);
        }
        b
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.lo.x) / self.cell)
            .floor()
            .clamp(0.0, (self.nx - 1) as f64) as usize;
        let cy = ((p.y - self.lo.y) / self.cell)
            .floor()
            .clamp(0.0, (self.ny - 1) as f64) as usize;
        (cx, cy)
    }

    /// Calls `f` on every index whose cell meets the box of radius `r` around `p`.
    fn near(&self, p: Point, r: f64, mut f: impl FnMut(usize)) {
        let r = r.min(1e300);
        let (x0, y0) = self.cell_of(p - Point::new(r, r));
        let (x1, y1) = self.cell_of(p + Point::new(r, r));
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &i in &self.cells[cy * self.nx + cx] {
                    f(i);
                }
            }
        }
    }
}

#[derive(PartialEq)]
struct Far(f64, usize);

impl Eq for Far {}

impl Ord for Far {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Far {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Farthest-point insertion on `samples` starting at index 0, stopping once
/// every sample lies closer than `rho` to some centre. Returns the centre
/// indices and the final covering distance.
fn farthest_point_centers(
    samples: &[Point],
    buckets: &Buckets,
    rho: f64,
    limit: usize,
) -> (Vec<usize>, f64) {
    let mut dist = vec![f64::INFINITY; samples.len()];
    let mut heap = BinaryHeap::new();
    let mut centers = Vec::new();
    if samples.is_empty() {
        return (centers, 0.0);
    }
    let mut next = 0;
    let mut reach = f64::INFINITY;
    loop {
        centers.push(next);
        let c = samples[next];
        buckets.near(c, reach, |i| {
            let d = samples[i].dist(c);
            if d < dist[i] {
                dist[i] = d;
                heap.push(Far(d, i));
            }
        });
        let top = loop {
            match heap.peek() {
                Some(Far(d, i)) if *d > dist[*i] => {
                    heap.pop();
                }
                Some(Far(d, i)) => break Some((*d, *i)),
                None => break None,
            }
        };
        match top {
            Some((d, i)) if d >= rho && centers.len() < limit => {
                next = i;
                reach = d;
            }
            Some((d, _)) => return (centers, d),
            None => return (centers, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingKind {
    MaximalPacking,
    Covering,
}

/// Which separation the centres satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackingConvention {
    /// Pairwise distances greater than `rho`.
    Separated,
    /// Pairwise distances at least `rho`, so the balls `B(x_i, rho/2)` are disjoint.
    HalfBallsDisjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingResult {
    pub rho: f64,
    pub centers: Vec<Point>,
    pub cardinality: usize,
    /// Largest number of doubled balls `B(x_i, 2 rho)` containing one sample point.
    pub overlap_max: usize,
    pub kind: PackingKind,
    pub convention: PackingConvention,
    pub sample_spacing: f64,
    pub samples: usize,
    pub min_separation: f64,
    /// Largest distance from a sample point to its nearest centre.
    pub covering_distance: f64,
}

impl PackingResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("packing results serialise")
    }
}

/// Greedy covering by balls `B(x_i, rho)` whose half-balls are disjoint, on a
/// sample of spacing `rho / 10`.
pub fn greedy_packing(domain: &Domain, rho: f64) -> Result<PackingResult> {
    greedy_packing_with(domain, rho, rho / 10.0)
}

pub fn greedy_packing_with(domain: &Domain, rho: f64, spacing: f64) -> Result<PackingResult> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "packing radius must be positive, got {rho}"
        )));
    }
    if spacing > rho / 10.0 {
        return Err(Error::Refused(format!(
            "sample spacing {spacing} is coarser than rho/10 = {}",
            rho / 10.0
        )));
    }
    let samples = sample_closure(domain, spacing)?;
    let buckets = Buckets::new(&samples, rho);
    let (idx, covering_distance) = farthest_point_centers(&samples, &buckets, rho, usize::MAX);
    let centers: Vec<Point> = idx.iter().map(|&i| samples[i]).collect();
    let center_buckets = Buckets::new(&centers, 2.0 * rho);
    let mut overlap_max = 0;
    for &p in &samples {
        let mut count = 0;
        center_buckets.near(p, 2.0 * rho, |i| {
            count += (centers[i].dist(p) < 2.0 * rho) as usize
        });
        overlap_max = overlap_max.max(count);
    }
    Ok(PackingResult {
        rho,
        cardinality: centers.len(),
        min_separation: min_separation(&centers),
        centers,
        overlap_max,
        kind: PackingKind::Covering,
        convention: PackingConvention::HalfBallsDisjoint,
        sample_spacing: spacing,
        samples: samples.len(),
        covering_distance,
    })
}

/// Smallest pairwise distance (infinite for fewer than two points).
pub fn min_separation(points: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(points[i].dist(points[j]));
        }
    }
    best
}

/// Unit-ball volume `omega_n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * PI / n as f64,
    }
}

/// Relative volume comparison factor `e^{(n-1) R sqrt(kappa)} (R/r)^n`.
pub fn volume_comparison_factor(n: usize, kappa: f64, big_r: f64, r: f64) -> f64 {
    ((n - 1) as f64 * big_r * kappa.sqrt()).exp() * (big_r / r).powi(n as i32)
}

/// Volume of a ball of radius `r` in the model space of curvature `-kappa`,
/// bounded as in Bishop's theorem: `n omega_n int_0^r t^{n-1} e^{(n-1) t sqrt(kappa)} dt`.
pub fn bishop_volume(n: usize, kappa: f64, r: f64) -> f64 {
    let a = (n - 1) as f64 * kappa.sqrt();
    let integral = gauss_legendre(0.0, r, 64, |t| t.powi(n as i32 - 1) * (a * t).exp());
    n as f64 * unit_ball_volume(n) * integral
}

/// The cruder form `omega_n e^{n-1} r^n`, valid for `r <= 1/sqrt(kappa)`.
pub fn bishop_bound(n: usize, r: f64) -> f64 {
    unit_ball_volume(n) * ((n - 1) as f64).exp() * r.powi(n as i32)
}

/// Covering cardinality bound `2^n e^{(n-1) d sqrt(kappa)} (d/rho)^n`.
pub fn covering_cardinality_bound(n: usize, kappa: f64, d: f64, rho: f64) -> f64 {
    2f64.powi(n as i32) * ((n - 1) as f64 * d * kappa.sqrt()).exp() * (d / rho).powi(n as i32)
}

/// Overlap bound `12^n e^{6(n-1) rho sqrt(kappa)}` for the doubled balls.
pub fn overlap_bound(n: usize, kappa: f64, rho: f64) -> f64 {
    12f64.powi(n as i32) * (6.0 * (n - 1) as f64 * rho * kappa.sqrt()).exp()
}

/// Segment-inequality constant `2R sup (|dB(s)| / |dB(t)|)` over
/// `s/2 <= t <= s <= 2R` in the model space of curvature `-kappa`.
pub fn segment_constant(n: usize, kappa: f64, big_r: f64) -> f64 {
    // The sphere-area ratio sinh(a s)/sinh(a t) peaks at t = s/2 and grows with s.
    let ratio = if kappa == 0.0 {
        2.0
    } else {
        2.0 * (kappa.sqrt() * big_r).cosh()
    };
    2.0 * big_r * ratio.powi(n as i32 - 1)
}

/// The closed-form majorant `2^n R e^{(n-1) R sqrt(kappa)}`.
pub fn segment_constant_bound(n: usize, kappa: f64, big_r: f64) -> f64 {
    2f64.powi(n as i32) * big_r * ((n - 1) as f64 * big_r * kappa.sqrt()).exp()
}

fn gauss_legendre(a: f64, b: f64, pieces: usize, f: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / pieces as f64;
    let mut sum = 0.0;
    for i in 0..pieces {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in X.iter().zip(W) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Estimate of the packing radius `rho(k)` with its witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingRadius {
    pub k: usize,
    /// Smallest pairwise distance of `lower_witness`, a lower bound of `rho(k)`.
    #[serde(serialize_with = "crate::bounds::ser_real")]
    pub rho_k: f64,
    pub lower_witness: Vec<Point>,
    /// Separation of `k` points equally spaced on a diameter chord.
    #[serde(serialize_with = "crate::bounds::ser_real")]
    pub chord_separation: f64,
    /// Covering certificate: `rho(k)` is at most this value.
    #[serde(serialize_with = "crate::bounds::ser_real")]
    pub upper: f64,
    pub d: f64,
    /// `rho_k >= d / k`.
    pub meets_claim: bool,
}

/// Brackets the packing radius of `k` points in the closed domain.
pub fn packing_radius(domain: &Domain, k: usize) -> Result<PackingRadius> {
    let b = planar_boundary(domain)?;
    if k == 0 {
        return Err(Error::InvalidArgument("packing radius needs k >= 1".into()));
    }
    let (d, ends) = domain.diameter();
    if k == 1 {
        return Ok(PackingRadius {
            k,
            rho_k: f64::INFINITY,
            lower_witness: vec![ends[0]],
            chord_separation: f64::INFINITY,
            upper: f64::INFINITY,
            d,
            meets_claim: true,
        });
    }
    let chord: Vec<Point> = (0..k)
        .map(|i| ends[0].lerp(ends[1], i as f64 / (k - 1) as f64))
        .collect();
    let chord_separation = min_separation(&chord);

    // Candidates: a fine boundary sample (extremal configurations sit on the
    // boundary for small k) and a coarser interior grid.
    let mut candidates: Vec<Point> = b.sample(d / 2000.0).into_iter().map(|s| s.point).collect();
    candidates.extend(sample_closure(domain, d / 60.0)?);
    candidates.push(ends[0]);
    candidates.push(ends[1]);

    let buckets = Buckets::new(&candidates, d / 30.0);
    let start = candidates.len() - 2;
    let mut reordered = candidates.clone();
    reordered.swap(0, start);
    let (fps_idx, _) = farthest_point_centers(&reordered, &buckets_for(&reordered, d), 0.0, k);
    let fps: Vec<Point> = fps_idx.iter().map(|&i| reordered[i]).collect();
    drop(buckets);

    let mut best = if min_separation(&fps) > chord_separation {
        fps
    } else {
        chord.clone()
    };
    improve_dispersion(&mut best, &candidates);
    let rho_k = min_separation(&best);

    // Upper certificate: k - 1 balls of radius s covering the sample (up to
    // its spacing) split the domain into k - 1 sets of diameter 2(s + slack),
    // so two of any k points are at most that far apart.
    let spacing = d / 120.0;
    let cover_sample = sample_closure(domain, spacing)?;
    let cover_buckets = buckets_for(&cover_sample, d);
    let (mut lo, mut hi) = (0.0, d);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        let (centers, _) = farthest_point_centers(&cover_sample, &cover_buckets, mid, k);
        if centers.len() < k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let upper = (2.0 * (hi + spacing * std::f64::consts::SQRT_2)).min(d);

    Ok(PackingRadius {
        k,
        rho_k,
        meets_claim: rho_k >= d / k as f64,
        lower_witness: best,
        chord_separation,
        upper,
        d,
    })
}

fn buckets_for(points: &[Point], d: f64) -> Buckets {
    Buckets::new(points, d / 30.0)
}

/// Coordinate ascent on the smallest pairwise distance: each point moves to
/// the candidate farthest from the others while that increases its own
/// nearest distance.
fn improve_dispersion(points: &mut [Point], candidates: &[Point]) {
    let k = points.len();
    for _ in 0..2000 {
        let mut moved = false;
        for i in 0..k {
            let nearest = |p: Point| {
                (0..k)
                    .filter(|&j| j != i)
                    .map(|j| points[j].dist(p))
                    .fold(f64::INFINITY, f64::min)
            };
            let current = nearest(points[i]);
            let mut best = (current, points[i]);
            for &c in candidates {
                let v = nearest(c);
                if v > best.0 {
                    best = (v, c);
                }
            }
            if best.0 > current * (1.0 + 1e-12) {
                points[i] = best.1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
}

/// Rayleigh quotients of radial plateau functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateauReport {
    pub r: f64,
    pub quotients: Vec<f64>,
    pub max_quotient: f64,
    /// `64 r^-2`, the cap for convex domains in the plane.
    pub cap: f64,
    pub within_cap: bool,
    /// The supports are disjoint, so the Neumann eigenvalue with this index
    /// is at most `max_quotient`.
    pub certified_index: usize,
}

/// Plateau function: 1 on `B(c, r/4)`, linear to 0 on the sphere of radius `r/2`.
pub fn plateau(c: Point, r: f64) -> impl Fn(Point) -> f64 {
    move |p| ((r / 2.0 - p.dist(c)) * 4.0 / r).clamp(0.0, 1.0)
}

pub fn plateau_rayleigh(
    domain: &Domain,
    mesh: &TriMesh,
    centers: &[Point],
    r: f64,
) -> Result<PlateauReport> {
    if centers.is_empty() || !(r > 0.0) {
        return Err(Error::InvalidArgument(
            "plateau functions need at least one centre and r > 0".into(),
        ));
    }
    if mesh.h > r / 16.0 * (1.0 + 1e-9) {
        return Err(Error::Refused(format!(
            "mesh size {} exceeds r/16 = {}",
            mesh.h,
            r / 16.0
        )));
    }
    let sep = min_separation(centers);
    if sep < r * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "centres are {sep} apart, closer than r = {r}"
        )));
    }
    let tol = 1e-9 * r;
    if let Some(c) = centers.iter().find(|&&c| domain.signed_distance(c) > tol) {
        return Err(Error::InvalidArgument(format!(
            "centre ({}, {}) lies outside the domain",
            c.x, c.y
        )));
    }
    let problem = assemble(mesh, BoundaryCondition::Neumann)?;
    let quotients = centers
        .iter()
        .map(|&c| rayleigh_quotient(&problem, &interpolate(mesh, &problem, plateau(c, r))))
        .collect::<Result<Vec<f64>>>()?;
    let max_quotient = quotients.iter().cloned().fold(0.0, f64::max);
    let cap = 64.0 / (r * r);
    Ok(PlateauReport {
        r,
        max_quotient,
        within_cap: max_quotient <= cap,
        cap,
        certified_index: centers.len() - 1,
        quotients,
    })
}

/// Integrals of `1, x, y, x^2, xy, y^2` (coordinates relative to some origin).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub m0: f64,
    pub mx: f64,
    pub my: f64,
    pub mxx: f64,
    pub mxy: f64,
    pub myy: f64,
}

impl std::ops::AddAssign for Moments {
    fn add_assign(&mut self, o: Moments) {
        self.m0 += o.m0;
        self.mx += o.mx;
        self.my += o.my;
        self.mxx += o.mxx;
        self.mxy += o.mxy;
        self.myy += o.myy;
    }
}

/// Signed moments of the triangle `(0, a, b)`.
fn origin_triangle(a: Point, b: Point) -> Moments {
    let area = 0.5 * a.cross(b);
    Moments {
        m0: area,
        mx: area * (a.x + b.x) / 3.0,
        my: area * (a.y + b.y) / 3.0,
        mxx: area * (a.x * a.x + a.x * b.x + b.x * b.x) / 6.0,
        mxy: area * (2.0 * a.x * a.y + 2.0 * b.x * b.y + a.x * b.y + b.x * a.y) / 12.0,
        myy: area * (a.y * a.y + a.y * b.y + b.y * b.y) / 6.0,
    }
}

/// Signed moments of the circular sector of radius `r` from angle `t0`
/// through `t0 + sweep`.
fn sector(r: f64, t0: f64, sweep: f64) -> Moments {
    let t1 = t0 + sweep;
    let r3 = r * r * r / 3.0;
    let r4 = r * r * r * r / 4.0;
    Moments {
        m0: 0.5 * r * r * sweep,
        mx: r3 * (t1.sin() - t0.sin()),
        my: r3 * (t0.cos() - t1.cos()),
        mxx: r4 * (sweep / 2.0 + ((2.0 * t1).sin() - (2.0 * t0).sin()) / 4.0),
        mxy: r4 * (t1.sin().powi(2) - t0.sin().powi(2)) / 2.0,
        myy: r4 * (sweep / 2.0 - ((2.0 * t1).sin() - (2.0 * t0).sin()) / 4.0),
    }
}

/// Exact moments of `polygon ∩ B(0, r)` for a counterclockwise polygon given
/// relative to the disk centre.
pub fn polygon_disk_moments(poly: &[Point], r: f64) -> Moments {
    let mut out = Moments::default();
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let e = q - p;
        let (a, b, c) = (e.dot(e), 2.0 * p.dot(e), p.dot(p) - r * r);
        let mut ts = vec![0.0];
        let disc = b * b - 4.0 * a * c;
        if a > 0.0 && disc > 0.0 {
            let s = disc.sqrt();
            for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
                if t > 0.0 && t < 1.0 {
                    ts.push(t);
                }
            }
        }
        ts.push(1.0);
        for w in ts.windows(2) {
            let (p0, p1) = (p + e * w[0], p + e * w[1]);
            let mid = p + e * (0.5 * (w[0] + w[1]));
            if mid.norm() <= r {
                out += origin_triangle(p0, p1);
            } else {
                out += sector(r, p0.y.atan2(p0.x), signed_angle(p0, p1));
            }
        }
    }
    out
}

/// Moments of `triangle t ∩ B(center, r)` relative to `center`; cheap when the
/// triangle is inside or far outside the disk.
fn triangle_disk_moments(mesh: &TriMesh, t: usize, center: Point, r: f64) -> Moments {
    let p = mesh.triangle_points(t).map(|q| q - center);
    if p.iter().all(|q| q.norm() <= r) {
        return origin_triangle(p[1] - p[0], p[2] - p[0]).shifted(p[0]);
    }
    polygon_disk_moments(&p, r)
}

impl Moments {
    /// Moments of the region translated by `s` (given moments about its own origin).
    fn shifted(self, s: Point) -> Moments {
        Moments {
            m0: self.m0,
            mx: self.mx + s.x * self.m0,
            my: self.my + s.y * self.m0,
            mxx: self.mxx + 2.0 * s.x * self.mx + s.x * s.x * self.m0,
            mxy: self.mxy + s.x * self.my + s.y * self.mx + s.x * s.y * self.m0,
            myy: self.myy + 2.0 * s.y * self.my + s.y * s.y * self.m0,
        }
    }
}

/// The P1 function on triangle `t` as `alpha + beta (x - cx) + gamma (y - cy)`.
fn p1_coefficients(mesh: &TriMesh, t: usize, nodal: &[f64], center: Point) -> (f64, f64, f64) {
    let tri = mesh.triangles[t];
    let [a, b, c] = mesh.triangle_points(t);
    let (ua, ub, uc) = (nodal[tri[0]], nodal[tri[1]], nodal[tri[2]]);
    let det = (b - a).cross(c - a);
    let beta = ((ub - ua) * (c.y - a.y) - (uc - ua) * (b.y - a.y)) / det;
    let gamma = ((uc - ua) * (b.x - a.x) - (ub - ua) * (c.x - a.x)) / det;
    let alpha = ua + beta * (center.x - a.x) + gamma * (center.y - a.y);
    (alpha, beta, gamma)
}

/// Triangles whose bounding boxes meet a query box, bucketed on a grid.
struct TriangleIndex {
    buckets: Buckets,
    owners: Vec<usize>,
}

impl TriangleIndex {
    fn new(mesh: &TriMesh, cell: f64) -> Self {
        // Each triangle is registered under its centroid; queries widen by the
        // longest edge so no triangle is missed.
        let pts: Vec<Point> = (0..mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = mesh.triangle_points(t);
                (a + b + c) * (1.0 / 3.0)
            })
            .collect();
        TriangleIndex {
            buckets: Buckets::new(&pts, cell),
            owners: (0..pts.len()).collect(),
        }
    }

    fn near(&self, mesh: &TriMesh, c: Point, r: f64, mut f: impl FnMut(usize)) {
        let reach = r + mesh.quality().max_edge;
        self.buckets.near(c, reach, |i| f(self.owners[i]));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallIntegrals {
    pub volume: f64,
    pub integral: f64,
    pub square_integral: f64,
}

fn ball_integrals_indexed(
    mesh: &TriMesh,
    index: &TriangleIndex,
    reach: f64,
    nodal: &[f64],
    center: Point,
    r: f64,
) -> BallIntegrals {
    let mut out = BallIntegrals {
        volume: 0.0,
        integral: 0.0,
        square_integral: 0.0,
    };
    index.buckets.near(center, r + reach, |i| {
        let t = index.owners[i];
        let m = triangle_disk_moments(mesh, t, center, r);
        if m.m0 == 0.0 {
            return;
        }
        let (a, b, g) = p1_coefficients(mesh, t, nodal, center);
        out.volume += m.m0;
        out.integral += a * m.m0 + b * m.mx + g * m.my;
        out.square_integral += a * a * m.m0
            + 2.0 * a * b * m.mx
            + 2.0 * a * g * m.my
            + b * b * m.mxx
            + 2.0 * b * g * m.mxy
            + g * g * m.myy;
    });
    out
}

/// Exact integrals of a P1 function and its square over `B(center, r) ∩ mesh`.
pub fn ball_integrals(mesh: &TriMesh, nodal: &[f64], center: Point, r: f64) -> BallIntegrals {
    let index = TriangleIndex::new(mesh, r.max(mesh.h));
    let reach = mesh.quality().max_edge;
    ball_integrals_indexed(mesh, &index, reach, nodal, center, r)
}

/// Exact integral of `|grad u|^2` over `B(center, r) ∩ mesh` for P1 `u`.
pub fn ball_energy(mesh: &TriMesh, nodal: &[f64], center: Point, r: f64) -> f64 {
    let index = TriangleIndex::new(mesh, r.max(mesh.h));
    let mut e = 0.0;
    index.near(mesh, center, r, |t| {
        let m = triangle_disk_moments(mesh, t, center, r);
        if m.m0 != 0.0 {
            let (_, b, g) = p1_coefficients(mesh, t, nodal, center);
            e += (b * b + g * g) * m.m0;
        }
    });
    e
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub center: Point,
    pub big_r: f64,
    /// `int_{B_R} |u - u_R|^2`.
    pub variance: f64,
    /// `int_{B_2R} |grad u|^2`.
    pub energy: f64,
    pub ratio: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub samples: Option<usize>,
}

/// `int_{B_R ∩ Ω} |u - u_R|^2 / (R^2 int_{B_2R ∩ Ω} |grad u|^2)` for a P1
/// function on `mesh`, with exact integration over the clipped triangles.
/// A function with no gradient energy has ratio 0.
pub fn poincare_ratio(
    mesh: &TriMesh,
    nodal: &[f64],
    center: Point,
    big_r: f64,
) -> Result<PoincareReport> {
    if !(big_r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ball radius must be positive, got {big_r}"
        )));
    }
    if nodal.len() != mesh.num_vertices() {
        return Err(Error::InvalidArgument(
            "nodal values do not match the mesh".into(),
        ));
    }
    let ints = ball_integrals(mesh, nodal, center, big_r);
    if ints.volume <= 0.0 {
        return Err(Error::InvalidArgument(
            "the ball does not meet the domain".into(),
        ));
    }
    let mean = ints.integral / ints.volume;
    let variance = (ints.square_integral - mean * ints.integral).max(0.0);
    let energy = ball_energy(mesh, nodal, center, 2.0 * big_r);
    let scale = nodal.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let ratio = if energy <= 1e-24 * scale * scale {
        0.0
    } else {
        variance / (big_r * big_r * energy)
    };
    Ok(PoincareReport {
        center,
        big_r,
        variance,
        energy,
        ratio,
        ci_low: None,
        ci_high: None,
        samples: None,
    })
}

/// Monte-Carlo settings shared by the segment and Poincaré estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub samples: usize,
    pub batches: usize,
    pub seed: u64,
    pub confidence: f64,
    /// Half-widths above this (in ratio units) are flagged inconclusive.
    pub max_half_width: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            samples: 1_000_000,
            batches: 64,
            seed: 20_240_601,
            confidence: 0.99,
            max_half_width: 0.05,
        }
    }
}

/// Half-width of the `confidence` t-interval for the mean of `values`.
fn t_half_width(values: &[f64], confidence: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("positive degrees of freedom");
    t.inverse_cdf(0.5 + confidence / 2.0) * (var / n as f64).sqrt()
}

/// A subset of `B_R ∩ Ω` for the segment inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Region {
    /// All of `B_R ∩ Ω`.
    BallCap,
    /// `B(center, radius) ∩ B_R ∩ Ω`.
    Disk { center: Point, radius: f64 },
}

struct Setup<'a> {
    domain: &'a Domain,
    center: Point,
    big_r: f64,
    tol: f64,
}

impl Setup<'_> {
    fn in_region(&self, region: Region, p: Point) -> bool {
        let inside = p.dist(self.center) < self.big_r && self.domain.signed_distance(p) < 0.0;
        match region {
            Region::BallCap => inside,
            Region::Disk { center, radius } => inside && p.dist(center) < radius,
        }
    }

    fn in_w(&self, p: Point) -> bool {
        p.dist(self.center) <= 2.0 * self.big_r + self.tol
            && self.domain.signed_distance(p) <= self.tol
    }

    fn bbox(&self, region: Region, radius_factor: f64) -> (Point, Point) {
        let (dlo, dhi) = self.domain.boundary().expect("planar").bbox();
        let rr = radius_factor * self.big_r;
        let mut lo = Point::new(dlo.x.max(self.center.x - rr), dlo.y.max(self.center.y - rr));
        let mut hi = Point::new(dhi.x.min(self.center.x + rr), dhi.y.min(self.center.y + rr));
        if let Region::Disk { center, radius } = region {
            lo = Point::new(lo.x.max(center.x - radius), lo.y.max(center.y - radius));
            hi = Point::new(hi.x.min(center.x + radius), hi.y.min(center.y + radius));
        }
        (lo, hi)
    }
}

const STRATA: usize = 4;

/// Uniform point in cell `cell` of a `STRATA x STRATA` subdivision of a box.
fn stratified(rng: &mut ChaCha8Rng, (lo, hi): (Point, Point), cell: usize) -> Point {
    let (cx, cy) = ((cell % STRATA) as f64, (cell / STRATA) as f64);
    let u = (cx + rng.gen::<f64>()) / STRATA as f64;
    let v = (cy + rng.gen::<f64>()) / STRATA as f64;
    Point::new(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y))
}

fn box_area((lo, hi): (Point, Point)) -> f64 {
    (hi.x - lo.x).max(0.0) * (hi.y - lo.y).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    pub big_r: f64,
    /// `C(2, 0, R) = 4R`.
    pub constant: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub vol_a: f64,
    pub vol_b: f64,
    pub integral_w: f64,
    pub ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence: f64,
    pub samples: usize,
    pub batches: usize,
    /// `ratio <= 1` within the confidence interval.
    pub satisfied: bool,
    pub inconclusive: bool,
}

#[derive(Default, Clone, Copy)]
struct SegmentBatch {
    lhs: f64,
    vol_a: f64,
    vol_b: f64,
    integral_w: f64,
    escaped: usize,
}

/// Monte-Carlo check of the segment inequality
/// `int_{A x B} int_0^{|x-y|} F ds dx dy <= 4R (|A| + |B|) int_W F`,
/// `W = B_2R ∩ Ω`, on a convex planar domain.
pub fn segment_inequality_mc<F>(
    domain: &Domain,
    center: Point,
    big_r: f64,
    a: Region,
    b: Region,
    f: F,
    opts: McOptions,
) -> Result<SegmentReport>
where
    F: Fn(Point) -> f64 + Sync,
{
    planar_boundary(domain)?;
    if !domain.convex {
        return Err(Error::Refused(
            "the segment inequality with W = B_2R ∩ Ω needs a convex domain".into(),
        ));
    }
    if !(big_r > 0.0) || opts.batches < 2 || opts.samples < opts.batches {
        return Err(Error::InvalidArgument(
            "need R > 0, at least two batches and one sample per batch".into(),
        ));
    }
    let (d, _) = domain.diameter();
    let setup = Setup {
        domain,
        center,
        big_r,
        tol: 1e-9 * d,
    };
    let (box_a, box_b, box_w) = (
        setup.bbox(a, 1.0),
        setup.bbox(b, 1.0),
        setup.bbox(Region::BallCap, 2.0),
    );
    let (area_a, area_b, area_w) = (box_area(box_a), box_area(box_b), box_area(box_w));
    let cells = STRATA * STRATA;
    let per_batch = (opts.samples / opts.batches).div_ceil(cells * cells) * cells * cells;
    const NODES: usize = 12;
    let gl: Vec<(f64, f64)> = {
        // 12-point Gauss–Legendre on [0, 1] from the 5-point rule on subintervals
        // would be overkill; F is smooth, so one panel of a high-order rule is used.
        gauss_legendre_nodes(NODES)
    };

    let batches: Vec<SegmentBatch> = (0..opts.batches)
        .into_par_iter()
        .map(|bi| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                opts.seed ^ (bi as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let mut acc = SegmentBatch::default();
            for j in 0..per_batch {
                let x = stratified(&mut rng, box_a, j % cells);
                let y = stratified(&mut rng, box_b, (j / cells) % cells);
                let z = stratified(&mut rng, box_w, j % cells);
                let (ia, ib) = (setup.in_region(a, x), setup.in_region(b, y));
                acc.vol_a += ia as u8 as f64;
                acc.vol_b += ib as u8 as f64;
                if setup.in_w(z) {
                    acc.integral_w += f(z);
                }
                if ia && ib {
                    if !setup.in_w(x.lerp(y, 0.5)) {
                        acc.escaped += 1;
                    }
                    let len = x.dist(y);
                    let line: f64 = gl.iter().map(|&(t, w)| w * f(x.lerp(y, t))).sum();
                    acc.lhs += len * line;
                }
            }
            let n = per_batch as f64;
            SegmentBatch {
                lhs: acc.lhs * area_a * area_b / n,
                vol_a: acc.vol_a * area_a / n,
                vol_b: acc.vol_b * area_b / n,
                integral_w: acc.integral_w * area_w / n,
                escaped: acc.escaped,
            }
        })
        .collect();

    let escaped: usize = batches.iter().map(|b| b.escaped).sum();
    if escaped > 0 {
        return Err(Error::Refused(format!(
            "{escaped} sampled segments left B_2R ∩ Ω"
        )));
    }
    let nb = batches.len() as f64;
    let mean = |g: fn(&SegmentBatch) -> f64| batches.iter().map(g).sum::<f64>() / nb;
    let (lhs, vol_a, vol_b, integral_w) = (
        mean(|b| b.lhs),
        mean(|b| b.vol_a),
        mean(|b| b.vol_b),
        mean(|b| b.integral_w),
    );
    let constant = segment_constant(2, 0.0, big_r);
    let rhs = constant * (vol_a + vol_b) * integral_w;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    let batch_ratios: Vec<f64> = batches
        .iter()
        .map(|b| {
            let r = constant * (b.vol_a + b.vol_b) * b.integral_w;
            if r > 0.0 {
                b.lhs / r
            } else {
                0.0
            }
        })
        .collect();
    let half = t_half_width(&batch_ratios, opts.confidence);
    Ok(SegmentReport {
        big_r,
        constant,
        lhs,
        rhs,
        vol_a,
        vol_b,
        integral_w,
        ratio,
        ci_low: ratio - half,
        ci_high: ratio + half,
        confidence: opts.confidence,
        samples: per_batch * opts.batches,
        batches: opts.batches,
        satisfied: ratio - half <= 1.0,
        inconclusive: half > opts.max_half_width,
    })
}

/// Gauss–Legendre nodes and weights on `[0, 1]` by Newton iteration on `P_n`.
fn gauss_legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Monte-Carlo Poincaré ratio for a closed-form `u` with gradient `grad`.
pub fn poincare_ratio_mc<U, G>(
    domain: &Domain,
    center: Point,
    big_r: f64,
    u: U,
    grad: G,
    opts: McOptions,
) -> Result<PoincareReport>
where
    U: Fn(Point) -> f64 + Sync,
    G: Fn(Point) -> Point + Sync,
{
    planar_boundary(domain)?;
    if !(big_r > 0.0) || opts.batches < 2 {
        return Err(Error::InvalidArgument(
            "need R > 0 and at least two batches".into(),
        ));
    }
    let (d, _) = domain.diameter();
    let setup = Setup {
        domain,
        center,
        big_r,
        tol: 1e-9 * d,
    };
    let (inner, outer) = (
        setup.bbox(Region::BallCap, 1.0),
        setup.bbox(Region::BallCap, 2.0),
    );
    let (area_in, area_out) = (box_area(inner), box_area(outer));
    let cells = STRATA * STRATA;
    let per_batch = (opts.samples / opts.batches).div_ceil(cells) * cells;
    // Per batch: volume, int u, int u^2 over B_R ∩ Ω and int |grad u|^2 over B_2R ∩ Ω.
    let batches: Vec<[f64; 4]> = (0..opts.batches)
        .into_par_iter()
        .map(|bi| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                opts.seed ^ (bi as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            );
            let mut acc = [0.0; 4];
            for j in 0..per_batch {
                let p = stratified(&mut rng, inner, j % cells);
                if setup.in_region(Region::BallCap, p) {
                    let v = u(p);
                    acc[0] += 1.0;
                    acc[1] += v;
                    acc[2] += v * v;
                }
                let q = stratified(&mut rng, outer, j % cells);
                if q.dist(center) < 2.0 * big_r && domain.signed_distance(q) < 0.0 {
                    let g = grad(q);
                    acc[3] += g.dot(g);
                }
            }
            let n = per_batch as f64;
            [
                acc[0] * area_in / n,
                acc[1] * area_in / n,
                acc[2] * area_in / n,
                acc[3] * area_out / n,
            ]
        })
        .collect();
    let ratio_of = |s: &[f64; 4]| {
        if s[0] <= 0.0 || s[3] <= 0.0 {
            return 0.0;
        }
        let variance = (s[2] - s[1] * s[1] / s[0]).max(0.0);
        variance / (big_r * big_r * s[3])
    };
    let nb = batches.len() as f64;
    let mut mean = [0.0; 4];
    for b in &batches {
        for i in 0..4 {
            mean[i] += b[i] / nb;
        }
    }
    let ratio = ratio_of(&mean);
    let half = t_half_width(
        &batches.iter().map(ratio_of).collect::<Vec<_>>(),
        opts.confidence,
    );
    Ok(PoincareReport {
        center,
        big_r,
        variance: (mean[2] - mean[1] * mean[1] / mean[0].max(f64::MIN_POSITIVE)).max(0.0),
        energy: mean[3],
        ratio,
        ci_low: Some(ratio - half),
        ci_high: Some(ratio + half),
        samples: Some(per_batch * opts.batches),
    })
}

/// The largest ratio over a battery: the empirical Poincaré constant.
pub fn poincare_constant(reports: &[PoincareReport]) -> f64 {
    reports.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

/// Constant `c_6 = 12^n C_N` tying the covering radius to the eigenvalue.
pub fn c6_from_poincare(n: usize, c_n: f64) -> f64 {
    12f64.powi(n as i32) * c_n
}

/// Covering radius `(c_6 lambda)^{-1/2}` below which the averaging map is injective.
pub fn regime_radius(c6: f64, lambda: f64) -> f64 {
    (c6 * lambda).powf(-0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiCertificate {
    pub lambda: f64,
    /// `N(lambda)`, the dimension of the span of eigenfunctions below `lambda`.
    pub dim: usize,
    /// Number of balls.
    pub m: usize,
    pub rank: usize,
    pub injective: bool,
    pub singular_values: Vec<f64>,
    pub rho: f64,
}

/// Rank of the map sending each eigenfunction below `lambda` to its averages
/// over the covering balls `B(x_i, rho) ∩ Ω`.
pub fn phi_injectivity_certificate(
    mesh: &TriMesh,
    spectrum: &SpectrumSummary,
    packing: &PackingResult,
    lambda: f64,
) -> Result<PhiCertificate> {
    let vectors = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("the spectrum carries no eigenvectors".into()))?;
    let dim = count_below(&spectrum.eigenvalues, lambda);
    if dim >= spectrum.len() || dim > vectors.len() {
        return Err(Error::InsufficientSpectrum {
            largest: spectrum.largest(),
        });
    }
    if vectors.iter().any(|v| v.len() != mesh.num_vertices()) {
        return Err(Error::InvalidArgument(
            "eigenvectors do not live on this mesh".into(),
        ));
    }
    let m = packing.centers.len();
    if dim == 0 {
        return Ok(PhiCertificate {
            lambda,
            dim,
            m,
            rank: 0,
            injective: true,
            singular_values: vec![],
            rho: packing.rho,
        });
    }
    let rho = packing.rho;
    let index = TriangleIndex::new(mesh, rho.max(mesh.h));
    let reach = mesh.quality().max_edge;
    let rows: Vec<Vec<f64>> = packing
        .centers
        .par_iter()
        .map(|&c| {
            let mut row = vec![0.0; dim];
            let mut volume = 0.0;
            index.buckets.near(c, rho + reach, |i| {
                let t = index.owners[i];
                let mo = triangle_disk_moments(mesh, t, c, rho);
                if mo.m0 == 0.0 {
                    return;
                }
                volume += mo.m0;
                for (j, v) in vectors.iter().take(dim).enumerate() {
                    let (a, b, g) = p1_coefficients(mesh, t, v, c);
                    row[j] += a * mo.m0 + b * mo.mx + g * mo.my;
                }
            });
            if volume > 0.0 {
                row.iter_mut().for_each(|x| *x /= volume);
            }
            row
        })
        .collect();
    let a = DMatrix::from_fn(m, dim, |i, j| rows[i][j]);
    let mut singular_values: Vec<f64> = a
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .collect();
    singular_values.sort_by(|x, y| y.total_cmp(x));
    let smax = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > 1e-8 * smax).count();
    Ok(PhiCertificate {
        lambda,
        dim,
        m,
        rank,
        injective: rank == dim,
        singular_values,
        rho,
    })
}
