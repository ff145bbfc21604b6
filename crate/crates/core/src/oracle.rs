//! Closed-form and semi-analytic reference spectra.
//!
//! Rectangles and flat tori are enumerated over the lattice of separated
//! modes, disks go through Bessel zeros, and the exponential surface of
//! revolution is reduced to one Sturm–Liouville pencil per angular mode.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_prime_zeros_below, bessel_zeros_below};
use crate::domain::dijkstra_grid;
use crate::eigen::SpectrumSummary;
use crate::error::{Error, Result};
use crate::fem::BoundaryCondition;

/// Lowest `count` values of `lambda(p, q)` over `p, q >= start`, where `lambda`
/// increases in both indices. With `symmetric`, each nonzero index also stands
/// for its negative, as for exponentials on a torus.
fn lattice_lowest<F>(count: usize, scale: f64, start: i64, symmetric: bool, lambda: F) -> Vec<f64>
where
    F: Fn(i64, i64) -> f64,
{
    if count == 0 {
        return Vec::new();
    }
    let mut cutoff = scale * (count as f64 + 4.0);
    loop {
        let mut vals = Vec::new();
        for p in start.. {
            if lambda(p, start) >= cutoff {
                break;
            }
            for q in start.. {
                let v = lambda(p, q);
                if v >= cutoff {
                    break;
                }
                let mult = if symmetric {
                    (1 + (p != 0) as usize) * (1 + (q != 0) as usize)
                } else {
                    1
                };
                vals.extend(std::iter::repeat(v).take(mult));
            }
        }
        if vals.len() >= count {
            vals.sort_by(f64::total_cmp);
            vals.truncate(count);
            return vals;
        }
        cutoff *= 2.0;
    }
}

/// Lowest `count` eigenvalues of the `a x b` rectangle, with multiplicity.
pub fn rectangle_spectrum(a: f64, b: f64, bc: BoundaryCondition, count: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > 0.0, "rectangle sides must be positive");
    let start = match bc {
        BoundaryCondition::Dirichlet => 1,
        BoundaryCondition::Neumann => 0,
    };
    let scale = PI * PI / (a * b);
    lattice_lowest(count, scale, start, false, |p, q| {
        PI * PI * ((p * p) as f64 / (a * a) + (q * q) as f64 / (b * b))
    })
}

/// Lowest `count` eigenvalues of the flat torus `R^2 / (aZ x bZ)`.
pub fn torus_spectrum(a: f64, b: f64, count: usize) -> Vec<f64> {
    assert!(a >= b && b > 0.0, "torus periods must satisfy a >= b > 0");
    let scale = PI / (a * b);
    lattice_lowest(count, scale, 0, true, |p, q| {
        4.0 * PI * PI * ((p * p) as f64 / (a * a) + (q * q) as f64 / (b * b))
    })
}

/// Lowest `count` eigenvalues of the disk of the given radius.
pub fn disk_spectrum(radius: f64, bc: BoundaryCondition, count: usize) -> Vec<f64> {
    assert!(radius > 0.0, "radius must be positive");
    if count == 0 {
        return Vec::new();
    }
    // Weyl: N(lambda) ~ lambda r^2 / 4, so j ~ 2 sqrt(count).
    let mut limit = 2.0 * (count as f64).sqrt() + 6.0;
    loop {
        let mut zeros: Vec<f64> = Vec::new();
        if bc == BoundaryCondition::Neumann {
            zeros.push(0.0);
        }
        let mut m = 0u32;
        while (m as f64) < limit {
            let z = match bc {
                BoundaryCondition::Dirichlet => bessel_zeros_below(m, limit),
                BoundaryCondition::Neumann => bessel_prime_zeros_below(m, limit),
            };
            let mult = if m == 0 { 1 } else { 2 };
            for j in z {
                for _ in 0..mult {
                    zeros.push(j);
                }
            }
            m += 1;
        }
        if zeros.len() >= count {
            zeros.sort_by(f64::total_cmp);
            zeros.truncate(count);
            return zeros.into_iter().map(|j| (j / radius).powi(2)).collect();
        }
        limit *= 1.5;
    }
}

/// Wraps an oracle list as a spectrum summary tagged with source "oracle".
pub fn oracle_summary(bc: BoundaryCondition, eigenvalues: Vec<f64>) -> SpectrumSummary {
    SpectrumSummary::from_values(bc, eigenvalues, "oracle")
}

/// The surface `y^2 + z^2 = f(x)^2`, `f(x) = s e^{-R x / s} / R` on `[0, s]`.
/// `s = 1` is the unscaled surface; other values dilate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevolutionSurface {
    pub r: f64,
    pub scale: f64,
    /// Number of elements in the meridian discretisation.
    pub grid: usize,
}

impl RevolutionSurface {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "revolution parameter R must be positive, got {r}"
            )));
        }
        Ok(Self {
            r,
            scale: 1.0,
            grid: 800,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid;
        self
    }

    pub fn profile(&self, x: f64) -> f64 {
        self.scale * (-self.r * x / self.scale).exp() / self.r
    }

    pub fn profile_slope(&self, x: f64) -> f64 {
        -(-self.r * x / self.scale).exp()
    }

    fn metric_g(&self, x: f64) -> f64 {
        self.profile_slope(x).hypot(1.0)
    }

    /// Length of the meridian curve `x -> (x, f(x))`.
    pub fn meridian_length(&self) -> f64 {
        gauss_integrate(0.0, self.scale, 400, |x| self.metric_g(x))
    }

    pub fn area(&self) -> f64 {
        2.0 * PI * gauss_integrate(0.0, self.scale, 400, |x| self.profile(x) * self.metric_g(x))
    }

    /// Diameter of the surface as a subset of R^3.
    pub fn extrinsic_diameter(&self) -> f64 {
        // With one point on the wide end, the far point sits opposite in theta.
        let f0 = self.profile(0.0);
        let n = 4000;
        (0..=n)
            .map(|i| {
                let x = self.scale * i as f64 / n as f64;
                x.hypot(f0 + self.profile(x))
            })
            .fold(0.0, f64::max)
    }

    /// Intrinsic diameter by Dijkstra on an `(x, theta)` grid with 16-neighbour
    /// stencils; sources are spread along the meridian at `theta = 0`.
    pub fn intrinsic_diameter(&self, resolution: f64) -> f64 {
        let nx = ((self.meridian_length() / resolution).ceil() as usize).clamp(40, 400);
        let nt = 128usize;
        let dx = self.scale / nx as f64;
        let dt = 2.0 * PI / nt as f64;
        let id = |i: usize, j: usize| i * nt + j;
        let steps: [(i64, i64); 16] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
            (2, 1),
            (2, -1),
            (-2, 1),
            (-2, -1),
            (1, 2),
            (1, -2),
            (-1, 2),
            (-1, -2),
        ];
        let mut best: f64 = 0.0;
        for src in 0..=8 {
            let i0 = src * nx / 8;
            let dist = dijkstra_grid((nx + 1) * nt, id(i0, 0), |u, out| {
                let (i, j) = ((u / nt) as i64, (u % nt) as i64);
                for &(di, dj) in &steps {
                    let ii = i + di;
                    if ii < 0 || ii > nx as i64 {
                        continue;
                    }
                    let jj = (j + dj).rem_euclid(nt as i64);
                    let xm = (i as f64 + 0.5 * di as f64) * dx;
                    let g = self.metric_g(xm);
                    let f = self.profile(xm);
                    let w = ((g * di as f64 * dx).powi(2) + (f * dj as f64 * dt).powi(2)).sqrt();
                    out.push((id(ii as usize, jj as usize), w));
                }
            });
            best = best.max(dist.into_iter().fold(0.0, f64::max));
        }
        best
    }
}

/// Composite three-point Gauss–Legendre quadrature.
fn gauss_integrate<F: Fn(f64) -> f64>(a: f64, b: f64, pieces: usize, f: F) -> f64 {
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let h = (b - a) / pieces as f64;
    let mut sum = 0.0;
    for k in 0..pieces {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Symmetric tridiagonal pencil `(K, M)` from P1 elements on the meridian.
struct Pencil {
    kd: Vec<f64>,
    ko: Vec<f64>,
    md: Vec<f64>,
    mo: Vec<f64>,
}

impl Pencil {
    fn assemble(s: &RevolutionSurface, m: u32, n: usize) -> Self {
        let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let h = s.scale / n as f64;
        let m2 = (m as f64).powi(2);
        let mut p = Self {
            kd: vec![0.0; n + 1],
            ko: vec![0.0; n],
            md: vec![0.0; n + 1],
            mo: vec![0.0; n],
        };
        for e in 0..n {
            let x0 = e as f64 * h;
            for (xi, w) in nodes.iter().zip(weights) {
                let t = 0.5 * (1.0 + xi);
                let x = x0 + t * h;
                let (f, g) = (s.profile(x), s.metric_g(x));
                let jw = 0.5 * h * w;
                let (a, b) = (1.0 - t, t);
                let stiff = f / g / (h * h);
                let pot = m2 * g / f;
                let mass = f * g;
                p.kd[e] += jw * (stiff + pot * a * a);
                p.kd[e + 1] += jw * (stiff + pot * b * b);
                p.ko[e] += jw * (-stiff + pot * a * b);
                p.md[e] += jw * mass * a * a;
                p.md[e + 1] += jw * mass * b * b;
                p.mo[e] += jw * mass * a * b;
            }
        }
        p
    }

    /// Number of eigenvalues strictly below `lambda` (Sylvester inertia of `K - lambda M`).
    fn count_below(&self, lambda: f64) -> usize {
        let mut count = 0;
        let mut d = self.kd[0] - lambda * self.md[0];
        let tiny = 1e-300;
        for i in 0..self.kd.len() {
            if i > 0 {
                let off = self.ko[i - 1] - lambda * self.mo[i - 1];
                d = self.kd[i] - lambda * self.md[i] - off * off / d;
            }
            if d == 0.0 {
                d = -tiny;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th eigenvalue (0-based) by bisection on the inertia count.
    fn eigenvalue(&self, k: usize) -> f64 {
        let mut hi = 1.0;
        while self.count_below(hi) <= k {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        // The pencil is positive semidefinite, so nothing lies below 0; start
        // slightly negative to catch the zero mode.
        if self.count_below(lo) > k {
            lo = -1.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-14 * hi.abs().max(1e-12) {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// First nonzero eigenvalue of the m = 0 and m = 1 ladders on `n` elements.
fn first_nonzero(s: &RevolutionSurface, n: usize) -> f64 {
    let axial = Pencil::assemble(s, 0, n).eigenvalue(1);
    let angular = Pencil::assemble(s, 1, n).eigenvalue(0);
    axial.min(angular)
}

/// Picks a meridian grid for which doubling moves the first nonzero eigenvalue
/// by less than 0.1 %. Returns the grid and the two eigenvalues compared.
pub fn converged_grid(s: &RevolutionSurface) -> Result<(usize, f64, f64)> {
    let mut n = s.grid.max(16);
    let mut coarse = first_nonzero(s, n);
    while n <= 1 << 17 {
        let fine = first_nonzero(s, 2 * n);
        if (coarse - fine).abs() <= 1e-3 * fine {
            return Ok((2 * n, coarse, fine));
        }
        n *= 2;
        coarse = fine;
    }
    Err(Error::GridConvergence(format!(
        "revolution surface R = {}: first eigenvalue still moving at {n} elements",
        s.r
    )))
}

/// Lowest `count` eigenvalues of the surface, with multiplicity, using angular
/// modes `0..=mode_max`. Values that a mode above `mode_max` could undercut are
/// dropped, so the list may be shorter than `count`.
pub fn revolution_spectrum(s: &RevolutionSurface, mode_max: u32, count: usize) -> Result<Vec<f64>> {
    if mode_max < 8 {
        return Err(Error::InvalidArgument(format!(
            "mode_max must be at least 8, got {mode_max}"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let (n, _, _) = converged_grid(s)?;
    let axial = Pencil::assemble(s, 0, n);
    let cutoff = axial.eigenvalue(count.min(n) - 1);
    // Rayleigh quotients of mode m are at least m^2 / max f^2.
    let f0 = s.profile(0.0);
    let safe = ((mode_max + 1) as f64 / f0).powi(2);
    let cutoff = cutoff.min(safe);
    let mut vals = Vec::new();
    for m in 0..=mode_max {
        let pencil = Pencil::assemble(s, m, n);
        let below = pencil.count_below(cutoff * (1.0 + 1e-12));
        let mult = if m == 0 { 1 } else { 2 };
        for k in 0..below {
            let v = pencil.eigenvalue(k);
            for _ in 0..mult {
                vals.push(v);
            }
        }
    }
    vals.sort_by(f64::total_cmp);
    if let Some(first) = vals.first_mut() {
        // The m = 0 constant mode is exact; bisection leaves round-off.
        if first.abs() < 1e-9 {
            *first = 0.0;
        }
    }
    vals.truncate(count);
    Ok(vals)
}
