//! Acceptance criteria 1 to 12. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use spectral_bounds::bounds::{
    check_cheng_neumann_convex, estimate_constant, evaluate_all, BoundId, ConstantStore,
    CorpusEntry,
};
use spectral_bounds::covering::{
    c6_from_poincare, greedy_packing, packing_radius, phi_injectivity_certificate,
    poincare_constant, poincare_ratio, regime_radius, segment_inequality_mc, McOptions, Region,
};
use spectral_bounds::eigen::{cluster_multiplicities, count_below};
use spectral_bounds::oracle::{
    oracle_summary, rectangle_spectrum, revolution_spectrum, torus_spectrum, RevolutionSurface,
};
use spectral_bounds::pipeline::{
    convex_corpus, fem_spectrum, fem_spectrum_on_mesh, necessity_suite, Family, DEFAULT_TOL,
};
use spectral_bounds::{
    generate_domain, invariants, scale_domain, BoundaryCondition, Domain, DomainSpec,
    GeometricInvariants, Point, SpectrumSummary, TriMesh,
};

const H: f64 = 0.02;
const K: usize = 20;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- oracles

fn lattice(from: u32, count: usize, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let n = (count as f64).sqrt() as u32 + 8;
    let mut v: Vec<f64> = (from..from + n)
        .flat_map(|i| (from..from + n).map(move |j| (i, j)))
        .map(|(i, j)| f(i as f64, j as f64))
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

fn square_exact(bc: BoundaryCondition, count: usize) -> Vec<f64> {
    let from = if bc == BoundaryCondition::Dirichlet {
        1
    } else {
        0
    };
    lattice(from, count, |m, n| PI * PI * (m * m + n * n))
}

/// `J_n(x)` from the integral `(1/pi) int_0^pi cos(n t - x sin t) dt`.
fn bessel_j(n: i32, x: f64) -> f64 {
    let steps = 2000;
    let h = PI / steps as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let mut s = f(0.0) + f(PI);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 / PI
}

fn bessel_jp(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

fn roots(g: impl Fn(f64) -> f64, from: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let step = 0.02;
    let mut a = from;
    let mut ga = g(a);
    while a < hi {
        let b = a + step;
        let gb = g(b);
        if ga * gb < 0.0 {
            let (mut lo, mut up) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + up);
                if g(lo) * g(mid) <= 0.0 {
                    up = mid;
                } else {
                    lo = mid;
                }
            }
            out.push(0.5 * (lo + up));
        }
        a = b;
        ga = gb;
    }
    out
}

/// Unit-disk eigenvalues with multiplicity, from zeros of `J_n` or `J_n'`.
fn disk_exact(bc: BoundaryCondition, count: usize) -> Vec<(f64, usize)> {
    let mut v = Vec::new();
    if bc == BoundaryCondition::Neumann {
        v.push((0.0, 1));
    }
    for n in 0..16 {
        // The first zeros of J_n and J_n' lie above 0.8 n; near 0 both are round-off.
        let from = 0.5 + 0.8 * n as f64;
        let zs = match bc {
            BoundaryCondition::Dirichlet => roots(|x| bessel_j(n, x), from, 16.0),
            BoundaryCondition::Neumann => roots(|x| bessel_jp(n, x), from, 16.0),
        };
        for z in zs {
            v.push((z * z, if n == 0 { 1 } else { 2 }));
        }
    }
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut flat = Vec::new();
    for (val, m) in v {
        for _ in 0..m {
            flat.push((val, m));
        }
    }
    flat.truncate(count);
    flat
}

/// First nonzero Neumann eigenvalue of the exponential surface of revolution by
/// a cell-centred finite-volume scheme in the profile variable, modes 0 and 1.
fn revolution_fv(r: f64, cells: usize) -> f64 {
    let f = |x: f64| (-r * x).exp() / r;
    let w = |x: f64| (-r * x).exp().hypot(1.0);
    let dx = 1.0 / cells as f64;
    let xc = |i: usize| (i as f64 + 0.5) * dx;
    let mut best = f64::INFINITY;
    for m in [0.0f64, 1.0] {
        let mass: Vec<f64> = (0..cells).map(|i| f(xc(i)) * w(xc(i)) * dx).collect();
        let mut k = DMatrix::<f64>::zeros(cells, cells);
        for i in 0..cells {
            k[(i, i)] += m * m * w(xc(i)) / f(xc(i)) * dx;
            if i + 1 < cells {
                let xf = (i as f64 + 1.0) * dx;
                let c = f(xf) / w(xf) / dx;
                k[(i, i)] += c;
                k[(i + 1, i + 1)] += c;
                k[(i, i + 1)] -= c;
                k[(i + 1, i)] -= c;
            }
        }
        let s = DMatrix::from_fn(cells, cells, |i, j| k[(i, j)] / (mass[i] * mass[j]).sqrt());
        let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        let v = if m == 0.0 { ev[1] } else { ev[0] };
        best = best.min(v);
    }
    best
}

fn min_pairwise(p: &[Point]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            m = m.min(p[i].dist(p[j]));
        }
    }
    m
}

// ---------------------------------------------------------------- shared data

struct Entry {
    id: &'static str,
    domain: Domain,
    inv: GeometricInvariants,
    mesh: TriMesh,
    neumann: SpectrumSummary,
    dirichlet: SpectrumSummary,
    seconds: f64,
}

fn corpus() -> Vec<Entry> {
    convex_corpus()
        .into_iter()
        .map(|(id, spec)| {
            let domain = generate_domain(&spec).unwrap();
            let inv = invariants(&domain, domain.diameter().0 / 200.0).unwrap();
            let t = Instant::now();
            let (mesh, neumann) =
                fem_spectrum_on_mesh(&domain, BoundaryCondition::Neumann, H, K, DEFAULT_TOL)
                    .unwrap();
            let dirichlet =
                fem_spectrum(&domain, BoundaryCondition::Dirichlet, H, K, DEFAULT_TOL).unwrap();
            Entry {
                id,
                domain,
                inv,
                mesh,
                neumann,
                dirichlet,
                seconds: t.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

fn get<'a>(c: &'a [Entry], id: &str) -> &'a Entry {
    c.iter().find(|e| e.id == id).unwrap()
}

// ---------------------------------------------------------------- criteria

fn c1_oracle_fidelity(c: &[Entry]) -> Outcome {
    let sq_d = square_exact(BoundaryCondition::Dirichlet, 5);
    let listed = [2.0, 5.0, 5.0, 8.0, 10.0].map(|x| x * PI * PI);
    ensure(
        sq_d.iter().zip(&listed).all(|(a, b)| (a - b).abs() < 1e-12),
        || "square oracle disagrees with the listed values".into(),
    )?;
    let sq_n = square_exact(BoundaryCondition::Neumann, 4);
    let listed = [0.0, 1.0, 1.0, 2.0].map(|x| x * PI * PI);
    ensure(
        sq_n.iter().zip(&listed).all(|(a, b)| (a - b).abs() < 1e-12),
        || "square Neumann oracle disagrees".into(),
    )?;
    let disk_d = disk_exact(BoundaryCondition::Dirichlet, 1)[0].0;
    let disk_n = disk_exact(BoundaryCondition::Neumann, 2)[1].0;
    ensure(
        (disk_d - 5.78319).abs() < 1e-5 && (disk_n - 3.38996).abs() < 1e-5,
        || format!("disk oracle {disk_d}, {disk_n}"),
    )?;

    let mut worst: f64 = 0.0;
    for e in c.iter().filter(|e| e.id == "square" || e.id == "disk") {
        ensure(e.seconds <= 60.0, || {
            format!("{} took {:.1} s", e.id, e.seconds)
        })?;
        for (bc, s) in [
            (BoundaryCondition::Dirichlet, &e.dirichlet),
            (BoundaryCondition::Neumann, &e.neumann),
        ] {
            let exact: Vec<f64> = if e.id == "square" {
                square_exact(bc, K + 1)
            } else {
                disk_exact(bc, K + 1).into_iter().map(|x| x.0).collect()
            };
            let fem = s.best_values();
            ensure(fem.len() > K, || {
                format!("{} {bc}: only {} values", e.id, fem.len())
            })?;
            for k in 0..=K {
                let err = if exact[k] == 0.0 {
                    fem[k].abs()
                } else {
                    (fem[k] - exact[k]).abs() / exact[k]
                };
                ensure(err <= 5e-3, || {
                    format!("{} {bc} k = {k}: {} vs {}", e.id, fem[k], exact[k])
                })?;
                worst = worst.max(err);
            }
        }
    }
    let t = c
        .iter()
        .filter(|e| e.id == "square" || e.id == "disk")
        .map(|e| e.seconds)
        .fold(0.0, f64::max);
    Ok(format!(
        "max relative error {worst:.2e} for k <= 20 at h = {H}; slowest domain {t:.1} s"
    ))
}

fn c2_weyl() -> Outcome {
    let lambda = 4000.0 * PI;
    let mut out = Vec::new();
    for (bc, from) in [
        (BoundaryCondition::Dirichlet, 1i64),
        (BoundaryCondition::Neumann, 0),
    ] {
        let mut n = 0usize;
        for i in from..100 {
            for j in from..100 {
                if PI * PI * ((i * i + j * j) as f64) < lambda {
                    n += 1;
                }
            }
        }
        let lib = count_below(&rectangle_spectrum(1.0, 1.0, bc, 2000), lambda);
        ensure(lib == n, || {
            format!("{bc}: oracle count {lib}, lattice count {n}")
        })?;
        let ratio = n as f64 * 4.0 * PI / lambda;
        ensure((0.9..=1.1).contains(&ratio), || {
            format!("{bc}: ratio {ratio}")
        })?;
        out.push(format!("{bc} N = {n}, ratio {ratio:.4}"));
    }
    Ok(out.join("; "))
}

fn c3_ordering(c: &[Entry]) -> Outcome {
    for e in c {
        for k in 0..=K {
            let (l, n) = (e.neumann.eigenvalues[k], e.dirichlet.eigenvalues[k]);
            ensure(l <= n, || format!("{} k = {k}: lambda {l} > nu {n}", e.id))?;
        }
    }
    let mut spectra = Vec::new();
    for w in [1.0, 1.1, 1.25] {
        let d = generate_domain(&DomainSpec::rectangle(w, 1.0)).unwrap();
        spectra.push(fem_spectrum(&d, BoundaryCondition::Dirichlet, 0.04, K, DEFAULT_TOL).unwrap());
    }
    for p in spectra.windows(2) {
        for k in 0..=K {
            let (a, b) = (p[0].best_values()[k], p[1].best_values()[k]);
            ensure(b < a, || format!("nested rectangles k = {k}: {b} !< {a}"))?;
        }
    }
    Ok(format!(
        "lambda_k <= nu_k on {} corpus meshes, nu_k monotone on 3 nested rectangles, k <= 20",
        c.len()
    ))
}

fn margin_change(
    a: &SpectrumSummary,
    ia: &GeometricInvariants,
    b: &SpectrumSummary,
    ib: &GeometricInvariants,
) -> Result<(f64, usize), String> {
    let mut store = ConstantStore::new();
    for id in BoundId::ALL {
        if id.default_constant().is_none() {
            store.supply(id, 1.0).unwrap();
        }
    }
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for id in BoundId::ALL {
        let (ra, rb) = (
            evaluate_all(id, a, ia, &store, None),
            evaluate_all(id, b, ib, &store, None),
        );
        ensure(ra.len() == rb.len(), || {
            format!("{id}: {} vs {} reports", ra.len(), rb.len())
        })?;
        for (x, y) in ra.iter().zip(&rb) {
            if x.margin.is_finite() {
                worst = worst.max((x.margin - y.margin).abs() / x.margin.abs());
                n += 1;
            }
        }
    }
    Ok((worst, n))
}

fn c4_scaling() -> Outcome {
    let t = 3.0;
    let sq = generate_domain(&DomainSpec::unit_square()).unwrap();
    let big = scale_domain(&sq, t).unwrap();
    let (ia, ib) = (
        invariants(&sq, 0.005).unwrap(),
        invariants(&big, 0.015).unwrap(),
    );
    ensure(
        (ib.d / ia.d - t).abs() < 1e-12 && (ib.vol / ia.vol - t * t).abs() < 1e-12,
        || "invariants do not scale".into(),
    )?;
    let mut oracle: f64 = 0.0;
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        let a = oracle_summary(bc, rectangle_spectrum(1.0, 1.0, bc, 21));
        let b = oracle_summary(bc, rectangle_spectrum(t, t, bc, 21));
        oracle = oracle.max(margin_change(&a, &ia, &b, &ib)?.0);
    }
    ensure(oracle < 1e-6, || {
        format!("oracle margins change by {oracle:.2e}")
    })?;

    let hex = generate_domain(&DomainSpec::regular_polygon(6, 1.0)).unwrap();
    let big = scale_domain(&hex, t).unwrap();
    let (ia, ib) = (
        invariants(&hex, 0.01).unwrap(),
        invariants(&big, 0.03).unwrap(),
    );
    let mut fem: f64 = 0.0;
    let mut count = 0;
    for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
        let a = fem_spectrum(&hex, bc, 0.05, 10, DEFAULT_TOL).unwrap();
        let b = fem_spectrum(&big, bc, 0.15, 10, DEFAULT_TOL).unwrap();
        for (x, y) in a.best_values().iter().zip(b.best_values()).skip(1) {
            ensure(((x / y) / (t * t) - 1.0).abs() < 1e-2, || {
                format!("{bc}: {x} vs {y} under dilation")
            })?;
        }
        let (w, n) = margin_change(&a, &ia, &b, &ib)?;
        fem = fem.max(w);
        count += n;
    }
    ensure(fem < 1e-2, || format!("FEM margins change by {fem:.2e}"))?;
    Ok(format!(
        "oracle {oracle:.1e}, FEM {fem:.1e} over {count} hexagon margins"
    ))
}

fn c5_ourcheng(c: &[Entry]) -> Outcome {
    let expected_d = [
        ("square", 2f64.sqrt()),
        ("disk", 2.0),
        ("stadium", 2.0),
        ("hexagon", 2.0),
        ("rounded_rectangle", 0.8f64.hypot(0.2) + 0.2),
    ];
    let mut best = (0.0, "", 0);
    for e in c {
        let d = expected_d.iter().find(|x| x.0 == e.id).unwrap().1;
        ensure((e.inv.d - d).abs() < 1e-6, || {
            format!("{} diameter {} vs {d}", e.id, e.inv.d)
        })?;
        for k in 1..=10 {
            let ratio = e.neumann.best_values()[k] * d * d / (k * k) as f64;
            ensure(ratio <= 64.0, || format!("{} k = {k}: ratio {ratio}", e.id))?;
            let r = check_cheng_neumann_convex(&e.neumann, &e.inv, k).map_err(|x| x.to_string())?;
            ensure(r.satisfied, || {
                format!("{} k = {k}: report not satisfied", e.id)
            })?;
            if ratio > best.0 {
                best = (ratio, e.id, k);
            }
        }
    }
    let target = 2.0 * PI * PI;
    ensure(best.1 == "square" && best.2 == 1, || {
        format!("maximum at {} k = {}", best.1, best.2)
    })?;
    ensure((best.0 - target).abs() / target < 0.02, || {
        format!("maximum {} vs 2 pi^2", best.0)
    })?;
    Ok(format!(
        "max lambda_k d^2/k^2 = {:.4} at (square, k = 1); 2 pi^2 = {target:.4}",
        best.0
    ))
}

fn c6_revolution() -> Outcome {
    let mut out = Vec::new();
    for r in [4.0, 8.0, 16.0] {
        let s = RevolutionSurface::new(r).unwrap();
        let vals = revolution_spectrum(&s, 32, 4).map_err(|e| e.to_string())?;
        let l1 = vals[1];
        let fv = revolution_fv(r, 1200);
        ensure((l1 - fv).abs() / fv < 5e-3, || {
            format!("R = {r}: lambda_1 {l1} vs finite volume {fv}")
        })?;
        let floor = r * r / 8.0;
        ensure(l1 >= 1.05 * floor, || {
            format!("R = {r}: lambda_1 = {l1} lacks 5% slack over {floor}")
        })?;
        let d = generate_domain(&DomainSpec::revolution(r))
            .unwrap()
            .diameter()
            .0;
        ensure(d >= 1.0 && l1 * d * d >= floor, || {
            format!("R = {r}: d = {d}")
        })?;
        out.push(format!(
            "R = {r}: lambda_1 = {l1:.3} >= {:.2} R^2/8, lambda_1 d^2 = {:.2}",
            l1 / floor,
            l1 * d * d
        ));
    }
    Ok(out.join("; "))
}

fn c7_rad() -> Outcome {
    let s = necessity_suite(Family::RoundedRectangle).map_err(|e| e.to_string())?;
    for p in &s.points {
        let w = p.parameter;
        let strip = PI * PI / (w * w);
        let inner = strip + PI * PI / ((1.0 - w) * (1.0 - w));
        ensure(p.eigenvalue >= strip && p.eigenvalue <= inner, || {
            format!("w = {w}: nu_0 {} outside [{strip}, {inner}]", p.eigenvalue)
        })?;
        ensure((p.d - 1.0).abs() < 1e-2, || {
            format!("w = {w}: d_bar = {}", p.d)
        })?;
        let rad_ratio = p.control.unwrap();
        ensure((1.5..=3.5).contains(&rad_ratio), || {
            format!("w = {w}: nu_0 rad^2 = {rad_ratio}")
        })?;
    }
    let r: Vec<f64> = s.points.iter().map(|p| p.ratio).collect();
    ensure(r.windows(2).all(|x| x[1] > x[0]), || {
        format!("not increasing: {r:?}")
    })?;
    ensure(r[2] / r[0] > 2.0, || format!("growth {}", r[2] / r[0]))?;
    let last = s.points[2].control.unwrap();
    let lim = PI * PI / 4.0;
    ensure((last - lim).abs() / lim < 0.2, || {
        format!("nu_0 rad^2 at w = 0.1 is {last}")
    })?;
    Ok(format!(
        "nu_0 d_bar^2 = {:.1}, {:.1}, {:.1}; nu_0 rad^2 at w = 0.1 is {last:.3} (pi^2/4 = {lim:.3})",
        r[0], r[1], r[2]
    ))
}

fn c8_dumbbell() -> Outcome {
    let s = necessity_suite(Family::Dumbbell).map_err(|e| e.to_string())?;
    for p in &s.points {
        // Test function: +1 on the left ball, -1 on the right, linear along the neck.
        let w = p.parameter;
        let a = (1.0 - w * w / 4.0).sqrt();
        let bound = 4.0 * w / (2.0 * (PI - w * (1.0 - a)));
        ensure(p.eigenvalue <= bound, || {
            format!(
                "w = {w}: lambda_1 = {} above the Rayleigh bound {bound}",
                p.eigenvalue
            )
        })?;
    }
    let r: Vec<f64> = s.points.iter().map(|p| p.ratio).collect();
    ensure(r.windows(2).all(|x| x[1] < x[0]), || {
        format!("not decreasing: {r:?}")
    })?;
    ensure(r[2] / r[0] < 0.5, || {
        format!("final/initial = {}", r[2] / r[0])
    })?;
    Ok(format!(
        "lambda_1 d^2 = {:.3}, {:.3}, {:.3}; final/initial {:.3}",
        r[0],
        r[1],
        r[2],
        r[2] / r[0]
    ))
}

fn c9_covering(c: &[Entry]) -> Outcome {
    let mut worst_card: f64 = 0.0;
    let mut worst_overlap = 0;
    for e in c {
        let d = e.inv.d;
        for f in [2.0, 4.0, 8.0] {
            let rho = d / f;
            let p = greedy_packing(&e.domain, rho).map_err(|x| x.to_string())?;
            let centers = &p.centers;
            ensure(
                centers.iter().all(|&x| e.domain.signed_distance(x) <= 1e-9),
                || format!("{} centre outside", e.id),
            )?;
            ensure(min_pairwise(centers) >= rho * (1.0 - 1e-12), || {
                format!("{} rho = d/{f}: centres closer than rho", e.id)
            })?;
            let card = centers.len() as f64;
            ensure(card <= 4.0 * (d / rho).powi(2), || {
                format!("{} rho = d/{f}: m = {card}", e.id)
            })?;
            // Own grid: overlap of doubled balls and covering by rho-balls.
            let step = rho / 12.0;
            let n = (d / step).ceil() as i64 + 2;
            let cx = e.inv.diameter_endpoints[0].lerp(e.inv.diameter_endpoints[1], 0.5);
            let mut overlap = 0;
            for i in -n..=n {
                for j in -n..=n {
                    let q = Point::new(cx.x + i as f64 * step, cx.y + j as f64 * step);
                    if !e.domain.contains(q) {
                        continue;
                    }
                    let near = centers.iter().filter(|&&x| x.dist(q) < 2.0 * rho).count();
                    overlap = overlap.max(near);
                    let nearest = centers
                        .iter()
                        .map(|&x| x.dist(q))
                        .fold(f64::INFINITY, f64::min);
                    ensure(nearest <= rho * 1.1, || {
                        format!("{} rho = d/{f}: point {q:?} uncovered", e.id)
                    })?;
                }
            }
            ensure(overlap <= 144, || {
                format!("{} rho = d/{f}: overlap {overlap}", e.id)
            })?;
            worst_card = worst_card.max(card / (4.0 * (d / rho).powi(2)));
            worst_overlap = worst_overlap.max(overlap);
        }
        for k in 2..=10 {
            let r = packing_radius(&e.domain, k).map_err(|x| x.to_string())?;
            let w = &r.lower_witness;
            ensure(w.len() == k, || {
                format!("{} k = {k}: {} witnesses", e.id, w.len())
            })?;
            ensure(
                w.iter().all(|&x| e.domain.signed_distance(x) <= 1e-9),
                || format!("{} k = {k}: witness outside", e.id),
            )?;
            let sep = min_pairwise(w);
            ensure(sep >= d / k as f64, || {
                format!("{} k = {k}: separation {sep} < d/k", e.id)
            })?;
        }
    }
    Ok(format!("cardinality at most {:.0}% of 4 (d/rho)^2, overlap at most {worst_overlap}, rho_k >= d/k for k <= 10", 100.0 * worst_card))
}

fn c10_segment_poincare(c: &[Entry]) -> Outcome {
    let opts = McOptions {
        seed: 7,
        ..McOptions::default()
    };
    let disk = generate_domain(&DomainSpec::disk(1.0)).unwrap();
    let r = 0.25;
    let rep = segment_inequality_mc(
        &disk,
        Point::default(),
        r,
        Region::BallCap,
        Region::BallCap,
        |_| 1.0,
        opts,
    )
    .map_err(|e| e.to_string())?;
    // Mean distance between two points of a disk of radius r is 128 r / (45 pi).
    let lhs = (PI * r * r).powi(2) * 128.0 * r / (45.0 * PI);
    ensure((rep.lhs - lhs).abs() / lhs < 0.01, || {
        format!("disk LHS {} vs exact {lhs}", rep.lhs)
    })?;
    ensure((rep.constant - 4.0 * r).abs() < 1e-15, || {
        format!("constant {}", rep.constant)
    })?;
    ensure(rep.satisfied && rep.ci_low <= 1.0, || {
        format!("disk ratio {} [{}, {}]", rep.ratio, rep.ci_low, rep.ci_high)
    })?;

    let sq = &get(c, "square").domain;
    let f = |p: Point| (-(p.dist(Point::new(0.15, 0.15)) / 0.1).powi(2)).exp();
    let rep2 = segment_inequality_mc(
        sq,
        Point::new(0.1, 0.1),
        0.4,
        Region::BallCap,
        Region::Disk {
            center: Point::new(0.3, 0.2),
            radius: 0.1,
        },
        f,
        opts,
    )
    .map_err(|e| e.to_string())?;
    ensure(rep2.satisfied && rep2.ci_low <= 1.0, || {
        format!(
            "square ratio {} [{}, {}]",
            rep2.ratio, rep2.ci_low, rep2.ci_high
        )
    })?;

    let e = get(c, "square");
    // A linear function on a ball whose double lies inside: ratio (pi R^4/4) / (R^2 4 pi R^2) = 1/16.
    let u: Vec<f64> = e.mesh.vertices.iter().map(|p| p.x).collect();
    let lin = poincare_ratio(&e.mesh, &u, Point::new(0.5, 0.5), 0.2).map_err(|x| x.to_string())?;
    ensure((lin.ratio - 1.0 / 16.0).abs() < 1e-9, || {
        format!("linear ratio {}", lin.ratio)
    })?;

    let big = e.mesh.scaled(3.0);
    let vecs = e.neumann.eigenvectors.as_ref().unwrap();
    let mut reports = Vec::new();
    let mut drift: f64 = 0.0;
    for v in vecs.iter().take(11).skip(1) {
        for rr in [0.1, 0.2, 0.4] {
            for ctr in [
                Point::new(0.5, 0.5),
                Point::new(0.2, 0.3),
                Point::new(0.0, 0.0),
            ] {
                let a = poincare_ratio(&e.mesh, v, ctr, rr).map_err(|x| x.to_string())?;
                let b = poincare_ratio(&big, v, ctr * 3.0, 3.0 * rr).map_err(|x| x.to_string())?;
                drift = drift.max((a.ratio - b.ratio).abs() / a.ratio);
                reports.push(a);
            }
        }
    }
    let c_n = poincare_constant(&reports);
    ensure(c_n.is_finite() && c_n > 0.0, || format!("C_N = {c_n}"))?;
    ensure(drift < 1e-3, || format!("dilation drift {drift}"))?;
    Ok(format!(
        "segment ratios {:.4}, {:.4} (<= 1 at 99%), disk LHS within {:.2}%; C_N = {c_n:.4}, drift {drift:.1e}",
        rep.ratio,
        rep2.ratio,
        100.0 * (rep.lhs - lhs).abs() / lhs
    ))
}

/// Rank of the exact-eigenfunction averaging matrix on the square, by own quadrature.
fn exact_average_rank(centers: &[Point], rho: f64, modes: &[(f64, f64)]) -> (usize, f64) {
    let q = 24;
    let a = DMatrix::from_fn(centers.len(), modes.len(), |_, _| 0.0);
    let mut a = a;
    for (i, c) in centers.iter().enumerate() {
        let mut sum = vec![0.0; modes.len()];
        let mut count = 0.0;
        for s in 0..q {
            for t in 0..q {
                let p = Point::new(
                    c.x - rho + (s as f64 + 0.5) * 2.0 * rho / q as f64,
                    c.y - rho + (t as f64 + 0.5) * 2.0 * rho / q as f64,
                );
                if p.dist(*c) >= rho || p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0 {
                    continue;
                }
                count += 1.0;
                for (j, &(m, n)) in modes.iter().enumerate() {
                    sum[j] += (m * PI * p.x).cos() * (n * PI * p.y).cos();
                }
            }
        }
        for j in 0..modes.len() {
            a[(i, j)] = sum[j] / count;
        }
    }
    let sv = a.svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    (sv.iter().filter(|&&s| s > 1e-8 * smax).count(), smin / smax)
}

fn c11_phi(c: &[Entry]) -> Outcome {
    let e = get(c, "square");
    let vecs = e.neumann.eigenvectors.as_ref().unwrap();
    let mut reports = Vec::new();
    for v in vecs.iter().take(11).skip(1) {
        for rr in [0.1, 0.2, 0.4] {
            for ctr in [
                Point::new(0.5, 0.5),
                Point::new(0.2, 0.3),
                Point::new(0.0, 0.0),
                Point::new(0.9, 0.5),
            ] {
                reports.push(poincare_ratio(&e.mesh, v, ctr, rr).map_err(|x| x.to_string())?);
            }
        }
    }
    let c6 = c6_from_poincare(2, poincare_constant(&reports));
    let mut modes: Vec<(f64, f64)> = (0..8)
        .flat_map(|m| (0..8).map(move |n| (m as f64, n as f64)))
        .collect();
    modes.sort_by(|a, b| (a.0 * a.0 + a.1 * a.1).total_cmp(&(b.0 * b.0 + b.1 * b.1)));
    let raw = &e.neumann.eigenvalues;
    let mut out = Vec::new();
    for n in [3usize, 6, 10] {
        ensure(raw[n] > raw[n - 1], || {
            format!("N(lambda) = {n} not attainable")
        })?;
        let lambda = 0.5 * (raw[n - 1] + raw[n]);
        let rho = regime_radius(c6, lambda);
        let p = greedy_packing(&e.domain, rho).map_err(|x| x.to_string())?;
        let cert = phi_injectivity_certificate(&e.mesh, &e.neumann, &p, lambda)
            .map_err(|x| x.to_string())?;
        ensure(
            cert.dim == n && cert.injective && cert.rank == n && n <= cert.m,
            || format!("N = {n}: {cert:?}"),
        )?;
        // Whole exact clusters containing the first n modes.
        let top = modes[n - 1].0.powi(2) + modes[n - 1].1.powi(2);
        let span: Vec<(f64, f64)> = modes
            .iter()
            .cloned()
            .filter(|m| m.0 * m.0 + m.1 * m.1 <= top)
            .collect();
        let (rank, cond) = exact_average_rank(&p.centers, rho, &span);
        ensure(rank == span.len() && cond > 1e-6, || {
            format!("N = {n}: exact rank {rank} of {}, {cond:e}", span.len())
        })?;
        out.push(format!("N = {n}: m = {}, rank {}", cert.m, cert.rank));
    }
    Ok(format!("c6 = {c6:.2}; {}", out.join(", ")))
}

fn c12_multiplicity(c: &[Entry]) -> Outcome {
    let torus = oracle_summary(BoundaryCondition::Neumann, torus_spectrum(1.0, 1.0, 41));
    let sizes: Vec<usize> = cluster_multiplicities(&torus, 1e-6)
        .unwrap()
        .iter()
        .map(|x| x.size)
        .collect();
    let mut counts = std::collections::BTreeMap::new();
    for i in -10i64..=10 {
        for j in -10i64..=10 {
            *counts.entry(i * i + j * j).or_insert(0usize) += 1;
        }
    }
    let expected: Vec<usize> = counts.values().cloned().take(sizes.len() - 1).collect();
    ensure(
        sizes[..3] == [1, 4, 4] && sizes[..sizes.len() - 1] == expected[..],
        || format!("torus clusters {sizes:?} vs {expected:?}"),
    )?;

    let disk = get(c, "disk");
    let s = &disk.dirichlet;
    let exact = disk_exact(BoundaryCondition::Dirichlet, K + 1);
    for cl in &s.clusters {
        if cl.start + cl.size >= s.len() {
            continue;
        }
        ensure(cl.size <= 2 && cl.size == exact[cl.start].1, || {
            format!("disk cluster at {} of size {}", cl.start, cl.size)
        })?;
    }

    let mut corpus: Vec<CorpusEntry> = Vec::new();
    for e in c {
        corpus.push(CorpusEntry {
            id: format!("{}/n", e.id),
            spectrum: e.neumann.clone(),
            inv: e.inv.clone(),
        });
        corpus.push(CorpusEntry {
            id: format!("{}/d", e.id),
            spectrum: e.dirichlet.clone(),
            inv: e.inv.clone(),
        });
    }
    for (a, b) in [(1.0, 1.0), (1.0, 0.5), (2.0, 1.0)] {
        let d = generate_domain(&DomainSpec::torus(a, b)).unwrap();
        corpus.push(CorpusEntry {
            id: format!("torus {a}x{b}"),
            spectrum: oracle_summary(BoundaryCondition::Neumann, torus_spectrum(a, b, 41)),
            inv: invariants(&d, 0.01).unwrap(),
        });
    }
    let mut store = ConstantStore::new();
    let ids: Vec<BoundId> = BoundId::ALL
        .into_iter()
        .filter(|b| b.is_multiplicity())
        .collect();
    for &id in &ids {
        if id.default_constant().is_none() {
            store
                .insert(estimate_constant(id, &corpus, None).map_err(|e| e.to_string())?)
                .unwrap();
        }
    }
    let mut n = 0;
    for e in &corpus {
        for &id in &ids {
            for r in evaluate_all(id, &e.spectrum, &e.inv, &store, None) {
                ensure(r.satisfied, || {
                    format!(
                        "{id} on {} at {}: {} > {}",
                        e.id, r.argument, r.measured, r.bound
                    )
                })?;
                n += 1;
            }
        }
    }
    ensure(n > 0, || "no multiplicity reports".into())?;
    Ok(format!(
        "torus clusters {:?}, disk Dirichlet m_k <= 2, {n} multiplicity reports satisfied",
        &sizes[..5]
    ))
}

fn main() {
    let start = Instant::now();
    let c = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle fidelity", Box::new(|| c1_oracle_fidelity(&c))),
        ("Weyl ratio", Box::new(c2_weyl)),
        ("ordering and monotonicity", Box::new(|| c3_ordering(&c))),
        ("scaling", Box::new(c4_scaling)),
        ("convex Neumann upper bound", Box::new(|| c5_ourcheng(&c))),
        (
            "surface of revolution counterexample",
            Box::new(c6_revolution),
        ),
        ("rolling radius necessity", Box::new(c7_rad)),
        ("convexity necessity", Box::new(c8_dumbbell)),
        ("covering suite", Box::new(|| c9_covering(&c))),
        (
            "segment and Poincare inequalities",
            Box::new(|| c10_segment_poincare(&c)),
        ),
        ("averaging map certificate", Box::new(|| c11_phi(&c))),
        ("multiplicity", Box::new(|| c12_multiplicity(&c))),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} ({name}): {msg} [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {msg} [{secs:.1} s]", i + 1);
            }
        }
    }
    let total: Duration = start.elapsed();
    println!(
        "{} of {} criteria passed in {:.0} s",
        criteria.len() - failed,
        criteria.len(),
        total.as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
