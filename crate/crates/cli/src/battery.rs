//! The built-in verification battery behind `verify-all`.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Serialize;

use spectral_bounds::bounds::{
    estimate_constant, evaluate_all, BoundId, BoundReport, ConstantStore, CorpusEntry,
};
use spectral_bounds::covering::{
    c6_from_poincare, covering_cardinality_bound, greedy_packing, overlap_bound, packing_radius,
    phi_injectivity_certificate, plateau_rayleigh, poincare_constant, poincare_ratio,
    regime_radius, segment_inequality_mc, McOptions, PoincareReport, Region,
};
use spectral_bounds::eigen::{cluster_multiplicities, count_below};
use spectral_bounds::oracle::{oracle_summary, rectangle_spectrum, torus_spectrum};
use spectral_bounds::pipeline::{
    convex_corpus, fem_spectrum, fem_spectrum_on_mesh, necessity_suite, Family, DEFAULT_TOL,
};
use spectral_bounds::{
    generate_domain, invariants, scale_domain, triangulate, BoundaryCondition, Domain, DomainSpec,
    GeometricInvariants, Point, SpectrumSummary, TriMesh,
};

/// Check names that are not bound ids.
pub const CHECK_TAGS: [&str; 12] = [
    "oracle_fidelity",
    "weyl",
    "neumann_le_dirichlet",
    "monotonicity",
    "scaling",
    "multiplicity",
    "covering",
    "packing_radius",
    "plateau",
    "segment",
    "poincare",
    "phi",
];

#[derive(Debug, Clone)]
pub struct BatteryOptions {
    pub seed: u64,
    /// Check names or bound ids to keep; `None` runs everything.
    pub filter: Option<Vec<String>>,
    /// Fine mesh size of the corpus spectra.
    pub h: f64,
    pub k_max: usize,
    pub mc_samples: usize,
    /// An extra mesh file to load and solve on.
    pub mesh_file: Option<PathBuf>,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        BatteryOptions {
            seed: 1,
            filter: None,
            h: 0.02,
            k_max: 20,
            mc_samples: 1_000_000,
            mesh_file: None,
        }
    }
}

/// Whether `tag` names a battery row.
pub fn known_tag(tag: &str) -> bool {
    CHECK_TAGS.contains(&tag) || tag.parse::<BoundId>().is_ok() || tag == "mesh_file"
}

/// Splits a comma list of filter tags, rejecting unknown and empty entries.
pub fn parse_filter(text: &str) -> Result<Vec<String>, String> {
    text.split(',')
        .map(|t| {
            let t = t.trim();
            if known_tag(t) {
                Ok(t.to_string())
            } else {
                Err(format!("unknown filter tag {t:?}"))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub tag: String,
    pub subject: String,
    pub passed: bool,
    /// Reported for context; does not affect the exit status.
    pub informational: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl CheckRow {
    fn new(tag: &str, subject: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckRow {
            tag: tag.to_string(),
            subject: subject.into(),
            passed,
            informational: false,
            detail: detail.into(),
            failures: Vec::new(),
        }
    }

    fn info(tag: &str, subject: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckRow {
            informational: true,
            ..CheckRow::new(tag, subject, true, detail)
        }
    }

    fn error(tag: &str, subject: impl Into<String>, err: impl std::fmt::Display) -> Self {
        CheckRow::new(tag, subject, false, format!("error: {err}"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatterySummary {
    pub rows: Vec<CheckRow>,
    pub reports: Vec<BoundReport>,
    pub constants: ConstantStore,
}

impl BatterySummary {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.informational || r.passed)
    }

    pub fn failed_rows(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.informational && !r.passed)
    }

    /// Fixed-width text table, one line per row.
    pub fn table(&self) -> String {
        let tw = self
            .rows
            .iter()
            .map(|r| r.tag.len())
            .max()
            .unwrap_or(3)
            .max(3);
        let sw = self
            .rows
            .iter()
            .map(|r| r.subject.len())
            .max()
            .unwrap_or(7)
            .max(7);
        let mut out = format!(
            "{:<tw$}  {:<sw$}  {:<6}  detail\n",
            "tag", "subject", "status"
        );
        for r in &self.rows {
            let status = match (r.informational, r.passed) {
                (true, _) => "info",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            };
            out.push_str(&format!(
                "{:<tw$}  {:<sw$}  {:<6}  {}\n",
                r.tag, r.subject, status, r.detail
            ));
            for f in &r.failures {
                out.push_str(&format!("{:<tw$}  {:<sw$}          {}\n", "", "", f));
            }
        }
        let failed = self.failed_rows().count();
        out.push_str(&format!("{} rows, {} failed\n", self.rows.len(), failed));
        out
    }
}

struct Section {
    tags: Vec<String>,
    run: fn(&mut Context) -> Vec<CheckRow>,
}

/// Spectra and meshes shared between sections.
struct Context {
    opts: BatteryOptions,
    corpus: Option<Vec<CorpusDomain>>,
    reports: Vec<BoundReport>,
    store: ConstantStore,
}

struct CorpusDomain {
    id: String,
    domain: Domain,
    inv: GeometricInvariants,
    neumann: SpectrumSummary,
    dirichlet: SpectrumSummary,
    mesh: TriMesh,
}

impl Context {
    fn corpus(&mut self) -> Result<&[CorpusDomain], String> {
        if self.corpus.is_none() {
            let mut out = Vec::new();
            for (id, spec) in convex_corpus() {
                let domain = generate_domain(&spec).map_err(|e| format!("{id}: {e}"))?;
                let (d, _) = domain.diameter();
                let inv = invariants(&domain, d / 200.0).map_err(|e| format!("{id}: {e}"))?;
                let (mesh, neumann) = fem_spectrum_on_mesh(
                    &domain,
                    BoundaryCondition::Neumann,
                    self.opts.h,
                    self.opts.k_max,
                    DEFAULT_TOL,
                )
                .map_err(|e| format!("{id} (neumann): {e}"))?;
                let dirichlet = fem_spectrum(
                    &domain,
                    BoundaryCondition::Dirichlet,
                    self.opts.h,
                    self.opts.k_max,
                    DEFAULT_TOL,
                )
                .map_err(|e| format!("{id} (dirichlet): {e}"))?;
                out.push(CorpusDomain {
                    id: id.to_string(),
                    domain,
                    inv,
                    neumann,
                    dirichlet,
                    mesh,
                });
            }
            self.corpus = Some(out);
        }
        Ok(self.corpus.as_deref().unwrap())
    }
}

fn sections() -> Vec<Section> {
    let tags = |t: &[&str]| t.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut bound_tags: Vec<String> = BoundId::ALL.iter().map(|b| b.name().to_string()).collect();
    bound_tags.push("multiplicity".into());
    vec![
        Section {
            tags: tags(&["oracle_fidelity"]),
            run: oracle_fidelity,
        },
        Section {
            tags: tags(&["weyl"]),
            run: weyl,
        },
        Section {
            tags: tags(&["neumann_le_dirichlet"]),
            run: ordering,
        },
        Section {
            tags: tags(&["monotonicity"]),
            run: monotonicity,
        },
        Section {
            tags: tags(&["scaling"]),
            run: scaling,
        },
        Section {
            tags: bound_tags,
            run: bound_checks,
        },
        Section {
            tags: tags(&["covering", "packing_radius", "plateau"]),
            run: covering,
        },
        Section {
            tags: tags(&["segment", "poincare", "phi"]),
            run: integral_inequalities,
        },
        Section {
            tags: Family::ALL
                .iter()
                .map(|f| f.bound_id().name().to_string())
                .collect(),
            run: necessity,
        },
        Section {
            tags: tags(&["mesh_file"]),
            run: mesh_file,
        },
    ]
}

/// Runs the battery. Sections are skipped when the filter names none of their tags.
pub fn verify_all(opts: BatteryOptions) -> BatterySummary {
    let filter = opts.filter.clone();
    let mut ctx = Context {
        opts,
        corpus: None,
        reports: Vec::new(),
        store: ConstantStore::new(),
    };
    let mut rows = Vec::new();
    for s in sections() {
        if let Some(f) = &filter {
            if !s.tags.iter().any(|t| f.contains(t)) {
                continue;
            }
        }
        rows.extend((s.run)(&mut ctx));
    }
    let mut reports = std::mem::take(&mut ctx.reports);
    if let Some(f) = &filter {
        rows.retain(|r| f.contains(&r.tag));
        reports.retain(|r| f.iter().any(|t| t == r.bound_id.name()));
    }
    BatterySummary {
        rows,
        reports,
        constants: ctx.store,
    }
}

fn max_rel_error(values: &[f64], exact: &[f64]) -> (f64, usize) {
    let mut worst = (0.0, 0);
    for (k, (v, e)) in values.iter().zip(exact).enumerate() {
        let err = if *e == 0.0 {
            v.abs()
        } else {
            (v - e).abs() / e
        };
        if err > worst.0 {
            worst = (err, k);
        }
    }
    worst
}

fn oracle_fidelity(ctx: &mut Context) -> Vec<CheckRow> {
    let k_max = ctx.opts.k_max;
    let h = ctx.opts.h;
    let corpus = match ctx.corpus() {
        Ok(c) => c,
        Err(e) => return vec![CheckRow::error("oracle_fidelity", "corpus", e)],
    };
    let mut rows = Vec::new();
    for c in corpus.iter().filter(|c| c.id == "square" || c.id == "disk") {
        for (bc, fem) in [
            (BoundaryCondition::Dirichlet, &c.dirichlet),
            (BoundaryCondition::Neumann, &c.neumann),
        ] {
            let exact = match c.id.as_str() {
                "square" => rectangle_spectrum(1.0, 1.0, bc, k_max + 1),
                _ => spectral_bounds::oracle::disk_spectrum(1.0, bc, k_max + 1),
            };
            let (err, k) = max_rel_error(fem.best_values(), &exact);
            rows.push(CheckRow::new(
                "oracle_fidelity",
                format!("{} {bc}", c.id),
                err <= 5e-3,
                format!("max relative error {err:.2e} at k = {k} (k <= {k_max}, h = {h})"),
            ));
        }
    }
    rows
}

fn weyl(_: &mut Context) -> Vec<CheckRow> {
    let lambda = 4000.0 * PI;
    let mut rows = Vec::new();
    for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
        let vals = rectangle_spectrum(1.0, 1.0, bc, 1500);
        let n = count_below(&vals, lambda);
        let ratio = n as f64 * 4.0 * PI / lambda;
        rows.push(CheckRow::new(
            "weyl",
            format!("square {bc}"),
            (0.9..=1.1).contains(&ratio) && n < vals.len(),
            format!("N(4000 pi) = {n}, N 4 pi / (vol lambda) = {ratio:.4}"),
        ));
    }
    rows
}

fn ordering(ctx: &mut Context) -> Vec<CheckRow> {
    let corpus = match ctx.corpus() {
        Ok(c) => c,
        Err(e) => return vec![CheckRow::error("neumann_le_dirichlet", "corpus", e)],
    };
    corpus
        .iter()
        .map(|c| {
            // Raw Galerkin values on the identical fine mesh.
            let bad: Vec<usize> = (0..c.neumann.len().min(c.dirichlet.len()))
                .filter(|&k| c.neumann.eigenvalues[k] > c.dirichlet.eigenvalues[k])
                .collect();
            CheckRow::new(
                "neumann_le_dirichlet",
                c.id.clone(),
                bad.is_empty(),
                format!(
                    "lambda_k <= nu_k for k < {}; violations at {bad:?}",
                    c.neumann.len()
                ),
            )
        })
        .collect()
}

fn monotonicity(ctx: &mut Context) -> Vec<CheckRow> {
    let widths = [1.0, 1.1, 1.25];
    let mut spectra = Vec::new();
    for w in widths {
        let spec = DomainSpec::rectangle(w, 1.0);
        match generate_domain(&spec).and_then(|d| {
            fem_spectrum(
                &d,
                BoundaryCondition::Dirichlet,
                0.04,
                ctx.opts.k_max,
                DEFAULT_TOL,
            )
        }) {
            Ok(s) => spectra.push(s),
            Err(e) => return vec![CheckRow::error("monotonicity", "nested rectangles", e)],
        }
    }
    let mut bad = Vec::new();
    for pair in spectra.windows(2) {
        let (small, large) = (pair[0].best_values(), pair[1].best_values());
        for k in 0..small.len().min(large.len()) {
            if large[k] > small[k] {
                bad.push(k);
            }
        }
    }
    vec![CheckRow::new(
        "monotonicity",
        "nested rectangles 1, 1.1, 1.25 x 1",
        bad.is_empty(),
        format!(
            "nu_k decreases with the domain for k <= {}; violations at {bad:?}",
            ctx.opts.k_max
        ),
    )]
}

fn all_reports(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    store: &ConstantStore,
) -> Vec<Vec<BoundReport>> {
    BoundId::ALL
        .iter()
        .map(|&id| evaluate_all(id, s, inv, store, None))
        .collect()
}

/// Worst relative margin change between matching reports, bound by bound and
/// in argument order (counting thresholds scale with the domain).
fn compare_margins(a: &[Vec<BoundReport>], b: &[Vec<BoundReport>]) -> Result<(f64, usize), String> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for (ra, rb) in a.iter().zip(b) {
        if ra.len() != rb.len() {
            let id = ra
                .first()
                .or(rb.first())
                .map(|r| r.bound_id.name())
                .unwrap_or("?");
            return Err(format!(
                "{id}: {} reports before dilation, {} after",
                ra.len(),
                rb.len()
            ));
        }
        for (x, y) in ra.iter().zip(rb) {
            if x.margin.is_finite() && y.margin.is_finite() {
                worst = worst.max((x.margin - y.margin).abs() / x.margin.abs().max(1e-300));
                n += 1;
            }
        }
    }
    Ok((worst, n))
}

fn scaling(ctx: &mut Context) -> Vec<CheckRow> {
    let t = 3.0;
    let mut store = ConstantStore::new();
    // Fixed values for the empirical constants; only ratios matter here.
    for id in BoundId::ALL {
        if id.default_constant().is_none() {
            let _ = store.supply(id, 1.0);
        }
    }
    let mut rows = Vec::new();

    // Oracle: the unit square against its dilation, exact spectra.
    let sq = generate_domain(&DomainSpec::unit_square()).unwrap();
    let big = scale_domain(&sq, t).unwrap();
    let result = (|| -> spectral_bounds::Result<(f64, usize)> {
        let (inv_a, inv_b) = (invariants(&sq, 0.005)?, invariants(&big, 0.015)?);
        let mut n = 0;
        let mut worst: f64 = 0.0;
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let sa = oracle_summary(bc, rectangle_spectrum(1.0, 1.0, bc, 21));
            let sb = oracle_summary(bc, rectangle_spectrum(t, t, bc, 21));
            let (w, c) = compare_margins(
                &all_reports(&sa, &inv_a, &store),
                &all_reports(&sb, &inv_b, &store),
            )
            .map_err(spectral_bounds::Error::Refused)?;
            worst = worst.max(w);
            n += c;
        }
        Ok((worst, n))
    })();
    rows.push(match result {
        Ok((w, n)) => CheckRow::new(
            "scaling",
            "square oracle, t = 3",
            w < 1e-6,
            format!("{n} margins, worst relative change {w:.2e}"),
        ),
        Err(e) => CheckRow::error("scaling", "square oracle, t = 3", e),
    });

    // FEM: the hexagon at h and its dilation at t h.
    let hex = generate_domain(&DomainSpec::regular_polygon(6, 1.0)).unwrap();
    let big = scale_domain(&hex, t).unwrap();
    let h = 0.05;
    let result = (|| -> spectral_bounds::Result<(f64, usize)> {
        let (inv_a, inv_b) = (invariants(&hex, 0.01)?, invariants(&big, 0.03)?);
        let mut n = 0;
        let mut worst: f64 = 0.0;
        for bc in [BoundaryCondition::Neumann, BoundaryCondition::Dirichlet] {
            let sa = fem_spectrum(&hex, bc, h, ctx.opts.k_max.min(10), DEFAULT_TOL)?;
            let sb = fem_spectrum(&big, bc, t * h, ctx.opts.k_max.min(10), DEFAULT_TOL)?;
            let (w, c) = compare_margins(
                &all_reports(&sa, &inv_a, &store),
                &all_reports(&sb, &inv_b, &store),
            )
            .map_err(spectral_bounds::Error::Refused)?;
            worst = worst.max(w);
            n += c;
        }
        Ok((worst, n))
    })();
    rows.push(match result {
        Ok((w, n)) => CheckRow::new(
            "scaling",
            "hexagon FEM, t = 3",
            w < 1e-2,
            format!("{n} margins, worst relative change {w:.2e}"),
        ),
        Err(e) => CheckRow::error("scaling", "hexagon FEM, t = 3", e),
    });
    rows
}

fn torus_entries() -> Vec<CorpusEntry> {
    [(1.0, 1.0), (1.0, 0.5), (2.0, 1.0), (1.0, 0.25)]
        .iter()
        .map(|&(a, b)| {
            let domain = generate_domain(&DomainSpec::torus(a, b)).unwrap();
            CorpusEntry {
                id: format!("torus_{a}x{b}"),
                spectrum: oracle_summary(BoundaryCondition::Neumann, torus_spectrum(a, b, 41)),
                inv: invariants(&domain, 0.01).unwrap(),
            }
        })
        .collect()
}

fn bound_checks(ctx: &mut Context) -> Vec<CheckRow> {
    let entries: Vec<(String, BoundaryCondition, CorpusEntry)> = match ctx.corpus() {
        Ok(c) => c
            .iter()
            .flat_map(|c| {
                [
                    (BoundaryCondition::Neumann, &c.neumann),
                    (BoundaryCondition::Dirichlet, &c.dirichlet),
                ]
                .map(|(bc, s)| {
                    (
                        c.id.clone(),
                        bc,
                        CorpusEntry {
                            id: format!("{}/{bc}", c.id),
                            spectrum: s.clone(),
                            inv: c.inv.clone(),
                        },
                    )
                })
            })
            .collect(),
        Err(e) => return vec![CheckRow::error("ourcheng", "corpus", e)],
    };
    let mut entries = entries;
    for e in torus_entries() {
        entries.push((e.id.clone(), BoundaryCondition::Neumann, e));
    }
    let corpus: Vec<CorpusEntry> = entries.iter().map(|(_, _, e)| e.clone()).collect();

    let mut rows = Vec::new();
    let mut store = ConstantStore::new();
    for id in BoundId::ALL {
        if id.default_constant().is_some() {
            continue;
        }
        match estimate_constant(id, &corpus, Some(10)) {
            Ok(c) => {
                rows.push(CheckRow::info(
                    id.name(),
                    "constant",
                    format!(
                        "{} = {:.6} ({} on {} at {})",
                        id.constant_name(),
                        c.value,
                        c.extremum,
                        c.attained_on,
                        c.argument
                    ),
                ));
                let _ = store.insert(c);
            }
            Err(e) => rows.push(CheckRow::error(id.name(), "constant", e)),
        }
    }

    let mut reports = Vec::new();
    for id in BoundId::ALL {
        let max_k = if id == BoundId::Ourcheng {
            Some(10)
        } else {
            None
        };
        let mut seen = false;
        for (domain_id, bc, e) in &entries {
            let rs: Vec<BoundReport> = evaluate_all(id, &e.spectrum, &e.inv, &store, max_k)
                .into_iter()
                .map(|r| r.with_domain(&e.id))
                .collect();
            if rs.is_empty() {
                continue;
            }
            seen = true;
            let ok = rs.iter().filter(|r| r.satisfied).count();
            let min_margin = rs.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            let mut row = CheckRow::new(
                id.name(),
                format!("{domain_id} {bc}"),
                ok == rs.len(),
                format!(
                    "{ok}/{} satisfied, min margin {min_margin:.4}, tier {}",
                    rs.len(),
                    rs[0].constant_tier
                ),
            );
            row.failures = rs
                .iter()
                .filter(|r| !r.satisfied)
                .map(|r| r.csv_row())
                .collect();
            rows.push(row);
            reports.extend(rs);
        }
        if !seen {
            rows.push(CheckRow::new(
                id.name(),
                "corpus",
                false,
                "no admissible instance in the battery corpus",
            ));
        }
    }

    // Cluster detection on exact and FEM spectra.
    let torus = oracle_summary(BoundaryCondition::Neumann, torus_spectrum(1.0, 1.0, 21));
    let sizes: Vec<usize> = cluster_multiplicities(&torus, 1e-6)
        .map(|c| c.iter().map(|c| c.size).collect())
        .unwrap_or_default();
    rows.push(CheckRow::new(
        "multiplicity",
        "torus 1 x 1 oracle",
        sizes.len() >= 3 && sizes[..3] == [1, 4, 4],
        format!("cluster sizes at rel_gap 1e-6: {sizes:?}"),
    ));
    if let Some(disk) = ctx
        .corpus
        .as_ref()
        .and_then(|c| c.iter().find(|c| c.id == "disk"))
    {
        let s = &disk.dirichlet;
        let complete: Vec<usize> = s
            .clusters
            .iter()
            .filter(|c| c.start + c.size < s.len())
            .map(|c| c.size)
            .collect();
        rows.push(CheckRow::new(
            "multiplicity",
            "disk dirichlet FEM",
            complete.iter().all(|&m| m <= 2),
            format!("cluster sizes {complete:?} at rel_gap {:.1e}", s.rel_gap),
        ));
    }
    ctx.reports.extend(reports);
    ctx.store = store;
    rows
}

fn covering(ctx: &mut Context) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for (id, spec) in convex_corpus() {
        let domain = generate_domain(&spec).unwrap();
        let (d, _) = domain.diameter();
        for f in [2.0, 4.0, 8.0] {
            let rho = d / f;
            match greedy_packing(&domain, rho) {
                Ok(p) => {
                    let card = covering_cardinality_bound(2, 0.0, d, rho);
                    let ov = overlap_bound(2, 0.0, rho);
                    rows.push(CheckRow::new(
                        "covering",
                        format!("{id} rho = d/{f}"),
                        p.cardinality as f64 <= card
                            && p.overlap_max as f64 <= ov
                            && p.min_separation >= rho,
                        format!(
                            "m = {} <= {card:.0}, overlap {} <= {ov:.0}",
                            p.cardinality, p.overlap_max
                        ),
                    ));
                }
                Err(e) => rows.push(CheckRow::error("covering", format!("{id} rho = d/{f}"), e)),
            }
        }
        let mut worst = f64::INFINITY;
        let mut fail = None;
        for k in 2..=10 {
            match packing_radius(&domain, k) {
                Ok(r) => {
                    worst = worst.min(r.rho_k * k as f64 / d);
                    if !r.meets_claim || r.upper < r.rho_k {
                        fail = Some(format!("k = {k}: rho_k = {}, upper {}", r.rho_k, r.upper));
                    }
                }
                Err(e) => fail = Some(e.to_string()),
            }
        }
        let mut row = CheckRow::new(
            "packing_radius",
            id,
            fail.is_none(),
            format!("min over k <= 10 of rho_k k / d = {worst:.4}"),
        );
        row.failures.extend(fail);
        rows.push(row);
    }

    // Plateau functions on the square.
    let corpus = match ctx.corpus() {
        Ok(c) => c,
        Err(e) => return vec![CheckRow::error("plateau", "corpus", e)],
    };
    let sq = corpus.iter().find(|c| c.id == "square").unwrap();
    let k = 4;
    let r = 2f64.sqrt() / k as f64;
    let fine;
    let mesh = if sq.mesh.h <= r / 16.0 {
        &sq.mesh
    } else {
        fine = match triangulate(&sq.domain, r / 16.0) {
            Ok(m) => m,
            Err(e) => return vec![CheckRow::error("plateau", "square mesh", e)],
        };
        &fine
    };
    match plateau_rayleigh(&sq.domain, mesh, &[Point::new(0.5, 0.5)], 0.5) {
        Ok(p) => rows.push(CheckRow::new(
            "plateau",
            "square centre r = 0.5",
            p.within_cap,
            format!("quotient {:.3} <= 64 r^-2 = {:.1}", p.max_quotient, p.cap),
        )),
        Err(e) => rows.push(CheckRow::error("plateau", "square centre r = 0.5", e)),
    }
    let centers: Vec<Point> = (0..k)
        .map(|i| Point::new(0.0, 0.0).lerp(Point::new(1.0, 1.0), i as f64 / (k - 1) as f64))
        .collect();
    match plateau_rayleigh(&sq.domain, mesh, &centers, r) {
        Ok(p) => {
            let fem = sq.neumann.upper_values()[p.certified_index];
            rows.push(CheckRow::new(
                "plateau",
                "square diagonal k = 4",
                p.within_cap && fem <= p.max_quotient,
                format!(
                    "certifies lambda_{} <= {:.3}; FEM value {fem:.3}",
                    p.certified_index, p.max_quotient
                ),
            ));
        }
        Err(e) => rows.push(CheckRow::error("plateau", "square diagonal k = 4", e)),
    }
    rows
}

fn integral_inequalities(ctx: &mut Context) -> Vec<CheckRow> {
    let opts = McOptions {
        samples: ctx.opts.mc_samples,
        seed: ctx.opts.seed,
        ..McOptions::default()
    };
    let mut rows = Vec::new();
    let disk = generate_domain(&DomainSpec::disk(1.0)).unwrap();
    let sq = generate_domain(&DomainSpec::unit_square()).unwrap();
    let bump = |c: Point, w: f64| move |p: Point| (-(p.dist(c) / w).powi(2)).exp();
    let cases: Vec<(
        String,
        &Domain,
        Point,
        f64,
        Region,
        Region,
        Box<dyn Fn(Point) -> f64 + Sync>,
    )> = vec![
        (
            "disk R = 0.25, F = 1".into(),
            &disk,
            Point::default(),
            0.25,
            Region::BallCap,
            Region::BallCap,
            Box::new(|_| 1.0),
        ),
        (
            "square corner R = 0.4, gaussian".into(),
            &sq,
            Point::new(0.1, 0.1),
            0.4,
            Region::BallCap,
            Region::Disk {
                center: Point::new(0.3, 0.2),
                radius: 0.1,
            },
            Box::new(bump(Point::new(0.15, 0.15), 0.1)),
        ),
        (
            "square tiny ball, F = 1".into(),
            &sq,
            Point::new(0.5, 0.5),
            0.2,
            Region::Disk {
                center: Point::new(0.5, 0.5),
                radius: 0.01,
            },
            Region::Disk {
                center: Point::new(0.5, 0.5),
                radius: 0.01,
            },
            Box::new(|_| 1.0),
        ),
    ];
    for (name, dom, c, big_r, a, b, f) in cases {
        match segment_inequality_mc(dom, c, big_r, a, b, f, opts) {
            Ok(r) => rows.push(CheckRow::new(
                "segment",
                name,
                r.satisfied && !r.inconclusive,
                format!(
                    "ratio {:.4} in [{:.4}, {:.4}] (99%), C = 4R = {}",
                    r.ratio, r.ci_low, r.ci_high, r.constant
                ),
            )),
            Err(e) => rows.push(CheckRow::error("segment", name, e)),
        }
    }

    let corpus = match ctx.corpus() {
        Ok(c) => c,
        Err(e) => return vec![CheckRow::error("poincare", "corpus", e)],
    };
    let sqc = corpus.iter().find(|c| c.id == "square").unwrap();
    let vecs = sqc.neumann.eigenvectors.as_ref().unwrap();
    let big = sqc.mesh.scaled(3.0);
    let mut reports: Vec<PoincareReport> = Vec::new();
    let mut drift: f64 = 0.0;
    let centers = [
        Point::new(0.5, 0.5),
        Point::new(0.2, 0.3),
        Point::new(0.0, 0.0),
        Point::new(0.9, 0.5),
    ];
    for v in vecs.iter().take(11).skip(1) {
        for r in [0.1, 0.2, 0.4] {
            for &c in &centers {
                match (
                    poincare_ratio(&sqc.mesh, v, c, r),
                    poincare_ratio(&big, v, c * 3.0, 3.0 * r),
                ) {
                    (Ok(a), Ok(b)) => {
                        drift = drift.max((a.ratio - b.ratio).abs() / a.ratio.max(1e-300));
                        reports.push(a);
                    }
                    (Err(e), _) | (_, Err(e)) => {
                        return vec![CheckRow::error("poincare", "square battery", e)]
                    }
                }
            }
        }
    }
    let c_n = poincare_constant(&reports);
    rows.push(CheckRow::new(
        "poincare",
        "square Neumann eigenfunctions 1..10",
        c_n.is_finite() && c_n > 0.0 && drift < 1e-3,
        format!(
            "C_N = {c_n:.4} over {} cases, dilation drift {drift:.1e}",
            reports.len()
        ),
    ));

    let c6 = c6_from_poincare(2, c_n);
    let raw = &sqc.neumann.eigenvalues;
    for n in [3usize, 6, 10] {
        let subject = format!("square N(lambda) = {n}");
        if n >= raw.len() || raw[n] <= raw[n - 1] {
            rows.push(CheckRow::new(
                "phi",
                subject,
                false,
                "N(lambda) is not attained on the computed spectrum",
            ));
            continue;
        }
        let lambda = 0.5 * (raw[n - 1] + raw[n]);
        let rho = regime_radius(c6, lambda);
        let result = greedy_packing(&sqc.domain, rho)
            .and_then(|p| phi_injectivity_certificate(&sqc.mesh, &sqc.neumann, &p, lambda));
        rows.push(match result {
            Ok(c) => CheckRow::new(
                "phi",
                subject,
                c.injective && c.dim == n && c.dim <= c.m,
                format!(
                    "rho = (c6 lambda)^-1/2 = {rho:.4}, m = {}, rank {} of {}",
                    c.m, c.rank, c.dim
                ),
            ),
            Err(e) => CheckRow::error("phi", subject, e),
        });
    }
    rows
}

fn necessity(_: &mut Context) -> Vec<CheckRow> {
    Family::ALL
        .iter()
        .map(|&f| match necessity_suite(f) {
            Ok(s) => {
                let series: Vec<String> = s
                    .points
                    .iter()
                    .map(|p| format!("{}: {:.4}", p.parameter, p.ratio))
                    .collect();
                CheckRow::new(
                    f.bound_id().name(),
                    format!("{f} family"),
                    s.demonstrated,
                    format!("{} along the family: {}", s.ratio_name, series.join(", ")),
                )
            }
            Err(e) => CheckRow::error(f.bound_id().name(), format!("{f} family"), e),
        })
        .collect()
}

fn mesh_file(ctx: &mut Context) -> Vec<CheckRow> {
    let Some(path) = ctx.opts.mesh_file.clone() else {
        return Vec::new();
    };
    let subject = path.display().to_string();
    let result = TriMesh::read(&path).and_then(|m| {
        let p = spectral_bounds::assemble(&m, BoundaryCondition::Neumann)?;
        spectral_bounds::solve_lowest(&p, 3.min(p.dim() / 2 - 1).max(1), DEFAULT_TOL)
    });
    vec![match result {
        Ok(s) => CheckRow::new(
            "mesh_file",
            subject,
            true,
            format!("lowest Neumann values {:?}", &s.eigenvalues),
        ),
        Err(e) => CheckRow::error("mesh_file", subject, e),
    }]
}
