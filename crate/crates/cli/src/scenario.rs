//! Scenario files: a list of domains with the spectra, bounds and necessity
//! families to compute on them.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use spectral_bounds::bounds::{
    estimate_constant, evaluate_all, reports_csv, reports_json, BoundId, BoundReport,
    ConstantStore, CorpusEntry,
};
use spectral_bounds::pipeline::{
    convex_corpus, domain_spectrum, necessity_suite_with, Family, NecessitySeries,
};
use spectral_bounds::{
    generate_domain, invariants, BoundaryCondition, DomainSpec, Error, GeometricInvariants, Result,
    SpectrumSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDomain {
    pub id: String,
    pub spec: DomainSpec,
    /// Grid resolution of the invariants; defaults to `d / 200`.
    #[serde(default)]
    pub resolution: Option<f64>,
}

/// Which bounds to evaluate: `"all"` or a list of ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundSelection {
    All(AllTag),
    List(Vec<BoundId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllTag {
    All,
}

impl Default for BoundSelection {
    fn default() -> Self {
        BoundSelection::All(AllTag::All)
    }
}

impl BoundSelection {
    pub fn ids(&self) -> Vec<BoundId> {
        match self {
            BoundSelection::All(_) => BoundId::ALL.to_vec(),
            BoundSelection::List(v) => v.clone(),
        }
    }
}

/// Where empirical constants come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusId {
    /// No estimation: bounds without a known constant are skipped.
    None,
    /// The scenario's own domains.
    Scenario,
    /// The built-in convex corpus, at the scenario's mesh size.
    Convex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NecessityRequest {
    pub family: Family,
    #[serde(default)]
    pub parameters: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub domains: Vec<ScenarioDomain>,
    #[serde(default = "default_bcs")]
    pub bc: Vec<BoundaryCondition>,
    /// Mesh size schedule; reports use the finest entry.
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub bounds: BoundSelection,
    #[serde(default = "default_corpus")]
    pub corpus: CorpusId,
    #[serde(default)]
    pub necessity: Vec<NecessityRequest>,
    /// Output directory, relative to the scenario file.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_bcs() -> Vec<BoundaryCondition> {
    vec![BoundaryCondition::Neumann, BoundaryCondition::Dirichlet]
}

fn default_h() -> Vec<f64> {
    vec![0.05]
}

fn default_k_max() -> usize {
    20
}

fn default_corpus() -> CorpusId {
    CorpusId::Scenario
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.h.is_empty() || self.h.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return bad(format!("mesh sizes must be positive, got {:?}", self.h));
        }
        if self.bc.is_empty() {
            return bad("at least one boundary condition is required".into());
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        let mut ids: Vec<&str> = self.domains.iter().map(|d| d.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("duplicate domain id {:?}", w[0]));
        }
        if ids
            .iter()
            .any(|id| id.is_empty() || id.contains(['/', '\\', ',']))
        {
            return bad("domain ids must be non-empty and free of '/', '\\' and ','".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainResult {
    pub id: String,
    pub spec: DomainSpec,
    pub invariants: GeometricInvariants,
    /// One spectrum per boundary condition and mesh size, in schedule order.
    pub spectra: Vec<SpectrumSummary>,
    #[serde(skip)]
    finest: Vec<usize>,
}

impl DomainResult {
    /// Spectra at the finest mesh size, one per boundary condition.
    fn finest(&self) -> impl Iterator<Item = &SpectrumSummary> {
        self.finest.iter().map(|&i| &self.spectra[i])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub name: String,
    pub seed: u64,
    pub domains: usize,
    pub reports: usize,
    pub satisfied: usize,
    pub violated: usize,
    pub necessity_demonstrated: usize,
    pub necessity_failed: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Bundle {
    pub summary: Summary,
    pub domains: Vec<DomainResult>,
    pub reports: Vec<BoundReport>,
    pub constants: ConstantStore,
    pub necessity: Vec<NecessitySeries>,
}

fn solve_domain(sd: &ScenarioDomain, sc: &Scenario) -> Result<DomainResult> {
    let ctx = |e: Error| Error::InvalidArgument(format!("domain {:?}: {e}", sd.id));
    let domain = generate_domain(&sd.spec).map_err(ctx)?;
    let resolution = sd.resolution.unwrap_or_else(|| domain.diameter().0 / 200.0);
    let inv = invariants(&domain, resolution).map_err(ctx)?;
    let mut spectra = Vec::new();
    let mut finest = Vec::new();
    let mut schedule = sc.h.clone();
    schedule.sort_by(|a, b| b.total_cmp(a));
    for &bc in &sc.bc {
        if !domain.is_planar() && bc == BoundaryCondition::Dirichlet {
            continue;
        }
        // Closed surfaces use the oracle, which does not depend on h.
        let sizes = if domain.is_planar() {
            &schedule[..]
        } else {
            &schedule[schedule.len() - 1..]
        };
        for &h in sizes {
            spectra.push(domain_spectrum(&domain, bc, h, sc.k_max).map_err(ctx)?);
        }
        finest.push(spectra.len() - 1);
    }
    Ok(DomainResult {
        id: sd.id.clone(),
        spec: sd.spec.clone(),
        invariants: inv,
        spectra,
        finest,
    })
}

fn corpus_entries(results: &[DomainResult]) -> Vec<CorpusEntry> {
    results
        .iter()
        .flat_map(|r| {
            r.finest().map(|s| CorpusEntry {
                id: format!("{}/{}", r.id, s.bc),
                spectrum: s.clone(),
                inv: r.invariants.clone(),
            })
        })
        .collect()
}

/// Runs a scenario. Domains are solved in parallel; everything after is
/// ordered by domain id.
pub fn run(sc: &Scenario) -> Result<Bundle> {
    sc.validate()?;
    let mut domains: Vec<DomainResult> = sc
        .domains
        .par_iter()
        .map(|d| solve_domain(d, sc))
        .collect::<Result<_>>()?;
    domains.sort_by(|a, b| a.id.cmp(&b.id));

    let ids = sc.bounds.ids();
    let mut store = ConstantStore::new();
    let corpus = match sc.corpus {
        CorpusId::None => Vec::new(),
        CorpusId::Scenario => corpus_entries(&domains),
        CorpusId::Convex => {
            let builtin: Vec<ScenarioDomain> = convex_corpus()
                .into_iter()
                .map(|(id, spec)| ScenarioDomain {
                    id: id.to_string(),
                    spec,
                    resolution: None,
                })
                .collect();
            let solved: Vec<DomainResult> = builtin
                .par_iter()
                .map(|d| solve_domain(d, sc))
                .collect::<Result<_>>()?;
            corpus_entries(&solved)
        }
    };
    if !corpus.is_empty() {
        for &id in &ids {
            if id.default_constant().is_none() {
                // Bounds with no admissible instance simply have no constant.
                if let Ok(c) = estimate_constant(id, &corpus, None) {
                    store.insert(c)?;
                }
            }
        }
    }

    let mut reports = Vec::new();
    for r in &domains {
        for s in r.finest() {
            let tag = format!("{}/{}", r.id, s.bc);
            for &id in &ids {
                reports.extend(
                    evaluate_all(id, s, &r.invariants, &store, None)
                        .into_iter()
                        .map(|x| x.with_domain(&tag)),
                );
            }
        }
    }

    let necessity: Vec<NecessitySeries> = sc
        .necessity
        .iter()
        .map(|n| {
            let params = n
                .parameters
                .clone()
                .unwrap_or_else(|| n.family.default_parameters());
            necessity_suite_with(n.family, &params)
        })
        .collect::<Result<_>>()?;

    let satisfied = reports.iter().filter(|r| r.satisfied).count();
    let demonstrated = necessity.iter().filter(|n| n.demonstrated).count();
    let summary = Summary {
        name: sc.name.clone(),
        seed: sc.seed,
        domains: domains.len(),
        reports: reports.len(),
        satisfied,
        violated: reports.len() - satisfied,
        necessity_demonstrated: demonstrated,
        necessity_failed: necessity.len() - demonstrated,
        passed: satisfied == reports.len() && demonstrated == necessity.len(),
    };
    Ok(Bundle {
        summary,
        domains,
        reports,
        constants: store,
        necessity,
    })
}

fn pretty(v: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

impl Bundle {
    /// Writes the report files into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, text: String| -> Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, text)?;
            written.push(p);
            Ok(())
        };
        for d in &self.domains {
            let spectra: Vec<serde_json::Value> = d.spectra.iter().map(|s| s.to_json()).collect();
            put(format!("{}.spectrum.json", d.id), pretty(&spectra)?)?;
            put(format!("{}.invariants.json", d.id), pretty(&d.invariants)?)?;
        }
        put("bounds.csv".into(), reports_csv(&self.reports))?;
        put("bounds.json".into(), pretty(&reports_json(&self.reports))?)?;
        put("constants.json".into(), pretty(&self.constants)?)?;
        for n in &self.necessity {
            put(format!("necessity_{}.csv", n.family), n.to_csv())?;
        }
        put("summary.json".into(), pretty(&self.summary)?)?;
        Ok(written)
    }
}
