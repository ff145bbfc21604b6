use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spectral_bounds::bounds::{evaluate_all, reports_csv, BoundId, ConstantStore};
use spectral_bounds::covering::{greedy_packing, packing_radius};
use spectral_bounds::pipeline::{
    convex_corpus, domain_spectrum, necessity_suite_with, Family, DEFAULT_TOL,
};
use spectral_bounds::{
    assemble, generate_domain, invariants, solve_lowest, BoundaryCondition, Domain, DomainSpec,
    TriMesh,
};
use spectral_bounds_cli::battery::{parse_filter, verify_all, BatteryOptions};
use spectral_bounds_cli::scenario::{run, Scenario};
use spectral_bounds_cli::{resolve_jobs, EXIT_FAIL, EXIT_PASS, EXIT_USAGE, JOBS_ENV};

#[derive(Parser)]
#[command(
    name = "spectral-bounds",
    version,
    about = "Laplace spectra of planar domains and checks of eigenvalue bounds"
)]
struct Cli {
    /// Worker threads (overridden by SPECTRAL_BOUNDS_JOBS).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct DomainArgs {
    /// A DomainSpec JSON file or a built-in name (square, disk, stadium,
    /// hexagon, rounded_rectangle, dumbbell, revolution, torus).
    #[arg(long)]
    domain: String,
}

#[derive(clap::Args, Clone)]
struct SolveArgs {
    #[arg(long, default_value = "neumann")]
    bc: BoundaryCondition,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 20)]
    kmax: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of a domain, or of a mesh file.
    Spectrum {
        #[arg(long, required_unless_present = "mesh")]
        domain: Option<String>,
        /// Solve on this mesh file instead of meshing a domain.
        #[arg(long, conflicts_with = "domain")]
        mesh: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diameter, intrinsic diameter, inradius, rolling radius and area.
    Invariants {
        #[command(flatten)]
        domain: DomainArgs,
        /// Grid resolution; defaults to d / 200.
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluates the eigenvalue bounds on one domain.
    Bounds {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        solve: SolveArgs,
        /// Only these bound ids (comma list).
        #[arg(long)]
        filter: Option<String>,
        /// Empirical constants (constants.json of an earlier run).
        #[arg(long)]
        constants: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy packing at radius rho and packing radii up to kmax.
    Covering {
        #[command(flatten)]
        domain: DomainArgs,
        /// Packing radius; defaults to d / 4.
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 10)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A necessity family along its parameter.
    Sweep {
        /// dumbbell, rounded_rectangle, revolution or torus.
        #[arg(long)]
        family: Family,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The built-in verification battery.
    VerifyAll {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Keep only rows with these tags (comma list of bound ids or check names).
        #[arg(long)]
        filter: Option<String>,
        /// Also load and solve on this mesh file.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Monte Carlo samples per integral estimate.
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Mesh size of the corpus spectra.
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        #[arg(long, default_value_t = 20)]
        kmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a scenario file.
    Run {
        scenario: PathBuf,
        /// Output directory; overrides the scenario's own.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit status.
struct Failure(i32, String);

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_FAIL, e.to_string())
}

fn builtin(name: &str) -> Option<DomainSpec> {
    convex_corpus()
        .into_iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s)
        .or_else(|| {
            name.parse::<Family>()
                .ok()
                .map(|f| f.spec(f.default_parameters()[0]))
        })
}

fn load_domain(arg: &str) -> Result<Domain, Failure> {
    let spec = if Path::new(arg).is_file() {
        let text = std::fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))?;
        serde_json::from_str::<DomainSpec>(&text).map_err(|e| usage(format!("{arg}: {e}")))?
    } else {
        builtin(arg).ok_or_else(|| {
            usage(format!(
                "{arg:?} is neither a domain file nor a built-in domain"
            ))
        })?
    };
    generate_domain(&spec).map_err(|e| usage(format!("{arg}: {e}")))
}

fn emit(out: &Option<PathBuf>, name: &str, text: &str) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(runtime)?;
            let p = dir.join(name);
            std::fs::write(&p, text).map_err(|e| runtime(format!("{}: {e}", p.display())))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn json(v: &impl serde::Serialize) -> Result<String, Failure> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(runtime)
}

fn execute(cli: Cli) -> Result<i32, Failure> {
    let env = std::env::var(JOBS_ENV).ok();
    if let Some(n) = resolve_jobs(cli.jobs, env.as_deref()).map_err(usage)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(runtime)?;
    }
    match cli.command {
        Command::Spectrum {
            domain,
            mesh,
            solve,
            out,
        } => {
            let s = match (domain, mesh) {
                (_, Some(path)) => {
                    let m = TriMesh::read(&path)
                        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                    let p = assemble(&m, solve.bc)
                        .map_err(|e| runtime(format!("{}: {e}", path.display())))?;
                    solve_lowest(&p, solve.kmax, DEFAULT_TOL).map_err(runtime)?
                }
                (Some(d), None) => {
                    domain_spectrum(&load_domain(&d)?, solve.bc, solve.h, solve.kmax)
                        .map_err(runtime)?
                }
                (None, None) => return Err(usage("either --domain or --mesh is required")),
            };
            emit(&out, "spectrum.json", &json(&s.to_json())?)?;
            Ok(EXIT_PASS)
        }
        Command::Invariants {
            domain,
            resolution,
            out,
        } => {
            let d = load_domain(&domain.domain)?;
            let r = resolution.unwrap_or_else(|| d.diameter().0 / 200.0);
            let inv = invariants(&d, r).map_err(runtime)?;
            emit(&out, "invariants.json", &json(&inv)?)?;
            Ok(EXIT_PASS)
        }
        Command::Bounds {
            domain,
            solve,
            filter,
            constants,
            out,
        } => {
            let ids: Vec<BoundId> = match &filter {
                Some(f) => f
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| usage(format!("unknown bound id {t:?}")))
                    })
                    .collect::<Result<_, _>>()?,
                None => BoundId::ALL.to_vec(),
            };
            let store: ConstantStore = match constants {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)
                        .map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    serde_json::from_str(&text)
                        .map_err(|e| usage(format!("{}: {e}", p.display())))?
                }
                None => ConstantStore::new(),
            };
            let d = load_domain(&domain.domain)?;
            let inv = invariants(&d, d.diameter().0 / 200.0).map_err(runtime)?;
            let s = domain_spectrum(&d, solve.bc, solve.h, solve.kmax).map_err(runtime)?;
            let mut reports = Vec::new();
            for id in ids {
                if store.resolve(id).is_err() {
                    eprintln!("{id}: skipped, no constant (pass --constants)");
                    continue;
                }
                reports.extend(
                    evaluate_all(id, &s, &inv, &store, None)
                        .into_iter()
                        .map(|r| r.with_domain(&domain.domain)),
                );
            }
            emit(&out, "bounds.csv", &reports_csv(&reports))?;
            Ok(if reports.iter().all(|r| r.satisfied) {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
        Command::Covering {
            domain,
            rho,
            kmax,
            out,
        } => {
            let d = load_domain(&domain.domain)?;
            let diameter = d.diameter().0;
            let rho = rho.unwrap_or(diameter / 4.0);
            let packing = greedy_packing(&d, rho).map_err(runtime)?;
            let radii = (1..=kmax)
                .map(|k| packing_radius(&d, k))
                .collect::<Result<Vec<_>, _>>()
                .map_err(runtime)?;
            let ok = radii.iter().all(|r| r.meets_claim);
            let value =
                serde_json::json!({ "packing": packing.to_json(), "packing_radius": radii });
            emit(&out, "covering.json", &json(&value)?)?;
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Sweep {
            family,
            params,
            out,
        } => {
            let params = params.unwrap_or_else(|| family.default_parameters());
            let series = necessity_suite_with(family, &params).map_err(runtime)?;
            let mut dat = format!(
                "# {} {}: parameter eigenvalue ratio\n",
                family, series.ratio_name
            );
            for p in &series.points {
                dat.push_str(&format!("{} {} {}\n", p.parameter, p.eigenvalue, p.ratio));
            }
            emit(&out, &format!("necessity_{family}.csv"), &series.to_csv())?;
            if out.is_some() {
                emit(&out, &format!("necessity_{family}.dat"), &dat)?;
            }
            eprintln!(
                "{family}: {}",
                if series.demonstrated {
                    "demonstrated"
                } else {
                    "not demonstrated"
                }
            );
            Ok(if series.demonstrated {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
        Command::VerifyAll {
            seed,
            filter,
            mesh,
            samples,
            h,
            kmax,
            out,
        } => {
            if !(h > 0.0 && h <= 0.1) || kmax < 10 {
                return Err(usage("verify-all needs 0 < h <= 0.1 and kmax >= 10"));
            }
            let filter = filter
                .as_deref()
                .map(parse_filter)
                .transpose()
                .map_err(usage)?;
            let summary = verify_all(BatteryOptions {
                seed,
                filter,
                h,
                k_max: kmax,
                mc_samples: samples,
                mesh_file: mesh,
            });
            print!("{}", summary.table());
            if out.is_some() {
                emit(&out, "battery.json", &json(&summary)?)?;
                emit(&out, "bounds.csv", &reports_csv(&summary.reports))?;
            }
            Ok(if summary.passed() {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
        Command::Run { scenario, out } => {
            let sc = Scenario::read(&scenario).map_err(|e| usage(e.to_string()))?;
            let dir = out.or_else(|| {
                sc.output
                    .as_ref()
                    .map(|o| scenario.parent().unwrap_or(Path::new(".")).join(o))
            });
            let bundle = run(&sc).map_err(runtime)?;
            match dir {
                Some(dir) => {
                    for p in bundle.write(&dir).map_err(runtime)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => print!("{}", json(&bundle.summary)?),
            }
            let s = &bundle.summary;
            eprintln!(
                "{}: {} domains, {}/{} bound reports satisfied, {}/{} families demonstrated",
                s.name,
                s.domains,
                s.satisfied,
                s.reports,
                s.necessity_demonstrated,
                s.necessity_demonstrated + s.necessity_failed
            );
            Ok(if s.passed { EXIT_PASS } else { EXIT_FAIL })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
