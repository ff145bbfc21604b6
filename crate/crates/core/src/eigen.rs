//! Lowest eigenpairs of `K u = lambda M u`, multiplicity clusters and the
//! counting function.
//!
//! The solver works with the shift-inverted operator `T = (K - sigma M)^{-1} M`,
//! which is self-adjoint in the `M` inner product and maps the lowest
//! eigenvalues to the largest `theta = 1 / (lambda - sigma)`. A block Krylov
//! basis is grown with full `M`-orthogonalisation, Rayleigh–Ritz is applied to
//! the basis, and the basis is restarted from the best Ritz vectors until all
//! wanted residuals are small.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fem::{AssembledProblem, BoundaryCondition};
use crate::sparse::{CsrMatrix, EnvelopeCholesky};

/// A run of numerically equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub start: usize,
    pub size: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub bc: BoundaryCondition,
    /// Mesh size of the eigenvalues (`None` for closed-form spectra).
    pub h: Option<f64>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as nodal values on every mesh vertex, `M`-orthonormal.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub clusters: Vec<Cluster>,
    pub residuals: Vec<f64>,
    /// Richardson-extrapolated values from meshes `2h` and `h`.
    pub extrapolated: Option<Vec<f64>>,
    /// Error estimate of each extrapolated value.
    pub error: Option<Vec<f64>>,
    pub rel_gap: f64,
    pub source: String,
}

impl SpectrumSummary {
    /// A summary for an exactly known spectrum.
    pub fn from_values(bc: BoundaryCondition, mut eigenvalues: Vec<f64>, source: &str) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let rel_gap = 1e-6;
        let clusters = cluster_values(&eigenvalues, rel_gap);
        SpectrumSummary {
            bc,
            h: None,
            residuals: vec![0.0; eigenvalues.len()],
            eigenvalues,
            eigenvectors: None,
            clusters,
            extrapolated: None,
            error: None,
            rel_gap,
            source: source.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues
            .last()
            .copied()
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// Values safe for upper-bound comparisons: the raw Galerkin values, which
    /// lie above the exact eigenvalues.
    pub fn upper_values(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Values safe for lower-bound comparisons: extrapolated minus error when
    /// available, raw values otherwise (exact for closed-form spectra).
    pub fn lower_values(&self) -> Vec<f64> {
        match (&self.extrapolated, &self.error) {
            (Some(x), Some(e)) => x.iter().zip(e).map(|(x, e)| (x - e).max(0.0)).collect(),
            _ => self.eigenvalues.clone(),
        }
    }

    /// Best point estimate of each eigenvalue.
    pub fn best_values(&self) -> &[f64] {
        self.extrapolated.as_deref().unwrap_or(&self.eigenvalues)
    }

    /// Multiplicity of the cluster containing index `k`.
    pub fn multiplicity(&self, k: usize) -> Option<usize> {
        self.clusters
            .iter()
            .find(|c| k >= c.start && k < c.start + c.size)
            .map(|c| c.size)
    }

    /// Largest relative Richardson error estimate. Zero modes are skipped.
    pub fn relative_error(&self) -> f64 {
        let floor = 1e-9 * self.largest().max(0.0);
        match &self.error {
            Some(e) => e
                .iter()
                .zip(&self.eigenvalues)
                .filter(|(_, v)| **v > floor)
                .map(|(e, v)| e / v)
                .fold(0.0, f64::max),
            None => 0.0,
        }
    }

    /// The report layout shared by solver and oracle output.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "source": self.source,
            "bc": self.bc,
            "h": self.h,
            "eigenvalues": self.eigenvalues,
            "clusters": self.clusters.iter().map(|c| [c.start, c.size]).collect::<Vec<_>>(),
            "residuals": self.residuals,
            "extrapolated": self.extrapolated,
            "error": self.error,
            "rel_gap": self.rel_gap,
        })
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub block: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            block: 6,
            max_restarts: 60,
            seed: 0x5eed,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `M`-orthonormalises `w` against `basis` (whose `M`-images are `mbasis`) with
/// two passes of classical Gram–Schmidt. Returns `None` when `w` collapses.
fn orthonormalize(
    w: &mut [f64],
    basis: &[Vec<f64>],
    mbasis: &[Vec<f64>],
    m: &CsrMatrix,
) -> Option<Vec<f64>> {
    let original = m.quadratic_form(w).max(0.0).sqrt();
    if original == 0.0 {
        return None;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = mbasis.iter().map(|mb| dot(mb, w)).collect();
        for (c, b) in coeffs.iter().zip(basis) {
            axpy(-c, b, w);
        }
    }
    let mw = m.mul_vec(w);
    let nrm = dot(w, &mw).max(0.0).sqrt();
    if nrm <= 1e-10 * original {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= nrm);
    Some(mw.into_iter().map(|x| x / nrm).collect())
}

/// Block version of [`orthonormalize`]: both Gram–Schmidt passes against the
/// existing basis stream each basis vector once for the whole block, then the
/// block is orthonormalised internally. Collapsed vectors are dropped.
fn orthonormalize_block(
    mut ws: Vec<Vec<f64>>,
    basis: &[Vec<f64>],
    mbasis: &[Vec<f64>],
    m: &CsrMatrix,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let originals: Vec<f64> = ws
        .iter()
        .map(|w| m.quadratic_form(w).max(0.0).sqrt())
        .collect();
    for _ in 0..2 {
        let coeffs: Vec<Vec<f64>> = mbasis
            .iter()
            .map(|mb| ws.iter().map(|w| dot(mb, w)).collect())
            .collect();
        for (c, b) in coeffs.iter().zip(basis) {
            for (w, cw) in ws.iter_mut().zip(c) {
                axpy(-cw, b, w);
            }
        }
    }
    let mut out: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(ws.len());
    for (mut w, original) in ws.into_iter().zip(originals) {
        if original == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for (b, mb) in &out {
                let c = dot(mb, &w);
                axpy(-c, b, &mut w);
            }
        }
        let mw = m.mul_vec(&w);
        let nrm = dot(&w, &mw).max(0.0).sqrt();
        if nrm <= 1e-10 * original {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= nrm);
        out.push((w, mw.into_iter().map(|x| x / nrm).collect()));
    }
    out
}

/// Lowest `k_max + 1` eigenpairs with residual
/// `|K u - lambda M u| <= tol |M u| max(lambda, 1)`.
pub fn solve_lowest(problem: &AssembledProblem, k_max: usize, tol: f64) -> Result<SpectrumSummary> {
    solve_lowest_with(problem, k_max, tol, SolverOptions::default())
}

pub fn solve_lowest_with(
    problem: &AssembledProblem,
    k_max: usize,
    tol: f64,
    opts: SolverOptions,
) -> Result<SpectrumSummary> {
    let n = problem.dim();
    let nev = k_max + 1;
    if k_max < 1 || 2 * k_max >= n {
        return Err(Error::InvalidArgument(format!(
            "k_max = {k_max} must satisfy 1 <= k_max < dimension / 2 = {}",
            n / 2
        )));
    }
    let sigma = match problem.bc {
        BoundaryCondition::Neumann => -1.0,
        BoundaryCondition::Dirichlet => 0.0,
    };
    let (k, m) = (&problem.k, &problem.m);
    let shifted = if sigma == 0.0 {
        k.clone()
    } else {
        k.add_scaled(-sigma, m)
    };
    let chol = EnvelopeCholesky::factor(&shifted)?;

    let p = opts.block.max(1);
    let max_basis = (3 * nev + p).max(nev + 6 * p).min(n);
    let keep = (2 * nev).max(nev + p).min(max_basis - p);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let random =
        |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };

    // Basis V, its M-images MV and T-images TV.
    let mut v: Vec<Vec<f64>> = Vec::new();
    let mut mv: Vec<Vec<f64>> = Vec::new();
    let mut tv: Vec<Vec<f64>> = Vec::new();
    let mut block: Vec<Vec<f64>> = (0..p).map(|_| random(&mut rng)).collect();
    let mut worst = f64::INFINITY;

    for restart in 0..=opts.max_restarts {
        // Expand the basis block by block.
        while v.len() < max_basis {
            block.truncate(max_basis - v.len());
            let mut fresh = orthonormalize_block(block, &v, &mv, m);
            if fresh.is_empty() {
                let mut r = random(&mut rng);
                match orthonormalize(&mut r, &v, &mv, m) {
                    Some(mr) => fresh.push((r, mr)),
                    None => break,
                }
            }
            let images =
                chol.solve_many(&fresh.iter().map(|(_, mw)| mw.clone()).collect::<Vec<_>>());
            for (w, mw) in fresh {
                v.push(w);
                mv.push(mw);
            }
            tv.extend(images.iter().cloned());
            block = images;
        }

        // Rayleigh–Ritz on H = V^T M T V.
        let nb = v.len();
        let mut h = DMatrix::<f64>::zeros(nb, nb);
        for i in 0..nb {
            for j in i..nb {
                let x = 0.5 * (dot(&mv[i], &tv[j]) + dot(&mv[j], &tv[i]));
                h[(i, j)] = x;
                h[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..nb).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let combine = |vecs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (i, b) in vecs.iter().enumerate() {
                axpy(eig.eigenvectors[(i, col)], b, &mut out);
            }
            out
        };
        let take = keep.min(nb);
        let mut ritz = Vec::with_capacity(take);
        let mut lambdas = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        let mut first_unconverged = None;
        let mut unconverged_residuals = Vec::new();
        worst = 0.0f64;
        for (idx, &col) in order.iter().take(take).enumerate() {
            let theta = eig.eigenvalues[col];
            let u = combine(&v, col);
            let lambda = if theta > 0.0 {
                sigma + 1.0 / theta
            } else {
                f64::INFINITY
            };
            if idx < nev {
                let ku = k.mul_vec(&u);
                let mu = m.mul_vec(&u);
                let mut r = ku;
                axpy(-lambda, &mu, &mut r);
                let rel = norm(&r) / (norm(&mu) * lambda.max(1.0));
                if !(rel <= tol) {
                    first_unconverged.get_or_insert(idx);
                    if unconverged_residuals.len() < p {
                        unconverged_residuals.push(r.clone());
                    }
                }
                worst = worst.max(rel);
                residuals.push(rel);
                lambdas.push(lambda);
            }
            ritz.push((col, u));
        }

        if first_unconverged.is_none() {
            let mut eigenvalues = lambdas;
            if problem.bc == BoundaryCondition::Neumann {
                // The constant mode is exactly zero; keep round-off non-negative.
                if let Some(first) = eigenvalues.first_mut() {
                    *first = first.max(0.0);
                }
            }
            let vectors: Vec<Vec<f64>> = ritz
                .into_iter()
                .take(nev)
                .map(|(_, u)| problem.expand(&u))
                .collect();
            let rel_gap = 1e-6;
            let clusters = cluster_values(&eigenvalues, rel_gap);
            return Ok(SpectrumSummary {
                bc: problem.bc,
                h: Some(problem.h),
                eigenvalues,
                eigenvectors: Some(vectors),
                clusters,
                residuals,
                extrapolated: None,
                error: None,
                rel_gap,
                source: "fem".into(),
            });
        }
        if restart == opts.max_restarts {
            break;
        }

        // Thick restart: keep the leading Ritz vectors and continue from the
        // shift-inverted residuals of the unconverged ones. The residual is
        // formed in the original space, so nearly converged vectors still yield
        // accurate new directions.
        let new_tv: Vec<Vec<f64>> = ritz.iter().map(|(col, _)| combine(&tv, *col)).collect();
        block = unconverged_residuals
            .iter()
            .map(|r| chol.solve(r))
            .collect();
        let mut extra = nev;
        while block.len() < p && extra < take {
            block.push(new_tv[extra].clone());
            extra += 1;
        }
        v = ritz.into_iter().map(|(_, u)| u).collect();
        mv = v.iter().map(|u| m.mul_vec(u)).collect();
        tv = new_tv;
    }
    Err(Error::NotConverged {
        iterations: opts.max_restarts,
        achieved: worst,
    })
}

/// Consecutive values merge when `|l_{i+1} - l_i| <= rel_gap max(l_i, l_1)`.
pub fn cluster_values(values: &[f64], rel_gap: f64) -> Vec<Cluster> {
    let scale_floor = values.iter().copied().find(|v| *v > 0.0).unwrap_or(0.0);
    let floor = if values.len() > 1 {
        values[1].max(scale_floor)
    } else {
        scale_floor
    };
    let mut out: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (v - values[i - 1]).abs() <= rel_gap * values[i - 1].max(floor) => {
                c.size += 1
            }
            _ => out.push(Cluster {
                start: i,
                size: 1,
                value: v,
            }),
        }
    }
    out
}

/// Largest default clustering tolerance.
pub const MAX_DEFAULT_REL_GAP: f64 = 2e-3;

/// Default clustering tolerance: twenty times the relative discretisation
/// error, clamped to `[1e-6, MAX_DEFAULT_REL_GAP]`. The error estimate refers
/// to the fine values; clusters are formed on the extrapolated ones, which are
/// far more accurate, so the raw estimate would merge distinct eigenvalues.
pub fn default_rel_gap(spectrum: &SpectrumSummary) -> f64 {
    (20.0 * spectrum.relative_error()).clamp(1e-6, MAX_DEFAULT_REL_GAP)
}

/// Recomputes clusters with the given tolerance.
pub fn cluster_multiplicities(spectrum: &SpectrumSummary, rel_gap: f64) -> Result<Vec<Cluster>> {
    if !(rel_gap > 0.0 && rel_gap < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "rel_gap must lie in (0, 0.5), got {rel_gap}"
        )));
    }
    Ok(cluster_values(spectrum.best_values(), rel_gap))
}

/// `N(lambda) = #{i : lambda_i < lambda}` over the given values.
pub fn count_below(values: &[f64], lambda: f64) -> usize {
    values.partition_point(|&v| v < lambda)
}

/// `N(lambda)` on a computed spectrum; refuses thresholds beyond the computed range.
pub fn counting_function(spectrum: &SpectrumSummary, lambda: f64) -> Result<usize> {
    if spectrum.is_empty() || lambda > spectrum.largest() {
        return Err(Error::InsufficientSpectrum {
            largest: spectrum.largest(),
        });
    }
    Ok(count_below(&spectrum.eigenvalues, lambda))
}

/// Attaches Richardson extrapolation (`O(h^2)` error) from a coarse spectrum
/// at `2h` to the fine spectrum at `h`, and re-clusters with the default gap.
pub fn richardson(coarse: &SpectrumSummary, fine: &SpectrumSummary) -> SpectrumSummary {
    let mut out = fine.clone();
    let n = coarse.len().min(fine.len());
    out.eigenvalues.truncate(n);
    out.residuals.truncate(n);
    if let Some(vecs) = &mut out.eigenvectors {
        vecs.truncate(n);
    }
    let mut ext = Vec::with_capacity(n);
    let mut err = Vec::with_capacity(n);
    for i in 0..n {
        let (c, f) = (coarse.eigenvalues[i], fine.eigenvalues[i]);
        ext.push((4.0 * f - c) / 3.0);
        err.push((f - c).abs() / 3.0);
    }
    out.extrapolated = Some(ext);
    out.error = Some(err);
    out.rel_gap = default_rel_gap(&out);
    out.clusters = cluster_values(out.best_values(), out.rel_gap);
    out
}
