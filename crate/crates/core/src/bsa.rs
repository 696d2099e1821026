//! Best separable approximation `ρ = λρ_s + (1−λ)|ψ⟩⟨ψ|`.
//!
//! [`compute`] picks the route from the rank of `ρ` and the shape of the
//! answer:
//!
//! - rank 4, separable part of rank 4: closed form from the smallest
//!   eigenvalue of `Y` ([`bsa_full_rank`]);
//! - rank 4, separable part of rank 3: the residual system of
//!   [`crate::solver::residual_rank3`] ([`bsa_rank3`]);
//! - rank below 4: [`bsa_degenerate`].
//!
//! [`verify_theorem1`] checks a decomposition against the optimality
//! conditions without trusting how it was produced.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat4::{hermitian_eig, min_eigenvalue, outer, real, Mat4, Vec4, PSD_TOL};
use crate::qstate::{
    concurrence_raw, is_separable, partial_transpose_b, DensityMatrix, PureState, StateError,
    RANK_TOL,
};
use crate::solver::{
    product_vectors_in, project_out, solve_corollary_multistart, solve_multistart_with, CandidateSolution,
    CorollaryStart, Rank3Constraints, Rank3Start, SolverConfig, C_TOL,
};
use crate::spectra::{spectral_report, weight_from_gamma};

/// Default tolerance for [`verify_theorem1`] residuals.
pub const VERIFY_TOL: f64 = 1e-8;
/// Reconstruction tolerance used by [`verify_theorem1`].
pub const RECONSTRUCTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Path {
    FullRank,
    Rank3,
    DegenerateCorollary,
    Separable,
}

impl std::fmt::Display for Path {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Path::FullRank => "full_rank",
            Path::Rank3 => "rank3",
            Path::DegenerateCorollary => "degenerate_corollary",
            Path::Separable => "separable",
        })
    }
}

/// Vectors certifying optimality.
#[derive(Debug, Clone, Default)]
pub struct Witnesses {
    /// Kernel vector of `ρ_s^{T_B}`.
    pub phi: Option<PureState>,
    /// Kernel vector of `ρ_s`.
    pub phi_tilde: Option<PureState>,
    pub alpha: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct Flags {
    /// `ρ` is pure: `λ = 0` and `ρ_s` is a placeholder.
    pub pure_input: bool,
    /// The smallest eigenvalue of `Y` was degenerate.
    pub degenerate_gamma: bool,
    /// Solver candidates examined (zero on closed-form paths).
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub lambda: f64,
    /// `None` when `ρ` is separable.
    pub psi: Option<PureState>,
    pub rho_s: Mat4,
    pub path: Path,
    pub witnesses: Witnesses,
    pub flags: Flags,
}

impl Decomposition {
    /// `λρ_s + (1−λ)|ψ⟩⟨ψ|`.
    pub fn reconstruct(&self) -> Mat4 {
        let mut m = self.rho_s * real(self.lambda);
        if let Some(psi) = &self.psi {
            m += psi.projector() * real(1.0 - self.lambda);
        }
        m
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BsaError {
    #[error("state is separable")]
    NotEntangled,
    #[error("witness vector is a product vector")]
    ProductVectorWitness,
    #[error("no admissible solution among {candidates} candidates (best residual {best_residual:e})")]
    NoAdmissibleSolution { candidates: usize, best_residual: f64 },
    #[error("{count} distinct admissible solutions")]
    MultipleAdmissible { count: usize },
    #[error("lambda {0} outside [0, 1]")]
    LambdaOutOfRange(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

impl From<crate::mat4::LinalgError> for BsaError {
    fn from(e: crate::mat4::LinalgError) -> Self {
        BsaError::State(e.into())
    }
}

/// Why the closed form does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rejection {
    DegenerateGamma,
    ProductWitness,
    NotPositive,
    NotPpt,
}

#[derive(Debug, Clone)]
pub enum FullRankOutcome {
    Found(Decomposition),
    NotThisPath(Rejection),
}

/// The maximally entangled partner of a kernel witness: the eigenvector of
/// `[|φ⟩⟨φ|]^{T_B}` with eigenvalue `−c(φ)/2`. Returns it with `α = c(φ)/2`.
pub fn psi_from_phi(phi: &PureState) -> Result<(PureState, f64), BsaError> {
    let cphi = phi.concurrence();
    if cphi < C_TOL {
        return Err(BsaError::ProductVectorWitness);
    }
    let p = partial_transpose_b(&phi.projector());
    let eig = hermitian_eig(&p)?;
    let (_, v) = eig.min();
    Ok((PureState::normalized(v)?.phase_fixed(), cphi / 2.0))
}

fn separable_decomposition(rho: &DensityMatrix) -> Decomposition {
    Decomposition {
        lambda: 1.0,
        psi: None,
        rho_s: *rho.matrix(),
        path: Path::Separable,
        witnesses: Witnesses::default(),
        flags: Flags::default(),
    }
}

fn remainder(rho: &Mat4, psi: &PureState, lambda: f64) -> Mat4 {
    (rho - psi.projector() * real(1.0 - lambda)) / real(lambda)
}

/// Closed-form route. Applies when the separable part has full rank.
pub fn bsa_full_rank(rho: &DensityMatrix) -> Result<FullRankOutcome, BsaError> {
    if is_separable(rho)?.separable {
        return Err(BsaError::NotEntangled);
    }
    let rep = spectral_report(rho)?;
    if rep.degenerate_gamma {
        return Ok(FullRankOutcome::NotThisPath(Rejection::DegenerateGamma));
    }
    let lambda = 1.0 - weight_from_gamma(rep.gamma);
    if !(-1e-8..=1.0 + 1e-8).contains(&lambda) {
        return Err(BsaError::LambdaOutOfRange(lambda));
    }
    let lambda = lambda.clamp(0.0, 1.0);
    let (psi, alpha) = match psi_from_phi(&rep.phi4) {
        Ok(x) => x,
        Err(BsaError::ProductVectorWitness) => {
            return Ok(FullRankOutcome::NotThisPath(Rejection::ProductWitness))
        }
        Err(e) => return Err(e),
    };
    if lambda == 0.0 {
        return Ok(FullRankOutcome::NotThisPath(Rejection::NotPositive));
    }
    let rho_s = remainder(rho.matrix(), &psi, lambda);
    if min_eigenvalue(&rho_s)? < -PSD_TOL {
        return Ok(FullRankOutcome::NotThisPath(Rejection::NotPositive));
    }
    if min_eigenvalue(&partial_transpose_b(&rho_s))? < -PSD_TOL {
        return Ok(FullRankOutcome::NotThisPath(Rejection::NotPpt));
    }
    Ok(FullRankOutcome::Found(Decomposition {
        lambda,
        psi: Some(psi),
        rho_s,
        path: Path::FullRank,
        witnesses: Witnesses {
            phi: Some(rep.phi4.phase_fixed()),
            phi_tilde: None,
            alpha,
            nu: 0.0,
        },
        flags: Flags::default(),
    }))
}

/// Moore–Penrose pseudo-inverse of a Hermitian PSD matrix.
fn pinv(rho: &DensityMatrix) -> Result<Mat4, BsaError> {
    let eig = hermitian_eig(rho.matrix())?;
    Ok(eig.map_values(|v| if v > RANK_TOL { 1.0 / v } else { 0.0 }))
}

/// Starting points derived from every eigenvector of `Y` with an entangled
/// partner.
fn spectral_hints(rho: &DensityMatrix) -> Result<(Vec<Rank3Start>, Vec<CorollaryStart>), BsaError> {
    let rep = spectral_report(rho)?;
    let inv = pinv(rho)?;
    let mut r3 = Vec::new();
    let mut cor = Vec::new();
    for k in (0..4).rev() {
        let phi = rep.phis[k];
        let Ok((psi, alpha)) = psi_from_phi(&phi) else {
            continue;
        };
        let tilde = inv * psi.amplitudes();
        if tilde.norm() > 0.0 {
            r3.push(Rank3Start {
                phi_tilde: tilde.normalize(),
                phi: *phi.amplitudes(),
                alpha,
                nu: 0.0,
            });
        }
        cor.push(CorollaryStart {
            psi: *psi.amplitudes(),
            phi: *phi.amplitudes(),
            alpha,
            mu: weight_from_gamma(rep.gamma.max(0.0)),
        });
    }
    Ok((r3, cor))
}

/// Select the unique admissible candidate, comparing only `λ` and `ψ`.
fn select(cands: Vec<CandidateSolution>) -> Result<(CandidateSolution, usize), BsaError> {
    let total = cands.len();
    let mut distinct: Vec<CandidateSolution> = Vec::new();
    for c in cands.into_iter().filter(|c| c.admissible) {
        let dup = distinct
            .iter()
            .any(|d| (d.lambda - c.lambda).abs() < 1e-6 && 1.0 - d.psi.overlap(&c.psi) < 1e-6);
        if !dup {
            distinct.push(c);
        }
    }
    match distinct.len() {
        1 => Ok((distinct.pop().expect("one element"), total)),
        0 => Err(BsaError::NoAdmissibleSolution {
            candidates: total,
            best_residual: f64::NAN,
        }),
        count => Err(BsaError::MultipleAdmissible { count }),
    }
}

fn no_solution(cands: &[CandidateSolution]) -> BsaError {
    BsaError::NoAdmissibleSolution {
        candidates: cands.len(),
        best_residual: cands
            .iter()
            .map(|c| c.residual_norm)
            .fold(f64::INFINITY, f64::min),
    }
}

fn from_candidate(c: CandidateSolution, path: Path, candidates: usize) -> Decomposition {
    Decomposition {
        lambda: c.lambda,
        psi: Some(c.psi),
        rho_s: crate::mat4::hermitize(&c.rho_s),
        path,
        witnesses: Witnesses {
            phi: Some(c.phi),
            phi_tilde: Some(c.phi_tilde),
            alpha: c.alpha,
            nu: c.nu,
        },
        flags: Flags {
            candidates,
            ..Flags::default()
        },
    }
}

fn solve_and_select(
    cands: Vec<CandidateSolution>,
    path: Path,
) -> Result<Decomposition, BsaError> {
    if !cands.iter().any(|c| c.admissible) {
        return Err(no_solution(&cands));
    }
    let (best, total) = select(cands)?;
    Ok(from_candidate(best, path, total))
}

/// Full-rank `ρ` whose separable part has rank 3.
pub fn bsa_rank3(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<Decomposition, BsaError> {
    if is_separable(rho)?.separable {
        return Err(BsaError::NotEntangled);
    }
    let (hints, _) = spectral_hints(rho)?;
    let cands = solve_multistart_with(rho, cfg, &Rank3Constraints::default(), &hints);
    solve_and_select(cands, Path::Rank3)
}

/// `ρ` of rank 1, 2 or 3.
pub fn bsa_degenerate(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<Decomposition, BsaError> {
    if is_separable(rho)?.separable {
        return Err(BsaError::NotEntangled);
    }
    let eig = hermitian_eig(rho.matrix())?;
    let kernel: Vec<Vec4> = eig
        .values
        .iter()
        .zip(eig.vectors.iter())
        .filter(|(v, _)| **v <= RANK_TOL)
        .map(|(_, k)| *k)
        .collect();

    if rho.rank() == 1 {
        let psi = PureState::normalized(eig.vectors[3])?.phase_fixed();
        return Ok(Decomposition {
            lambda: 0.0,
            psi: Some(psi),
            rho_s: Mat4::identity() * real(0.25),
            path: Path::DegenerateCorollary,
            witnesses: Witnesses::default(),
            flags: Flags {
                pure_input: true,
                ..Flags::default()
            },
        });
    }

    let degenerate_gamma = spectral_report(rho)?.degenerate_gamma;
    let (r3_hints, cor_hints) = spectral_hints(rho)?;

    // step 1: rank-3 system with an entangled φ
    let mut cons = Rank3Constraints {
        entangled_phi: true,
        ..Default::default()
    };
    if kernel.len() == 1 {
        for ef in product_vectors_in(&kernel) {
            cons.phi_tilde_perp.push(ef);
            cons.phi_perp.push(ef.map(|z| z.conj()));
        }
    }
    let step1 = solve_multistart_with(rho, cfg, &cons, &r3_hints);
    let mut out = if step1.iter().any(|c| c.admissible) {
        let (best, total) = select(step1)?;
        from_candidate(best, Path::DegenerateCorollary, total)
    } else {
        // step 2: φ̃ in the kernel of ρ
        let cands = solve_corollary_multistart(rho, cfg, &cor_hints)?;
        if !cands.iter().any(|c| c.admissible) {
            let mut all = step1;
            all.extend(cands);
            return Err(no_solution(&all));
        }
        let (best, total) = select(cands)?;
        from_candidate(best, Path::DegenerateCorollary, total)
    };
    out.flags.degenerate_gamma = degenerate_gamma;
    Ok(out)
}

/// Best separable approximation with default solver settings.
pub fn compute(rho: &DensityMatrix) -> Result<Decomposition, BsaError> {
    compute_with(rho, &SolverConfig::default())
}

pub fn compute_with(rho: &DensityMatrix, cfg: &SolverConfig) -> Result<Decomposition, BsaError> {
    if is_separable(rho)?.separable {
        return Ok(separable_decomposition(rho));
    }
    if rho.rank() < 4 {
        return bsa_degenerate(rho, cfg);
    }
    match bsa_full_rank(rho)? {
        FullRankOutcome::Found(d) => Ok(d),
        FullRankOutcome::NotThisPath(why) => {
            let mut d = bsa_rank3(rho, cfg)?;
            d.flags.degenerate_gamma = why == Rejection::DegenerateGamma;
            Ok(d)
        }
    }
}

/// `(1−λ)·c(ψ)`, zero for separable states.
pub fn entanglement_measure(d: &Decomposition) -> f64 {
    match &d.psi {
        Some(psi) => (1.0 - d.lambda) * psi.concurrence(),
        None => 0.0,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub path: Path,
    pub reconstruction_residual: f64,
    pub rho_s_min_eig: f64,
    pub rho_s_pt_min_eig: f64,
    /// `‖ρ_s^{T_B}φ‖`.
    pub kernel_pt_residual: f64,
    /// `‖ρ_s φ̃‖`, zero when no `φ̃` is involved.
    pub kernel_residual: f64,
    /// Residual of the eigenvector condition on `ψ`.
    pub eigen_residual: f64,
    pub alpha: f64,
    pub nu: f64,
    pub c_phi: f64,
    pub c_psi: f64,
    pub reconstruction_ok: bool,
    pub rho_s_psd: bool,
    pub rho_s_ppt: bool,
    pub kernels_ok: bool,
    pub eigen_ok: bool,
    pub alpha_sign_ok: bool,
    pub nu_sign_ok: bool,
    pub c_phi_positive: bool,
    /// `c(ψ) = 1` on the full-rank path, `c(ψ) > 0` otherwise.
    pub c_psi_ok: bool,
    pub verdict: bool,
}

fn kernel_vector(m: &Mat4, witness: Option<&PureState>, tol: f64) -> Result<Vec4, BsaError> {
    if let Some(w) = witness {
        if (m * w.amplitudes()).norm() <= tol {
            return Ok(*w.amplitudes());
        }
    }
    Ok(hermitian_eig(m)?.min().1)
}

/// Least-squares `(α, ν)` for `Pψ + ν|φ̃⟩⟨φ̃|ψ⟩ + αψ = 0` restricted to the
/// range of `ρ`, and the residual.
fn fit_alpha_nu(p: &Mat4, psi: &Vec4, tilde: &Vec4, kernel: &[Vec4]) -> (f64, f64, f64) {
    let rhs = -project_out(&(p * psi), kernel);
    let a = project_out(&(tilde * tilde.dotc(psi)), kernel);
    let b = project_out(psi, kernel);
    let dot = |u: &Vec4, v: &Vec4| u.dotc(v).re;
    let (aa, ab, bb) = (dot(&a, &a), dot(&a, &b), dot(&b, &b));
    let (ar, br) = (dot(&a, &rhs), dot(&b, &rhs));
    let det = aa * bb - ab * ab;
    let (nu, alpha) = if aa < 1e-20 || det.abs() < 1e-14 * aa.max(1.0) * bb.max(1.0) {
        (0.0, br / bb)
    } else {
        ((ar * bb - ab * br) / det, (aa * br - ab * ar) / det)
    };
    let res = (a * real(nu) + b * real(alpha) - rhs).norm();
    (alpha, nu, res)
}

/// Check `d` against the optimality conditions for `ρ`.
pub fn verify_theorem1(
    rho: &DensityMatrix,
    d: &Decomposition,
    tol: f64,
) -> Result<VerificationReport, BsaError> {
    let recon = (d.reconstruct() - rho.matrix()).norm();
    let reconstruction_ok = recon <= RECONSTRUCTION_TOL.max(tol * 0.1);
    let mut r = VerificationReport {
        path: d.path,
        reconstruction_residual: recon,
        rho_s_min_eig: 0.0,
        rho_s_pt_min_eig: 0.0,
        kernel_pt_residual: 0.0,
        kernel_residual: 0.0,
        eigen_residual: 0.0,
        alpha: 0.0,
        nu: 0.0,
        c_phi: 0.0,
        c_psi: d.psi.as_ref().map_or(0.0, PureState::concurrence),
        reconstruction_ok,
        rho_s_psd: true,
        rho_s_ppt: true,
        kernels_ok: true,
        eigen_ok: true,
        alpha_sign_ok: true,
        nu_sign_ok: true,
        c_phi_positive: true,
        c_psi_ok: true,
        verdict: false,
    };

    if d.path == Path::Separable || d.psi.is_none() {
        let sep = is_separable(rho)?;
        r.rho_s_min_eig = min_eigenvalue(&d.rho_s)?;
        r.rho_s_pt_min_eig = min_eigenvalue(&partial_transpose_b(&d.rho_s))?;
        r.rho_s_psd = r.rho_s_min_eig >= -PSD_TOL;
        r.rho_s_ppt = r.rho_s_pt_min_eig >= -PSD_TOL;
        r.verdict = sep.separable
            && (d.lambda - 1.0).abs() <= tol
            && reconstruction_ok
            && r.rho_s_psd
            && r.rho_s_ppt;
        return Ok(r);
    }
    let psi = d.psi.as_ref().expect("checked above");
    if d.flags.pure_input || d.lambda <= tol {
        r.c_psi_ok = r.c_psi > C_TOL;
        r.verdict = reconstruction_ok && r.c_psi_ok && rho.rank() == 1;
        return Ok(r);
    }

    let rs = crate::mat4::hermitize(&d.rho_s);
    let pt = partial_transpose_b(&rs);
    r.rho_s_min_eig = min_eigenvalue(&rs)?;
    r.rho_s_pt_min_eig = min_eigenvalue(&pt)?;
    r.rho_s_psd = r.rho_s_min_eig >= -PSD_TOL;
    r.rho_s_ppt = r.rho_s_pt_min_eig >= -PSD_TOL;

    let phi = kernel_vector(&pt, d.witnesses.phi.as_ref(), tol)?;
    r.kernel_pt_residual = (pt * phi).norm();
    r.c_phi = concurrence_raw(&phi);
    let p = partial_transpose_b(&outer(&phi, &phi));
    let v = psi.amplitudes();

    match d.path {
        Path::FullRank => {
            r.alpha = -v.dotc(&(p * v)).re;
            r.eigen_residual = (p * v + v * real(r.alpha)).norm();
            r.kernels_ok = r.kernel_pt_residual <= tol;
            r.alpha_sign_ok = r.alpha > 0.0;
            r.c_psi_ok = (r.c_psi - 1.0).abs() <= tol;
        }
        _ => {
            let tilde = kernel_vector(&rs, d.witnesses.phi_tilde.as_ref(), tol)?;
            r.kernel_residual = (rs * tilde).norm();
            let eig = hermitian_eig(rho.matrix())?;
            let kernel: Vec<Vec4> = (0..4 - rho.rank()).map(|k| eig.vectors[k]).collect();
            let (alpha, nu, res) = fit_alpha_nu(&p, v, &tilde, &kernel);
            r.alpha = alpha;
            r.nu = nu;
            r.eigen_residual = res;
            r.kernels_ok = r.kernel_pt_residual <= tol && r.kernel_residual <= tol;
            r.alpha_sign_ok = alpha >= -tol;
            r.nu_sign_ok = nu >= -tol;
            r.c_psi_ok = r.c_psi > C_TOL;
            if d.path == Path::DegenerateCorollary {
                r.c_phi_positive = r.c_phi > C_TOL;
            }
        }
    }
    r.eigen_ok = r.eigen_residual <= tol;
    r.verdict = reconstruction_ok
        && r.rho_s_psd
        && r.rho_s_ppt
        && r.kernels_ok
        && r.eigen_ok
        && r.alpha_sign_ok
        && r.nu_sign_ok
        && r.c_phi_positive
        && r.c_psi_ok
        && (0.0..=1.0).contains(&d.lambda);
    Ok(r)
}
