//! Numerical machinery for the rank-deficient decompositions.
//!
//! Two residual systems are solved by damped least squares from many
//! seeded starting points:
//!
//! - [`residual_rank3`]: the kernel and eigenvector conditions written in
//!   terms of `φ̃` (kernel vector of `ρ_s`) and `φ` (kernel vector of
//!   `ρ_s^{T_B}`), with `ψ ∝ ρφ̃` and `1−λ = ‖ρφ̃‖²/⟨φ̃|ρ|φ̃⟩`.
//! - [`residual_corollary`]: the same conditions with `φ̃` pinned to the
//!   kernel of a rank-deficient `ρ`, solved for `ψ`, `φ`, `α` and `1−λ`.
//!
//! [`ls_oracle`] is an independent check: it maximizes `λ` directly over
//! the pure part, testing feasibility of the remainder with PSD and PPT
//! predicates only.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::mat4::{
    hermitian_eig, is_psd_fast, min_eigenvalue, outer, real, Mat2, Mat4, Vec4, C64, PSD_TOL,
};
use crate::qstate::{
    concurrence_raw, partial_transpose_b, DensityMatrix, PureState, StateError, RANK_TOL,
};

/// Concurrence below which a vector counts as a product vector.
pub const C_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    pub n_starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub residual_tol: f64,
    pub damping_init: f64,
    pub alpha_min: f64,
    pub nu_min: f64,
    pub psd_slack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_starts: 64,
            seed: 0,
            max_iters: 500,
            residual_tol: 1e-11,
            damping_init: 1e-3,
            alpha_min: -1e-9,
            nu_min: -1e-9,
            psd_slack: PSD_TOL,
        }
    }
}

/// A converged (or best-effort) solution of one of the residual systems.
#[derive(Debug, Clone)]
pub struct CandidateSolution {
    pub phi_tilde: PureState,
    pub phi: PureState,
    pub alpha: f64,
    pub nu: f64,
    /// Normalized pure part.
    pub psi: PureState,
    pub lambda: f64,
    /// Unnormalized `ρ_s·λ = ρ − (1−λ)|ψ⟩⟨ψ|` divided by `λ`.
    pub rho_s: Mat4,
    pub residual_norm: f64,
    pub admissible: bool,
    pub start_index: usize,
}

// ---------------------------------------------------------------------------
// parametrization

/// Projective chart on the unit sphere of a subspace: the coefficient at
/// `pivot` is fixed to 1, the rest are free complex numbers.
#[derive(Debug, Clone)]
struct Chart {
    basis: Vec<Vec4>,
    pivot: usize,
}

impl Chart {
    fn full() -> Self {
        let basis = (0..4)
            .map(|k| {
                let mut v = Vec4::zeros();
                v[k] = real(1.0);
                v
            })
            .collect();
        Self { basis, pivot: 0 }
    }

    fn subspace(basis: Vec<Vec4>) -> Self {
        Self { basis, pivot: 0 }
    }

    fn len(&self) -> usize {
        2 * (self.basis.len() - 1)
    }

    fn decode(&self, p: &[f64]) -> Vec4 {
        let mut v = self.basis[self.pivot];
        let mut it = p.chunks_exact(2);
        for (k, b) in self.basis.iter().enumerate() {
            if k == self.pivot {
                continue;
            }
            let z = it.next().expect("chart length");
            v += b * C64::new(z[0], z[1]);
        }
        v.normalize()
    }

    /// Re-pivot on the largest coefficient of `v` and return its coordinates.
    fn encode(&mut self, v: &Vec4) -> Vec<f64> {
        let coeffs: Vec<C64> = self.basis.iter().map(|b| b.dotc(v)).collect();
        self.pivot = coeffs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(k, _)| k)
            .unwrap_or(0);
        let pz = coeffs[self.pivot];
        let mut out = Vec::with_capacity(self.len());
        for (k, z) in coeffs.iter().enumerate() {
            if k == self.pivot {
                continue;
            }
            let w = if pz.norm() == 0.0 { *z } else { z / pz };
            out.push(w.re);
            out.push(w.im);
        }
        out
    }
}

/// Unknown vector = several chart blocks followed by plain reals.
#[derive(Debug, Clone)]
struct Layout {
    charts: Vec<Chart>,
    n_real: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.charts.iter().map(Chart::len).sum::<usize>() + self.n_real
    }

    fn decode(&self, x: &[f64]) -> (Vec<Vec4>, Vec<f64>) {
        let mut off = 0;
        let mut vecs = Vec::with_capacity(self.charts.len());
        for ch in &self.charts {
            vecs.push(ch.decode(&x[off..off + ch.len()]));
            off += ch.len();
        }
        (vecs, x[off..].to_vec())
    }

    fn encode(&mut self, vecs: &[Vec4], reals: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        for (ch, v) in self.charts.iter_mut().zip(vecs) {
            x.extend(ch.encode(v));
        }
        x.extend_from_slice(reals);
        x
    }
}

fn stack(a: &Vec4, b: &Vec4) -> [f64; 16] {
    let mut out = [0.0; 16];
    for k in 0..4 {
        out[2 * k] = a[k].re;
        out[2 * k + 1] = a[k].im;
        out[8 + 2 * k] = b[k].re;
        out[8 + 2 * k + 1] = b[k].im;
    }
    out
}

fn norm16(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// residual systems

/// Unknowns of the rank-3 system.
#[derive(Debug, Clone, Copy)]
pub struct Rank3Unknowns {
    pub phi_tilde: Vec4,
    pub phi: Vec4,
    pub alpha: f64,
    pub nu: f64,
}

/// Kernel condition and eigenvector condition, 16 reals.
///
/// The first block is `[ρφ̃φ̃†ρ]^{T_B}φ − ⟨φ̃|ρ|φ̃⟩ρ^{T_B}φ` divided by
/// `⟨φ̃|ρ|φ̃⟩`, the second `ν|φ̃⟩⟨φ̃|ρ|φ̃⟩ + [|φ⟩⟨φ|]^{T_B}ρ|φ̃⟩ + αρ|φ̃⟩`
/// divided by `‖ρφ̃‖`. The scaling keeps the system from collapsing onto
/// the kernel of `ρ`, where both unscaled blocks vanish.
pub fn residual_rank3(u: &Rank3Unknowns, rho: &DensityMatrix) -> [f64; 16] {
    let r = rho.matrix();
    let psi = r * u.phi_tilde;
    let n = u.phi_tilde.dotc(&psi).re;
    let psi_norm = psi.norm();
    if !(n > 0.0) || psi_norm == 0.0 {
        return [1.0; 16];
    }
    let pt = partial_transpose_b(r);
    let first = partial_transpose_b(&outer(&psi, &psi)) * u.phi / real(n) - pt * u.phi;
    let p = partial_transpose_b(&outer(&u.phi, &u.phi));
    let second = (u.phi_tilde * real(u.nu * n) + p * psi + psi * real(u.alpha)) / real(psi_norm);
    stack(&first, &second)
}

/// Unknowns of the system for rank-deficient `ρ` with `φ̃` in its kernel.
#[derive(Debug, Clone, Copy)]
pub struct CorollaryUnknowns {
    pub psi: Vec4,
    pub phi: Vec4,
    pub alpha: f64,
    /// Weight `1−λ` of the pure part.
    pub mu: f64,
}

/// Removes the components along `kernel` (an orthonormal list).
pub fn project_out(v: &Vec4, kernel: &[Vec4]) -> Vec4 {
    kernel.iter().fold(*v, |acc, k| acc - k * k.dotc(v))
}

/// `(ρ^{T_B} − μ[|ψ⟩⟨ψ|]^{T_B})φ` and the range component of
/// `[|φ⟩⟨φ|]^{T_B}ψ + αψ`.
///
/// With `φ̃` in the kernel of `ρ` and `ψ` in its range, the term
/// `ν|φ̃⟩⟨φ̃|ψ⟩` is a limit of the form `0·∞` and can be any vector in the
/// kernel, so only the range component of the eigenvector condition is
/// imposed.
pub fn residual_corollary(u: &CorollaryUnknowns, kernel: &[Vec4], rho: &DensityMatrix) -> [f64; 16] {
    let pt = partial_transpose_b(rho.matrix());
    let first = (pt - partial_transpose_b(&outer(&u.psi, &u.psi)) * real(u.mu)) * u.phi;
    let p = partial_transpose_b(&outer(&u.phi, &u.phi));
    let second = project_out(&(p * u.psi + u.psi * real(u.alpha)), kernel);
    stack(&first, &second)
}

// ---------------------------------------------------------------------------
// damped least squares

struct LmResult {
    x: Vec<f64>,
    residual_norm: f64,
    iterations: usize,
}

/// Levenberg–Marquardt with a forward-difference Jacobian.
fn levenberg_marquardt<F>(f: F, x0: Vec<f64>, max_iters: usize, tol: f64, damping: f64) -> LmResult
where
    F: Fn(&[f64]) -> [f64; 16],
{
    let n = x0.len();
    let mut x = x0;
    let mut r = f(&x);
    let mut cost = norm16(&r);
    let mut lambda = damping;
    let mut iters = 0;
    let mut jac = DMatrix::<f64>::zeros(16, n);
    let mut need_jac = true;
    while iters < max_iters && cost > tol {
        iters += 1;
        if need_jac {
            for j in 0..n {
                let h = 1e-7 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                xp[j] += h;
                let rp = f(&xp);
                for i in 0..16 {
                    jac[(i, j)] = (rp[i] - r[i]) / h;
                }
            }
            need_jac = false;
        }
        let rv = DVector::from_column_slice(&r);
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * rv;
        let scale = jtj.diagonal().max().max(1e-300);
        let mut a = jtj.clone();
        for k in 0..n {
            a[(k, k)] += lambda * (jtj[(k, k)] + 1e-12 * scale);
        }
        let step = match a.cholesky() {
            Some(ch) => ch.solve(&(-jtr)),
            None => {
                lambda *= 10.0;
                if lambda > 1e16 {
                    break;
                }
                continue;
            }
        };
        let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
        let rn = f(&xn);
        let cn = norm16(&rn);
        if cn.is_finite() && cn < cost {
            let small_step = step.norm() <= 1e-15 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
            x = xn;
            r = rn;
            cost = cn;
            lambda = (lambda / 3.0).max(1e-15);
            need_jac = true;
            if small_step {
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e16 {
                break;
            }
        }
    }
    LmResult {
        x,
        residual_norm: cost,
        iterations: iters,
    }
}

/// Runs LM in rounds, re-pivoting the charts between rounds so no
/// coordinate blows up.
fn solve_with_charts<F>(
    layout: &mut Layout,
    vecs: Vec<Vec4>,
    reals: Vec<f64>,
    cfg: &SolverConfig,
    f: F,
) -> (Vec<Vec4>, Vec<f64>, f64)
where
    F: Fn(&[Vec4], &[f64]) -> [f64; 16],
{
    let mut vecs = vecs;
    let mut reals = reals;
    let mut remaining = cfg.max_iters;
    let mut damping = cfg.damping_init;
    let mut residual = f64::INFINITY;
    while remaining > 0 {
        let x0 = layout.encode(&vecs, &reals);
        let round = remaining.min(100);
        let lay = layout.clone();
        let res = levenberg_marquardt(
            |x| {
                let (v, r) = lay.decode(x);
                f(&v, &r)
            },
            x0,
            round,
            cfg.residual_tol,
            damping,
        );
        let (v, r) = layout.decode(&res.x);
        vecs = v;
        reals = r;
        residual = res.residual_norm;
        remaining -= round;
        if residual <= cfg.residual_tol || res.iterations < round {
            break;
        }
        damping = cfg.damping_init;
    }
    (vecs, reals, residual)
}

// ---------------------------------------------------------------------------
// multi-start

/// Extra restrictions on the rank-3 system.
#[derive(Debug, Clone, Default)]
pub struct Rank3Constraints {
    /// Require `c(φ) > C_TOL` for admissibility.
    pub entangled_phi: bool,
    /// `φ̃` is restricted to the orthogonal complement of these vectors.
    pub phi_tilde_perp: Vec<Vec4>,
    /// `φ` is restricted to the orthogonal complement of these vectors.
    pub phi_perp: Vec<Vec4>,
}

/// A hand-picked starting point, tried before the random ones.
#[derive(Debug, Clone, Copy)]
pub struct Rank3Start {
    pub phi_tilde: Vec4,
    pub phi: Vec4,
    pub alpha: f64,
    pub nu: f64,
}

fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_in(basis: &[Vec4], rng: &mut ChaCha8Rng) -> Vec4 {
    let mut v = Vec4::zeros();
    for b in basis {
        let z = C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng));
        v += b * z;
    }
    v.normalize()
}

/// Orthonormal basis of the complement of `perp` in C⁴.
pub fn complement_basis(perp: &[Vec4]) -> Vec<Vec4> {
    let mut taken: Vec<Vec4> = Vec::new();
    for p in perp {
        let mut v = *p;
        for t in &taken {
            v -= t * t.dotc(&v);
        }
        if v.norm() > 1e-10 {
            taken.push(v.normalize());
        }
    }
    let mut out = Vec::new();
    for k in 0..4 {
        let mut v = Vec4::zeros();
        v[k] = real(1.0);
        for t in taken.iter().chain(out.iter()) {
            v -= t * t.dotc(&v);
        }
        if v.norm() > 1e-6 {
            out.push(v.normalize());
        }
        if taken.len() + out.len() == 4 {
            break;
        }
    }
    out
}

fn run_starts<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn psd_ppt_ok(rho_s: &Mat4, slack: f64) -> bool {
    let psd = min_eigenvalue(rho_s).map(|v| v >= -slack).unwrap_or(false);
    psd && min_eigenvalue(&partial_transpose_b(rho_s))
        .map(|v| v >= -slack)
        .unwrap_or(false)
}

fn same_solution(a: &CandidateSolution, b: &CandidateSolution) -> bool {
    const TOL: f64 = 1e-6;
    (1.0 - a.psi.overlap(&b.psi)).abs() < TOL
        && (1.0 - a.phi.overlap(&b.phi)).abs() < TOL
        && (a.alpha - b.alpha).abs() < TOL
        && (a.nu - b.nu).abs() < TOL
        && (a.lambda - b.lambda).abs() < TOL
}

/// Sort by residual (ties: start index) and drop duplicates.
fn merge(mut cands: Vec<CandidateSolution>) -> Vec<CandidateSolution> {
    cands.sort_by(|a, b| {
        a.residual_norm
            .total_cmp(&b.residual_norm)
            .then(a.start_index.cmp(&b.start_index))
    });
    let mut out: Vec<CandidateSolution> = Vec::new();
    for c in cands {
        if !out.iter().any(|o| same_solution(o, &c)) {
            out.push(c);
        }
    }
    out
}

fn rank3_candidate(
    rho: &DensityMatrix,
    u: &Rank3Unknowns,
    residual_norm: f64,
    start_index: usize,
    cfg: &SolverConfig,
    cons: &Rank3Constraints,
) -> Option<CandidateSolution> {
    let r = rho.matrix();
    let psi_raw = r * u.phi_tilde;
    let n = u.phi_tilde.dotc(&psi_raw).re;
    if !(n > 0.0) || psi_raw.norm() == 0.0 {
        return None;
    }
    let mu = psi_raw.norm_squared() / n;
    let psi = PureState::normalized(psi_raw).ok()?.phase_fixed();
    let lambda = 1.0 - mu;
    let rho_s = if lambda > 0.0 {
        (r - psi.projector() * real(mu)) / real(lambda)
    } else {
        Mat4::identity() * real(0.25)
    };
    let phi = PureState::normalized(u.phi).ok()?.phase_fixed();
    let phi_tilde = PureState::normalized(u.phi_tilde).ok()?.phase_fixed();
    let admissible = residual_norm <= cfg.residual_tol
        && u.alpha >= cfg.alpha_min
        && u.nu >= cfg.nu_min
        && lambda > 0.0
        && psi.concurrence() > C_TOL
        && (!cons.entangled_phi || phi.concurrence() > C_TOL)
        && psd_ppt_ok(&rho_s, cfg.psd_slack);
    Some(CandidateSolution {
        phi_tilde,
        phi,
        alpha: u.alpha,
        nu: u.nu,
        psi,
        lambda,
        rho_s,
        residual_norm,
        admissible,
        start_index,
    })
}

/// Solve the rank-3 system from `cfg.n_starts` seeded starts.
pub fn solve_multistart(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    constraint_c_phi: bool,
) -> Vec<CandidateSolution> {
    let cons = Rank3Constraints {
        entangled_phi: constraint_c_phi,
        ..Default::default()
    };
    solve_multistart_with(rho, cfg, &cons, &[])
}

/// [`solve_multistart`] with orthogonality constraints and extra starts.
/// Hint starts take indices `0..hints.len()`, random starts follow.
pub fn solve_multistart_with(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    cons: &Rank3Constraints,
    hints: &[Rank3Start],
) -> Vec<CandidateSolution> {
    let tilde_basis = complement_basis(&cons.phi_tilde_perp);
    let phi_basis = complement_basis(&cons.phi_perp);
    let project = |v: &Vec4, basis: &[Vec4]| -> Vec4 {
        let p = basis.iter().fold(Vec4::zeros(), |acc, b| acc + b * b.dotc(v));
        if p.norm() > 1e-12 {
            p.normalize()
        } else {
            basis[0]
        }
    };
    let total = hints.len() + cfg.n_starts;
    let results = run_starts(total, |i| {
        let (phi_tilde0, phi0, alpha0, nu0) = if i < hints.len() {
            let h = hints[i];
            (
                project(&h.phi_tilde, &tilde_basis),
                project(&h.phi, &phi_basis),
                h.alpha,
                h.nu,
            )
        } else {
            let mut rng = start_rng(cfg.seed, i - hints.len());
            (
                random_in(&tilde_basis, &mut rng),
                random_in(&phi_basis, &mut rng),
                rng.random::<f64>() * 0.5,
                rng.random::<f64>(),
            )
        };
        let mut layout = Layout {
            charts: vec![
                Chart::subspace(tilde_basis.clone()),
                Chart::subspace(phi_basis.clone()),
            ],
            n_real: 2,
        };
        let (vecs, reals, res) = solve_with_charts(
            &mut layout,
            vec![phi_tilde0, phi0],
            vec![alpha0, nu0],
            cfg,
            |v, r| {
                residual_rank3(
                    &Rank3Unknowns {
                        phi_tilde: v[0],
                        phi: v[1],
                        alpha: r[0],
                        nu: r[1],
                    },
                    rho,
                )
            },
        );
        let u = Rank3Unknowns {
            phi_tilde: vecs[0],
            phi: vecs[1],
            alpha: reals[0],
            nu: reals[1],
        };
        rank3_candidate(rho, &u, res, i, cfg, cons)
    });
    merge(results.into_iter().flatten().collect())
}

/// A hand-picked starting point for the pinned-kernel system.
#[derive(Debug, Clone, Copy)]
pub struct CorollaryStart {
    pub psi: Vec4,
    pub phi: Vec4,
    pub alpha: f64,
    pub mu: f64,
}

/// Solve [`residual_corollary`] for rank-deficient `ρ`. `ψ` is searched in
/// the range of `ρ`; `φ̃` is reported as the first kernel vector and `ν`
/// as zero.
pub fn solve_corollary_multistart(
    rho: &DensityMatrix,
    cfg: &SolverConfig,
    hints: &[CorollaryStart],
) -> Result<Vec<CandidateSolution>, StateError> {
    let eig = hermitian_eig(rho.matrix())?;
    let (kernel, range): (Vec<(f64, Vec4)>, Vec<(f64, Vec4)>) = eig
        .values
        .iter()
        .copied()
        .zip(eig.vectors.iter().copied())
        .partition(|(v, _)| *v <= RANK_TOL);
    let kernel: Vec<Vec4> = kernel.into_iter().map(|(_, k)| k).collect();
    let range: Vec<Vec4> = range.into_iter().map(|(_, k)| k).collect();
    if kernel.is_empty() {
        return Ok(Vec::new());
    }
    let phi_tilde = kernel[0];
    if range.len() < 2 {
        return Ok(Vec::new());
    }
    let full = Chart::full().basis;
    let project = |v: &Vec4| -> Vec4 {
        let p = range.iter().fold(Vec4::zeros(), |acc, b| acc + b * b.dotc(v));
        if p.norm() > 1e-12 {
            p.normalize()
        } else {
            range[0]
        }
    };
    let total = hints.len() + cfg.n_starts;
    let cons = Rank3Constraints {
        entangled_phi: true,
        ..Default::default()
    };
    let results = run_starts(total, |i| {
        let (psi0, phi0, alpha0, mu0) = if i < hints.len() {
            let h = hints[i];
            (project(&h.psi), h.phi, h.alpha, h.mu)
        } else {
            let mut rng = start_rng(cfg.seed.wrapping_add(0x5eed), i - hints.len());
            (
                random_in(&range, &mut rng),
                random_in(&full, &mut rng),
                rng.random::<f64>() * 0.5,
                rng.random::<f64>(),
            )
        };
        let mut layout = Layout {
            charts: vec![Chart::subspace(range.clone()), Chart::full()],
            n_real: 2,
        };
        let (vecs, reals, res) = solve_with_charts(
            &mut layout,
            vec![psi0, phi0],
            vec![alpha0, mu0],
            cfg,
            |v, r| {
                residual_corollary(
                    &CorollaryUnknowns {
                        psi: v[0],
                        phi: v[1],
                        alpha: r[0],
                        mu: r[1],
                    },
                    &kernel,
                    rho,
                )
            },
        );
        let psi = PureState::normalized(vecs[0]).ok()?.phase_fixed();
        let phi = PureState::normalized(vecs[1]).ok()?.phase_fixed();
        let mu = reals[1];
        let lambda = 1.0 - mu;
        let rho_s = if lambda > 0.0 {
            (rho.matrix() - psi.projector() * real(mu)) / real(lambda)
        } else {
            Mat4::identity() * real(0.25)
        };
        let admissible = res <= cfg.residual_tol
            && reals[0] >= cfg.alpha_min
            && (0.0..1.0).contains(&lambda)
            && psi.concurrence() > C_TOL
            && (!cons.entangled_phi || phi.concurrence() > C_TOL)
            && psd_ppt_ok(&rho_s, cfg.psd_slack);
        Some(CandidateSolution {
            phi_tilde: PureState::normalized(phi_tilde).ok()?.phase_fixed(),
            phi,
            alpha: reals[0],
            nu: 0.0,
            psi,
            lambda,
            rho_s,
            residual_norm: res,
            admissible,
            start_index: i,
        })
    });
    Ok(merge(results.into_iter().flatten().collect()))
}

// ---------------------------------------------------------------------------
// direct-maximization oracle

#[derive(Debug, Clone, Serialize)]
pub struct OracleConfig {
    pub random_starts: usize,
    pub refine_steps: usize,
    /// Number of best random starts that get refined.
    pub refine_keep: usize,
    pub bisection_tol: f64,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            random_starts: 400,
            refine_steps: 400,
            refine_keep: 4,
            bisection_tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub lambda: f64,
    pub psi: PureState,
    pub evaluations: usize,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("state is not entangled")]
    NotEntangled,
    #[error("no pure state admits a separable remainder")]
    NoFeasiblePoint,
    #[error(transparent)]
    State(#[from] StateError),
}

/// Whether `ρ − μ|ψ⟩⟨ψ|` is positive and has positive partial transpose.
pub fn remainder_feasible(rho: &Mat4, psi: &Vec4, mu: f64, tol: f64) -> bool {
    let rem = rho - outer(psi, psi) * real(mu);
    is_psd_fast(&rem, tol) && is_psd_fast(&partial_transpose_b(&rem), tol)
}

/// Smallest `μ` for which `ρ − μ|ψ⟩⟨ψ|` is PSD and PPT.
///
/// Both conditions are convex in `μ`, so the feasible set is an interval.
/// The PSD part holds on `[0, μ_psd]`; the PPT part is an interval whose
/// lower end is what we want. When no `μ` works, the error carries the
/// smallest PPT deficit over `[0, μ_psd]`.
pub fn min_pure_weight(rho: &Mat4, psi: &Vec4, tol: f64) -> Result<f64, f64> {
    let slack = PSD_TOL;
    let at = |mu: f64| rho - outer(psi, psi) * real(mu);
    let psd = |mu: f64| is_psd_fast(&at(mu), slack);
    let ppt = |mu: f64| is_psd_fast(&partial_transpose_b(&at(mu)), slack);

    let (mut lo, mut hi) = (0.0, 1.0);
    if psd(1.0) {
        lo = 1.0;
    } else {
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if psd(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let mu_psd = lo;
    if ppt(0.0) {
        return Ok(0.0);
    }
    let feasible_top = if ppt(mu_psd) {
        mu_psd
    } else {
        // λ_min of the partial transpose is concave in μ: ternary search for its peak
        let g = |mu: f64| {
            min_eigenvalue(&partial_transpose_b(&at(mu))).unwrap_or(f64::NEG_INFINITY)
        };
        let (mut a, mut b) = (0.0, mu_psd);
        while b - a > tol.max(1e-12) {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if g(m1) < g(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        let peak = 0.5 * (a + b);
        if !ppt(peak) {
            return Err((-g(peak)).max(0.0));
        }
        peak
    };
    let (mut lo, mut hi) = (0.0, feasible_top);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if ppt(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Log-barrier problem in the unnormalized pure part `w = √μ·ψ`, written in
/// coordinates of the range of `ρ`:
/// minimize `‖w‖² − t·(log(1 − w†ρ⁺w) + log det (ρ − ww†)^{T_B})`.
struct Barrier<'a> {
    rho: &'a Mat4,
    range: &'a [Vec4],
    eigs: &'a [f64],
}

impl Barrier<'_> {
    fn dim(&self) -> usize {
        2 * self.range.len()
    }

    fn direction(&self, k: usize) -> Vec4 {
        let b = self.range[k / 2];
        if k % 2 == 0 {
            b
        } else {
            b * C64::new(0.0, 1.0)
        }
    }

    fn w(&self, z: &[f64]) -> Vec4 {
        let mut v = Vec4::zeros();
        for (i, b) in self.range.iter().enumerate() {
            v += b * C64::new(z[2 * i], z[2 * i + 1]);
        }
        v
    }

    fn q(&self, z: &[f64]) -> f64 {
        (0..self.range.len())
            .map(|i| (z[2 * i] * z[2 * i] + z[2 * i + 1] * z[2 * i + 1]) / self.eigs[i])
            .sum()
    }

    fn pt_block(&self, w: &Vec4) -> Mat4 {
        partial_transpose_b(&(self.rho - outer(w, w)))
    }

    fn strictly_feasible(&self, z: &[f64]) -> bool {
        self.q(z) < 1.0 && is_psd_fast(&self.pt_block(&self.w(z)), 0.0)
    }

    fn value(&self, z: &[f64], t: f64) -> f64 {
        if !self.strictly_feasible(z) {
            return f64::INFINITY;
        }
        let det = self.pt_block(&self.w(z)).determinant().re;
        if !(det > 0.0) {
            return f64::INFINITY;
        }
        let norm2: f64 = z.iter().map(|x| x * x).sum();
        norm2 - t * ((1.0 - self.q(z)).ln() + det.ln())
    }

    fn grad_hess(&self, z: &[f64], t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.dim();
        let w = self.w(z);
        let m = self.pt_block(&w);
        let minv = m.try_inverse()?;
        let q = self.q(z);
        let s = 1.0 - q;
        let dirs: Vec<Vec4> = (0..n).map(|k| self.direction(k)).collect();
        let dm: Vec<Mat4> = dirs
            .iter()
            .map(|d| -partial_transpose_b(&(outer(d, &w) + outer(&w, d))))
            .collect();
        let md: Vec<Mat4> = dm.iter().map(|d| minv * d).collect();
        let dq: Vec<f64> = (0..n).map(|k| 2.0 * z[k] / self.eigs[k / 2]).collect();

        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for k in 0..n {
            g[k] = 2.0 * z[k] + t * (dq[k] / s - md[k].trace().re);
            for l in k..n {
                let d2m = -partial_transpose_b(&(outer(&dirs[k], &dirs[l]) + outer(&dirs[l], &dirs[k])));
                let logdet_h = -(md[k] * md[l]).trace().re + (minv * d2m).trace().re;
                let d2q = if k == l { 2.0 / self.eigs[k / 2] } else { 0.0 };
                let psd_h = d2q / s + dq[k] * dq[l] / (s * s);
                let v = if k == l { 2.0 } else { 0.0 } + t * (psd_h - logdet_h);
                h[(k, l)] = v;
                h[(l, k)] = v;
            }
        }
        Some((g, h))
    }

    /// Damped Newton on the barrier for a decreasing sequence of `t`.
    fn minimize(&self, mut z: Vec<f64>, t0: f64, t_min: f64) -> Vec<f64> {
        let n = self.dim();
        let mut t = t0;
        while t >= t_min {
            for _ in 0..60 {
                let Some((g, h)) = self.grad_hess(&z, t) else {
                    break;
                };
                let f0 = self.value(&z, t);
                let mut tau = 0.0;
                let step = loop {
                    let mut a = h.clone();
                    for k in 0..n {
                        a[(k, k)] += tau;
                    }
                    if let Some(ch) = a.cholesky() {
                        break Some(ch.solve(&(-&g)));
                    }
                    tau = if tau == 0.0 { 1e-10 * h.diagonal().abs().max().max(1.0) } else { tau * 10.0 };
                    if tau > 1e20 {
                        break None;
                    }
                };
                let Some(p) = step else { break };
                let slope = g.dot(&p);
                if -slope < 1e-20 {
                    break;
                }
                let mut a = 1.0;
                let mut moved = false;
                for _ in 0..60 {
                    let zn: Vec<f64> = z.iter().zip(p.iter()).map(|(x, d)| x + a * d).collect();
                    if self.value(&zn, t) <= f0 + 1e-4 * a * slope {
                        z = zn;
                        moved = true;
                        break;
                    }
                    a *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            t *= 0.1;
        }
        z
    }
}

/// Direct maximization of the separable weight over the pure part.
///
/// Random search over pure states in the range of `ρ`, then a log-barrier
/// Newton refinement of the most promising points. Rank-2 states are solved
/// exactly over mixtures of the product vectors in the range. Never uses
/// `Y`, the concurrence, or the residual systems above.
pub fn ls_oracle(rho: &DensityMatrix, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    let m = *rho.matrix();
    if min_eigenvalue(&partial_transpose_b(&m)).map_err(StateError::from)? >= -PSD_TOL {
        return Err(OracleError::NotEntangled);
    }
    let eig = hermitian_eig(&m).map_err(StateError::from)?;
    let (eigs, range): (Vec<f64>, Vec<Vec4>) = eig
        .values
        .iter()
        .zip(eig.vectors.iter())
        .filter(|(v, _)| **v > RANK_TOL)
        .map(|(v, vec)| (*v, *vec))
        .unzip();
    let dim = range.len();
    if dim == 1 {
        return Ok(OracleResult {
            lambda: 0.0,
            psi: PureState::normalized(range[0])?.phase_fixed(),
            evaluations: 0,
        });
    }
    if dim == 2 {
        // a separable state supported on a two-dimensional subspace is a
        // mixture of the product vectors in it, so this case is solved
        // exactly; its optimum sits at isolated points a search would miss
        let (mu, psi) = rank2_product_mixture(&m, &range, &eigs).ok_or(OracleError::NoFeasiblePoint)?;
        return Ok(OracleResult {
            lambda: 1.0 - mu,
            psi: PureState::normalized(psi)?.phase_fixed(),
            evaluations: 1,
        });
    }
    let to_state = |x: &[C64]| -> Vec4 {
        let mut v = Vec4::zeros();
        for (b, z) in range.iter().zip(x) {
            v += b * *z;
        }
        v.normalize()
    };
    let objective = |x: &[C64]| -> f64 {
        // infeasible points rank above every feasible one, by deficit
        match min_pure_weight(&m, &to_state(x), cfg.bisection_tol) {
            Ok(mu) => mu,
            Err(deficit) => 1.0 + deficit,
        }
    };
    let mut evaluations = 0usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let gauss = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..dim)
            .map(|_| C64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
            .collect()
    };
    let normalize = |x: &mut Vec<C64>| {
        let n = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in x.iter_mut() {
            *z /= n;
        }
    };

    let mut pool: Vec<(f64, Vec<C64>)> = Vec::with_capacity(cfg.random_starts);
    for _ in 0..cfg.random_starts {
        let mut x = gauss(&mut rng);
        normalize(&mut x);
        let f = objective(&x);
        evaluations += 1;
        pool.push((f, x));
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    pool.truncate(cfg.refine_keep.max(1));

    let barrier = Barrier {
        rho: &m,
        range: &range,
        eigs: &eigs,
    };
    let mut best: Option<(f64, Vec4)> = None;
    for (f0, x0) in pool {
        // pattern search until feasible; the barrier takes it from there
        let (mut fx, mut x) = (f0, x0);
        let mut step = 0.3;
        for _ in 0..cfg.refine_steps {
            if fx <= 1.0 || step < 1e-9 {
                break;
            }
            let mut improved: Option<(f64, Vec<C64>)> = None;
            for _ in 0..(2 * dim) {
                let d = gauss(&mut rng);
                for sign in [1.0, -1.0] {
                    let mut y: Vec<C64> =
                        x.iter().zip(&d).map(|(a, b)| a + b * (sign * step)).collect();
                    normalize(&mut y);
                    let fy = objective(&y);
                    evaluations += 1;
                    if fy < improved.as_ref().map_or(fx, |i| i.0) {
                        improved = Some((fy, y));
                    }
                }
            }
            match improved {
                Some((fy, y)) => {
                    fx = fy;
                    x = y;
                    step = (step * 1.5).min(0.5);
                }
                None => step *= 0.6,
            }
        }
        if fx > 1.0 {
            continue;
        }
        let mut cand = (fx, to_state(&x));

        // strictly feasible w on the segment above the smallest weight
        let mu_hi = (0..60)
            .map(|k| fx + (1.0 - fx) * 0.5f64.powi(k))
            .find(|&mu| {
                let z = coords(&range, &(cand.1 * real(mu.sqrt())));
                barrier.strictly_feasible(&z)
            });
        if let Some(mu0) = mu_hi {
            let z0 = coords(&range, &(cand.1 * real(mu0.sqrt())));
            let z = barrier.minimize(z0, 1e-3, 1e-11);
            let w = barrier.w(&z);
            if w.norm() > 0.0 {
                let psi = w.normalize();
                if let Ok(mu) = min_pure_weight(&m, &psi, cfg.bisection_tol) {
                    evaluations += 1;
                    if mu < cand.0 {
                        cand = (mu, psi);
                    }
                }
            }
        }
        if best.as_ref().is_none_or(|b| cand.0 < b.0) {
            best = Some(cand);
        }
    }
    if dim == 3 {
        let kernel: Vec<Vec4> = eig
            .values
            .iter()
            .zip(eig.vectors.iter())
            .filter(|(v, _)| **v <= RANK_TOL)
            .map(|(_, k)| *k)
            .collect();
        if let Some(p) = product_vectors_in(&kernel).first() {
            if let Some(cand) = product_kernel_weight(&m, p, cfg) {
                evaluations += 1;
                if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                    best = Some(cand);
                }
            }
        }
    }
    let (mu, psi) = best.ok_or(OracleError::NoFeasiblePoint)?;
    if mu > 1.0 {
        return Err(OracleError::NoFeasiblePoint);
    }
    Ok(OracleResult {
        lambda: 1.0 - mu,
        psi: PureState::normalized(psi)?.phase_fixed(),
        evaluations,
    })
}

/// Local unitary `U⊗V` taking the product vector `p` to `|00⟩`.
fn frame_of_product(p: &Vec4) -> Mat4 {
    let amp = [[p[0], p[1]], [p[2], p[3]]];
    let col = (0..2)
        .max_by(|&a, &b| {
            let na = amp[0][a].norm_sqr() + amp[1][a].norm_sqr();
            let nb = amp[0][b].norm_sqr() + amp[1][b].norm_sqr();
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let row = (0..2)
        .max_by(|&a, &b| {
            let na = amp[a][0].norm_sqr() + amp[a][1].norm_sqr();
            let nb = amp[b][0].norm_sqr() + amp[b][1].norm_sqr();
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let unit = |x: C64, y: C64| {
        let n = (x.norm_sqr() + y.norm_sqr()).sqrt();
        (x / n, y / n)
    };
    let (e0, e1) = unit(amp[0][col], amp[1][col]);
    let (f0, f1) = unit(amp[row][0], amp[row][1]);
    let u = Mat2::new(e0.conj(), e1.conj(), -e1, e0);
    let v = Mat2::new(f0.conj(), f1.conj(), -f1, f0);
    crate::mat4::kron(&u, &v)
}

/// Damped Newton with finite-difference derivatives on a barrier
/// function, for a decreasing sequence of `t`. `f` returns infinity
/// outside the strictly feasible set.
fn fd_barrier_newton(f: impl Fn(&[f64], f64) -> f64, mut z: Vec<f64>, t0: f64, t_min: f64) -> Vec<f64> {
    let n = z.len();
    let mut t = t0;
    while t >= t_min {
        for _ in 0..80 {
            let f0 = f(&z, t);
            let scale = z.iter().fold(1e-3f64, |a, x| a.max(x.abs()));
            let h = 1e-5 * scale;
            let shifted = |pairs: &[(usize, f64)]| {
                let mut y = z.clone();
                for &(k, d) in pairs {
                    y[k] += d;
                }
                f(&y, t)
            };
            let mut g = DVector::zeros(n);
            let mut hm = DMatrix::zeros(n, n);
            for k in 0..n {
                let (fp, fm) = (shifted(&[(k, h)]), shifted(&[(k, -h)]));
                g[k] = (fp - fm) / (2.0 * h);
                hm[(k, k)] = (fp - 2.0 * f0 + fm) / (h * h);
                for l in 0..k {
                    let v = (shifted(&[(k, h), (l, h)]) - shifted(&[(k, h), (l, -h)])
                        - shifted(&[(k, -h), (l, h)])
                        + shifted(&[(k, -h), (l, -h)]))
                        / (4.0 * h * h);
                    hm[(k, l)] = v;
                    hm[(l, k)] = v;
                }
            }
            if !g.iter().chain(hm.iter()).all(|x| x.is_finite()) {
                break;
            }
            let mut tau = 0.0;
            let step = loop {
                let mut a = hm.clone();
                for k in 0..n {
                    a[(k, k)] += tau;
                }
                if let Some(ch) = a.cholesky() {
                    break Some(ch.solve(&(-&g)));
                }
                tau = if tau == 0.0 { 1e-10 * hm.diagonal().abs().max().max(1.0) } else { tau * 10.0 };
                if tau > 1e20 {
                    break None;
                }
            };
            let Some(p) = step else { break };
            let slope = g.dot(&p);
            if -slope < 1e-18 {
                break;
            }
            let mut a = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let zn: Vec<f64> = z.iter().zip(p.iter()).map(|(x, d)| x + a * d).collect();
                if f(&zn, t) <= f0 + 1e-4 * a * slope {
                    z = zn;
                    moved = true;
                    break;
                }
                a *= 0.5;
            }
            if !moved {
                break;
            }
        }
        t *= 0.1;
    }
    z
}

/// Rank-3 `ρ` whose kernel is the product vector `p`.
///
/// In a local frame where `p = |00⟩`, the partially transposed remainder
/// has a zero diagonal entry, so its row must vanish: with `w = √μ·ψ`
/// this forces `w₀₁·w₁₀* = ρ₀₁,₁₀`. The feasible set has no interior in
/// generic coordinates, so `w₁₀` is eliminated and the remaining 3×3
/// block is handled by a barrier.
fn product_kernel_weight(m: &Mat4, p: &Vec4, cfg: &OracleConfig) -> Option<(f64, Vec4)> {
    let l = frame_of_product(p);
    let r = crate::mat4::hermitize(&(l * m * l.adjoint()));
    let eig = hermitian_eig(&r).ok()?;
    let rinv = eig.map_values(|v| if v > RANK_TOL { 1.0 / v } else { 0.0 });
    let target = r[(1, 2)];
    let branches: Vec<u8> = if target.norm() > 1e-12 { vec![0] } else { vec![1, 2] };

    let mut best: Option<(f64, Vec4)> = None;
    for branch in branches {
        let w_of = |z: &[f64]| -> Vec4 {
            let a = C64::new(z[0], z[1]);
            let b = C64::new(z[2], z[3]);
            match branch {
                0 => Vec4::new(real(0.0), a, (target / a).conj(), b),
                1 => Vec4::new(real(0.0), a, real(0.0), b),
                _ => Vec4::new(real(0.0), real(0.0), a, b),
            }
        };
        let block = |w: &Vec4| -> Mat4 {
            let mut b = partial_transpose_b(&(r - outer(w, w)));
            for k in 0..4 {
                b[(0, k)] = real(0.0);
                b[(k, 0)] = real(0.0);
            }
            b[(0, 0)] = real(1.0);
            b
        };
        let q = |w: &Vec4| w.dotc(&(rinv * w)).re;
        let barrier = |z: &[f64], t: f64| -> f64 {
            let w = w_of(z);
            let s = 1.0 - q(&w);
            let b = block(&w);
            if !(s > 0.0) || !w.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
                return f64::INFINITY;
            }
            if !is_psd_fast(&b, 0.0) {
                return f64::INFINITY;
            }
            let det = b.determinant().re;
            if !(det > 0.0) {
                return f64::INFINITY;
            }
            w.norm_squared() - t * (s.ln() + det.ln())
        };
        let penalty = |z: &[f64]| -> f64 {
            let w = w_of(z);
            let deficit = (q(&w) - 1.0).max(0.0)
                + (-min_eigenvalue(&block(&w)).unwrap_or(-1.0)).max(0.0);
            if !deficit.is_finite() {
                f64::INFINITY
            } else if deficit > 0.0 {
                1.0 + deficit
            } else {
                w.norm_squared()
            }
        };

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_0000 ^ branch as u64);
        let scale = [r[(1, 1)].re.sqrt(), r[(3, 3)].re.sqrt()];
        let mut pool: Vec<(f64, Vec<f64>)> = (0..cfg.random_starts)
            .map(|_| {
                let z: Vec<f64> = (0..4)
                    .map(|k| scale[k / 2] * { let g: f64 = StandardNormal.sample(&mut rng); g })
                    .collect();
                (penalty(&z), z)
            })
            .collect();
        pool.sort_by(|a, b| a.0.total_cmp(&b.0));
        pool.truncate(cfg.refine_keep.max(1));

        for (mut fz, mut z) in pool {
            let mut step = 0.3 * scale[0].max(scale[1]);
            for _ in 0..cfg.refine_steps {
                if fz <= 1.0 || step < 1e-12 {
                    break;
                }
                let mut improved: Option<(f64, Vec<f64>)> = None;
                for _ in 0..8 {
                    let d: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
                    for sign in [1.0, -1.0] {
                        let y: Vec<f64> = z.iter().zip(&d).map(|(a, b)| a + sign * step * b).collect();
                        let fy = penalty(&y);
                        if fy < improved.as_ref().map_or(fz, |i| i.0) {
                            improved = Some((fy, y));
                        }
                    }
                }
                match improved {
                    Some((fy, y)) => {
                        fz = fy;
                        z = y;
                        step *= 1.5;
                    }
                    None => step *= 0.6,
                }
            }
            if !barrier(&z, 1e-3).is_finite() {
                continue;
            }
            let z = fd_barrier_newton(&barrier, z, 1e-3, 1e-10);
            let w = w_of(&z);
            let mu = w.norm_squared();
            if best.as_ref().is_none_or(|b| mu < b.0) {
                best = Some((mu, l.adjoint() * w / real(mu.sqrt())));
            }
        }
    }
    best
}

/// Largest `a + b` with `ρ − a|p₁⟩⟨p₁| − b|p₂⟩⟨p₂| ⪰ 0`, where `p₁, p₂` are
/// the product vectors in the two-dimensional range of `ρ`. Returns the
/// pure weight `1 − a − b` and the pure part.
fn rank2_product_mixture(m: &Mat4, range: &[Vec4], eigs: &[f64]) -> Option<(f64, Vec4)> {
    let products = product_vectors_in(range);
    if products.is_empty() {
        return None;
    }
    let to2 = |v: &Vec4| [range[0].dotc(v), range[1].dotc(v)];
    let ps: Vec<[C64; 2]> = products.iter().map(to2).collect();
    // largest t with A − t·pp† ⪰ 0 for a 2×2 positive definite A: 1/⟨p|A⁻¹|p⟩
    let reach = |a: [[C64; 2]; 2], p: &[C64; 2]| -> f64 {
        let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).re;
        if !(det > 0.0) {
            return 0.0;
        }
        let quad = (p[0].conj() * a[1][1] * p[0] - p[0].conj() * a[0][1] * p[1]
            - p[1].conj() * a[1][0] * p[0]
            + p[1].conj() * a[0][0] * p[1])
            .re
            / det;
        1.0 / quad
    };
    let sub = |a: [[C64; 2]; 2], p: &[C64; 2], t: f64| -> [[C64; 2]; 2] {
        let mut out = a;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] -= p[i] * p[j].conj() * t;
            }
        }
        out
    };
    let r2 = [[real(eigs[0]), real(0.0)], [real(0.0), real(eigs[1])]];
    let a_max = reach(r2, &ps[0]);
    let total = |a: f64| -> f64 {
        let a = a.min(a_max * (1.0 - 1e-15));
        a + ps.get(1).map_or(0.0, |p2| reach(sub(r2, &ps[0], a), p2))
    };
    // the feasible (a, b) region is convex, so a + b(a) is concave
    let (mut lo, mut hi) = (0.0, a_max);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if total(m1) < total(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for cand in [0.0, a_max] {
        if total(cand) > total(a) {
            a = cand;
        }
    }
    let b = total(a) - a.min(a_max * (1.0 - 1e-15));
    let lambda = total(a);
    if !(lambda < 1.0) {
        return None;
    }
    let mut rem = *m - outer(&products[0], &products[0]) * real(a);
    if ps.len() > 1 {
        rem -= outer(&products[1], &products[1]) * real(b);
    }
    let top = hermitian_eig(&crate::mat4::hermitize(&rem)).ok()?;
    Some((1.0 - lambda, top.vectors[3]))
}

fn coords(range: &[Vec4], w: &Vec4) -> Vec<f64> {
    range
        .iter()
        .flat_map(|b| {
            let z = b.dotc(w);
            [z.re, z.im]
        })
        .collect()
}

/// Product vectors in the span of one or two vectors (up to two of them).
/// Returns an empty list when the span is entirely product or has none.
pub fn product_vectors_in(span: &[Vec4]) -> Vec<Vec4> {
    match span {
        [k] => {
            if concurrence_raw(k) < C_TOL * k.norm_squared() {
                vec![k.normalize()]
            } else {
                Vec::new()
            }
        }
        [k1, k2] => {
            // det of the amplitude matrix of x·k1 + k2 is a quadratic in x
            let det = |v: &Vec4| v[0] * v[3] - v[1] * v[2];
            let mixed = k1[0] * k2[3] + k2[0] * k1[3] - k1[1] * k2[2] - k2[1] * k1[2];
            let (a, b, cc) = (det(k1), mixed, det(k2));
            let mut out = Vec::new();
            let tiny = 1e-12;
            if a.norm() < tiny {
                out.push(k1.normalize());
                if b.norm() > tiny {
                    out.push((k1 * (-cc / b) + k2).normalize());
                } else if cc.norm() < tiny {
                    return Vec::new();
                }
            } else {
                let disc = (b * b - a * cc * 4.0).sqrt();
                for s in [1.0, -1.0] {
                    let x = (-b + disc * s) / (a * 2.0);
                    out.push((k1 * x + k2).normalize());
                }
                if disc.norm() < tiny {
                    out.pop();
                }
            }
            out
        }
        _ => Vec::new(),
    }
}
