//! Dense complex linear algebra for 4×4 (and 2×2) matrices.
//!
//! Hermitian problems go through nalgebra's tridiagonal QR. The general
//! eigenproblem uses a small Hessenberg QR iteration with Wilkinson shifts
//! followed by inverse iteration for the eigenvectors.

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;
pub type Mat4 = Matrix4<C64>;
pub type Mat2 = Matrix2<C64>;
pub type Vec4 = Vector4<C64>;

/// Residual bound for refined eigenpairs.
pub const EIG_TOL: f64 = 1e-10;
/// Slack for positive-semidefiniteness decisions.
pub const PSD_TOL: f64 = 1e-10;
/// Two eigenvalues closer than this (relative to the trace) are degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Allowed deviation from Hermiticity, relative to the largest entry.
pub const HERMITIAN_TOL: f64 = 1e-12;

const MAX_QR_ITERS: usize = 200;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max |m - m^dagger| = {0:e})")]
    NotHermitian(f64),
    #[error("eigensolver did not converge: {0}")]
    ConvergenceFailure(&'static str),
    #[error("matrix has non-finite entries")]
    NonFinite,
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Σ = σ₂ ⊗ σ₂ in the |00⟩,|01⟩,|10⟩,|11⟩ basis.
pub fn sigma_yy() -> Mat4 {
    let mut s = Mat4::zeros();
    s[(0, 3)] = real(-1.0);
    s[(1, 2)] = real(1.0);
    s[(2, 1)] = real(1.0);
    s[(3, 0)] = real(-1.0);
    s
}

/// The Pauli matrix σ₂.
pub fn sigma_y() -> Mat2 {
    Mat2::new(real(0.0), c(0.0, -1.0), c(0.0, 1.0), real(0.0))
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// |u⟩⟨v|
pub fn outer(u: &Vec4, v: &Vec4) -> Mat4 {
    u * v.adjoint()
}

pub fn is_finite(m: &Mat4) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest entrywise deviation |m - m†|.
pub fn hermitian_deviation(m: &Mat4) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in i..4 {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitize(m: &Mat4) -> Mat4 {
    (m + m.adjoint()) * real(0.5)
}

fn max_abs(m: &Mat4) -> f64 {
    m.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()))
}

fn check_hermitian(m: &Mat4) -> Result<Mat4, LinalgError> {
    if !is_finite(m) {
        return Err(LinalgError::NonFinite);
    }
    let dev = hermitian_deviation(m);
    if dev > HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(LinalgError::NotHermitian(dev));
    }
    Ok(hermitize(m))
}

/// Rotate `v` so that its first component of largest modulus is real and
/// non-negative.
pub fn fix_phase(v: &Vec4) -> Vec4 {
    let max = v.iter().fold(0.0, |acc: f64, z| acc.max(z.norm()));
    if max == 0.0 {
        return *v;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-10))
        .unwrap_or(0);
    let z = v[pivot];
    v * (z.conj() / z.norm())
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: [f64; 4],
    /// Orthonormal, phase-fixed eigenvectors matching `values`.
    pub vectors: [Vec4; 4],
}

impl HermitianEig {
    pub fn min(&self) -> (f64, Vec4) {
        (self.values[0], self.vectors[0])
    }

    /// Rebuild `V diag(f(values)) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Mat4 {
        let mut out = Mat4::zeros();
        for (val, vec) in self.values.iter().zip(self.vectors.iter()) {
            out += outer(vec, vec) * real(f(*val));
        }
        out
    }
}

pub fn hermitian_eig(m: &Mat4) -> Result<HermitianEig, LinalgError> {
    let h = check_hermitian(m)?;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or(LinalgError::ConvergenceFailure("hermitian eigensolver"))?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = std::array::from_fn(|k| eig.eigenvalues[order[k]]);
    let vectors = std::array::from_fn(|k| {
        let col: Vec4 = eig.eigenvectors.column(order[k]).into_owned();
        fix_phase(&col.normalize())
    });
    Ok(HermitianEig { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &Mat4) -> Result<[f64; 4], LinalgError> {
    let h = check_hermitian(m)?;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 10_000)
        .ok_or(LinalgError::ConvergenceFailure("hermitian eigensolver"))?;
    let mut vals: [f64; 4] = std::array::from_fn(|k| eig.eigenvalues[k]);
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn min_eigenvalue(m: &Mat4) -> Result<f64, LinalgError> {
    Ok(hermitian_eigenvalues(m)?[0])
}

/// Elimination-based test that `m + tol·I` is positive definite.
///
/// Much cheaper than an eigendecomposition; used in inner loops.
pub fn is_psd_fast(m: &Mat4, tol: f64) -> bool {
    // nalgebra's complex Cholesky accepts negative pivots (complex sqrt),
    // so the factorization is spelled out with a real pivot test.
    let mut a = hermitize(m) + Mat4::identity() * real(tol);
    for k in 0..4 {
        let pivot = a[(k, k)].re;
        if !(pivot > 0.0) {
            return false;
        }
        for i in k + 1..4 {
            let f = a[(i, k)] / pivot;
            for j in k + 1..4 {
                let akj = a[(k, j)];
                a[(i, j)] -= f * akj;
            }
        }
    }
    true
}

/// Singular values of a 4×4 complex matrix, descending.
pub fn singular_values(m: &Mat4) -> Result<[f64; 4], LinalgError> {
    if !is_finite(m) {
        return Err(LinalgError::NonFinite);
    }
    let svd = SVD::try_new(*m, false, false, f64::EPSILON, 10_000)
        .ok_or(LinalgError::ConvergenceFailure("svd"))?;
    let mut s: [f64; 4] = std::array::from_fn(|k| svd.singular_values[k]);
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Full SVD of a 2×2 matrix `m = U diag(s) V†`, singular values descending.
pub fn svd2(m: &Mat2) -> Result<(Mat2, [f64; 2], Mat2), LinalgError> {
    let svd = SVD::try_new(*m, true, true, f64::EPSILON, 10_000)
        .ok_or(LinalgError::ConvergenceFailure("svd"))?;
    let u = svd.u.ok_or(LinalgError::ConvergenceFailure("svd"))?;
    let v_t = svd.v_t.ok_or(LinalgError::ConvergenceFailure("svd"))?;
    let s = [svd.singular_values[0], svd.singular_values[1]];
    if s[0] >= s[1] {
        Ok((u, s, v_t.adjoint()))
    } else {
        let swap = Mat2::new(real(0.0), real(1.0), real(1.0), real(0.0));
        Ok((u * swap, [s[1], s[0]], v_t.adjoint() * swap))
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    /// Unit norm, phase-fixed.
    pub vector: Vec4,
}

#[derive(Debug, Clone)]
pub struct GeneralEig {
    /// Sorted ascending by real part.
    pub pairs: Vec<EigenPair>,
    /// Two eigenvalues closer than `DEGENERACY_TOL` relative to the trace.
    pub degenerate: bool,
    /// Some repeated eigenvalue has fewer eigenvectors than its
    /// multiplicity; its pairs then share a vector.
    pub defective: bool,
    /// Largest |Im λ| among the eigenvalues.
    pub max_imag: f64,
}

impl GeneralEig {
    pub fn values(&self) -> Vec<C64> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

fn spectral_scale(m: &Mat4) -> f64 {
    let tr = m.trace().norm();
    if tr > f64::EPSILON {
        tr
    } else {
        m.norm().max(f64::MIN_POSITIVE)
    }
}

/// Eigenpairs of an arbitrary complex 4×4 matrix.
pub fn general_eig(m: &Mat4) -> Result<GeneralEig, LinalgError> {
    if !is_finite(m) {
        return Err(LinalgError::NonFinite);
    }
    let mut values = eigenvalues_qr(m)?;
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = spectral_scale(m);
    let cluster_tol = DEGENERACY_TOL * scale;
    let mut degenerate = values
        .windows(2)
        .any(|w| (w[0] - w[1]).norm() < cluster_tol);

    let norm = m.norm().max(f64::MIN_POSITIVE);
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(4);
    let mut defective = false;
    for (k, &value) in values.iter().enumerate() {
        // earlier vectors whose eigenvalue sits in the same cluster
        let siblings: Vec<Vec4> = pairs
            .iter()
            .filter(|p| (p.value - value).norm() < cluster_tol.max(1e-6 * norm))
            .map(|p| p.vector)
            .collect();
        let vector = match inverse_iteration(m, value, k, &siblings, norm) {
            Ok(v) => v,
            Err(_) if !siblings.is_empty() => {
                defective = true;
                inverse_iteration(m, value, k, &[], norm)?
            }
            Err(e) => return Err(e),
        };
        pairs.push(EigenPair { value, vector });
    }
    let max_imag = values.iter().fold(0.0, |acc: f64, z| acc.max(z.im.abs()));
    degenerate |= defective;
    Ok(GeneralEig {
        pairs,
        degenerate,
        defective,
        max_imag,
    })
}

fn gram_schmidt(v: &mut Vec4, basis: &[Vec4]) {
    for b in basis {
        let proj = b.dotc(v);
        *v -= b * proj;
    }
}

fn inverse_iteration(
    m: &Mat4,
    value: C64,
    index: usize,
    siblings: &[Vec4],
    norm: f64,
) -> Result<Vec4, LinalgError> {
    let shift = value + C64::new(1e-14 * norm, 1e-14 * norm);
    let lu = (m - Mat4::identity() * shift).lu();
    let seeds = [
        Vec4::new(c(1.0, 0.0), c(0.5, 0.3), c(-0.3, 0.7), c(0.2, -0.4)),
        Vec4::new(c(0.1, 0.6), c(1.0, 0.0), c(0.4, -0.2), c(-0.7, 0.3)),
        Vec4::new(c(-0.4, 0.2), c(0.3, 0.5), c(1.0, 0.0), c(0.6, 0.1)),
        Vec4::new(c(0.3, -0.5), c(-0.2, 0.1), c(0.5, 0.4), c(1.0, 0.0)),
    ];
    let mut x = seeds[index % 4];
    gram_schmidt(&mut x, siblings);
    x = x.normalize();
    let mut best = x;
    let mut best_res = f64::INFINITY;
    for _ in 0..6 {
        let Some(mut y) = lu.solve(&x) else {
            return Err(LinalgError::ConvergenceFailure("singular inverse iteration"));
        };
        gram_schmidt(&mut y, siblings);
        let n = y.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(LinalgError::ConvergenceFailure("inverse iteration collapsed"));
        }
        x = y / real(n);
        let res = (m * x - x * value).norm();
        if res < best_res {
            best_res = res;
            best = x;
        }
        if res <= 1e-3 * EIG_TOL * norm {
            break;
        }
    }
    if best_res > 1e2 * EIG_TOL * norm.max(1.0) {
        return Err(LinalgError::ConvergenceFailure("eigenvector residual too large"));
    }
    Ok(fix_phase(&best))
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg(m: &Mat4) -> Mat4 {
    let mut h = *m;
    for k in 0..2 {
        let mut x = [C64::new(0.0, 0.0); 4];
        let mut xnorm = 0.0;
        for i in (k + 1)..4 {
            x[i] = h[(i, k)];
            xnorm += x[i].norm_sqr();
        }
        let xnorm = xnorm.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[k + 1];
        let phase = if x0.norm() == 0.0 {
            real(1.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[k + 1] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H ← (I − 2vv†) H
        for j in 0..4 {
            let s: C64 = (0..4).map(|i| v[i].conj() * h[(i, j)]).sum();
            for i in 0..4 {
                h[(i, j)] -= v[i] * s * 2.0;
            }
        }
        // H ← H (I − 2vv†)
        for i in 0..4 {
            let s: C64 = (0..4).map(|j| h[(i, j)] * v[j]).sum();
            for j in 0..4 {
                h[(i, j)] -= s * v[j].conj() * 2.0;
            }
        }
        for i in (k + 2)..4 {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
    h
}

fn givens(x: C64, y: C64) -> (f64, C64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if x.norm() == 0.0 {
        return (0.0, y.conj() / y.norm());
    }
    let cs = x.norm() / r;
    let sn = (x / x.norm()) * y.conj() / r;
    (cs, sn)
}

fn eigenvalues_qr(m: &Mat4) -> Result<[C64; 4], LinalgError> {
    let mut h = hessenberg(m);
    let mut out = [C64::new(0.0, 0.0); 4];
    let norm = m.norm();
    let mut hi: usize = 3;
    let mut iters = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[(0, 0)];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            let s = if s == 0.0 { norm } else { s };
            if h[(l, l - 1)].norm() <= f64::EPSILON * s {
                h[(l, l - 1)] = C64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            out[hi] = h[(hi, hi)];
            hi -= 1;
            iters = 0;
            continue;
        }
        iters += 1;
        total += 1;
        if total > MAX_QR_ITERS * 4 {
            return Err(LinalgError::ConvergenceFailure("hessenberg qr"));
        }
        let a = h[(hi - 1, hi - 1)];
        let b = h[(hi - 1, hi)];
        let cc = h[(hi, hi - 1)];
        let d = h[(hi, hi)];
        let shift = if iters % 11 == 10 {
            // exceptional shift to break cycles
            d + h[(hi, hi - 1)].norm() * 0.75
        } else {
            let half = (a - d) * 0.5;
            let disc = (half * half + b * cc).sqrt();
            let mu1 = (a + d) * 0.5 + disc;
            let mu2 = (a + d) * 0.5 - disc;
            if (mu1 - d).norm() < (mu2 - d).norm() {
                mu1
            } else {
                mu2
            }
        };
        for i in l..=hi {
            h[(i, i)] -= shift;
        }
        let mut rots = Vec::with_capacity(3);
        for k in l..hi {
            let (cs, sn) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=hi {
                let h1 = h[(k, j)];
                let h2 = h[(k + 1, j)];
                h[(k, j)] = h1 * cs + sn * h2;
                h[(k + 1, j)] = -sn.conj() * h1 + h2 * cs;
            }
            rots.push((k, cs, sn));
        }
        for &(k, cs, sn) in &rots {
            let top = (k + 2).min(hi);
            for i in l..=top {
                let h1 = h[(i, k)];
                let h2 = h[(i, k + 1)];
                h[(i, k)] = h1 * cs + h2 * sn.conj();
                h[(i, k + 1)] = -h1 * sn + h2 * cs;
            }
        }
        for i in l..=hi {
            h[(i, i)] += shift;
        }
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinalgError::ConvergenceFailure("non-finite eigenvalue"));
    }
    Ok(out)
}
