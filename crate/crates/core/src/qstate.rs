//! Two-qubit states: density matrices, pure states, partial transposition,
//! concurrence and Schmidt decomposition.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ with the A index first, so the
//! row index of a 4×4 operator is `2·a + b`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use thiserror::Error;

use crate::mat4::{
    self, hermitian_deviation, hermitian_eig, is_finite, min_eigenvalue, outer, real, sigma_yy,
    singular_values, svd2, LinalgError, Mat2, Mat4, Vec4, C64, PSD_TOL,
};

/// Eigenvalues above `RANK_TOL · trace` count towards the numerical rank.
pub const RANK_TOL: f64 = 1e-9;
/// Hermiticity or trace defects below this are repaired, larger ones rejected.
pub const REPAIR_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StateError {
    #[error("density matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("density matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("state vector has norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("non-finite entries")]
    NonFinite,
    #[error("rank must be between 1 and 4, got {0}")]
    InvalidRank(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: Mat4,
    eigenvalues: [f64; 4],
    rank: usize,
}

impl DensityMatrix {
    /// Validate `m`, repairing Hermiticity and trace defects below
    /// [`REPAIR_TOL`].
    pub fn new(m: Mat4) -> Result<Self, StateError> {
        if !is_finite(&m) {
            return Err(StateError::NonFinite);
        }
        let dev = hermitian_deviation(&m);
        if dev > REPAIR_TOL {
            return Err(StateError::NotHermitian(dev));
        }
        let mut mat = mat4::hermitize(&m);
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > REPAIR_TOL {
            return Err(StateError::BadTrace(tr));
        }
        if tr != 1.0 {
            mat /= real(tr);
        }
        let eigenvalues = mat4::hermitian_eigenvalues(&mat)?;
        if eigenvalues[0] < -PSD_TOL {
            return Err(StateError::NotPositive(eigenvalues[0]));
        }
        let rank = eigenvalues.iter().filter(|&&v| v > RANK_TOL).count();
        Ok(Self {
            mat,
            eigenvalues,
            rank,
        })
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self::new(psi.projector()).expect("projector of a unit vector is a state")
    }

    pub fn maximally_mixed() -> Self {
        Self::new(Mat4::identity() * real(0.25)).expect("I/4 is a state")
    }

    /// Convex combination `Σ w_k ρ_k`; weights must sum to one.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self, StateError> {
        let m = parts
            .iter()
            .fold(Mat4::zeros(), |acc, (w, r)| acc + r.mat * real(*w));
        Self::new(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.mat
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 4] {
        self.eigenvalues
    }

    /// `(U⊗V) ρ (U⊗V)†`
    pub fn local_transform(&self, u: &Mat2, v: &Mat2) -> Self {
        let l = mat4::kron(u, v);
        Self::new(mat4::hermitize(&(l * self.mat * l.adjoint())))
            .expect("unitary conjugation preserves states")
    }

    pub fn partial_transpose(&self) -> Mat4 {
        partial_transpose_b(&self.mat)
    }
}

/// A normalized two-qubit pure state `a₁|00⟩ + a₂|01⟩ + a₃|10⟩ + a₄|11⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    amp: Vec4,
}

impl PureState {
    pub fn new(amp: Vec4) -> Result<Self, StateError> {
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let n = amp.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(StateError::NotNormalized(n));
        }
        Ok(Self { amp })
    }

    /// Normalize `v`; fails on zero or non-finite input.
    pub fn normalized(v: Vec4) -> Result<Self, StateError> {
        let n = v.norm();
        if !n.is_finite() {
            return Err(StateError::NonFinite);
        }
        if n == 0.0 {
            return Err(StateError::NotNormalized(0.0));
        }
        Ok(Self { amp: v / real(n) })
    }

    pub fn from_amplitudes(a: [C64; 4]) -> Result<Self, StateError> {
        Self::normalized(Vec4::new(a[0], a[1], a[2], a[3]))
    }

    pub fn product(e: [C64; 2], f: [C64; 2]) -> Result<Self, StateError> {
        Self::from_amplitudes([e[0] * f[0], e[0] * f[1], e[1] * f[0], e[1] * f[1]])
    }

    pub fn amplitudes(&self) -> &Vec4 {
        &self.amp
    }

    pub fn projector(&self) -> Mat4 {
        outer(&self.amp, &self.amp)
    }

    pub fn conj(&self) -> Self {
        Self {
            amp: self.amp.map(|z| z.conj()),
        }
    }

    pub fn phase_fixed(&self) -> Self {
        Self {
            amp: mat4::fix_phase(&self.amp),
        }
    }

    /// |⟨self|other⟩|
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amp.dotc(&other.amp).norm()
    }

    pub fn concurrence(&self) -> f64 {
        concurrence_pure(self)
    }

    /// The 2×2 amplitude matrix `M[a][b] = ⟨ab|ψ⟩`.
    pub fn amplitude_matrix(&self) -> Mat2 {
        Mat2::new(self.amp[0], self.amp[1], self.amp[2], self.amp[3])
    }
}

/// Schmidt coefficients and the local basis change bringing a state to
/// `[λ₁, 0, 0, λ₂]`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coeffs: (f64, f64),
    pub basis_a: Mat2,
    pub basis_b: Mat2,
}

impl SchmidtForm {
    /// `(basis_a ⊗ basis_b)† [λ₁,0,0,λ₂]`, the state this form was built from.
    pub fn rebuild(&self) -> Vec4 {
        let l = mat4::kron(&self.basis_a, &self.basis_b);
        let canon = Vec4::new(
            real(self.coeffs.0),
            real(0.0),
            real(0.0),
            real(self.coeffs.1),
        );
        l.adjoint() * canon
    }
}

/// Partial transpose on subsystem B: `out[(i,j),(k,l)] = in[(i,l),(k,j)]`.
pub fn partial_transpose_b(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (col / 2, col % 2);
        m[(2 * i + l, 2 * k + j)]
    })
}

/// Partial transpose on subsystem A.
pub fn partial_transpose_a(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, col| {
        let (i, j) = (r / 2, r % 2);
        let (k, l) = (col / 2, col % 2);
        m[(2 * k + j, 2 * i + l)]
    })
}

/// `2|a₁a₄ − a₂a₃|`
pub fn concurrence_pure(psi: &PureState) -> f64 {
    let a = psi.amp;
    ((a[0] * a[3] - a[1] * a[2]) * 2.0).norm()
}

/// Concurrence of an unnormalized vector, `|⟨v|Σ|v*⟩|`. Bilinear in `v`.
pub fn concurrence_raw(v: &Vec4) -> f64 {
    let conj = v.map(|z| z.conj());
    v.dotc(&(sigma_yy() * conj)).norm()
}

/// Square roots of the eigenvalues of `Σρ*Σρ`, descending.
///
/// Computed as the singular values of `√ρ Σ (√ρ)*`, which avoids the
/// non-Hermitian eigenproblem.
pub fn concurrence_spectrum(rho: &DensityMatrix) -> Result<[f64; 4], StateError> {
    let eig = hermitian_eig(rho.matrix())?;
    let sqrt_rho = eig.map_values(|v| v.max(0.0).sqrt());
    let r = sqrt_rho * sigma_yy() * sqrt_rho.map(|z| z.conj());
    Ok(singular_values(&r)?)
}

pub fn concurrence_mixed(rho: &DensityMatrix) -> Result<f64, StateError> {
    let c = concurrence_spectrum(rho)?;
    Ok((c[0] - c[1] - c[2] - c[3]).max(0.0))
}

pub fn schmidt(psi: &PureState) -> Result<SchmidtForm, StateError> {
    let (u, s, v) = svd2(&psi.amplitude_matrix())?;
    // (A⊗B)ψ ↔ A M Bᵀ, so A = U† and B = Vᵀ give U† M V = diag(s).
    Ok(SchmidtForm {
        coeffs: (s[0], s[1]),
        basis_a: u.adjoint(),
        basis_b: v.transpose(),
    })
}

/// Peres–Horodecki decision with the smallest eigenvalue of `ρ^{T_B}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separability {
    pub separable: bool,
    pub margin: f64,
}

pub fn is_separable(rho: &DensityMatrix) -> Result<Separability, StateError> {
    let margin = min_eigenvalue(&rho.partial_transpose())?;
    Ok(Separability {
        separable: margin >= -PSD_TOL,
        margin,
    })
}

pub fn is_maximally_entangled(psi: &PureState, tol: f64) -> bool {
    concurrence_pure(psi) >= 1.0 - tol
}

/// Haar-random pure state.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R) -> PureState {
    loop {
        let v = Vec4::from_fn(|_, _| {
            C64::new(
                StandardNormal.sample(&mut *rng),
                StandardNormal.sample(&mut *rng),
            )
        });
        if v.norm() > 1e-8 {
            return PureState::normalized(v).expect("nonzero vector");
        }
    }
}

/// Haar-random element of SU(2).
pub fn random_su2<R: Rng + ?Sized>(rng: &mut R) -> Mat2 {
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut *rng));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = C64::new(q[0], q[1]) / n;
    let b = C64::new(q[2], q[3]) / n;
    Mat2::new(a, -b.conj(), b, a.conj())
}

/// Mixture of `rank` Haar-random pure states with flat-Dirichlet weights.
pub fn random_density_with<R: Rng + ?Sized>(
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix, StateError> {
    if !(1..=4).contains(&rank) {
        return Err(StateError::InvalidRank(rank));
    }
    loop {
        let raw: Vec<f64> = (0..rank).map(|_| Exp1.sample(&mut *rng)).collect();
        let total: f64 = raw.iter().sum();
        let mut m = Mat4::zeros();
        for w in &raw {
            m += random_pure(rng).projector() * real(w / total);
        }
        let rho = DensityMatrix::new(mat4::hermitize(&m))?;
        if rho.rank() == rank {
            return Ok(rho);
        }
    }
}

/// Deterministic random state of the given rank.
pub fn random_density(rank: usize, seed: u64) -> Result<DensityMatrix, StateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_density_with(rank, &mut rng)
}
