//! The matrices `X = Σρ*Σρ` and `Y = Σρ^{T_A}Σρ^{T_B}` and the relations
//! between their spectra.
//!
//! If `c₁ ≥ … ≥ c₄` are the square roots of the eigenvalues of `X` and
//! `d_i²/4` the eigenvalues of `Y`, then the `d_i` are the four sign
//! patterns `c₁+c₂+c₃−c₄, c₁+c₂−c₃+c₄, c₁−c₂+c₃+c₄, −c₁+c₂+c₃+c₄`. In
//! particular the smallest eigenvalue of `Y` is `c(ρ)²/4` for entangled ρ,
//! and its eigenvector is the kernel witness of the full-rank separable
//! approximation.

use serde::Serialize;

use crate::mat4::{general_eig, real, sigma_yy, Mat4, C64, DEGENERACY_TOL};
use crate::qstate::{
    concurrence_raw, concurrence_spectrum, partial_transpose_a, partial_transpose_b,
    DensityMatrix, PureState, StateError,
};

pub fn build_x(rho: &DensityMatrix) -> Mat4 {
    let s = sigma_yy();
    s * rho.matrix().map(|z| z.conj()) * s * rho.matrix()
}

pub fn build_y(rho: &DensityMatrix) -> Mat4 {
    let s = sigma_yy();
    s * partial_transpose_a(rho.matrix()) * s * partial_transpose_b(rho.matrix())
}

/// Correction terms of the power-trace identities between `X` and `Y`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceDeltas {
    pub delta2: f64,
    pub delta3: f64,
    pub delta4: f64,
    /// `+√det X`, which equals `det ρ` for a valid state.
    pub d: f64,
}

impl TraceDeltas {
    pub fn from_x(x: &Mat4) -> Self {
        let tr1 = x.trace().re;
        let tr2 = (x * x).trace().re;
        let d = x.determinant().re.max(0.0).sqrt();
        let delta2 = 6.0 * d + 1.5 * tr2 - 0.75 * tr1 * tr1;
        let delta3 = 1.25 * delta2 * tr1;
        let delta4 = 7.0 / 12.0 * delta2 * (2.0 * tr2 + tr1 * tr1 - delta2);
        Self {
            delta2,
            delta3,
            delta4,
            d,
        }
    }

    /// `δ₂/6 − TrX²/4 + (TrX)²/8`, algebraically equal to `d`.
    pub fn det_from_delta2(&self, x: &Mat4) -> f64 {
        let tr1 = x.trace().re;
        let tr2 = (x * x).trace().re;
        self.delta2 / 6.0 - 0.25 * tr2 + 0.125 * tr1 * tr1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Descending.
    pub c: [f64; 4],
    /// Descending.
    pub d: [f64; 4],
    /// Smallest eigenvalue of `Y`.
    pub gamma: f64,
    /// Eigenvector of `Y` at `gamma`.
    #[serde(skip)]
    pub phi4: PureState,
    /// Eigenvectors of `Y` ordered like `d` (so the last one is `phi4`).
    #[serde(skip)]
    pub phis: [PureState; 4],
    pub degenerate_gamma: bool,
    /// `|TrY^k − (TrX^k − δ_k)|` for k = 1..4.
    pub trace_residuals: [f64; 4],
    /// `⟨φ_i|ρ^{T_B}|φ_i⟩`, ordered like `d`.
    pub sign_diagnostics: [f64; 4],
    /// `c(φ_i)`, ordered like `d`.
    pub phi_concurrences: [f64; 4],
    pub delta: TraceDeltas,
    /// Largest imaginary part among the eigenvalues of `Y`.
    pub max_imag: f64,
}

impl SpectralReport {
    pub fn concurrence(&self) -> f64 {
        (self.c[0] - self.c[1] - self.c[2] - self.c[3]).max(0.0)
    }

    /// The four sign combinations of the c-spectrum, descending.
    pub fn predicted_d(&self) -> [f64; 4] {
        predicted_d(&self.c)
    }
}

/// `c₁+c₂+c₃−c₄, c₁+c₂−c₃+c₄, c₁−c₂+c₃+c₄, −c₁+c₂+c₃+c₄` as absolute
/// values, sorted descending.
pub fn predicted_d(c: &[f64; 4]) -> [f64; 4] {
    let mut d = [
        (c[0] + c[1] + c[2] - c[3]).abs(),
        (c[0] + c[1] - c[2] + c[3]).abs(),
        (c[0] - c[1] + c[2] + c[3]).abs(),
        (-c[0] + c[1] + c[2] + c[3]).abs(),
    ];
    d.sort_by(|a, b| b.total_cmp(a));
    d
}

fn power_traces(m: &Mat4) -> [C64; 4] {
    let m2 = m * m;
    let m3 = m2 * m;
    let m4 = m2 * m2;
    [m.trace(), m2.trace(), m3.trace(), m4.trace()]
}

pub fn spectral_report(rho: &DensityMatrix) -> Result<SpectralReport, StateError> {
    let c = concurrence_spectrum(rho)?;
    let x = build_x(rho);
    let y = build_y(rho);
    let pt = partial_transpose_b(rho.matrix());

    let eig = general_eig(&y)?;
    // ascending by real part → reverse for descending d
    let pairs: Vec<_> = eig.pairs.iter().rev().collect();
    let d: [f64; 4] = std::array::from_fn(|k| 2.0 * pairs[k].value.re.max(0.0).sqrt());
    let phis: [PureState; 4] = std::array::from_fn(|k| {
        PureState::normalized(pairs[k].vector).expect("eigenvectors have unit norm")
    });
    let gamma = eig.pairs[0].value.re;
    let gap = eig.pairs[1].value.re - gamma;
    let degenerate_gamma = gap < DEGENERACY_TOL * y.trace().re.abs().max(f64::EPSILON);

    let sign_diagnostics: [f64; 4] = std::array::from_fn(|k| {
        let v = phis[k].amplitudes();
        v.dotc(&(pt * v)).re
    });
    let phi_concurrences: [f64; 4] = std::array::from_fn(|k| concurrence_raw(phis[k].amplitudes()));

    let delta = TraceDeltas::from_x(&x);
    let tx = power_traces(&x);
    let ty = power_traces(&y);
    let deltas = [0.0, delta.delta2, delta.delta3, delta.delta4];
    let trace_residuals: [f64; 4] =
        std::array::from_fn(|k| (ty[k] - (tx[k] - real(deltas[k]))).norm());

    Ok(SpectralReport {
        c,
        d,
        gamma,
        phi4: phis[3],
        phis,
        degenerate_gamma,
        trace_residuals,
        sign_diagnostics,
        phi_concurrences,
        delta,
        max_imag: eig.max_imag,
    })
}

/// `2√γ`, the entangled weight predicted by the full-rank recipe.
pub fn weight_from_gamma(gamma: f64) -> f64 {
    2.0 * gamma.max(0.0).sqrt()
}

/// `Σ(ρ^{T_B})*Σρ^{T_B}`; equal to [`build_y`] because `ρ^{T_B}` is Hermitian.
pub fn build_y_conjugate_form(rho: &DensityMatrix) -> Mat4 {
    let s = sigma_yy();
    let pt = partial_transpose_b(rho.matrix());
    s * pt.map(|z| z.conj()) * s * pt
}
