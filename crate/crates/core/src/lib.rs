//! Best separable approximation of two-qubit density matrices.
//!
//! Every two-qubit state decomposes uniquely as
//! `ρ = (1−λ)|ψ⟩⟨ψ| + λρ_s` with `ρ_s` separable, `ψ` pure and `λ`
//! maximal. When `ρ_s` has full rank the decomposition is closed-form:
//! `1−λ` is the concurrence of `ρ` and the kernel witness of `ρ_s^{T_B}` is
//! the lowest eigenvector of `Σρ^{T_A}Σρ^{T_B}`. Otherwise a small set of
//! polynomial equations is solved numerically.
//!
//! Modules, bottom up:
//! - [`mat4`]: 4×4 complex linear algebra.
//! - [`qstate`]: states, partial transposition, concurrence.
//! - [`spectra`]: the `X`/`Y` matrices and their spectral relations.
//! - [`solver`]: nonlinear least squares for the rank-deficient cases and
//!   an independent direct-maximization oracle.
//! - [`bsa`]: the decomposition itself and its optimality verifier.

pub mod bsa;
pub mod mat4;
pub mod qstate;
pub mod solver;
pub mod spectra;

pub use bsa::{compute, verify_theorem1, Decomposition, Path, VerificationReport};
pub use qstate::{DensityMatrix, PureState};
