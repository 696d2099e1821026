//! Browser bindings. Matrices cross the boundary as 32 numbers: the 16
//! entries in row-major order, each as `re, im`.

use bsa_core::bsa::{entanglement_measure, verify_theorem1, VERIFY_TOL};
use bsa_core::mat4::{Mat4, C64};
use bsa_core::qstate::{concurrence_mixed, random_density};
use bsa_core::{compute, DensityMatrix, Path, VerificationReport};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub fn matrix_from_flat(entries: &[f64]) -> Result<DensityMatrix, String> {
    if entries.len() != 32 {
        return Err(format!("expected 32 numbers, found {}", entries.len()));
    }
    if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
        return Err(format!("entry {} is not finite", k / 2));
    }
    let m = Mat4::from_fn(|i, j| {
        let k = 2 * (4 * i + j);
        C64::new(entries[k], entries[k + 1])
    });
    DensityMatrix::new(m).map_err(|e| e.to_string())
}

pub fn flat_from_matrix(m: &Mat4) -> Vec<f64> {
    (0..4)
        .flat_map(|i| (0..4).flat_map(move |j| [m[(i, j)].re, m[(i, j)].im]))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub lambda: f64,
    pub path: Path,
    /// Eight numbers, `re, im` per amplitude; empty for separable input.
    pub psi: Vec<f64>,
    pub rho_s: Vec<f64>,
    pub concurrence: f64,
    pub entanglement_measure: f64,
    pub verification: VerificationReport,
}

pub fn summarize(entries: &[f64]) -> Result<Summary, String> {
    let rho = matrix_from_flat(entries)?;
    let d = compute(&rho).map_err(|e| e.to_string())?;
    let verification = verify_theorem1(&rho, &d, VERIFY_TOL).map_err(|e| e.to_string())?;
    let psi = d
        .psi
        .map(|p| p.amplitudes().iter().flat_map(|z| [z.re, z.im]).collect())
        .unwrap_or_default();
    Ok(Summary {
        lambda: d.lambda,
        path: d.path,
        psi,
        rho_s: flat_from_matrix(&d.rho_s),
        concurrence: concurrence_mixed(&rho).map_err(|e| e.to_string())?,
        entanglement_measure: entanglement_measure(&d),
        verification,
    })
}

/// Decomposition of a state, as a JSON string.
#[wasm_bindgen]
pub fn decompose(entries: &[f64]) -> Result<String, JsError> {
    let s = summarize(entries).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&s).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn concurrence(entries: &[f64]) -> Result<f64, JsError> {
    let rho = matrix_from_flat(entries).map_err(|e| JsError::new(&e))?;
    concurrence_mixed(&rho).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn random_state(rank: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    let rho = random_density(rank as usize, seed as u64).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(flat_from_matrix(rho.matrix()))
}
