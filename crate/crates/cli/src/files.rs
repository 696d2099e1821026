//! On-disk formats: the input matrix file and the result record.

use bsa_core::bsa::{Decomposition, Flags, Path, VerificationReport, Witnesses};
use bsa_core::mat4::{Mat4, Vec4, C64};
use bsa_core::{DensityMatrix, PureState};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number as `[re, im]`.
pub type Pair = [f64; 2];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub schema_version: u32,
    /// Row-major, basis `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub matrix: Vec<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// Problems with an input file, reported with the offending field.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, Invalid> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())))
}

pub fn matrix_from_rows(rows: &[Vec<Pair>], field: &str) -> Result<Mat4, Invalid> {
    if rows.len() != 4 {
        return Err(Invalid(format!("{field}: expected 4 rows, found {}", rows.len())));
    }
    let mut m = Mat4::zeros();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 4 {
            return Err(Invalid(format!(
                "{field}[{i}]: expected 4 entries, found {}",
                row.len()
            )));
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Invalid(format!("{field}[{i}][{j}]: not a finite number")));
            }
            m[(i, j)] = C64::new(z[0], z[1]);
        }
    }
    Ok(m)
}

pub fn rows_of(m: &Mat4) -> Vec<Vec<Pair>> {
    (0..4)
        .map(|i| (0..4).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn pairs_of(v: &Vec4) -> Vec<Pair> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn vector_from_pairs(p: &[Pair], field: &str) -> Result<Vec4, Invalid> {
    if p.len() != 4 {
        return Err(Invalid(format!("{field}: expected 4 amplitudes, found {}", p.len())));
    }
    Ok(Vec4::from_fn(|i, _| C64::new(p[i][0], p[i][1])))
}

impl MatrixFile {
    pub fn load(path: &std::path::Path) -> Result<(Self, DensityMatrix), Invalid> {
        let file: MatrixFile = read_json(path)?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Invalid(format!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                file.schema_version
            )));
        }
        let m = matrix_from_rows(&file.matrix, "matrix")?;
        let rho = DensityMatrix::new(m).map_err(|e| Invalid(format!("matrix: {e}")))?;
        Ok((file, rho))
    }

    pub fn from_state(rho: &DensityMatrix, label: Option<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            matrix: rows_of(rho.matrix()),
            label,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub phi: Option<Vec<Pair>>,
    pub phi_tilde: Option<Vec<Pair>>,
    pub alpha: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Timings {
    pub compute_ms: f64,
    pub verify_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub input_label: Option<String>,
    pub lambda: f64,
    pub psi: Option<Vec<Pair>>,
    pub rho_s: Vec<Vec<Pair>>,
    pub path: Path,
    pub witnesses: WitnessRecord,
    pub flags: Flags,
    pub concurrence: f64,
    pub entanglement_measure: f64,
    pub verification: Option<VerificationReport>,
    pub timings: Option<Timings>,
}

impl ResultRecord {
    pub fn new(label: Option<String>, d: &Decomposition, concurrence: f64) -> Self {
        let amps = |p: &Option<PureState>| p.as_ref().map(|s| pairs_of(s.amplitudes()));
        Self {
            schema_version: SCHEMA_VERSION,
            input_label: label,
            lambda: d.lambda,
            psi: amps(&d.psi),
            rho_s: rows_of(&d.rho_s),
            path: d.path,
            witnesses: WitnessRecord {
                phi: amps(&d.witnesses.phi),
                phi_tilde: amps(&d.witnesses.phi_tilde),
                alpha: d.witnesses.alpha,
                nu: d.witnesses.nu,
            },
            flags: d.flags,
            concurrence,
            entanglement_measure: bsa_core::bsa::entanglement_measure(d),
            verification: None,
            timings: None,
        }
    }

    pub fn decomposition(&self) -> Result<Decomposition, Invalid> {
        let state = |p: &Option<Vec<Pair>>, field: &str| -> Result<Option<PureState>, Invalid> {
            p.as_ref()
                .map(|v| {
                    PureState::new(vector_from_pairs(v, field)?)
                        .map_err(|e| Invalid(format!("{field}: {e}")))
                })
                .transpose()
        };
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Invalid(format!("lambda: {} is outside [0, 1]", self.lambda)));
        }
        Ok(Decomposition {
            lambda: self.lambda,
            psi: state(&self.psi, "psi")?,
            rho_s: matrix_from_rows(&self.rho_s, "rho_s")?,
            path: self.path,
            witnesses: Witnesses {
                phi: state(&self.witnesses.phi, "witnesses.phi")?,
                phi_tilde: state(&self.witnesses.phi_tilde, "witnesses.phi_tilde")?,
                alpha: self.witnesses.alpha,
                nu: self.witnesses.nu,
            },
            flags: self.flags,
        })
    }
}
