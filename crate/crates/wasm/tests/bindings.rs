use bsa_core::mat4::Mat4;
use bsa_core::qstate::random_density;
use bsa_core::Path;
use bsa_wasm::{flat_from_matrix, matrix_from_flat, summarize};

fn werner(y: f64) -> Vec<f64> {
    let mut v = vec![0.0; 32];
    for i in 0..4 {
        v[2 * (5 * i)] = (1.0 - y) / 4.0;
    }
    for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
        v[2 * (4 * i + j)] += y / 2.0;
    }
    v
}

#[test]
fn flat_layout_round_trips() {
    let rho = random_density(3, 5).unwrap();
    let back = matrix_from_flat(&flat_from_matrix(rho.matrix())).unwrap();
    assert!((back.matrix() - rho.matrix()).norm() < 1e-15);
}

#[test]
fn werner_summary() {
    let s = summarize(&werner(0.8)).unwrap();
    assert!((s.lambda - 0.3).abs() < 1e-9);
    assert_eq!(s.path, Path::FullRank);
    assert!(s.verification.verdict);
    assert_eq!(s.psi.len(), 8);
}

#[test]
fn separable_summary_has_no_psi() {
    let s = summarize(&flat_from_matrix(&(Mat4::identity() * bsa_core::mat4::real(0.25)))).unwrap();
    assert_eq!(s.lambda, 1.0);
    assert!(s.psi.is_empty());
}

#[test]
fn bad_input_is_reported() {
    assert!(matrix_from_flat(&[0.0; 31]).is_err());
    let mut v = werner(0.5);
    v[2] = 0.3;
    assert!(matrix_from_flat(&v).is_err());
    v = werner(0.5);
    v[0] = f64::NAN;
    assert!(matrix_from_flat(&v).unwrap_err().contains("entry 0"));
}
