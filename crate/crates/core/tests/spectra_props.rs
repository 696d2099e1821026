mod common;

use bsa_core::bsa::psi_from_phi;
use bsa_core::mat4::{general_eig, hermitian_eigenvalues, real, Mat4};
use bsa_core::qstate::{concurrence_mixed, partial_transpose_b, random_density_with, random_pure};
use bsa_core::spectra::{build_x, build_y, predicted_d, spectral_report, weight_from_gamma};
use bsa_core::{DensityMatrix, PureState};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `{−c/2, c/2, (1−√(1−c²))/2, (1+√(1−c²))/2}`, ascending.
fn pure_pt_spectrum(c: f64) -> [f64; 4] {
    let s = (1.0 - c * c).max(0.0).sqrt();
    let mut v = [-c / 2.0, c / 2.0, (1.0 - s) / 2.0, (1.0 + s) / 2.0];
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn x_and_y_of_simple_states() {
    let id = DensityMatrix::maximally_mixed();
    let sixteenth = Mat4::identity() * real(1.0 / 16.0);
    assert!((build_x(&id) - sixteenth).norm() < 1e-16);
    assert!((build_y(&id) - sixteenth).norm() < 1e-16);
    let b = DensityMatrix::from_pure(&bell());
    assert!((build_x(&b) - bell().projector()).norm() < 1e-15);
}

#[test]
fn werner_spectral_report() {
    let r = spectral_report(&werner(0.8)).unwrap();
    for (a, b) in r.c.iter().zip([0.85, 0.05, 0.05, 0.05]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((r.d[3] - 0.7).abs() < 1e-10);
    assert!((r.gamma - 0.1225).abs() < 1e-12);
}

#[test]
fn pt_spectrum_schmidt_example() {
    let phi = schmidt_state(0.8);
    let pt = partial_transpose_b(&phi.projector());
    let ev = hermitian_eigenvalues(&pt).unwrap();
    for (a, b) in ev.iter().zip([-0.4, 0.2, 0.4, 0.8]) {
        assert!((a - b).abs() < 1e-12, "{ev:?}");
    }
    let (psi, alpha) = psi_from_phi(&phi).unwrap();
    assert!((alpha - 0.4).abs() < 1e-12);
    let h = 0.5f64.sqrt();
    let expected = PureState::from_amplitudes([real(0.0), real(h), real(-h), real(0.0)]).unwrap();
    assert!((psi.overlap(&expected) - 1.0).abs() < 1e-12);
    let (_, alpha) = psi_from_phi(&bell()).unwrap();
    assert!((alpha - 0.5).abs() < 1e-12);
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pt_spectrum_and_witness(seed in any::<u64>()) {
        let phi = random_pure(&mut rng(seed));
        let c = phi.concurrence();
        let ev = hermitian_eigenvalues(&partial_transpose_b(&phi.projector())).unwrap();
        for (a, b) in ev.iter().zip(pure_pt_spectrum(c)) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        if c > 1e-6 {
            let (psi, alpha) = psi_from_phi(&phi).unwrap();
            prop_assert!((alpha - c / 2.0).abs() < 1e-10);
            prop_assert!((psi.concurrence() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn d_spectrum_is_sign_pattern_of_c_spectrum(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density_with(rank, &mut rng(seed)).unwrap();
        let r = spectral_report(&rho).unwrap();
        for (a, b) in r.d.iter().zip(predicted_d(&r.c)) {
            prop_assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", r.d, r.c);
        }
        prop_assert!((r.gamma - r.d[3] * r.d[3] / 4.0).abs() < 1e-10);
        for res in r.trace_residuals {
            prop_assert!(res < 1e-9);
        }
        let det = rho.matrix().determinant().re;
        prop_assert!(r.delta.det_from_delta2(&build_x(&rho)) >= -1e-10);
        prop_assert!((r.delta.d - det).abs() < 1e-10);
    }

    #[test]
    fn x_and_y_spectra_are_real_and_nonnegative(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density_with(rank, &mut rng(seed)).unwrap();
        for m in [build_x(&rho), build_y(&rho)] {
            let eig = general_eig(&m).unwrap();
            for p in &eig.pairs {
                prop_assert!(p.value.re >= -1e-9 && p.value.im.abs() < 1e-9, "{:?}", p.value);
            }
        }
    }

    #[test]
    fn minimal_eigenvector_signs(seed in any::<u64>()) {
        let rho = random_density_with(4, &mut rng(seed)).unwrap();
        let c = concurrence_mixed(&rho).unwrap();
        prop_assume!(c > 1e-6);
        let r = spectral_report(&rho).unwrap();
        prop_assert!(!r.degenerate_gamma);
        let expected = -0.5 * c * r.phi_concurrences[3];
        prop_assert!((r.sign_diagnostics[3] - expected).abs() < 1e-8);
        for s in &r.sign_diagnostics[..3] {
            prop_assert!(*s >= -1e-9);
        }
        prop_assert!((weight_from_gamma(r.gamma) - c).abs() < 1e-8);
    }
}
