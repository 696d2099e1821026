mod common;

use bsa_core::mat4::{c, hermitian_eigenvalues, kron, real, Mat2, Mat4, Vec4};
use bsa_core::qstate::{
    concurrence_mixed, concurrence_pure, is_maximally_entangled, is_separable, partial_transpose_a,
    partial_transpose_b, random_density, random_density_with, random_pure, random_su2, schmidt,
};
use bsa_core::{DensityMatrix, PureState};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_matrix(r: &mut ChaCha8Rng) -> Mat4 {
    use rand::Rng;
    Mat4::from_fn(|_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

fn random_hermitian(r: &mut ChaCha8Rng) -> Mat4 {
    let m = random_matrix(r);
    (m + m.adjoint()) * real(0.5)
}

#[test]
fn partial_transpose_of_bell_projector() {
    let pt = partial_transpose_b(&bell().projector());
    let mut expected = Mat4::zeros();
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        expected[(i, j)] = real(0.5);
    }
    // exact up to the rounding of (1/√2)²
    assert!((pt - expected).norm() < 1e-15);
    let diag = Mat4::from_diagonal(&Vec4::new(real(0.1), real(0.2), real(0.3), real(0.4)));
    assert_eq!(partial_transpose_b(&diag), diag);
}

#[test]
fn pure_concurrence_examples() {
    assert_eq!(concurrence_pure(&basis(0)), 0.0);
    assert!((concurrence_pure(&bell()) - 1.0).abs() < 1e-15);
    assert!((concurrence_pure(&schmidt_state(0.8)) - 0.8).abs() < 1e-15);
}

#[test]
fn mixed_concurrence_examples() {
    assert!(concurrence_mixed(&DensityMatrix::maximally_mixed()).unwrap() < 1e-15);
    assert!((concurrence_mixed(&DensityMatrix::from_pure(&bell())).unwrap() - 1.0).abs() < 1e-12);
    // X is diagonal in the Bell basis with roots (1+3y)/4 and (1−y)/4 thrice
    for y in [0.4, 0.6, 0.8, 1.0] {
        let expected = ((1.0 + 3.0 * y) / 4.0 - 3.0 * (1.0 - y) / 4.0f64).max(0.0);
        assert!((concurrence_mixed(&werner(y)).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn schmidt_examples() {
    let s = schmidt(&basis(0)).unwrap();
    assert!((s.coeffs.0 - 1.0).abs() < 1e-15 && s.coeffs.1.abs() < 1e-15);
    let s = schmidt(&bell()).unwrap();
    let h = 0.5f64.sqrt();
    assert!((s.coeffs.0 - h).abs() < 1e-14 && (s.coeffs.1 - h).abs() < 1e-14);
}

#[test]
fn separability_examples() {
    let id = is_separable(&DensityMatrix::maximally_mixed()).unwrap();
    assert!(id.separable);
    let b = is_separable(&DensityMatrix::from_pure(&bell())).unwrap();
    assert!(!b.separable);
    assert!((b.margin + 0.5).abs() < 1e-12);
}

#[test]
fn werner_separability_threshold() {
    // the PT margin is (1−3y)/4, so bisection on the predicate lands on 1/3
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if is_separable(&werner(mid)).unwrap().separable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 1.0 / 3.0).abs() < 1e-9, "{lo}");
}

#[test]
fn maximally_entangled_examples() {
    assert!(is_maximally_entangled(&bell(), 1e-12));
    assert!(!is_maximally_entangled(&basis(0), 1e-12));
    let mut r = rng(9);
    for _ in 0..50 {
        let g = random_pure(&mut r);
        let (a1, a2) = (g.amplitudes()[0], g.amplitudes()[1]);
        let n = (2.0 * (a1.norm_sqr() + a2.norm_sqr())).sqrt();
        let (a1, a2) = (a1 / n, a2 / n);
        for sign in [1.0, -1.0] {
            let v = PureState::new(Vec4::new(a1, a2, -a2.conj() * sign, a1.conj() * sign)).unwrap();
            assert!(is_maximally_entangled(&v, 1e-12));
        }
    }
}

#[test]
fn random_density_contract() {
    for seed in 0..20 {
        let rho = random_density(4, seed).unwrap();
        assert!(rho.eigenvalues()[0] > 1e-9);
    }
    let a = random_density(4, 42).unwrap();
    let b = random_density(4, 42).unwrap();
    assert_eq!(a.matrix(), b.matrix());
    for seed in 0..20 {
        let rho = random_density(1, seed).unwrap();
        let psi = PureState::normalized(bsa_core::mat4::hermitian_eig(rho.matrix()).unwrap().vectors[3]).unwrap();
        assert!((concurrence_mixed(&rho).unwrap() - concurrence_pure(&psi)).abs() < 1e-10);
    }
}

#[test]
fn maximally_entangled_overlap_bound() {
    let mut r = rng(4);
    for _ in 0..5 {
        let phi = random_pure(&mut r);
        let bound = 0.5 + 0.5 * phi.concurrence();
        let mut best: f64 = 0.0;
        for _ in 0..10_000 {
            let u = random_su2(&mut r);
            let me = kron(&u, &Mat2::identity()) * bell().amplitudes();
            best = best.max(phi.amplitudes().dotc(&me).norm_sqr());
        }
        assert!(best <= bound + 1e-6, "{best} > {bound}");
        // common Schmidt basis attains the bound
        let s = schmidt(&phi).unwrap();
        let l = kron(&s.basis_a, &s.basis_b).adjoint();
        let h = 0.5f64.sqrt();
        let me = l * Vec4::new(real(h), real(0.0), real(0.0), real(h));
        assert!(is_maximally_entangled(&PureState::normalized(me).unwrap(), 1e-10));
        assert!((phi.amplitudes().dotc(&me).norm_sqr() - bound).abs() < 1e-6);
    }
}

fn spectrum_close(a: [f64; 4], b: [f64; 4], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>()) {
        let m = random_matrix(&mut rng(seed));
        prop_assert_eq!(partial_transpose_b(&partial_transpose_b(&m)), m);
        prop_assert_eq!(partial_transpose_a(&partial_transpose_a(&m)), m);
        prop_assert_eq!(partial_transpose_a(&partial_transpose_b(&m)), m.transpose());
    }

    #[test]
    fn pt_spectrum_is_local_unitary_invariant(seed in any::<u64>(), rank in 1usize..=4) {
        let mut r = rng(seed);
        let rho = random_density_with(rank, &mut r).unwrap();
        let (u, v) = (random_su2(&mut r), random_su2(&mut r));
        let moved = rho.local_transform(&u, &v);
        let a = hermitian_eigenvalues(&rho.partial_transpose()).unwrap();
        let b = hermitian_eigenvalues(&moved.partial_transpose()).unwrap();
        prop_assert!(spectrum_close(a, b, 1e-10), "{:?} vs {:?}", a, b);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(seed in any::<u64>(), rank in 1usize..=4) {
        let mut r = rng(seed);
        let rho = random_density_with(rank, &mut r).unwrap();
        let (u, v) = (random_su2(&mut r), random_su2(&mut r));
        let a = concurrence_mixed(&rho).unwrap();
        let b = concurrence_mixed(&rho.local_transform(&u, &v)).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn trace_pairing(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random_hermitian(&mut r), random_hermitian(&mut r));
        let lhs = (partial_transpose_b(&a) * b).trace();
        let rhs = (a * partial_transpose_b(&b)).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn product_vector_overlap_identity(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random_density_with(4, &mut r).unwrap();
        let (e, f) = (random_su2(&mut r).column(0).into_owned(), random_su2(&mut r).column(0).into_owned());
        let ef = PureState::product([e[0], e[1]], [f[0], f[1]]).unwrap();
        let efc = PureState::product([e[0], e[1]], [f[0].conj(), f[1].conj()]).unwrap();
        let lhs = ef.amplitudes().dotc(&(rho.matrix() * ef.amplitudes()));
        let rhs = efc.amplitudes().dotc(&(rho.partial_transpose() * efc.amplitudes()));
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn schmidt_round_trip(seed in any::<u64>()) {
        let psi = random_pure(&mut rng(seed));
        let s = schmidt(&psi).unwrap();
        let back = s.rebuild();
        prop_assert!((back.dotc(psi.amplitudes()).norm() - 1.0).abs() < 1e-10);
        prop_assert!((2.0 * s.coeffs.0 * s.coeffs.1 - psi.concurrence()).abs() < 1e-10);
    }

    #[test]
    fn concurrence_in_unit_interval(seed in any::<u64>(), rank in 1usize..=4) {
        let rho = random_density_with(rank, &mut rng(seed)).unwrap();
        let c = concurrence_mixed(&rho).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        // entangled exactly when the partial transpose is not positive
        let sep = is_separable(&rho).unwrap().separable;
        prop_assert!(sep == (c < 1e-8) || c.abs() < 1e-6);
    }
}
