mod common;

use bsa_core::bsa::{compute, psi_from_phi};
use bsa_core::mat4::{c, Vec4};
use bsa_core::qstate::{random_density, random_pure};
use bsa_core::solver::{
    ls_oracle, min_pure_weight, remainder_feasible, residual_rank3, solve_multistart,
    OracleConfig, OracleError, Rank3Unknowns, SolverConfig,
};
use bsa_core::spectra::spectral_report;
use bsa_core::DensityMatrix;
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn werner_witnesses(rho: &DensityMatrix) -> (Rank3Unknowns, f64) {
    let phi = spectral_report(rho).unwrap().phi4;
    let (psi, alpha) = psi_from_phi(&phi).unwrap();
    let inv = rho.matrix().try_inverse().unwrap();
    let n = psi.amplitudes().dotc(&(inv * psi.amplitudes())).re;
    let u = Rank3Unknowns {
        phi_tilde: (inv * psi.amplitudes()).normalize(),
        phi: *phi.amplitudes(),
        alpha,
        nu: 0.0,
    };
    (u, n)
}

#[test]
fn werner_witnesses_in_the_rank3_residual() {
    // the eigenvector block vanishes; the kernel block does not, because
    // ρ_s has full rank: it measures 1/⟨ψ|ρ⁻¹|ψ⟩ − (1−λ) = 0.85 − 0.7
    // against [|ψ⟩⟨ψ|]^{T_B}φ = −φ/2
    let rho = werner(0.8);
    let (u, n) = werner_witnesses(&rho);
    assert!((u.alpha - 0.5).abs() < 1e-12);
    assert!((1.0 / n - 0.85).abs() < 1e-12);
    let r = residual_rank3(&u, &rho);
    assert!(norm(&r[8..]) < 1e-12);
    assert!((norm(&r[..8]) - 0.075).abs() < 1e-10, "{}", norm(&r[..8]));
}

#[test]
fn rank3_residual_is_phase_invariant() {
    let rho = random_density(4, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let u = Rank3Unknowns {
            phi_tilde: *random_pure(&mut rng).amplitudes(),
            phi: *random_pure(&mut rng).amplitudes(),
            alpha: rng.random_range(0.0..1.0),
            nu: rng.random_range(0.0..1.0),
        };
        let r0 = residual_rank3(&u, &rho);
        assert!(r0.iter().all(|x| x.is_finite()));
        let (a, b): (f64, f64) = (rng.random_range(0.0..6.3), rng.random_range(0.0..6.3));
        let turned = Rank3Unknowns {
            phi_tilde: u.phi_tilde * c(a.cos(), a.sin()),
            phi: u.phi * c(b.cos(), b.sin()),
            ..u
        };
        // the stacked vector picks up the phase of φ; its norm does not
        let r1 = residual_rank3(&turned, &rho);
        assert!((norm(&r0) - norm(&r1)).abs() < 1e-12);
    }
}

#[test]
fn multistart_has_no_rank3_solution_for_werner() {
    // the separable part of a Werner state has full rank
    let cands = solve_multistart(&werner(0.8), &SolverConfig::default(), false);
    assert!(cands.iter().all(|c| !c.admissible));
}

#[test]
fn multistart_rejects_separable_input() {
    let cands = solve_multistart(&werner(0.2), &SolverConfig::default(), false);
    assert!(cands.iter().all(|c| !c.admissible));
}

#[test]
fn multistart_is_deterministic() {
    let rho = random_density(4, 3).unwrap();
    let cfg = SolverConfig::default();
    let a = solve_multistart(&rho, &cfg, false);
    let b = solve_multistart(&rho, &cfg, false);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.residual_norm.to_bits(), y.residual_norm.to_bits());
        assert_eq!(x.lambda.to_bits(), y.lambda.to_bits());
        assert_eq!(x.start_index, y.start_index);
        assert_eq!(x.phi.amplitudes(), y.phi.amplitudes());
    }
}

#[test]
fn admissible_set_does_not_depend_on_start_labels() {
    let rho = random_density(4, 3).unwrap();
    let admissible = |seed: u64| -> Vec<f64> {
        let cfg = SolverConfig {
            seed,
            ..SolverConfig::default()
        };
        let mut l: Vec<f64> = solve_multistart(&rho, &cfg, false)
            .into_iter()
            .filter(|c| c.admissible)
            .map(|c| c.lambda)
            .collect();
        l.sort_by(f64::total_cmp);
        l.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        l
    };
    let (a, b) = (admissible(0), admissible(77));
    assert_eq!(a.len(), 1);
    assert_eq!(a.len(), b.len());
    assert!((a[0] - b[0]).abs() < 1e-6);
}

#[test]
fn oracle_on_werner_and_bell() {
    let o = ls_oracle(&werner(0.8), &OracleConfig::default()).unwrap();
    assert!((o.lambda - 0.3).abs() < 1e-4, "{}", o.lambda);
    let o = ls_oracle(&DensityMatrix::from_pure(&bell()), &OracleConfig::default()).unwrap();
    assert!(o.lambda.abs() < 1e-6);
    let e = ls_oracle(&DensityMatrix::maximally_mixed(), &OracleConfig::default()).unwrap_err();
    assert_eq!(e, OracleError::NotEntangled);
}

#[test]
fn feasible_weights_form_an_interval() {
    // at μ = 0 the remainder is ρ itself, which is not PPT; the feasible
    // set is an interval [μ_lo, μ_hi] rather than one starting at zero
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut nonempty = 0;
    for seed in 0..20 {
        let rho = random_density(4, seed).unwrap();
        let best = compute(&rho).unwrap().psi;
        let mut probes: Vec<Vec4> = (0..4).map(|_| *random_pure(&mut rng).amplitudes()).collect();
        if let Some(p) = best {
            probes.push(*p.amplitudes());
        }
        for psi in probes {
            let grid: Vec<bool> = (0..=1000)
                .map(|k| remainder_feasible(rho.matrix(), &psi, k as f64 / 1000.0, 1e-10))
                .collect();
            let flips = grid.windows(2).filter(|w| w[0] != w[1]).count();
            assert!(flips <= 2, "seed {seed}: {flips} flips");
            if grid.iter().any(|&g| g) {
                nonempty += 1;
                let lo = min_pure_weight(rho.matrix(), &psi, 1e-10).unwrap();
                let first = grid.iter().position(|&g| g).unwrap() as f64 / 1000.0;
                assert!(lo <= first + 1e-9 && lo >= first - 1e-3 - 1e-9);
            }
        }
    }
    assert!(nonempty >= 10);
}

#[test]
fn oracle_never_beats_the_algebraic_weight() {
    let mut states: Vec<DensityMatrix> = [0u64, 3, 5, 6]
        .iter()
        .map(|&s| random_density(4, s).unwrap())
        .collect();
    states.push(random_density(3, 2).unwrap());
    states.push(random_density(2, 4).unwrap());
    states.push(bell_with_flips());
    states.push(product_kernel_example(0));
    states.push(product_kernel_example(2));
    for rho in &states {
        let d = compute(rho).unwrap();
        let o = ls_oracle(rho, &OracleConfig::default()).unwrap();
        assert!(o.lambda <= d.lambda + 1e-4, "{} vs {}", o.lambda, d.lambda);
        assert!((o.lambda - d.lambda).abs() <= 1e-4, "{} vs {}", o.lambda, d.lambda);
        // the oracle's point is itself feasible
        assert!(remainder_feasible(rho.matrix(), o.psi.amplitudes(), 1.0 - o.lambda + 1e-9, 1e-9));
    }
}

#[test]
fn oracle_psi_matches_on_rank3_seed() {
    let rho = random_density(4, 3).unwrap();
    let d = compute(&rho).unwrap();
    let o = ls_oracle(&rho, &OracleConfig::default()).unwrap();
    assert!(o.psi.overlap(&d.psi.unwrap()) > 1.0 - 1e-4);
}
