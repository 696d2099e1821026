#![allow(dead_code)]

use bsa_core::mat4::{outer, real, Mat4};
use bsa_core::qstate::random_pure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use bsa_core::{DensityMatrix, PureState};

pub fn bell() -> PureState {
    let s = 0.5f64.sqrt();
    PureState::from_amplitudes([real(s), real(0.0), real(0.0), real(s)]).unwrap()
}

pub fn basis(k: usize) -> PureState {
    let mut a = [real(0.0); 4];
    a[k] = real(1.0);
    PureState::from_amplitudes(a).unwrap()
}

/// `x|φ⟩⟨φ| + (1−x)I/4`.
pub fn noisy(phi: &PureState, x: f64) -> DensityMatrix {
    DensityMatrix::new(phi.projector() * real(x) + Mat4::identity() * real((1.0 - x) / 4.0)).unwrap()
}

pub fn werner(y: f64) -> DensityMatrix {
    noisy(&bell(), y)
}

pub fn schmidt_state(p: f64) -> PureState {
    PureState::from_amplitudes([real(p.sqrt()), real(0.0), real(0.0), real((1.0 - p).sqrt())]).unwrap()
}

pub fn mix(parts: &[(f64, &PureState)]) -> DensityMatrix {
    let m = parts
        .iter()
        .fold(Mat4::zeros(), |acc, (w, p)| acc + p.projector() * real(*w));
    DensityMatrix::new(m).unwrap()
}

/// `0.5·Bell + 0.3|01⟩⟨01| + 0.2|10⟩⟨10|`.
pub fn bell_with_flips() -> DensityMatrix {
    mix(&[(0.5, &bell()), (0.3, &basis(1)), (0.2, &basis(2))])
}

/// Rank-3 state whose kernel is `|00⟩`: three random pure states with
/// the `|00⟩` amplitude removed, weighted 0.5, 0.3, 0.2.
pub fn product_kernel_example(seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Mat4::zeros();
    for w in [0.5, 0.3, 0.2] {
        let mut v = *random_pure(&mut rng).amplitudes();
        v[0] = real(0.0);
        let v = v.normalize();
        m += outer(&v, &v) * real(w);
    }
    DensityMatrix::new(m).unwrap()
}
