//! Seeded random operators and states for sweeps and property checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{c, ComplexMatrix, HermitianOperator, C64};
use crate::state::QuantumState;

/// Independent generator for work unit `index` under a run seed. Derived
/// streams do not depend on how the units are scheduled.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// GUE-like matrix with unit-variance entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let m = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    HermitianOperator::from_hermitian_part(&m).expect("finite square matrix")
}

/// Real symmetric variant, handy for commuting families built on a shared basis.
pub fn random_real_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HermitianOperator {
    let m = ComplexMatrix::from_fn(n, n, |_, _| c(rng.sample(StandardNormal), 0.0));
    HermitianOperator::from_hermitian_part(&m).expect("finite square matrix")
}

/// Uniform on the unit sphere.
pub fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QuantumState {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    QuantumState::normalized(v).expect("nonzero gaussian vector")
}

/// Random unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_hermitian(n, rng)
        .spectrum()
        .expect("jacobi converges")
        .eigenvectors
        .clone()
}

/// Operator with the given eigenvalues in a random basis.
pub fn with_spectrum<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> HermitianOperator {
    let u = random_unitary(values.len(), rng);
    HermitianOperator::from_eigensystem(values, &u).expect("unitary basis")
}
