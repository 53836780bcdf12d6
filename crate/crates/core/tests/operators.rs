use avcp::operator::{c, max_diff, pauli, HermitianOperator};
use avcp::random::{random_hermitian, random_state, stream_rng, with_spectrum};
use avcp::state::ProjectiveMeasurement;
use avcp::{ComplexMatrix, QuantumState};
use proptest::prelude::*;

fn power_trace(m: &ComplexMatrix, k: u32) -> f64 {
    let mut p = ComplexMatrix::identity(m.nrows(), m.nrows());
    for _ in 0..k {
        p = &p * m;
    }
    p.trace().re
}

// For n ≤ 4 the power sums tr(Aᵏ), k = 1..n, fix the characteristic
// polynomial and hence the spectrum.
#[test]
fn spectrum_matches_power_sums() {
    let mut rng = stream_rng(101, 0);
    for k in 0..40 {
        let n = 1 + k % 4;
        let a = random_hermitian(n, &mut rng);
        let s = a.spectrum().unwrap();
        for p in 1..=n as u32 {
            let want = power_trace(a.matrix(), p);
            let got: f64 = s.eigenvalues.iter().map(|l| l.powi(p as i32)).sum();
            assert!((want - got).abs() <= 1e-10 * want.abs().max(1.0), "n={n} p={p}: {want} vs {got}");
        }
        for &l in &s.eigenvalues {
            let shifted = a.matrix() - ComplexMatrix::identity(n, n) * c(l, 0.0);
            let det = shifted.determinant().norm();
            assert!(det <= 1e-9 * a.norm_max().max(1.0).powi(n as i32), "det {det}");
        }
    }
}

#[test]
fn two_by_two_closed_form() {
    let mut rng = stream_rng(102, 0);
    for _ in 0..20 {
        let a = random_hermitian(2, &mut rng);
        let m = a.matrix();
        let (p, q) = (m[(0, 0)].re, m[(1, 1)].re);
        let r = ((p - q).powi(2) / 4.0 + m[(0, 1)].norm_sqr()).sqrt();
        let mid = (p + q) / 2.0;
        let s = a.spectrum().unwrap();
        assert!((s.eigenvalues[0] - (mid - r)).abs() < 1e-12);
        assert!((s.eigenvalues[1] - (mid + r)).abs() < 1e-12);
    }
}

#[test]
fn degenerate_spectrum_groups() {
    let mut rng = stream_rng(103, 0);
    let a = with_spectrum(&[2.0, -1.0, 2.0, 2.0, -1.0], &mut rng);
    let m = ProjectiveMeasurement::new(&a).unwrap();
    assert_eq!(m.outcome_count(), 2);
    let v = random_state(5, &mut rng);
    let p = m.probabilities(&v).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn born_frequencies() {
    let mut rng = stream_rng(104, 0);
    let a = random_hermitian(4, &mut rng);
    let v = random_state(4, &mut rng);
    let m = ProjectiveMeasurement::new(&a).unwrap();
    let p = m.probabilities(&v).unwrap();
    let n = 40_000;
    let mut counts = vec![0usize; p.len()];
    for _ in 0..n {
        counts[m.measure(&v, &mut rng).unwrap().outcome_index] += 1;
    }
    for (k, &pk) in p.iter().enumerate() {
        let sd = (pk * (1.0 - pk) / n as f64).sqrt();
        let freq = counts[k] as f64 / n as f64;
        assert!((freq - pk).abs() <= 5.0 * sd + 1e-12, "outcome {k}: {freq} vs {pk}");
    }
}

#[test]
fn sigma_x_measurement_on_up() {
    let x = HermitianOperator::new(pauli::x()).unwrap();
    let up = QuantumState::basis(2, 0).unwrap();
    let m = ProjectiveMeasurement::new(&x).unwrap();
    assert_eq!(m.values().len(), 2);
    for p in m.probabilities(&up).unwrap() {
        assert!((p - 0.5).abs() < 1e-15);
    }
    assert!(x.expectation(&up).unwrap().abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = stream_rng(seed, 0);
        let a = random_hermitian(n, &mut rng);
        let s = a.spectrum().unwrap();
        let back = HermitianOperator::from_eigensystem(&s.eigenvalues, &s.eigenvectors).unwrap();
        prop_assert!(max_diff(back.matrix(), a.matrix()) <= 1e-10 * a.norm_max().max(1.0));
    }

    #[test]
    fn calculus_is_a_homomorphism(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = stream_rng(seed, 1);
        let a = random_hermitian(n, &mut rng);
        let f = a.apply_fn(|x| x.sin()).unwrap();
        let g = a.apply_fn(|x| x * x + 1.0).unwrap();
        let fg = a.apply_fn(|x| x.sin() * (x * x + 1.0)).unwrap();
        let scale = a.norm_max().max(1.0).powi(2);
        prop_assert!(max_diff(fg.matrix(), &(f.matrix() * g.matrix())) <= 1e-10 * scale);
        let id = a.apply_fn(|x| x).unwrap();
        prop_assert!(max_diff(id.matrix(), a.matrix()) <= 1e-10 * scale);
    }

    #[test]
    fn global_phase_is_invisible(seed in any::<u64>(), n in 1usize..=6, phi in 0.0f64..6.3) {
        let mut rng = stream_rng(seed, 2);
        let a = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let w = v.with_global_phase(phi);
        let m = ProjectiveMeasurement::new(&a).unwrap();
        for (p, q) in m.probabilities(&v).unwrap().iter().zip(m.probabilities(&w).unwrap()) {
            prop_assert!((p - q).abs() <= 1e-12);
        }
        prop_assert!((a.expectation(&v).unwrap() - a.expectation(&w).unwrap()).abs() <= 1e-12 * a.norm_max().max(1.0));
    }

    #[test]
    fn collapse_lands_in_eigenspace(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = stream_rng(seed, 3);
        let a = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let m = ProjectiveMeasurement::new(&a).unwrap();
        let out = m.measure(&v, &mut rng).unwrap();
        let w = out.collapsed.amplitudes();
        let r = a.matrix() * w - w * c(out.value, 0.0);
        prop_assert!(r.iter().map(|z| z.norm()).fold(0.0, f64::max) <= 1e-10 * a.norm_max().max(1.0));
        prop_assert!((out.collapsed.norm() - 1.0).abs() <= 1e-12);
    }
}
