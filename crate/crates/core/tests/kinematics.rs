use avcp::kinematics::{
    build_fock, canonical_defect, check_displacement, displacement_unitary, gaussian_packet, photon_drift_check,
};
use avcp::operator::{c, identity, max_diff};
use avcp::verify::{displacement_convergence, kinematics_report, non_decreasing_steps};
use avcp::{ComplexMatrix, Error, QuantumState, C64};

// Floating-point commutator, independent of the exact ladder path.
fn float_defect(n: usize, alpha: f64) -> ComplexMatrix {
    let f = build_fock(n, alpha).unwrap();
    let (x, p) = (f.x_op.matrix(), f.p_op.matrix());
    x * p - p * x - identity(n) * c(0.0, alpha)
}

#[test]
fn defect_small_cases() {
    let d = canonical_defect(&build_fock(2, 1.0).unwrap());
    let want = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(0.0, -2.0)]));
    assert_eq!(d, want);
    let d = canonical_defect(&build_fock(5, 1.0).unwrap());
    for i in 0..5 {
        for j in 0..5 {
            let want = if (i, j) == (4, 4) { c(0.0, -5.0) } else { C64::default() };
            assert_eq!(d[(i, j)], want, "({i},{j})");
        }
    }
}

#[test]
fn defect_is_confined_to_the_corner() {
    for alpha in [1.0, 0.3] {
        for n in 2..=64 {
            let d = canonical_defect(&build_fock(n, alpha).unwrap());
            for i in 0..n {
                for j in 0..n {
                    if (i, j) != (n - 1, n - 1) {
                        assert_eq!(d[(i, j)].norm(), 0.0, "n={n} ({i},{j})");
                    }
                }
            }
            let corner = d[(n - 1, n - 1)];
            assert!((corner - c(0.0, -alpha * n as f64)).norm() <= 1e-12 * n as f64);
            assert!(max_diff(&d, &float_defect(n, alpha)) <= 1e-11 * n as f64);
        }
    }
}

#[test]
fn zero_displacement_is_identity() {
    let f = build_fock(16, 1.0).unwrap();
    assert!(max_diff(&displacement_unitary(&f, 0.0).unwrap(), &identity(16)) < 1e-14);
}

#[test]
fn displacement_on_a_safe_packet() {
    let f = build_fock(64, 1.0).unwrap();
    let v = gaussian_packet(&f, 0.4, -0.3).unwrap();
    assert!((f.x_op.expectation(&v).unwrap() - 0.4).abs() < 1e-10);
    assert!((f.p_op.expectation(&v).unwrap() + 0.3).abs() < 1e-10);
    for eps in [0.05, 0.1, 0.5] {
        let d = check_displacement(&f, &v, eps).unwrap();
        assert!(d.shift_residual <= 1e-6, "{eps}: {d:?}");
        assert!(d.momentum_residual <= 1e-10, "{eps}: {d:?}");
    }
}

#[test]
fn truncations_agree_on_the_shift() {
    let shifted = |n| {
        let f = build_fock(n, 1.0).unwrap();
        let v = gaussian_packet(&f, 0.4, -0.3).unwrap();
        let moved = v.apply(&displacement_unitary(&f, 0.1).unwrap()).unwrap();
        f.x_op.expectation(&moved).unwrap()
    };
    assert!((shifted(64) - shifted(128)).abs() < 1e-10);
}

#[test]
fn report_meets_tolerances() {
    for alpha in [1.0, 0.5] {
        let r = kinematics_report(64, alpha).unwrap();
        assert_eq!(r.defect_off_corner, 0.0);
        assert!(r.defect_corner_error <= 1e-12 * 64.0);
        assert!(r.displacement_commutator <= 1e-10);
        assert!(r.shift_residual <= 1e-6);
        assert!(r.momentum_residual <= 1e-10);
        assert!(r.drift_residual <= 1e-5, "{r:?}");
    }
}

#[test]
fn shift_converges_with_levels() {
    let seq: Vec<f64> = displacement_convergence(1.0).unwrap().into_iter().map(|(_, r)| r).collect();
    assert_eq!(non_decreasing_steps(&seq, 1e-12), 0, "{seq:?}");
    assert!(seq[0] > seq[3]);
}

#[test]
fn drift_without_motion() {
    let f = build_fock(64, 1.0).unwrap();
    let v = gaussian_packet(&f, 0.4, -0.3).unwrap();
    assert!(photon_drift_check(&f, 0.0, &v, 1e-4).unwrap() <= 1e-10);
}

#[test]
fn boundary_heavy_states_are_refused() {
    let f = build_fock(16, 1.0).unwrap();
    let top = QuantumState::basis(16, 15).unwrap();
    assert!(matches!(check_displacement(&f, &top, 0.1), Err(Error::UnsafeState { .. })));
    assert!(matches!(photon_drift_check(&f, 1.0, &top, 1e-4), Err(Error::UnsafeState { .. })));
    let spread = QuantumState::from_real(&[1.0; 16]).unwrap();
    assert!(matches!(check_displacement(&f, &spread, 0.1), Err(Error::UnsafeState { .. })));
}
