//! Spin-j angular momentum operators and rotation checks.
//!
//! Basis index `k` carries `m = j − k`, so `Lz` is diagonal with descending
//! entries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::propagator;
use crate::operator::{c, identity, kron, max_norm, ComplexMatrix, HermitianOperator, C64};
use crate::state::QuantumState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The next two axes in cyclic order.
    pub fn cyclic(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpinTriple {
    pub n: usize,
    pub alpha: f64,
    pub lx: HermitianOperator,
    pub ly: HermitianOperator,
    pub lz: HermitianOperator,
}

pub fn spin_operators(n: usize, alpha: f64) -> Result<SpinTriple> {
    if n < 2 {
        return Err(Error::DimTooSmall { min: 2, found: n });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let j = (n as f64 - 1.0) / 2.0;
    let m = |k: usize| j - k as f64;
    // L+ raises m, i.e. moves index k to k − 1
    let raise = ComplexMatrix::from_fn(n, n, |r, col| {
        if col == r + 1 {
            let mm = m(col);
            c(alpha * (j * (j + 1.0) - mm * (mm + 1.0)).sqrt(), 0.0)
        } else {
            C64::default()
        }
    });
    let lower = raise.adjoint();
    let lx = (&raise + &lower) * c(0.5, 0.0);
    let ly = (&raise - &lower) * c(0.0, -0.5);
    let lz: Vec<f64> = (0..n).map(|k| alpha * m(k)).collect();
    Ok(SpinTriple {
        n,
        alpha,
        lx: HermitianOperator::new(lx)?,
        ly: HermitianOperator::new(ly)?,
        lz: HermitianOperator::from_real_diagonal(&lz),
    })
}

impl SpinTriple {
    pub fn j(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    pub fn component(&self, axis: Axis) -> &HermitianOperator {
        match axis {
            Axis::X => &self.lx,
            Axis::Y => &self.ly,
            Axis::Z => &self.lz,
        }
    }

    pub fn casimir(&self) -> ComplexMatrix {
        let sq = |l: &HermitianOperator| l.matrix() * l.matrix();
        sq(&self.lx) + sq(&self.ly) + sq(&self.lz)
    }
}

/// `R_axis = L_axis / α`.
pub fn rotation_generator(axis: Axis, t: &SpinTriple) -> HermitianOperator {
    t.component(axis).scale(1.0 / t.alpha)
}

pub fn expectation_vector(t: &SpinTriple, v: &QuantumState) -> Result<[f64; 3]> {
    Ok([
        t.lx.expectation(v)?,
        t.ly.expectation(v)?,
        t.lz.expectation(v)?,
    ])
}

fn max_abs3(v: [f64; 3]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Largest deviation from `[La, Lb] = iα Lc` over the cyclic triples.
pub fn commutator_residual(t: &SpinTriple) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in Axis::ALL {
        let (b, cc) = a.cyclic();
        let comm = t.component(a).commutator_with(t.component(b))?;
        let target = t.component(cc).matrix() * c(0.0, t.alpha);
        worst = worst.max(max_norm(&(comm - target)));
    }
    Ok(worst)
}

/// Deviation of `Lx² + Ly² + Lz²` from `α² j(j+1) I`.
pub fn casimir_residual(t: &SpinTriple) -> f64 {
    let j = t.j();
    let target = identity(t.n) * c(t.alpha * t.alpha * j * (j + 1.0), 0.0);
    max_norm(&(t.casimir() - target))
}

/// Largest deviation over `[Ra, Lb] = iLc`, `[Ra, Lc] = −iLb`, `[Ra, La] = 0`.
pub fn generator_residual(t: &SpinTriple) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in Axis::ALL {
        let (b, cc) = a.cyclic();
        let r = rotation_generator(a, t);
        let lb = t.component(b).matrix();
        let lc = t.component(cc).matrix();
        let checks = [
            (r.commutator_with(t.component(b))?, lc * c(0.0, 1.0)),
            (r.commutator_with(t.component(cc))?, lb * c(0.0, -1.0)),
            (r.commutator_with(t.component(a))?, ComplexMatrix::zeros(t.n, t.n)),
        ];
        for (got, want) in checks {
            worst = worst.max(max_norm(&(got - want)));
        }
    }
    Ok(worst)
}

/// Max-norm of
/// `proj(U1 U2 v) − proj(U2 U1 v) − (proj(U3 v) − proj(v))`
/// with `U1 = e^{−iεLx/α}`, `U2 = e^{−iεLy/α}`, `U3 = e^{−iε²Lz/α}`.
pub fn check_rotation_identity(t: &SpinTriple, v: &QuantumState, eps: f64) -> Result<f64> {
    let u1 = propagator(&t.lx, eps, t.alpha)?;
    let u2 = propagator(&t.ly, eps, t.alpha)?;
    let u3 = propagator(&t.lz, eps * eps, t.alpha)?;
    let p12 = expectation_vector(t, &v.apply(&(&u1 * &u2))?)?;
    let p21 = expectation_vector(t, &v.apply(&(&u2 * &u1))?)?;
    let p3 = expectation_vector(t, &v.apply(&u3)?)?;
    let p0 = expectation_vector(t, v)?;
    Ok(max_abs3([0, 1, 2].map(|k| p12[k] - p21[k] - (p3[k] - p0[k]))))
}

/// Residual of the first-order frame rotation about z:
/// `⟨L⟩' = [[1, −ε, 0], [ε, 1, 0], [0, 0, 1]] ⟨L⟩` with `v' = e^{−iεRz} v`.
pub fn check_frame_rotation_covariance(t: &SpinTriple, v: &QuantumState, eps: f64) -> Result<f64> {
    let u = propagator(&rotation_generator(Axis::Z, t), eps, 1.0)?;
    let after = expectation_vector(t, &v.apply(&u)?)?;
    let [x, y, z] = expectation_vector(t, v)?;
    let predicted = [x - eps * y, eps * x + y, z];
    Ok(max_abs3([0, 1, 2].map(|k| after[k] - predicted[k])))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutantReport {
    /// Dimension of the space of matrices commuting with Lx, Ly, Lz.
    pub dimension: usize,
    /// Largest relative distance of a commutant element from a scalar matrix.
    pub scalar_residual: f64,
}

/// Null space of `Σ_a K_a†K_a`, where `K_a vec(X) = vec([L_a, X])`.
pub fn commutant(t: &SpinTriple) -> Result<CommutantReport> {
    let n = t.n;
    let id = identity(n);
    let mut gram = ComplexMatrix::zeros(n * n, n * n);
    for a in Axis::ALL {
        let l = t.component(a).matrix();
        let k = kron(&id, l) - kron(&l.transpose(), &id);
        gram += k.adjoint() * k;
    }
    let gram = HermitianOperator::from_hermitian_part(&gram)?;
    let spec = gram.spectrum()?;
    let top = spec.eigenvalues.last().copied().unwrap_or(0.0).abs().max(1.0);
    let mut dimension = 0;
    let mut scalar_residual: f64 = 0.0;
    for (k, &lambda) in spec.eigenvalues.iter().enumerate() {
        if lambda.abs() > 1e-9 * top {
            continue;
        }
        dimension += 1;
        // column-stacked vec(X) back to X
        let col = spec.eigenvectors.column(k);
        let x = ComplexMatrix::from_fn(n, n, |i, j| col[j * n + i]);
        let mean = x.trace() / n as f64;
        let dev = &x - &id * mean;
        scalar_residual = scalar_residual.max(max_norm(&dev) / max_norm(&x));
    }
    Ok(CommutantReport {
        dimension,
        scalar_residual,
    })
}

/// `‖e^{−2πi Lz/α} − (±I)‖_max`, `+` for integer `j`.
pub fn full_turn_residual(t: &SpinTriple) -> Result<f64> {
    let u = propagator(&t.lz, 2.0 * std::f64::consts::PI, t.alpha)?;
    let sign = if t.n % 2 == 1 { 1.0 } else { -1.0 };
    Ok(max_norm(&(u - identity(t.n) * c(sign, 0.0))))
}
