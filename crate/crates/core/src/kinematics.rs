//! Position and momentum in a truncated Fock basis.
//!
//! `x = √(α/2)(a + a†)` and `p = i√(α/2)(a† − a)`. Truncation to `n` levels
//! breaks `[x, p] = iα` only in the last diagonal entry, so identities of
//! low-degree polynomials hold exactly on an upper-left block.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::propagator;
use crate::operator::{c, ComplexMatrix, HermitianOperator, C64};
use crate::state::QuantumState;
use crate::surd::SurdMatrix;

/// Levels at the top of the truncation that a safe state must avoid.
pub const BOUNDARY_LEVELS: usize = 4;
pub const SAFE_WEIGHT: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct FockTruncation {
    pub n_levels: usize,
    pub alpha: f64,
    /// Lowering operator `a`.
    pub ladder: ComplexMatrix,
    pub x_op: HermitianOperator,
    pub p_op: HermitianOperator,
}

pub fn build_fock(n_levels: usize, alpha: f64) -> Result<FockTruncation> {
    if n_levels < 2 {
        return Err(Error::DimTooSmall {
            min: 2,
            found: n_levels,
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    let n = n_levels;
    let ladder = ComplexMatrix::from_fn(n, n, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            C64::default()
        }
    });
    let s = (alpha / 2.0).sqrt();
    let raise = ladder.adjoint();
    let x = (&ladder + &raise) * c(s, 0.0);
    let p = (&raise - &ladder) * c(0.0, s);
    Ok(FockTruncation {
        n_levels,
        alpha,
        ladder,
        x_op: HermitianOperator::new(x)?,
        p_op: HermitianOperator::new(p)?,
    })
}

impl FockTruncation {
    pub fn dim(&self) -> usize {
        self.n_levels
    }

    /// Exact `(X, P)` with `x = √(α/2)·X` and `p = i√(α/2)·P`.
    pub fn exact_quadratures(&self) -> (SurdMatrix, SurdMatrix) {
        let a = SurdMatrix::lowering(self.n_levels);
        let ad = a.transpose();
        (a.add(&ad), ad.sub(&a))
    }

    /// Coherent state `e^{−|β|²/2} Σ βᵏ/√k! |k⟩`, renormalized on the truncation.
    pub fn coherent_state(&self, beta: C64) -> Result<QuantumState> {
        let mut amps = Vec::with_capacity(self.n_levels);
        let mut term = c((-beta.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..self.n_levels {
            if k > 0 {
                term *= beta / (k as f64).sqrt();
            }
            amps.push(term);
        }
        QuantumState::normalized(amps)
    }

    /// Probability on the top `BOUNDARY_LEVELS` levels.
    pub fn boundary_weight(&self, v: &QuantumState) -> Result<f64> {
        if v.dim() != self.n_levels {
            return Err(Error::DimMismatch {
                expected: self.n_levels,
                found: v.dim(),
            });
        }
        let lo = self.n_levels.saturating_sub(BOUNDARY_LEVELS);
        Ok(v.weight_on(lo..self.n_levels))
    }

    pub fn check_safe(&self, v: &QuantumState) -> Result<()> {
        let w = self.boundary_weight(v)?;
        if w > SAFE_WEIGHT {
            return Err(Error::UnsafeState { boundary_weight: w });
        }
        Ok(())
    }
}

/// `[x, p] − iα·I`, computed in exact ladder arithmetic and scaled at the end.
pub fn canonical_defect(f: &FockTruncation) -> ComplexMatrix {
    let (x, p) = f.exact_quadratures();
    // [x, p] = i(α/2)[X, P]
    let comm = x.commutator(&p);
    let mut m = comm.to_complex(c(0.0, f.alpha / 2.0));
    for k in 0..f.n_levels {
        m[(k, k)] -= c(0.0, f.alpha);
    }
    m
}

/// `exp(−iεp/α)`; translates `⟨x⟩` by `ε` on safe states.
pub fn displacement_unitary(f: &FockTruncation, eps: f64) -> Result<ComplexMatrix> {
    propagator(&f.p_op, eps, f.alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DisplacementCheck {
    /// `|⟨x⟩' − ⟨x⟩ − ε|`
    pub shift_residual: f64,
    /// `|⟨p⟩' − ⟨p⟩|`
    pub momentum_residual: f64,
}

pub fn check_displacement(f: &FockTruncation, v: &QuantumState, eps: f64) -> Result<DisplacementCheck> {
    f.check_safe(v)?;
    let moved = v.apply(&displacement_unitary(f, eps)?)?;
    Ok(DisplacementCheck {
        shift_residual: (f.x_op.expectation(&moved)? - f.x_op.expectation(v)? - eps).abs(),
        momentum_residual: (f.p_op.expectation(&moved)? - f.p_op.expectation(v)?).abs(),
    })
}

/// `|(⟨x⟩(t+dt) − ⟨x⟩(t))/dt − c|` under `H = c·p`.
pub fn photon_drift_check(f: &FockTruncation, speed: f64, v: &QuantumState, dt: f64) -> Result<f64> {
    f.check_safe(v)?;
    if dt == 0.0 {
        return Err(Error::InvalidArgument("dt must be nonzero".into()));
    }
    let h = f.p_op.scale(speed);
    let later = v.apply(&propagator(&h, dt, f.alpha)?)?;
    let rate = (f.x_op.expectation(&later)? - f.x_op.expectation(v)?) / dt;
    Ok((rate - speed).abs())
}

/// Largest deviation of `[x, p/α]` from `i·I` on rows and columns `0..n−2`.
pub fn displacement_commutator_residual(f: &FockTruncation) -> Result<f64> {
    let comm = f.x_op.commutator_with(&f.p_op.scale(1.0 / f.alpha))?;
    let safe = f.n_levels.saturating_sub(2);
    let mut worst: f64 = 0.0;
    for i in 0..safe {
        for j in 0..safe {
            let target = if i == j { c(0.0, 1.0) } else { C64::default() };
            worst = worst.max((comm[(i, j)] - target).norm());
        }
    }
    Ok(worst)
}

/// Position-space Gaussian profile expressed in the truncated basis: the
/// ground state displaced to `x0` and kicked to momentum `p0`.
pub fn gaussian_packet(f: &FockTruncation, x0: f64, p0: f64) -> Result<QuantumState> {
    // β = (x0 + i p0) / √(2α) for the chosen quadrature scaling
    let beta = c(x0, p0) / (2.0 * f.alpha).sqrt();
    f.coherent_state(beta)
}
