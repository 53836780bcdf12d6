//! Unitary time evolution `U = exp(−iHΔt/α)` and its consistency checks.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, commutator, ComplexMatrix, HermitianOperator};
use crate::state::QuantumState;

/// Drift above this after an evolution indicates a broken propagator.
const NORM_GUARD: f64 = 1e-10;

pub fn propagator(h: &HermitianOperator, dt: f64, alpha: f64) -> Result<ComplexMatrix> {
    check_alpha(alpha)?;
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step {dt} is not finite")));
    }
    let spec = h.spectrum()?;
    let v = &spec.eigenvectors;
    let n = h.dim();
    let phased = ComplexMatrix::from_fn(n, n, |i, j| {
        v[(i, j)] * c(0.0, -spec.eigenvalues[j] * dt / alpha).exp()
    });
    Ok(phased * v.adjoint())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchedulePiece {
    pub t0: f64,
    pub t1: f64,
    pub operator: HermitianOperator,
}

type HamiltonianFn = Arc<dyn Fn(f64) -> HermitianOperator + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Pieces(Vec<SchedulePiece>),
    Function {
        t0: f64,
        t1: f64,
        dim: usize,
        h: HamiltonianFn,
    },
}

/// Hamiltonian over a time interval: piecewise constant, or an arbitrary
/// function of time sampled at slice midpoints.
#[derive(Clone)]
pub struct HamiltonianSchedule {
    kind: Kind,
    pub alpha: f64,
}

impl fmt::Debug for HamiltonianSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Pieces(p) => f
                .debug_struct("HamiltonianSchedule")
                .field("pieces", &p.len())
                .field("alpha", &self.alpha)
                .finish(),
            Kind::Function { t0, t1, dim, .. } => f
                .debug_struct("HamiltonianSchedule")
                .field("t0", t0)
                .field("t1", t1)
                .field("dim", dim)
                .field("alpha", &self.alpha)
                .finish(),
        }
    }
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

impl HamiltonianSchedule {
    pub fn pieces(pieces: Vec<SchedulePiece>, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let Some(first) = pieces.first() else {
            return Err(Error::InvalidArgument("empty schedule".into()));
        };
        let dim = first.operator.dim();
        for (k, p) in pieces.iter().enumerate() {
            if !(p.t0.is_finite() && p.t1.is_finite()) || p.t1 < p.t0 {
                return Err(Error::InvalidArgument(format!(
                    "piece {k} has invalid interval [{}, {}]",
                    p.t0, p.t1
                )));
            }
            if p.operator.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: p.operator.dim(),
                });
            }
            if k > 0 && !same_time(pieces[k - 1].t1, p.t0) {
                return Err(Error::ScheduleGap { at: pieces[k - 1].t1 });
            }
        }
        Ok(Self {
            kind: Kind::Pieces(pieces),
            alpha,
        })
    }

    pub fn constant(h: HermitianOperator, t0: f64, t1: f64, alpha: f64) -> Result<Self> {
        Self::pieces(vec![SchedulePiece { t0, t1, operator: h }], alpha)
    }

    pub fn from_fn(
        t0: f64,
        t1: f64,
        dim: usize,
        alpha: f64,
        h: impl Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
            return Err(Error::InvalidArgument(format!("invalid interval [{t0}, {t1}]")));
        }
        Ok(Self {
            kind: Kind::Function {
                t0,
                t1,
                dim,
                h: Arc::new(h),
            },
            alpha,
        })
    }

    pub fn start(&self) -> f64 {
        match &self.kind {
            Kind::Pieces(p) => p[0].t0,
            Kind::Function { t0, .. } => *t0,
        }
    }

    pub fn end(&self) -> f64 {
        match &self.kind {
            Kind::Pieces(p) => p[p.len() - 1].t1,
            Kind::Function { t1, .. } => *t1,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            Kind::Pieces(p) => p[0].operator.dim(),
            Kind::Function { dim, .. } => *dim,
        }
    }

    /// Piece list, if the schedule is piecewise constant.
    pub fn as_pieces(&self) -> Option<&[SchedulePiece]> {
        match &self.kind {
            Kind::Pieces(p) => Some(p),
            Kind::Function { .. } => None,
        }
    }

    /// The same schedule cut off at `t`.
    pub fn until(&self, t: f64) -> Result<Self> {
        if t < self.start() || t > self.end() + 1e-12 * (1.0 + t.abs()) {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside schedule [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let kind = match &self.kind {
            Kind::Pieces(ps) => {
                let mut out = Vec::new();
                for p in ps {
                    if p.t0 >= t && !out.is_empty() {
                        break;
                    }
                    let mut p = p.clone();
                    p.t1 = p.t1.min(t);
                    let done = p.t1 >= t;
                    out.push(p);
                    if done {
                        break;
                    }
                }
                Kind::Pieces(out)
            }
            Kind::Function { t0, dim, h, .. } => Kind::Function {
                t0: *t0,
                t1: t,
                dim: *dim,
                h: h.clone(),
            },
        };
        Ok(Self {
            kind,
            alpha: self.alpha,
        })
    }
}

/// Ordered product of slice propagators, each slice using the Hamiltonian at
/// its midpoint. Every piece (or the whole interval of a function schedule)
/// is cut into `steps` slices.
///
/// The result is not renormalized; a norm drift above `1e-10` is an error.
pub fn evolve(v: &QuantumState, sched: &HamiltonianSchedule, steps: usize) -> Result<QuantumState> {
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    if v.dim() != sched.dim() {
        return Err(Error::DimMismatch {
            expected: sched.dim(),
            found: v.dim(),
        });
    }
    let alpha = sched.alpha;
    let mut amps = v.amplitudes().clone();
    match &sched.kind {
        Kind::Pieces(pieces) => {
            for p in pieces {
                let dt = (p.t1 - p.t0) / steps as f64;
                if dt == 0.0 {
                    continue;
                }
                // every slice of a constant piece has the same propagator
                let u = propagator(&p.operator, dt, alpha)?;
                for _ in 0..steps {
                    amps = &u * amps;
                }
            }
        }
        Kind::Function { t0, t1, h, .. } => {
            let dt = (t1 - t0) / steps as f64;
            if dt != 0.0 {
                for k in 0..steps {
                    let mid = t0 + (k as f64 + 0.5) * dt;
                    let u = propagator(&h(mid), dt, alpha)?;
                    amps = &u * amps;
                }
            }
        }
    }
    let norm = amps.norm();
    if (norm - 1.0).abs() > NORM_GUARD {
        return Err(Error::NotNormalized { norm });
    }
    QuantumState::from_raw(amps, v.factor_dims().to_vec())
}

/// On-disk input of `avcp evolve`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolveFile {
    pub state: QuantumState,
    pub schedule: Vec<SchedulePiece>,
    #[serde(default = "one")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

fn one() -> usize {
    1
}

impl EvolveFile {
    pub fn run(self, default_alpha: f64) -> Result<QuantumState> {
        let sched = HamiltonianSchedule::pieces(self.schedule, self.alpha.unwrap_or(default_alpha))?;
        evolve(&self.state, &sched, self.steps)
    }
}

/// `|⟨H⟩ after − ⟨H⟩ before|` under `exp(−iH dt/α)`.
pub fn check_energy_conservation(
    v: &QuantumState,
    h: &HermitianOperator,
    dt: f64,
    alpha: f64,
) -> Result<f64> {
    let before = h.expectation(v)?;
    let after = h.expectation(&v.apply(&propagator(h, dt, alpha)?)?)?;
    Ok((after - before).abs())
}

/// `|(⟨F⟩(t+dt) − ⟨F⟩(t))/dt − (i/α)⟨[H,F]⟩(t)|`, first order in `dt`.
pub fn check_ehrenfest(
    f: &HermitianOperator,
    h: &HermitianOperator,
    v: &QuantumState,
    dt: f64,
    alpha: f64,
) -> Result<f64> {
    if dt == 0.0 {
        return Err(Error::InvalidArgument("dt must be nonzero".into()));
    }
    let before = f.expectation(v)?;
    let after = f.expectation(&v.apply(&propagator(h, dt, alpha)?)?)?;
    let comm = commutator(h.matrix(), f.matrix())?;
    let amps = v.amplitudes();
    let z = amps.dotc(&(comm * amps));
    let predicted = (c(0.0, 1.0 / alpha) * z).re;
    Ok(((after - before) / dt - predicted).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{identity, max_diff, pauli};

    #[test]
    fn zero_hamiltonian_is_identity() {
        let u = propagator(&HermitianOperator::zeros(3), 0.7, 1.0).unwrap();
        assert_eq!(u, identity(3));
    }

    #[test]
    fn eigenstate_picks_up_phase() {
        let h = HermitianOperator::from_real_diagonal(&[1.5, -0.5]);
        let (dt, alpha) = (0.3, 2.0);
        let u = propagator(&h, dt, alpha).unwrap();
        let expected = c(0.0, -1.5 * dt / alpha).exp();
        assert!((u[(0, 0)] - expected).norm() < 1e-15);
        assert_eq!(u[(1, 0)], c(0.0, 0.0));
    }

    #[test]
    fn pauli_x_half_turn() {
        // exp(−iπσx) = cos π · I
        let h = HermitianOperator::new(pauli::x()).unwrap();
        let u = propagator(&h, std::f64::consts::PI, 1.0).unwrap();
        assert!(max_diff(&u, &(identity(2) * c(-1.0, 0.0))) < 1e-14);
    }

    #[test]
    fn schedule_gaps_are_rejected() {
        let h = HermitianOperator::new(pauli::z()).unwrap();
        let pieces = vec![
            SchedulePiece { t0: 0.0, t1: 1.0, operator: h.clone() },
            SchedulePiece { t0: 1.5, t1: 2.0, operator: h },
        ];
        assert!(matches!(
            HamiltonianSchedule::pieces(pieces, 1.0),
            Err(Error::ScheduleGap { .. })
        ));
    }

    #[test]
    fn zero_duration_schedule_is_identity() {
        let h = HermitianOperator::new(pauli::x()).unwrap();
        let s = HamiltonianSchedule::constant(h, 2.0, 2.0, 1.0).unwrap();
        let v = QuantumState::from_real(&[0.6, 0.8]).unwrap();
        assert_eq!(evolve(&v, &s, 5).unwrap(), v);
    }

    #[test]
    fn truncation_keeps_prefix() {
        let h = HermitianOperator::new(pauli::x()).unwrap();
        let z = HermitianOperator::new(pauli::z()).unwrap();
        let s = HamiltonianSchedule::pieces(
            vec![
                SchedulePiece { t0: 0.0, t1: 1.0, operator: h },
                SchedulePiece { t0: 1.0, t1: 3.0, operator: z },
            ],
            1.0,
        )
        .unwrap();
        let cut = s.until(2.0).unwrap();
        let p = cut.as_pieces().unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p[1].t1, 2.0);
        assert_eq!(s.until(0.5).unwrap().as_pieces().unwrap().len(), 1);
        assert!(s.until(4.0).is_err());
    }
}
