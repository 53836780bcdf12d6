//! Cyclic Jacobi diagonalization of complex Hermitian matrices.
//!
//! Each rotation annihilates one off-diagonal pair `(p, q)`. For a complex
//! entry `a_pq = |a_pq| e^{iφ}` the rotation is the real Jacobi rotation
//! conjugated by the phase `diag(1, e^{-iφ})`, so the diagonal stays real.

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::operator::{c, ComplexMatrix, C64};

pub const MAX_SWEEPS: usize = 100;
/// Convergence when the off-diagonal Frobenius norm drops below this times `‖A‖_F`.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-13;
/// Eigenvalues closer than this times `max(1, ‖A‖)` form one outcome.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// One distinct measurement outcome: a run of (nearly) equal eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeGroup {
    pub value: f64,
    pub indices: Range<usize>,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
    pub groups: Vec<OutcomeGroup>,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Orthogonal projector onto the eigenspace of group `g`.
    pub fn projector(&self, g: usize) -> ComplexMatrix {
        let cols = self.groups[g].indices.clone();
        let v = self
            .eigenvectors
            .columns(cols.start, cols.end - cols.start)
            .into_owned();
        &v * v.adjoint()
    }
}

pub fn eigensystem(m: &ComplexMatrix) -> Result<Spectrum> {
    let (values, vectors) = jacobi(m)?;
    let n = values.len();

    let mut vectors = vectors;
    for k in 0..n {
        fix_phase(&mut vectors, k);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .total_cmp(&values[b])
            .then_with(|| lexicographic(&vectors, a, b))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| vectors[(i, order[j])]);

    let scale = eigenvalues.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let groups = group_outcomes(&eigenvalues, DEGENERACY_TOLERANCE * scale);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        groups,
    })
}

fn group_outcomes(values: &[f64], tol: f64) -> Vec<OutcomeGroup> {
    let mut groups = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            let run = &values[start..k];
            groups.push(OutcomeGroup {
                value: run.iter().sum::<f64>() / run.len() as f64,
                indices: start..k,
            });
            start = k;
        }
    }
    groups
}

/// Makes the first non-negligible component of column `k` real and positive.
fn fix_phase(v: &mut ComplexMatrix, k: usize) {
    let n = v.nrows();
    let Some(pivot) = (0..n).map(|i| v[(i, k)]).find(|z| z.norm() > 1e-8) else {
        return;
    };
    let phase = pivot.conj() / pivot.norm();
    for i in 0..n {
        v[(i, k)] *= phase;
    }
}

fn lexicographic(v: &ComplexMatrix, a: usize, b: usize) -> Ordering {
    for i in 0..v.nrows() {
        let (x, y) = (v[(i, a)], v[(i, b)]);
        let ord = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if ord != Ordering::Equal {
            return ord;
        }
    }
    Ordering::Equal
}

fn off_norm(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[i + j * n].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Unsorted eigenvalues and eigenvector columns.
fn jacobi(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    // column-major scratch copies; index (i, j) -> i + j*n
    let mut a: Vec<C64> = m.as_slice().to_vec();
    let mut v: Vec<C64> = ComplexMatrix::identity(n, n).as_slice().to_vec();
    for i in 0..n {
        a[i + i * n].im = 0.0;
    }

    let total = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let tol = OFF_DIAGONAL_TOLERANCE * total;
    let mut off = off_norm(&a, n);
    let mut sweeps = 0;
    while off > tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
        sweeps += 1;
        off = off_norm(&a, n);
    }

    let values = (0..n).map(|i| a[i + i * n].re).collect();
    Ok((values, ComplexMatrix::from_column_slice(n, n, &v)))
}

fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let apq = a[p + q * n];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[p + p * n].re;
    let aqq = a[q + q * n].re;
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + theta.hypot(1.0));
        if theta < 0.0 {
            -t
        } else {
            t
        }
    };
    let cs = 1.0 / t.hypot(1.0);
    let sn = t * cs;

    let g_pp = c(cs, 0.0);
    let g_pq = phase * sn;
    let g_qp = -phase.conj() * sn;
    let g_qq = c(cs, 0.0);

    for k in 0..n {
        let akp = a[k + p * n];
        let akq = a[k + q * n];
        a[k + p * n] = akp * g_pp + akq * g_qp;
        a[k + q * n] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[p + k * n];
        let aqk = a[q + k * n];
        a[p + k * n] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[q + k * n] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[p + q * n] = C64::default();
    a[q + p * n] = C64::default();
    a[p + p * n].im = 0.0;
    a[q + q * n].im = 0.0;

    for k in 0..n {
        let vkp = v[k + p * n];
        let vkq = v[k + q * n];
        v[k + p * n] = vkp * g_pp + vkq * g_qp;
        v[k + q * n] = vkp * g_pq + vkq * g_qq;
    }
}
