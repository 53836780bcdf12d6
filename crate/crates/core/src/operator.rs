//! Hermitian operators on finite-dimensional Hilbert spaces.
//!
//! A [`HermitianOperator`] wraps a dense complex matrix that has passed the
//! Hermiticity gate and lazily caches its [`Spectrum`]. All operators are
//! immutable once built, so they can be shared freely across threads.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{self, Spectrum};
use crate::error::{Error, Result};
use crate::state::QuantumState;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

/// Relative asymmetry accepted by the Hermiticity gate.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Relative commutator size below which two operators count as commuting.
pub const COMMUTE_TOLERANCE: f64 = 1e-10;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_norm(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `‖a − b‖_max`.
pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(a * b - b * a)
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// `(M + M†)/2`, which is Hermitian bit-for-bit.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    ComplexMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Kronecker embedding of `op` as factor `index` of a product space.
pub fn embed(op: &ComplexMatrix, factor_dims: &[usize], index: usize) -> Result<ComplexMatrix> {
    let Some(&d) = factor_dims.get(index) else {
        return Err(Error::InvalidFactorDims(format!(
            "subsystem {index} out of range for {} factors",
            factor_dims.len()
        )));
    };
    if op.nrows() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    let left: usize = factor_dims[..index].iter().product();
    let right: usize = factor_dims[index + 1..].iter().product();
    Ok(kron(&kron(&identity(left), op), &identity(right)))
}

#[derive(Debug)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        Self {
            matrix: self.matrix.clone(),
            spectrum: self.spectrum.clone(),
        }
    }
}

impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Validates `m` and wraps it. Rejects matrices whose asymmetry exceeds
    /// `1e-12 · ‖m‖_max`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_square(&m)?;
        check_finite(&m)?;
        let n = m.nrows();
        let mut asym: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if asym > HERMITIAN_TOLERANCE * max_norm(&m) {
            return Err(Error::NotHermitian { asymmetry: asym });
        }
        Ok(Self::wrap(m))
    }

    /// Wraps the Hermitian part of `m`; used for results of operator algebra
    /// that are Hermitian up to rounding.
    pub fn from_hermitian_part(m: &ComplexMatrix) -> Result<Self> {
        check_square(m)?;
        check_finite(m)?;
        Ok(Self::wrap(hermitian_part(m)))
    }

    fn wrap(matrix: ComplexMatrix) -> Self {
        Self {
            matrix,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::wrap(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c(values[i], 0.0)
            } else {
                C64::default()
            }
        }))
    }

    pub fn identity(n: usize) -> Self {
        Self::wrap(identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self::wrap(ComplexMatrix::zeros(n, n))
    }

    /// Builds `Σ λᵢ vᵢvᵢ†` from real eigenvalues and the columns of a unitary.
    pub fn from_eigensystem(values: &[f64], vectors: &ComplexMatrix) -> Result<Self> {
        if vectors.ncols() != values.len() || vectors.nrows() != values.len() {
            return Err(Error::DimMismatch {
                expected: values.len(),
                found: vectors.ncols(),
            });
        }
        let scaled = ComplexMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
            vectors[(i, j)] * values[j]
        });
        Self::from_hermitian_part(&(scaled * vectors.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn norm_max(&self) -> f64 {
        max_norm(&self.matrix)
    }

    /// Cached eigensystem, computed on first use.
    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = eigen::eigensystem(&self.matrix)?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// Spectral functional calculus: `Σᵢ f(aᵢ) vᵢvᵢ†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let spec = self.spectrum()?;
        let mapped = spec
            .eigenvalues
            .iter()
            .map(|&a| {
                let y = f(a);
                if y.is_finite() {
                    Ok(y)
                } else {
                    Err(Error::DomainError { at: a })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_eigensystem(&mapped, &spec.eigenvectors)
    }

    /// `v†Hv`, rejecting imaginary residue above `1e-12·max(1, ‖H‖)`.
    pub fn expectation(&self, v: &QuantumState) -> Result<f64> {
        if v.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        let amps = v.amplitudes();
        let hv = &self.matrix * amps;
        let z = amps.dotc(&hv);
        if z.im.abs() > 1e-12 * self.norm_max().max(1.0) {
            return Err(Error::ImaginaryResidue(z.im));
        }
        Ok(z.re)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::wrap(&self.matrix * c(k, 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::wrap(&self.matrix + &other.matrix))
    }

    /// Matrix product, re-Hermitized. Only meaningful for commuting operands.
    pub fn product_commuting(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::from_hermitian_part(&(&self.matrix * &other.matrix))
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = identity(self.dim());
        for _ in 0..k {
            acc = &acc * &self.matrix;
        }
        Self::wrap(hermitian_part(&acc))
    }

    pub fn embed(&self, factor_dims: &[usize], index: usize) -> Result<Self> {
        Ok(Self::wrap(embed(&self.matrix, factor_dims, index)?))
    }

    pub fn commutator_with(&self, other: &Self) -> Result<ComplexMatrix> {
        commutator(&self.matrix, &other.matrix)
    }

    /// `‖[A,B]‖_max ≤ 1e-10 · ‖A‖_max ‖B‖_max`.
    pub fn commutes_with(&self, other: &Self) -> Result<bool> {
        let comm = self.commutator_with(other)?;
        Ok(max_norm(&comm) <= COMMUTE_TOLERANCE * self.norm_max() * other.norm_max())
    }
}

/// Kronecker product of operators or states.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Self {
        Self::wrap(kron(&self.matrix, &other.matrix))
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Wire form of a square complex matrix: row-major real and imaginary parts.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { dim: n, re, im }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        let n = j.dim;
        if n == 0 || j.re.len() != n * n || j.im.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "matrix of dim {n} needs {} entries, got re={} im={}",
                n * n,
                j.re.len(),
                j.im.len()
            )));
        }
        Ok(ComplexMatrix::from_fn(n, n, |i, k| {
            c(j.re[i * n + k], j.im[i * n + k])
        }))
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(&self.matrix).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        let m = ComplexMatrix::try_from(j).map_err(serde::de::Error::custom)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Pauli matrices, used throughout the tests and demos.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }
}
