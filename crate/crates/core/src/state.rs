//! Pure states and projective measurement with collapse.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{c, ComplexMatrix, HermitianOperator, Tensor, C64};

pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: DVector<C64>,
    factor_dims: Vec<usize>,
}

impl QuantumState {
    /// Requires `|‖v‖ − 1| ≤ 1e-12`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        check_vector(&v)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        let dim = v.len();
        Ok(Self {
            amplitudes: v,
            factor_dims: vec![dim],
        })
    }

    /// Rescales to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let v = DVector::from_vec(amplitudes);
        Self::from_vector(v)
    }

    pub(crate) fn from_vector(v: DVector<C64>) -> Result<Self> {
        check_vector(&v)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        let dim = v.len();
        Ok(Self {
            amplitudes: v / c(norm, 0.0),
            factor_dims: vec![dim],
        })
    }

    /// Keeps the norm as given; used where drift is itself the quantity of
    /// interest.
    pub(crate) fn from_raw(v: DVector<C64>, factor_dims: Vec<usize>) -> Result<Self> {
        check_vector(&v)?;
        Ok(Self {
            amplitudes: v,
            factor_dims,
        })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: k,
            });
        }
        let mut v = DVector::zeros(dim);
        v[k] = c(1.0, 0.0);
        Ok(Self {
            amplitudes: v,
            factor_dims: vec![dim],
        })
    }

    /// Declares the subsystem layout; the product must equal `dim`.
    pub fn with_factor_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || dims.iter().product::<usize>() != self.dim() {
            return Err(Error::InvalidFactorDims(format!(
                "{dims:?} does not factor dimension {}",
                self.dim()
            )));
        }
        self.factor_dims = dims;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn with_global_phase(&self, phi: f64) -> Self {
        Self {
            amplitudes: &self.amplitudes * C64::from_polar(1.0, phi),
            factor_dims: self.factor_dims.clone(),
        }
    }

    /// `U v`, renormalized; the subsystem layout is kept.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.ncols() != self.dim() || u.nrows() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        let mut out = Self::from_vector(u * &self.amplitudes)?;
        out.factor_dims = self.factor_dims.clone();
        Ok(out)
    }

    /// Probability mass on the given basis indices.
    pub fn weight_on(&self, indices: impl IntoIterator<Item = usize>) -> f64 {
        indices
            .into_iter()
            .map(|k| self.amplitudes[k].norm_sqr())
            .sum()
    }
}

fn check_vector(v: &DVector<C64>) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty state vector".into()));
    }
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

impl Tensor for QuantumState {
    fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let mut factor_dims = self.factor_dims.clone();
        factor_dims.extend_from_slice(&other.factor_dims);
        Self {
            amplitudes,
            factor_dims,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor_dims: Option<Vec<usize>>,
}

impl Serialize for QuantumState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let factor_dims = (self.factor_dims.len() > 1).then(|| self.factor_dims.clone());
        StateJson {
            dim: self.dim(),
            re: self.amplitudes.iter().map(|z| z.re).collect(),
            im: self.amplitudes.iter().map(|z| z.im).collect(),
            factor_dims,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = StateJson::deserialize(d)?;
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(D::Error::custom(format!(
                "state of dim {} has {} real and {} imaginary entries",
                j.dim,
                j.re.len(),
                j.im.len()
            )));
        }
        let amps = j.re.iter().zip(&j.im).map(|(&r, &i)| c(r, i)).collect();
        let state = QuantumState::new(amps).map_err(D::Error::custom)?;
        match j.factor_dims {
            Some(dims) => state.with_factor_dims(dims).map_err(D::Error::custom),
            None => Ok(state),
        }
    }
}

/// Result of one projective measurement.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub value: f64,
    pub collapsed: QuantumState,
    pub outcome_index: usize,
}

/// Eigenspace projectors of an operator, precomputed for repeated sampling.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    values: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl ProjectiveMeasurement {
    pub fn new(h: &HermitianOperator) -> Result<Self> {
        let spec = h.spectrum()?;
        let values = spec.groups.iter().map(|g| g.value).collect();
        let projectors = (0..spec.groups.len()).map(|g| spec.projector(g)).collect();
        Ok(Self { values, projectors })
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn outcome_count(&self) -> usize {
        self.values.len()
    }

    /// Unnormalized branch `P_g v` for every outcome group.
    pub fn branches(&self, v: &DVector<C64>) -> Vec<DVector<C64>> {
        self.projectors.iter().map(|p| p * v).collect()
    }

    pub fn probabilities(&self, v: &QuantumState) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        Ok(self
            .branches(v.amplitudes())
            .iter()
            .map(|b| b.norm_squared())
            .collect())
    }

    fn check_dim(&self, v: &QuantumState) -> Result<()> {
        if v.dim() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: v.dim(),
            });
        }
        Ok(())
    }

    /// Born-rule sample with collapse onto the selected eigenspace.
    pub fn measure<R: Rng + ?Sized>(&self, v: &QuantumState, rng: &mut R) -> Result<Outcome> {
        self.check_dim(v)?;
        let branches = self.branches(v.amplitudes());
        let probs: Vec<f64> = branches.iter().map(|b| b.norm_squared()).collect();
        let total: f64 = probs.iter().sum();
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for (g, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            chosen = Some(g);
            if u < acc {
                break;
            }
        }
        let g = chosen.ok_or(Error::NotNormalized { norm: total.sqrt() })?;
        let branch = &branches[g];
        let norm = probs[g].sqrt();
        let collapsed = QuantumState {
            amplitudes: branch / c(norm, 0.0),
            factor_dims: v.factor_dims.clone(),
        };
        Ok(Outcome {
            value: self.values[g],
            collapsed,
            outcome_index: g,
        })
    }
}

pub fn measure_projective<R: Rng + ?Sized>(
    v: &QuantumState,
    h: &HermitianOperator,
    rng: &mut R,
) -> Result<Outcome> {
    ProjectiveMeasurement::new(h)?.measure(v, rng)
}
