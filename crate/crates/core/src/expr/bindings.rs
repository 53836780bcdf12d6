use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator, MatrixJson};

/// A named quantum measurement, optionally acting on one subsystem.
#[derive(Clone, Debug)]
pub struct MeasurementBinding {
    pub name: String,
    pub operator: HermitianOperator,
    pub subsystem: Option<usize>,
}

impl MeasurementBinding {
    pub fn new(name: &str, operator: HermitianOperator) -> Self {
        Self {
            name: name.to_owned(),
            operator,
            subsystem: None,
        }
    }

    pub fn on_subsystem(name: &str, operator: HermitianOperator, subsystem: usize) -> Self {
        Self {
            name: name.to_owned(),
            operator,
            subsystem: Some(subsystem),
        }
    }
}

/// Measurements sharing one (possibly composite) Hilbert space.
#[derive(Clone, Debug)]
pub struct BindingSet {
    factor_dims: Vec<usize>,
    bindings: Vec<MeasurementBinding>,
    embedded: Vec<HermitianOperator>,
    index: HashMap<String, usize>,
}

impl BindingSet {
    pub fn new(factor_dims: Vec<usize>, bindings: Vec<MeasurementBinding>) -> Result<Self> {
        if factor_dims.is_empty() || factor_dims.contains(&0) {
            return Err(Error::InvalidFactorDims(format!("{factor_dims:?}")));
        }
        let total: usize = factor_dims.iter().product();
        let mut index = HashMap::new();
        let mut embedded = Vec::with_capacity(bindings.len());
        for (k, b) in bindings.iter().enumerate() {
            if index.insert(b.name.clone(), k).is_some() {
                return Err(Error::InvalidSpec(format!("measurement `{}` bound twice", b.name)));
            }
            let full = match b.subsystem {
                Some(s) => b.operator.embed(&factor_dims, s)?,
                None if b.operator.dim() == total => b.operator.clone(),
                None => {
                    return Err(Error::DimMismatch {
                        expected: total,
                        found: b.operator.dim(),
                    })
                }
            };
            embedded.push(full);
        }
        Ok(Self {
            factor_dims,
            bindings,
            embedded,
            index,
        })
    }

    /// Unstructured space whose dimension is taken from the operators.
    pub fn from_operators<'a>(ops: impl IntoIterator<Item = (&'a str, HermitianOperator)>) -> Result<Self> {
        let bindings: Vec<_> = ops
            .into_iter()
            .map(|(n, op)| MeasurementBinding::new(n, op))
            .collect();
        let dim = bindings.first().map_or(1, |b| b.operator.dim());
        Self::new(vec![dim], bindings)
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|b| b.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn get(&self, name: &str) -> Result<&MeasurementBinding> {
        self.index
            .get(name)
            .map(|&k| &self.bindings[k])
            .ok_or_else(|| Error::UnboundVariable(name.to_owned()))
    }

    /// Operator on the full space.
    pub fn embedded(&self, name: &str) -> Result<&HermitianOperator> {
        self.index
            .get(name)
            .map(|&k| &self.embedded[k])
            .ok_or_else(|| Error::UnboundVariable(name.to_owned()))
    }

    /// Measurements on different subsystems always commute; otherwise the
    /// embedded operators are compared.
    pub fn commute(&self, a: &str, b: &str) -> Result<bool> {
        let (ba, bb) = (self.get(a)?, self.get(b)?);
        if let (Some(x), Some(y)) = (ba.subsystem, bb.subsystem) {
            if x != y {
                return Ok(true);
            }
        }
        if a == b {
            return Ok(true);
        }
        self.embedded(a)?.commutes_with(self.embedded(b)?)
    }

    /// Returns a copy with one more binding.
    pub fn with(&self, binding: MeasurementBinding) -> Result<Self> {
        let mut bindings = self.bindings.clone();
        bindings.push(binding);
        Self::new(self.factor_dims.clone(), bindings)
    }

    pub fn to_json(&self) -> BindingsJson {
        BindingsJson {
            factor_dims: (self.factor_dims.len() > 1).then(|| self.factor_dims.clone()),
            bindings: self
                .bindings
                .iter()
                .map(|b| {
                    (
                        b.name.clone(),
                        BindingJson {
                            operator: MatrixJson::from(b.operator.matrix()),
                            subsystem: b.subsystem,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn from_json(j: BindingsJson, default_factor_dims: Option<&[usize]>) -> Result<Self> {
        let bindings = j
            .bindings
            .into_iter()
            .map(|(name, b)| {
                Ok(MeasurementBinding {
                    name,
                    operator: HermitianOperator::new(ComplexMatrix::try_from(b.operator)?)?,
                    subsystem: b.subsystem,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dims = match (j.factor_dims, default_factor_dims) {
            (Some(d), _) => d,
            (None, Some(d)) => d.to_vec(),
            (None, None) => {
                let full = bindings.iter().find(|b| b.subsystem.is_none());
                match full.or(bindings.first()) {
                    Some(b) if b.subsystem.is_none() => vec![b.operator.dim()],
                    Some(_) => {
                        return Err(Error::InvalidFactorDims(
                            "subsystem bindings need `factor_dims`".into(),
                        ))
                    }
                    None => vec![1],
                }
            }
        };
        Self::new(dims, bindings)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BindingJson {
    /// Checked for Hermiticity when the set is built, so the error names the cause.
    pub operator: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystem: Option<usize>,
}

/// `{name → {operator, subsystem?}}`, or the same map under `bindings`
/// next to an explicit `factor_dims`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(from = "BindingsWire")]
pub struct BindingsJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_dims: Option<Vec<usize>>,
    pub bindings: BTreeMap<String, BindingJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum BindingsWire {
    Structured {
        #[serde(default)]
        factor_dims: Option<Vec<usize>>,
        bindings: BTreeMap<String, BindingJson>,
    },
    Flat(BTreeMap<String, BindingJson>),
}

impl From<BindingsWire> for BindingsJson {
    fn from(w: BindingsWire) -> Self {
        match w {
            BindingsWire::Structured {
                factor_dims,
                bindings,
            } => Self {
                factor_dims,
                bindings,
            },
            BindingsWire::Flat(bindings) => Self {
                factor_dims: None,
                bindings,
            },
        }
    }
}
