use std::collections::BTreeSet;

use serde::Serialize;

use super::bindings::BindingSet;
use super::poly::{expand_polynomial, Atom, Polynomial};
use super::{parse, ObservableExpr};
use crate::error::{Error, Result};
use crate::operator::{c, identity, max_norm, ComplexMatrix, HermitianOperator, MatrixJson};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SimplicityVerdict {
    pub simple: bool,
    pub offending_pairs: Vec<(String, String)>,
}

fn check_bound(vars: &BTreeSet<String>, b: &BindingSet) -> Result<()> {
    for v in vars {
        b.get(v)?;
    }
    Ok(())
}

pub fn classify_simple(e: &ObservableExpr, b: &BindingSet) -> Result<SimplicityVerdict> {
    check_bound(&e.variables(), b)?;
    classify_polynomial(&expand_polynomial(e), b)
}

pub(crate) fn classify_polynomial(p: &Polynomial, b: &BindingSet) -> Result<SimplicityVerdict> {
    let mut offending = BTreeSet::new();
    for vars in p.monomial_variable_sets() {
        let vars: Vec<_> = vars.into_iter().collect();
        for (i, x) in vars.iter().enumerate() {
            for y in &vars[i + 1..] {
                if !b.commute(x, y)? {
                    offending.insert((x.clone(), y.clone()));
                }
            }
        }
    }
    Ok(SimplicityVerdict {
        simple: offending.is_empty(),
        offending_pairs: offending.into_iter().collect(),
    })
}

/// Operator of a simple expression.
///
/// Monomials become products of commuting embedded operators, function atoms
/// go through the spectral calculus of their single measurement.
pub fn quantize(e: &ObservableExpr, b: &BindingSet) -> Result<HermitianOperator> {
    check_bound(&e.variables(), b)?;
    let p = expand_polynomial(e);
    let verdict = classify_polynomial(&p, b)?;
    if !verdict.simple {
        return Err(Error::NonSimpleExpression {
            pairs: verdict.offending_pairs,
        });
    }
    let n = b.dim();
    let mut total = ComplexMatrix::zeros(n, n);
    for (m, &coef) in p.terms() {
        let mut term = identity(n) * c(coef, 0.0);
        for (atom, &k) in m.iter() {
            let op = atom_operator(atom, b)?;
            for _ in 0..k {
                term = &term * op.matrix();
            }
        }
        total += term;
    }
    HermitianOperator::from_hermitian_part(&total)
}

fn atom_operator(atom: &Atom, b: &BindingSet) -> Result<HermitianOperator> {
    match atom {
        Atom::Var(v) => b.embedded(v).cloned(),
        Atom::Func { func, arg, key } => {
            let vars = arg.variables();
            let mut it = vars.iter();
            let (Some(var), None) = (it.next(), it.next()) else {
                return Err(Error::MultivariateFunction(key.clone()));
            };
            let binding = b.get(var)?;
            let g = |a: f64| {
                let env = |name: &str| (name == var).then_some(a);
                arg.evaluate(&env).map_or(f64::NAN, |x| func.apply(x))
            };
            let raw = binding.operator.apply_fn(g)?;
            match binding.subsystem {
                Some(s) => raw.embed(b.factor_dims(), s),
                None => Ok(raw),
            }
        }
    }
}

/// Recursively symmetrized quantization, `XY → (XY + YX)/2` at every
/// product node. Not a consistent quantization: the result depends on how the
/// expression is grouped.
pub fn quantize_hermitized(e: &ObservableExpr, b: &BindingSet) -> Result<HermitianOperator> {
    check_bound(&e.variables(), b)?;
    HermitianOperator::from_hermitian_part(&hermitized(e, b)?)
}

fn hermitized(e: &ObservableExpr, b: &BindingSet) -> Result<ComplexMatrix> {
    let n = b.dim();
    Ok(match e {
        ObservableExpr::Var(v) => b.embedded(v)?.matrix().clone(),
        ObservableExpr::Const(k) => identity(n) * c(*k, 0.0),
        ObservableExpr::Add(xs) => {
            let mut acc = ComplexMatrix::zeros(n, n);
            for x in xs {
                acc += hermitized(x, b)?;
            }
            acc
        }
        ObservableExpr::Mul(xs) => {
            let mut acc = hermitized(&xs[0], b)?;
            for x in &xs[1..] {
                let y = hermitized(x, b)?;
                acc = (&acc * &y + &y * &acc) * c(0.5, 0.0);
            }
            acc
        }
        ObservableExpr::Pow(base, k) => {
            let m = hermitized(base, b)?;
            let mut acc = identity(n);
            for _ in 0..*k {
                acc = &acc * &m;
            }
            acc
        }
        ObservableExpr::Func(func, arg) => {
            let inner = HermitianOperator::from_hermitian_part(&hermitized(arg, b)?)?;
            inner.apply_fn(|x| func.apply(x))?.into_matrix()
        }
    })
}

/// The two Hermitized readings of `A²B`.
#[derive(Clone, Debug, Serialize)]
pub struct InconsistencyReport {
    /// `A*(A*B)`
    pub nested: HermitianOperator,
    /// `A^2*B`
    pub power_first: HermitianOperator,
    pub difference: MatrixJson,
    pub difference_norm: f64,
}

pub fn demonstrate_inconsistency(
    a: &HermitianOperator,
    b: &HermitianOperator,
) -> Result<InconsistencyReport> {
    if a.commutes_with(b)? {
        return Err(Error::CommutingInput);
    }
    let set = BindingSet::from_operators([("A", a.clone()), ("B", b.clone())])?;
    let nested = quantize_hermitized(&parse("A*(A*B)")?, &set)?;
    let power_first = quantize_hermitized(&parse("A^2*B")?, &set)?;
    let diff = nested.matrix() - power_first.matrix();
    Ok(InconsistencyReport {
        difference_norm: max_norm(&diff),
        difference: MatrixJson::from(&diff),
        nested,
        power_first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MeasurementBinding;
    use crate::operator::{max_diff, pauli};

    fn op(m: ComplexMatrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    fn xz() -> BindingSet {
        BindingSet::from_operators([("A", op(pauli::x())), ("B", op(pauli::z()))]).unwrap()
    }

    #[test]
    fn product_of_noncommuting_is_not_simple() {
        let b = xz();
        let v = classify_simple(&parse("A*B").unwrap(), &b).unwrap();
        assert!(!v.simple);
        assert_eq!(v.offending_pairs, vec![("A".into(), "B".into())]);
        let v = classify_simple(&parse("(A+B)^2").unwrap(), &b).unwrap();
        assert!(!v.simple);
        assert!(classify_simple(&parse("A^2 + B^3 + cos(A)*A").unwrap(), &b).unwrap().simple);
        assert!(matches!(
            classify_simple(&parse("A*Q").unwrap(), &b),
            Err(Error::UnboundVariable(q)) if q == "Q"
        ));
    }

    #[test]
    fn disjoint_factors_are_simple() {
        let b = BindingSet::new(
            vec![2, 2],
            vec![
                MeasurementBinding::on_subsystem("A", op(pauli::x()), 0),
                MeasurementBinding::on_subsystem("B", op(pauli::z()), 1),
            ],
        )
        .unwrap();
        assert!(classify_simple(&parse("A*B").unwrap(), &b).unwrap().simple);
        let q = quantize(&parse("A*B").unwrap(), &b).unwrap();
        let expected = crate::operator::kron(&pauli::x(), &pauli::z());
        assert!(max_diff(q.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn sum_and_power_rules() {
        let b = xz();
        let q = quantize(&parse("A+B").unwrap(), &b).unwrap();
        assert!(max_diff(q.matrix(), &(pauli::x() + pauli::z())) < 1e-15);
        let q = quantize(&parse("A^2").unwrap(), &b).unwrap();
        assert!(max_diff(q.matrix(), &identity(2)) < 1e-15);
        assert!(matches!(
            quantize(&parse("A*B").unwrap(), &b),
            Err(Error::NonSimpleExpression { .. })
        ));
    }

    #[test]
    fn functions_use_spectral_calculus() {
        let a = HermitianOperator::from_real_diagonal(&[0.5, 2.0]);
        let b = BindingSet::from_operators([("A", a)]).unwrap();
        let q = quantize(&parse("sqrt(A) + exp(2*A)").unwrap(), &b).unwrap();
        assert!((q.matrix()[(0, 0)].re - (0.5f64.sqrt() + 1f64.exp())).abs() < 1e-12);
        assert!((q.matrix()[(1, 1)].re - (2f64.sqrt() + 4f64.exp())).abs() < 1e-12);

        let neg = HermitianOperator::from_real_diagonal(&[-1.0, 1.0]);
        let b = BindingSet::from_operators([("A", neg)]).unwrap();
        assert!(matches!(
            quantize(&parse("sqrt(A)").unwrap(), &b),
            Err(Error::DomainError { .. })
        ));
    }

    #[test]
    fn multivariate_function_rejected() {
        let a = HermitianOperator::from_real_diagonal(&[1.0, 2.0]);
        let b = BindingSet::from_operators([("A", a.clone()), ("B", a)]).unwrap();
        assert!(matches!(
            quantize(&parse("cos(A*B)").unwrap(), &b),
            Err(Error::MultivariateFunction(_))
        ));
    }

    #[test]
    fn hermitized_product() {
        let b = xz();
        let h = quantize_hermitized(&parse("A*B").unwrap(), &b).unwrap();
        let (x, z) = (pauli::x(), pauli::z());
        let expected = (&x * &z + &z * &x) * c(0.5, 0.0);
        assert!(max_diff(h.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn inconsistency_for_pauli_pair() {
        // σx² = 1 and σxσyσx = -σy, so A(AB) vanishes while (A²)B = σy.
        let r = demonstrate_inconsistency(&op(pauli::x()), &op(pauli::y())).unwrap();
        assert!(max_norm(r.nested.matrix()) < 1e-15);
        assert!(max_diff(r.power_first.matrix(), &pauli::y()) < 1e-15);
        assert!((r.difference_norm - 1.0).abs() < 1e-15);
        assert!(matches!(
            demonstrate_inconsistency(&op(pauli::z()), &op(pauli::z())),
            Err(Error::CommutingInput)
        ));
    }
}
