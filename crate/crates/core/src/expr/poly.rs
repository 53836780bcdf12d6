//! Commutative expansion into a canonical sum of monomials.
//!
//! Classical variables commute, so products are collected into monomials
//! keyed by atom name. Function applications stay atomic; their arguments are
//! themselves expanded so that `cos(A + A)` and `cos(2*A)` are one atom.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Function, ObservableExpr};
use crate::error::Result;

#[derive(Clone, Debug)]
pub enum Atom {
    Var(String),
    Func {
        func: Function,
        arg: Box<Polynomial>,
        key: String,
    },
}

impl Atom {
    pub fn key(&self) -> &str {
        match self {
            Atom::Var(v) => v,
            Atom::Func { key, .. } => key,
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        match self {
            Atom::Var(v) => BTreeSet::from([v.clone()]),
            Atom::Func { arg, .. } => arg.variables(),
        }
    }

    pub fn to_expr(&self) -> ObservableExpr {
        match self {
            Atom::Var(v) => ObservableExpr::Var(v.clone()),
            Atom::Func { func, arg, .. } => ObservableExpr::Func(*func, Box::new(arg.to_expr())),
        }
    }
}

impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Atom {}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(other.key())
    }
}

/// Atoms with positive integer powers.
///
/// Monomials are ordered lexicographically by atom name with higher powers
/// first, so `A^2 < A*B < B^2 < 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Monomial(BTreeMap<Atom, u32>);

impl Monomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }
}

impl<const N: usize> From<[(Atom, u32); N]> for Monomial {
    fn from(xs: [(Atom, u32); N]) -> Self {
        Self(BTreeMap::from(xs))
    }
}

impl std::ops::Deref for Monomial {
    type Target = BTreeMap<Atom, u32>;

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl std::ops::DerefMut for Monomial {
    fn deref_mut(&mut self) -> &mut Self::Target {
        &mut self.0
    }
}

impl<'a> IntoIterator for &'a Monomial {
    type Item = (&'a Atom, &'a u32);
    type IntoIter = std::collections::btree_map::Iter<'a, Atom, u32>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.0.iter();
        let mut b = other.0.iter();
        loop {
            match (a.next(), b.next()) {
                (Some((x, ex)), Some((y, ey))) => match x.cmp(y) {
                    Ordering::Equal if ex == ey => continue,
                    Ordering::Equal => return ey.cmp(ex),
                    ord => return ord,
                },
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn atom(a: Atom) -> Self {
        let mut p = Self::default();
        p.add_term(Monomial::from([(a, 1)]), 1.0);
        p
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial has no atoms.
    pub fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&Monomial::new()).copied(),
            _ => None,
        }
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut out = Self::default();
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (m1, &c1) in &self.terms {
            for (m2, &c2) in &other.terms {
                let mut m = m1.clone();
                for (a, &k) in m2 {
                    *m.entry(a.clone()).or_insert(0) += k;
                }
                out.add_term(m, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms
            .keys()
            .flat_map(|m| m.keys().flat_map(|a| a.variables()))
            .collect()
    }

    /// Variables multiplied together in each monomial (including those
    /// inside a shared function atom).
    pub fn monomial_variable_sets(&self) -> Vec<BTreeSet<String>> {
        self.terms
            .keys()
            .map(|m| m.keys().flat_map(|a| a.variables()).collect())
            .collect()
    }

    pub fn evaluate(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (a, &k) in m {
                t *= a.to_expr().evaluate(env)?.powi(k as i32);
            }
            total += t;
        }
        Ok(total)
    }

    pub fn to_expr(&self) -> ObservableExpr {
        let mut terms: Vec<ObservableExpr> = self
            .terms
            .iter()
            .map(|(m, &c)| {
                let mut factors = Vec::new();
                if m.is_empty() || c != 1.0 {
                    factors.push(ObservableExpr::Const(c));
                }
                for (a, &k) in m {
                    factors.push(match k {
                        1 => a.to_expr(),
                        _ => ObservableExpr::Pow(Box::new(a.to_expr()), k),
                    });
                }
                if factors.len() == 1 {
                    factors.pop().unwrap()
                } else {
                    ObservableExpr::Mul(factors)
                }
            })
            .collect();
        match terms.len() {
            0 => ObservableExpr::Const(0.0),
            1 => terms.pop().unwrap(),
            _ => ObservableExpr::Add(terms),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_expr().fmt(f)
    }
}

pub fn expand_polynomial(e: &ObservableExpr) -> Polynomial {
    match e {
        ObservableExpr::Var(v) => Polynomial::atom(Atom::Var(v.clone())),
        ObservableExpr::Const(c) => Polynomial::constant(*c),
        ObservableExpr::Add(xs) => xs
            .iter()
            .fold(Polynomial::default(), |acc, x| acc.add(&expand_polynomial(x))),
        ObservableExpr::Mul(xs) => xs.iter().fold(Polynomial::constant(1.0), |acc, x| {
            acc.mul(&expand_polynomial(x))
        }),
        ObservableExpr::Pow(b, k) => expand_polynomial(b).pow(*k),
        ObservableExpr::Func(Function::Neg, arg) => expand_polynomial(arg).scale(-1.0),
        ObservableExpr::Func(func, arg) => {
            let arg = expand_polynomial(arg);
            if let Some(c) = arg.as_constant() {
                let y = func.apply(c);
                if y.is_finite() {
                    return Polynomial::constant(y);
                }
            }
            let key = format!("{func}({arg})");
            Polynomial::atom(Atom::Func {
                func: *func,
                arg: Box::new(arg),
                key,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn expand(s: &str) -> String {
        expand_polynomial(&parse(s).unwrap()).to_string()
    }

    #[test]
    fn square_of_sum() {
        assert_eq!(expand("(A+B)^2"), "A^2 + 2*A*B + B^2");
    }

    #[test]
    fn like_terms_merge() {
        assert_eq!(expand("A + A"), "2*A");
        assert_eq!(expand("A - A"), "0");
        assert_eq!(expand("A*B - B*A"), "0");
    }

    #[test]
    fn distributes() {
        assert_eq!(expand("A*(B + C)"), "A*B + A*C");
        assert_eq!(expand("B*A"), "A*B");
    }

    #[test]
    fn functions_stay_atomic_with_canonical_arguments() {
        assert_eq!(expand("cos(A + A)*B"), expand("B*cos(2*A)"));
        assert_eq!(expand("neg(A) + A"), "0");
        assert_eq!(expand("cos(0)*A"), "A");
        assert_eq!(expand("3"), "3");
        assert_eq!(expand("A^0"), "1");
    }
}
