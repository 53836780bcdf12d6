//! Polynomial observables on canonical pairs and their Poisson brackets.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{classify_simple, expand_polynomial, parse, quantize, Atom, BindingSet, ObservableExpr};
use crate::kinematics::FockTruncation;
use crate::operator::{c, ComplexMatrix, C64};
use crate::surd::SurdMatrix;

/// Polynomial in `q₁…q_N, p₁…p_N` keyed by the exponent vector
/// `(deg q₁, …, deg q_N, deg p₁, …, deg p_N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalPolynomial {
    n_pairs: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl CanonicalPolynomial {
    pub fn zero(n_pairs: usize) -> Self {
        Self {
            n_pairs,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_pairs: usize, k: f64) -> Self {
        let mut out = Self::zero(n_pairs);
        out.add_term(vec![0; 2 * n_pairs], k);
        out
    }

    /// `q_i` (zero-based `i`).
    pub fn q(n_pairs: usize, i: usize) -> Self {
        Self::monomial(n_pairs, i, 1.0)
    }

    /// `p_i` (zero-based `i`).
    pub fn p(n_pairs: usize, i: usize) -> Self {
        Self::monomial(n_pairs, n_pairs + i, 1.0)
    }

    fn monomial(n_pairs: usize, slot: usize, k: f64) -> Self {
        let mut e = vec![0; 2 * n_pairs];
        e[slot] = 1;
        let mut out = Self::zero(n_pairs);
        out.add_term(e, k);
        out
    }

    pub fn from_terms(n_pairs: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Result<Self> {
        let mut out = Self::zero(n_pairs);
        for (e, k) in terms {
            if e.len() != 2 * n_pairs {
                return Err(Error::DimMismatch {
                    expected: 2 * n_pairs,
                    found: e.len(),
                });
            }
            if !k.is_finite() {
                return Err(Error::NonFinite);
            }
            out.add_term(e, k);
        }
        Ok(out)
    }

    /// Parses the expression grammar with variables `x1…xN`, `p1…pN`
    /// (`x`, `p` when `N = 1`).
    pub fn parse(text: &str, n_pairs: usize) -> Result<Self> {
        Self::from_expr(&parse(text)?, n_pairs)
    }

    pub fn from_expr(e: &ObservableExpr, n_pairs: usize) -> Result<Self> {
        if n_pairs == 0 {
            return Err(Error::InvalidArgument("at least one canonical pair is required".into()));
        }
        let poly = expand_polynomial(e);
        let mut out = Self::zero(n_pairs);
        for (m, &k) in poly.terms() {
            let mut exps = vec![0; 2 * n_pairs];
            for (atom, &pow) in m {
                let Atom::Var(v) = atom else {
                    return Err(Error::NonPolynomial(atom.key().to_owned()));
                };
                let slot = variable_slot(v, n_pairs).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
                exps[slot] += pow;
            }
            out.add_term(exps, k);
        }
        Ok(out)
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, e: Vec<u32>, k: f64) {
        if k == 0.0 {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert(0.0);
        *slot += k;
        if *slot == 0.0 {
            self.terms.remove(&e);
        }
    }

    fn check_pairs(&self, o: &Self) {
        assert_eq!(self.n_pairs, o.n_pairs, "polynomials over different phase spaces");
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_pairs(o);
        let mut out = self.clone();
        for (e, &k) in &o.terms {
            out.add_term(e.clone(), k);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n_pairs);
        for (e, &k) in &self.terms {
            out.add_term(e.clone(), k * s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.check_pairs(o);
        let mut out = Self::zero(self.n_pairs);
        for (e1, &k1) in &self.terms {
            for (e2, &k2) in &o.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, k1 * k2);
            }
        }
        out
    }

    /// Partial derivative in exponent slot `slot` (`q_i` is `i`, `p_i` is `N + i`).
    pub fn derivative(&self, slot: usize) -> Self {
        let mut out = Self::zero(self.n_pairs);
        for (e, &k) in &self.terms {
            if e[slot] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[slot] -= 1;
            out.add_term(d, k * e[slot] as f64);
        }
        out
    }

    fn variable_name(&self, slot: usize) -> String {
        let n = self.n_pairs;
        let (base, i) = if slot < n { ("x", slot) } else { ("p", slot - n) };
        if n == 1 {
            base.to_owned()
        } else {
            format!("{base}{}", i + 1)
        }
    }

    pub fn to_expr(&self) -> ObservableExpr {
        let mut terms = Vec::new();
        // positive terms first so the leading sign is rarely a negation
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(_, k)| **k < 0.0);
        for (e, &k) in ordered {
            let mut factors = Vec::new();
            if k != 1.0 || e.iter().all(|&d| d == 0) {
                factors.push(ObservableExpr::Const(k));
            }
            for (slot, &d) in e.iter().enumerate() {
                let v = ObservableExpr::Var(self.variable_name(slot));
                match d {
                    0 => {}
                    1 => factors.push(v),
                    _ => factors.push(ObservableExpr::Pow(Box::new(v), d)),
                }
            }
            terms.push(match factors.len() {
                1 => factors.pop().unwrap(),
                _ => ObservableExpr::Mul(factors),
            });
        }
        match terms.len() {
            0 => ObservableExpr::Const(0.0),
            1 => terms.pop().unwrap(),
            _ => ObservableExpr::Add(terms),
        }
    }
}

fn variable_slot(name: &str, n_pairs: usize) -> Option<usize> {
    if n_pairs == 1 {
        match name {
            "x" => return Some(0),
            "p" => return Some(1),
            _ => {}
        }
    }
    let (base, rest) = name.split_at(1);
    let i: usize = rest.parse().ok()?;
    if i == 0 || i > n_pairs || rest.starts_with('0') {
        return None;
    }
    match base {
        "x" => Some(i - 1),
        "p" => Some(n_pairs + i - 1),
        _ => None,
    }
}

impl fmt::Display for CanonicalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_expr().fmt(f)
    }
}

/// `Σᵢ ∂F/∂qᵢ ∂H/∂pᵢ − ∂F/∂pᵢ ∂H/∂qᵢ`
pub fn poisson_bracket(f: &CanonicalPolynomial, h: &CanonicalPolynomial) -> CanonicalPolynomial {
    f.check_pairs(h);
    let n = f.n_pairs;
    let mut out = CanonicalPolynomial::zero(n);
    for i in 0..n {
        let a = f.derivative(i).mul(&h.derivative(n + i));
        let b = f.derivative(n + i).mul(&h.derivative(i));
        out = out.add(&a).sub(&b);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiracReport {
    pub bracket: String,
    /// Rows and columns `0..block` are compared.
    pub block: usize,
    pub residual: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn block_max(m: &ComplexMatrix, block: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Compares `iα·quantize({f,h})` with `[quantize(f), quantize(h)]` in a
/// truncated representation, away from the truncation boundary.
///
/// Single canonical pair only.
pub fn check_dirac_rule(
    f: &CanonicalPolynomial,
    h: &CanonicalPolynomial,
    rep: &FockTruncation,
) -> Result<DiracReport> {
    f.check_pairs(h);
    if f.n_pairs != 1 {
        return Err(Error::InvalidArgument(
            "the truncated representation carries a single canonical pair".into(),
        ));
    }
    let bindings = BindingSet::from_operators([("x", rep.x_op.clone()), ("p", rep.p_op.clone())])?;
    let bracket = poisson_bracket(f, h);
    let exprs = [("f", f.to_expr()), ("h", h.to_expr()), ("{f,h}", bracket.to_expr())];
    let mut failed = Vec::new();
    for (label, e) in &exprs {
        if !classify_simple(e, &bindings)?.simple {
            failed.push(label.to_string());
        }
    }
    if !failed.is_empty() {
        return Err(Error::NonSimpleInput { which: failed });
    }
    let fo = quantize(&exprs[0].1, &bindings)?;
    let ho = quantize(&exprs[1].1, &bindings)?;
    let bo = quantize(&exprs[2].1, &bindings)?;
    let comm = fo.commutator_with(&ho)?;
    let lhs = bo.matrix() * c(0.0, rep.alpha);
    let d = (f.degree() + h.degree()) as usize;
    let block = rep.n_levels.saturating_sub(d);
    let residual = block_max(&(&lhs - &comm), block);
    let scale = block_max(&comm, block).max(block_max(&lhs, block));
    let tolerance = 1e-9 * scale.max(1.0);
    Ok(DiracReport {
        bracket: bracket.to_string(),
        block,
        residual,
        scale,
        tolerance,
        passed: residual <= tolerance,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// `F = x³`, `H = γp³`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub gamma: f64,
    pub alpha: f64,
    pub n_levels: usize,
    pub block: usize,
    /// Largest deviation of `[F,H]` from `3iγα(x²p² + xp²x + p²x²)` on the block.
    pub symmetric_form_residual: f64,
    /// Mean diagonal of `[F,H] − (9iγα/2)(x²p² + p²x²)` on the block.
    pub gap: Complex,
    /// Largest deviation of that difference from `gap · I` on the block.
    pub gap_off_scalar: f64,
    pub gap_magnitude: f64,
    /// `gap / (γα³)`, when `γ ≠ 0`.
    pub gap_per_gamma_alpha3: Option<Complex>,
}

/// Evaluated in exact ladder arithmetic; with `x = sX`, `p = isP`, `s² = α/2`
/// every operator is an integer-surd matrix times a power of `s`.
pub fn counterexample_report(gamma: f64, rep: &FockTruncation) -> Result<CounterexampleReport> {
    if rep.n_levels < 16 {
        return Err(Error::DimTooSmall {
            min: 16,
            found: rep.n_levels,
        });
    }
    let n = rep.n_levels;
    let (x, p) = rep.exact_quadratures();
    let (x2, p2) = (x.pow(2), p.pow(2));
    let comm = x.pow(3).commutator(&p.pow(3));
    let x2p2 = x2.mul(&p2);
    let p2x2 = p2.mul(&x2);
    let xp2x = x.mul(&p2).mul(&x);

    // [F,H] − 3iγα(x²p² + xp²x + p²x²) = iγ(α/2)³ (6(X²P² + XP²X + P²X²) − [X³,P³])
    let symmetric: SurdMatrix = x2p2.add(&xp2x).add(&p2x2).scale(6).sub(&comm);
    // [F,H] − (9iγα/2)(x²p² + p²x²) = iγ(α/2)³ (9(X²P² + P²X²) − [X³,P³])
    let gap: SurdMatrix = x2p2.add(&p2x2).scale(9).sub(&comm);

    let prefactor = c(0.0, gamma * (rep.alpha / 2.0).powi(3));
    let symmetric = symmetric.to_complex(prefactor);
    let gap = gap.to_complex(prefactor);

    let block = n - 6;
    let mean = (0..block).map(|k| gap[(k, k)]).sum::<C64>() / block as f64;
    let mut off: f64 = 0.0;
    for i in 0..block {
        for j in 0..block {
            let want = if i == j { mean } else { C64::default() };
            off = off.max((gap[(i, j)] - want).norm());
        }
    }
    let ga3 = gamma * rep.alpha.powi(3);
    Ok(CounterexampleReport {
        gamma,
        alpha: rep.alpha,
        n_levels: n,
        block,
        symmetric_form_residual: block_max(&symmetric, block),
        gap: mean.into(),
        gap_off_scalar: off,
        gap_magnitude: mean.norm(),
        gap_per_gamma_alpha3: (ga3 != 0.0).then(|| (mean / ga3).into()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::build_fock;

    fn poly(s: &str) -> CanonicalPolynomial {
        CanonicalPolynomial::parse(s, 1).unwrap()
    }

    #[test]
    fn brackets_from_the_text() {
        assert_eq!(poisson_bracket(&poly("x"), &poly("p")), poly("1"));
        assert_eq!(poisson_bracket(&poly("x"), &poly("2.5*p")), poly("2.5"));
        assert_eq!(poisson_bracket(&poly("x^3"), &poly("p^3")), poly("9*x^2*p^2"));
    }

    #[test]
    fn canonical_pairs() {
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let b = poisson_bracket(&CanonicalPolynomial::q(n, i), &CanonicalPolynomial::p(n, j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert_eq!(b, CanonicalPolynomial::constant(n, want));
            }
        }
        let f = CanonicalPolynomial::parse("x1*p2 - x2*p1", 2).unwrap();
        assert_eq!(f.to_string(), "x1*p2 - x2*p1");
        assert_eq!(CanonicalPolynomial::parse(&f.to_string(), 2).unwrap(), f);
    }

    #[test]
    fn parse_rejects_foreign_atoms() {
        assert!(matches!(
            CanonicalPolynomial::parse("cos(x)", 1),
            Err(Error::NonPolynomial(_))
        ));
        assert!(matches!(
            CanonicalPolynomial::parse("x3", 2),
            Err(Error::UnboundVariable(_))
        ));
        assert!(CanonicalPolynomial::parse("x1 + p1", 1).is_ok());
    }

    #[test]
    fn dirac_rule_for_oscillator() {
        let rep = build_fock(64, 1.0).unwrap();
        let r = check_dirac_rule(&poly("x"), &poly("0.5*p^2 + 1.5*x^2"), &rep).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.block, 61);
        match check_dirac_rule(&poly("x^3"), &poly("p^3"), &rep) {
            Err(Error::NonSimpleInput { which }) => assert_eq!(which, vec!["{f,h}".to_string()]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counterexample_gap_is_scalar() {
        let rep = build_fock(32, 1.0).unwrap();
        let r = counterexample_report(1.0, &rep).unwrap();
        assert_eq!(r.symmetric_form_residual, 0.0);
        assert_eq!(r.gap_off_scalar, 0.0);
        let z = r.gap_per_gamma_alpha3.unwrap();
        assert_eq!((z.re, z.im), (0.0, 3.0));
        let r0 = counterexample_report(0.0, &rep).unwrap();
        assert_eq!(r0.gap_magnitude, 0.0);
        assert!(matches!(
            counterexample_report(1.0, &build_fock(8, 1.0).unwrap()),
            Err(Error::DimTooSmall { .. })
        ));
    }
}
