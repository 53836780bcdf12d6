//! Exact arithmetic for ladder-operator matrices.
//!
//! Entries of polynomials in `a` and `a†` are integer combinations of square
//! roots of integers. Keeping them symbolic makes truncation defects exact
//! instead of "zero up to rounding".

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::operator::{ComplexMatrix, C64};

/// `Σ cᵣ √r` over square-free radicands `r`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Surd(BTreeMap<u64, i64>);

fn square_free(mut r: u64) -> (i64, u64) {
    let mut outside = 1i64;
    let mut d = 2u64;
    while d * d <= r {
        while r.is_multiple_of(d * d) {
            r /= d * d;
            outside *= d as i64;
        }
        d += 1;
    }
    (outside, r)
}

impl Surd {
    pub fn integer(k: i64) -> Self {
        Self::term(k, 1)
    }

    /// `coef · √radicand`
    pub fn term(coef: i64, radicand: u64) -> Self {
        let mut s = Self::default();
        if coef != 0 && radicand != 0 {
            let (m, r) = square_free(radicand);
            s.0.insert(r, coef * m);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Integer value, if the surd has no irrational part.
    pub fn as_integer(&self) -> Option<i64> {
        match self.0.len() {
            0 => Some(0),
            1 => self.0.get(&1).copied(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.iter().map(|(&r, &k)| k as f64 * (r as f64).sqrt()).sum()
    }

    fn accumulate(&mut self, r: u64, k: i64) {
        let e = self.0.entry(r).or_insert(0);
        *e += k;
        if *e == 0 {
            self.0.remove(&r);
        }
    }
}

impl Add for &Surd {
    type Output = Surd;

    fn add(self, o: &Surd) -> Surd {
        let mut out = self.clone();
        for (&r, &k) in &o.0 {
            out.accumulate(r, k);
        }
        out
    }
}

impl Neg for &Surd {
    type Output = Surd;

    fn neg(self) -> Surd {
        Surd(self.0.iter().map(|(&r, &k)| (r, -k)).collect())
    }
}

impl Sub for &Surd {
    type Output = Surd;

    fn sub(self, o: &Surd) -> Surd {
        self + &(-o)
    }
}

impl Mul for &Surd {
    type Output = Surd;

    fn mul(self, o: &Surd) -> Surd {
        let mut out = Surd::default();
        for (&r1, &k1) in &self.0 {
            for (&r2, &k2) in &o.0 {
                let (m, r) = square_free(r1 * r2);
                out.accumulate(r, k1 * k2 * m);
            }
        }
        out
    }
}

/// Sparse square matrix of surds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurdMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), Surd>,
}

impl SurdMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries.insert((i, i), Surd::integer(1));
        }
        m
    }

    /// Truncated lowering operator, `a|k⟩ = √k |k−1⟩`.
    pub fn lowering(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for k in 1..n {
            m.entries.insert((k - 1, k), Surd::term(1, k as u64));
        }
        m
    }

    pub fn transpose(&self) -> Self {
        Self {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), s)| ((j, i), s.clone()))
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Surd {
        self.entries.get(&(i, j)).cloned().unwrap_or_default()
    }

    /// Nonzero entries in row-major order.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, &Surd)> {
        self.entries.iter().map(|(&(i, j), s)| (i, j, s))
    }

    fn insert_sum(&mut self, i: usize, j: usize, s: &Surd) {
        let e = self.entries.entry((i, j)).or_default();
        *e = &*e + s;
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), s) in &o.entries {
            out.insert_sum(i, j, s);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn scale(&self, k: i64) -> Self {
        let ks = Surd::integer(k);
        let mut out = Self::zeros(self.n);
        for (&(i, j), s) in &self.entries {
            let v = s * &ks;
            if !v.is_zero() {
                out.entries.insert((i, j), v);
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut rows: Vec<Vec<(usize, &Surd)>> = vec![Vec::new(); self.n];
        for (&(k, j), s) in &o.entries {
            rows[k].push((j, s));
        }
        let mut out = Self::zeros(self.n);
        for (&(i, k), s) in &self.entries {
            for &(j, t) in &rows[k] {
                out.insert_sum(i, j, &(s * t));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.n), |acc, _| acc.mul(self))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    /// Numeric matrix `scale · M`.
    pub fn to_complex(&self, scale: C64) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.n, self.n);
        for (&(i, j), s) in &self.entries {
            m[(i, j)] = scale * s.to_f64();
        }
        m
    }
}
