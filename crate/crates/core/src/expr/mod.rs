//! Classical observable expressions and their quantization.

mod bindings;
mod parse;
mod poly;
mod quantize;

use std::collections::BTreeSet;
use std::fmt;

pub use bindings::{BindingSet, BindingsJson, MeasurementBinding};
pub use parse::parse;
pub use poly::{expand_polynomial, Atom, Monomial, Polynomial};
pub use quantize::{
    classify_simple, demonstrate_inconsistency, quantize, quantize_hermitized, InconsistencyReport,
    SimplicityVerdict,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Function {
    Cos,
    Sin,
    Exp,
    Sqrt,
    Neg,
}

impl Function {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "cos" => Self::Cos,
            "sin" => Self::Sin,
            "exp" => Self::Exp,
            "sqrt" => Self::Sqrt,
            "neg" => Self::Neg,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Cos => "cos",
            Self::Sin => "sin",
            Self::Exp => "exp",
            Self::Sqrt => "sqrt",
            Self::Neg => "neg",
        }
    }

    /// NaN outside the domain (`sqrt` of a negative number).
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Self::Cos => x.cos(),
            Self::Sin => x.sin(),
            Self::Exp => x.exp(),
            Self::Sqrt => x.sqrt(),
            Self::Neg => -x,
        }
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableExpr {
    Var(String),
    Const(f64),
    Add(Vec<ObservableExpr>),
    Mul(Vec<ObservableExpr>),
    Pow(Box<ObservableExpr>, u32),
    Func(Function, Box<ObservableExpr>),
}

impl ObservableExpr {
    pub fn var(name: &str) -> Self {
        Self::Var(name.to_owned())
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables(&self, out: &mut BTreeSet<String>) {
        match self {
            Self::Var(v) => {
                out.insert(v.clone());
            }
            Self::Const(_) => {}
            Self::Add(xs) | Self::Mul(xs) => xs.iter().for_each(|x| x.collect_variables(out)),
            Self::Pow(b, _) | Self::Func(_, b) => b.collect_variables(out),
        }
    }

    /// Classical value under an assignment of the variables.
    pub fn evaluate(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64> {
        Ok(match self {
            Self::Var(v) => env(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?,
            Self::Const(c) => *c,
            Self::Add(xs) => {
                let mut s = 0.0;
                for x in xs {
                    s += x.evaluate(env)?;
                }
                s
            }
            Self::Mul(xs) => {
                let mut p = 1.0;
                for x in xs {
                    p *= x.evaluate(env)?;
                }
                p
            }
            Self::Pow(b, k) => b.evaluate(env)?.powi(*k as i32),
            Self::Func(f, arg) => {
                let x = arg.evaluate(env)?;
                let y = f.apply(x);
                if !y.is_finite() {
                    return Err(Error::DomainError { at: x });
                }
                y
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Self::Add(_) => 1,
            Self::Mul(_) => 2,
            Self::Const(c) if *c < 0.0 => 2,
            Self::Pow(..) => 3,
            _ => 4,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "(")?;
            self.fmt_at(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Self::Var(v) => f.write_str(v),
            Self::Const(c) if *c < 0.0 => write!(f, "neg({})", -c),
            Self::Const(c) => write!(f, "{c}"),
            Self::Add(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    match (i, negated(x)) {
                        (0, _) | (_, None) => {
                            if i > 0 {
                                write!(f, " + ")?;
                            }
                            x.fmt_at(f, 2)?;
                        }
                        (_, Some(pos)) => {
                            write!(f, " - ")?;
                            pos.fmt_at(f, 2)?;
                        }
                    }
                }
                Ok(())
            }
            Self::Mul(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    // nested products keep their grouping
                    x.fmt_at(f, 3)?;
                }
                Ok(())
            }
            Self::Pow(b, k) => {
                b.fmt_at(f, 4)?;
                write!(f, "^{k}")
            }
            Self::Func(func, arg) => {
                write!(f, "{func}(")?;
                arg.fmt_at(f, 0)?;
                write!(f, ")")
            }
        }
    }
}

/// For a term of the form `-c*rest` returns `c*rest` with `c > 0`.
fn negated(x: &ObservableExpr) -> Option<ObservableExpr> {
    match x {
        ObservableExpr::Const(c) if *c < 0.0 => Some(ObservableExpr::Const(-c)),
        ObservableExpr::Mul(xs) => match xs.first() {
            Some(ObservableExpr::Const(c)) if *c < 0.0 => {
                let mut rest = xs.clone();
                if *c == -1.0 {
                    rest.remove(0);
                } else {
                    rest[0] = ObservableExpr::Const(-c);
                }
                Some(match rest.len() {
                    1 => rest.pop().unwrap(),
                    _ => ObservableExpr::Mul(rest),
                })
            }
            _ => None,
        },
        _ => None,
    }
}

impl fmt::Display for ObservableExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}
