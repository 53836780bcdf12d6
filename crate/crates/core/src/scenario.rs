//! Randomized experiments for sweeps: simple and non-simple `f` over mixed
//! commuting and non-commuting bindings.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::error::Result;
use crate::experiment::{arrangement, ExperimentSpec};
use crate::expr::{
    expand_polynomial, quantize, quantize_hermitized, BindingSet, Function, MeasurementBinding, ObservableExpr,
};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::random::{random_hermitian, random_state, random_unitary};

const NAMES: [&str; 4] = ["A", "B", "C", "D"];
/// Name of the target binding in generated experiments.
pub const TARGET: &str = "T";

/// Subsystem layouts to draw from; `[n]` means no subsystem structure.
const LAYOUTS: [&[usize]; 5] = [&[2], &[3], &[4], &[2, 2], &[2, 3]];

fn random_bindings<R: Rng + ?Sized>(rng: &mut R) -> Result<BindingSet> {
    let dims = LAYOUTS[rng.random_range(0..LAYOUTS.len())].to_vec();
    let total: usize = dims.iter().product();
    let count = rng.random_range(2..=NAMES.len());
    // operators diagonal in these bases commute with each other
    let mut shared: Vec<Option<ComplexMatrix>> = vec![None; dims.len() + 1];
    let mut bindings = Vec::new();
    for name in &NAMES[..count] {
        // slot dims.len() is the full space
        let slot = if dims.len() > 1 && rng.random_bool(0.6) {
            rng.random_range(0..dims.len())
        } else {
            dims.len()
        };
        let n = if slot == dims.len() { total } else { dims[slot] };
        let op = if rng.random_bool(0.5) {
            let basis = shared[slot].get_or_insert_with(|| random_unitary(n, rng)).clone();
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-2..=2) as f64).collect();
            HermitianOperator::from_eigensystem(&values, &basis)?
        } else {
            random_hermitian(n, rng)
        };
        bindings.push(if slot == dims.len() {
            MeasurementBinding::new(name, op)
        } else {
            MeasurementBinding::on_subsystem(name, op, slot)
        });
    }
    BindingSet::new(dims, bindings)
}

fn coefficient<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let k = rng.random_range(1..=3) as f64;
    if rng.random_bool(0.5) {
        -k
    } else {
        k
    }
}

fn power(name: &str, k: u32) -> ObservableExpr {
    let v = ObservableExpr::var(name);
    if k == 1 {
        v
    } else {
        ObservableExpr::Pow(Box::new(v), k)
    }
}

fn random_simple_f<R: Rng + ?Sized>(b: &BindingSet, rng: &mut R) -> Result<ObservableExpr> {
    let names: Vec<&str> = b.names().collect();
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(1..=3) {
        let first = *names.choose(rng).expect("bindings are nonempty");
        if rng.random_bool(0.15) {
            let func = [Function::Cos, Function::Sin, Function::Exp][rng.random_range(0..3)];
            let arg = ObservableExpr::Mul(vec![ObservableExpr::Const(0.5), ObservableExpr::var(first)]);
            terms.push(ObservableExpr::Mul(vec![
                ObservableExpr::Const(coefficient(rng)),
                ObservableExpr::Func(func, Box::new(arg)),
            ]));
            continue;
        }
        let mut members = vec![first];
        for &other in &names {
            if members.contains(&other) || !rng.random_bool(0.5) {
                continue;
            }
            let mut ok = true;
            for m in &members {
                ok &= b.commute(m, other)?;
            }
            if ok {
                members.push(other);
            }
        }
        let mut factors = vec![ObservableExpr::Const(coefficient(rng))];
        factors.extend(members.iter().map(|m| power(m, rng.random_range(1..=2))));
        terms.push(ObservableExpr::Mul(factors));
    }
    if rng.random_bool(0.3) {
        terms.push(ObservableExpr::Const(coefficient(rng)));
    }
    Ok(ObservableExpr::Add(terms))
}

fn build<R: Rng + ?Sized>(
    b: BindingSet,
    f: ObservableExpr,
    target: HermitianOperator,
    rng: &mut R,
) -> Result<ExperimentSpec> {
    let b = b.with(MeasurementBinding::new(TARGET, target))?;
    let vars = f.variables();
    let names: Vec<&str> = vars.iter().map(String::as_str).collect();
    let v = random_state(b.dim(), rng).with_factor_dims(b.factor_dims().to_vec())?;
    ExperimentSpec::new(v, b, &names, TARGET, f)
}

/// Every product in `f` lands on a single copy under the planned arrangement.
fn products_colocated(spec: &ExperimentSpec) -> Result<bool> {
    let plan = arrangement(spec)?;
    let group_of = |n: &str| plan.groups.iter().position(|g| g.iter().any(|m| m == n));
    Ok(expand_polynomial(&spec.f).monomial_variable_sets().iter().all(|vars| {
        let mut groups = vars.iter().map(|v| group_of(v));
        match groups.next() {
            None => true,
            Some(g) => groups.all(|h| h == g),
        }
    }))
}

/// A simple `f` with the target bound to its quantization. Cases the planner
/// cannot keep together (a product chain across a non-commuting pair) are
/// redrawn.
pub fn random_simple_case<R: Rng + ?Sized>(rng: &mut R) -> Result<ExperimentSpec> {
    loop {
        let b = random_bindings(rng)?;
        let f = random_simple_f(&b, rng)?;
        if f.variables().is_empty() {
            continue;
        }
        let target = quantize(&f, &b)?;
        let spec = build(b, f, target, rng)?;
        if products_colocated(&spec)? {
            return Ok(spec);
        }
    }
}

/// `f` containing a product of two non-commuting measurements, with the
/// target bound to the symmetrized product.
pub fn random_nonsimple_case<R: Rng + ?Sized>(rng: &mut R) -> Result<ExperimentSpec> {
    loop {
        let b = random_bindings(rng)?;
        let names: Vec<&str> = b.names().collect();
        let mut pair = None;
        'outer: for (i, x) in names.iter().enumerate() {
            for y in &names[i + 1..] {
                if !b.commute(x, y)? {
                    pair = Some((*x, *y));
                    break 'outer;
                }
            }
        }
        let Some((x, y)) = pair else { continue };
        let mut terms = vec![ObservableExpr::Mul(vec![
            ObservableExpr::Const(coefficient(rng)),
            ObservableExpr::var(x),
            ObservableExpr::var(y),
        ])];
        if rng.random_bool(0.5) {
            let z = *names.choose(rng).expect("nonempty");
            terms.push(ObservableExpr::Mul(vec![ObservableExpr::Const(coefficient(rng)), ObservableExpr::var(z)]));
        }
        let f = ObservableExpr::Add(terms);
        let target = quantize_hermitized(&f, &b)?;
        return build(b, f, target, rng);
    }
}

/// The same experiment prepared in a fresh random state.
pub fn with_random_state<R: Rng + ?Sized>(spec: &ExperimentSpec, rng: &mut R) -> Result<ExperimentSpec> {
    let mut out = spec.clone();
    out.state = random_state(spec.bindings.dim(), rng).with_factor_dims(spec.bindings.factor_dims().to_vec())?;
    Ok(out)
}
