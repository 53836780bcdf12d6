//! Seeded invariant suites.
//!
//! Every suite draws from its own stream of the run seed, so a suite reports
//! the same numbers whether it runs alone or as part of `all`. Reports carry
//! no timings.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::angular::{
    casimir_residual, check_frame_rotation_covariance, check_rotation_identity, commutant, commutator_residual,
    expectation_vector, full_turn_residual, generator_residual, spin_operators,
};
use crate::error::{Error, Result};
use crate::evolution::{check_ehrenfest, check_energy_conservation, evolve, propagator, HamiltonianSchedule};
use crate::experiment::{check_avcp, compare_average_values, enumerate_expectation, run_trials, ExperimentSpec};
use crate::expr::{demonstrate_inconsistency, parse, BindingSet};
use crate::kinematics::{
    build_fock, canonical_defect, check_displacement, displacement_commutator_residual, gaussian_packet,
    photon_drift_check, FockTruncation,
};
use crate::operator::{c, identity, max_diff, pauli, HermitianOperator, C64};
use crate::poisson::{check_dirac_rule, counterexample_report, poisson_bracket, CanonicalPolynomial};
use crate::random::{random_hermitian, random_state, stream_rng};
use crate::scenario::{random_nonsimple_case, random_simple_case, with_random_state};
use crate::state::{ProjectiveMeasurement, QuantumState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Operators,
    Avcp,
    Evolution,
    Kinematics,
    Angular,
    Poisson,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Operators,
        Suite::Avcp,
        Suite::Evolution,
        Suite::Kinematics,
        Suite::Angular,
        Suite::Poisson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Avcp => "avcp",
            Suite::Evolution => "evolution",
            Suite::Kinematics => "kinematics",
            Suite::Angular => "angular",
            Suite::Poisson => "poisson",
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64 + 1
    }

    /// `all` expands to every suite.
    pub fn parse_list(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Ok(vec![s.parse()?])
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    pub alpha: f64,
    pub levels: usize,
    pub dims: RangeInclusive<usize>,
    pub trials: usize,
    /// Extra operators to put through the operator checks.
    pub bindings: Option<BindingSet>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha: 1.0,
            levels: 64,
            dims: 2..=12,
            trials: 20_000,
            bindings: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, min: Option<f64>, max: Option<f64>) -> Self {
        let passed = !value.is_nan() && min.is_none_or(|m| value >= m) && max.is_none_or(|m| value <= m);
        Self {
            name: name.into(),
            value,
            min,
            max,
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, max: f64) -> Self {
        Self::new(name, value, None, Some(max))
    }

    pub fn at_least(name: impl Into<String>, value: f64, min: f64) -> Self {
        Self::new(name, value, Some(min), None)
    }

    pub fn within(name: impl Into<String>, value: f64, min: f64, max: f64) -> Self {
        Self::new(name, value, Some(min), Some(max))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite,
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub alpha: f64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

pub fn verify(suites: &[Suite], cfg: &VerifyConfig) -> Result<VerifyReport> {
    let suites = suites.iter().map(|&s| run_suite(s, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport {
        seed: cfg.seed,
        alpha: cfg.alpha,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Operators => operator_checks(cfg)?,
        Suite::Avcp => avcp_checks(cfg)?,
        Suite::Evolution => evolution_checks(cfg)?,
        Suite::Kinematics => kinematics_checks(cfg)?,
        Suite::Angular => angular_checks(cfg)?,
        Suite::Poisson => poisson_checks(cfg)?,
    };
    Ok(SuiteReport::new(suite, checks))
}

/// Running maximum of named residuals, kept in insertion order.
#[derive(Default)]
struct Worst(Vec<(String, f64, f64)>);

impl Worst {
    fn note(&mut self, name: &str, value: f64, max: f64) {
        match self.0.iter_mut().find(|(n, _, _)| n == name) {
            Some(slot) => slot.1 = if value.is_nan() { value } else { slot.1.max(value) },
            None => self.0.push((name.to_owned(), value, max)),
        }
    }

    fn into_checks(self) -> Vec<Check> {
        self.0.into_iter().map(|(n, v, m)| Check::at_most(n, v, m)).collect()
    }
}

fn largest(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn reconstruction_residual(a: &HermitianOperator) -> Result<f64> {
    let s = a.spectrum()?;
    let rebuilt = HermitianOperator::from_eigensystem(&s.eigenvalues, &s.eigenvectors)?;
    Ok(max_diff(rebuilt.matrix(), a.matrix()) / a.norm_max().max(1.0))
}

fn operator_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, Suite::Operators.stream());
    let mut w = Worst::default();
    for k in 0..24 {
        let n = 1 + k % 6;
        let a = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let scale = a.norm_max().max(1.0);
        let s = a.spectrum()?;

        w.note("eigen.reconstruction", reconstruction_residual(&a)?, 1e-10);
        let gram = s.eigenvectors.adjoint() * &s.eigenvectors;
        w.note("eigen.orthonormality", max_diff(&gram, &identity(n)), 1e-10);

        let sq = a.apply_fn(|x| x * x)?;
        w.note("calculus.square", max_diff(sq.matrix(), &(a.matrix() * a.matrix())) / (scale * scale), 1e-10);
        let cubic = a.apply_fn(|x| x * x * x - 2.0 * x)?;
        let direct = a.matrix() * a.matrix() * a.matrix() - a.matrix() * c(2.0, 0.0);
        w.note("calculus.cubic", max_diff(cubic.matrix(), &direct) / scale.powi(3), 1e-10);

        let m = ProjectiveMeasurement::new(&a)?;
        let p = m.probabilities(&v)?;
        w.note("born.total_probability", (p.iter().sum::<f64>() - 1.0).abs(), 1e-12);
        let mean: f64 = p.iter().zip(m.values()).map(|(p, a)| p * a).sum();
        w.note("born.mean", (mean - a.expectation(&v)?).abs() / scale, 1e-10);

        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let turned = v.with_global_phase(phi);
        w.note("phase.expectation", (a.expectation(&turned)? - a.expectation(&v)?).abs() / scale, 1e-12);
        let q = m.probabilities(&turned)?;
        w.note("phase.probabilities", p.iter().zip(&q).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max), 1e-12);

        let out = m.measure(&v, &mut rng)?;
        let wv = out.collapsed.amplitudes();
        let resid = largest(&(a.matrix() * wv - wv * c(out.value, 0.0)));
        w.note("collapse.eigenvector", resid / scale, 1e-10);
        w.note("collapse.norm", (out.collapsed.norm() - 1.0).abs(), 1e-12);
        let again = m.measure(&out.collapsed, &mut rng)?;
        w.note("collapse.repeatable", (again.value - out.value).abs(), 0.0);

        let other = random_state(2, &mut rng);
        let joint = QuantumState::new(v.amplitudes().kronecker(other.amplitudes()).iter().copied().collect())?
            .with_factor_dims(vec![n, 2])?;
        let embedded = a.embed(&[n, 2], 0)?;
        w.note("embed.expectation", (embedded.expectation(&joint)? - a.expectation(&v)?).abs() / scale, 1e-12);
    }
    let mut checks = w.into_checks();

    let sx_sz = HermitianOperator::new(pauli::x() + pauli::z())?;
    let s = sx_sz.spectrum()?;
    let r2 = 2f64.sqrt();
    let spread = (s.eigenvalues[0] + r2).abs().max((s.eigenvalues[1] - r2).abs());
    checks.push(Check::at_most("pauli.sum_spectrum", spread, 1e-12));

    let lopsided = identity(2) + pauli::x() * c(0.0, 1.0);
    let rejected = matches!(HermitianOperator::new(lopsided), Err(Error::NotHermitian { .. }));
    checks.push(Check::at_most("gate.non_hermitian_rejected", if rejected { 0.0 } else { 1.0 }, 0.0));

    if let Some(b) = &cfg.bindings {
        for name in b.names() {
            let op = &b.get(name)?.operator;
            checks.push(Check::at_most(
                format!("bindings.{name}.reconstruction"),
                reconstruction_residual(op)?,
                1e-10,
            ));
        }
    }
    Ok(checks)
}

/// The three implementations of an `A²` measurement for one operator and state.
#[derive(Clone, Debug)]
pub struct SquareImplementations {
    /// Measure `A` once and square the outcome.
    pub square_outcome: ExperimentSpec,
    /// Measure `A²` directly.
    pub direct: ExperimentSpec,
    /// Measure `A` on two copies and multiply.
    pub two_copies: ExperimentSpec,
}

pub fn square_implementations(a: &HermitianOperator, v: &QuantumState) -> Result<SquareImplementations> {
    let sq = a.powi(2);
    let b = BindingSet::from_operators([("A", a.clone()), ("A2", a.clone()), ("Q", sq.clone()), ("C", sq)])?;
    Ok(SquareImplementations {
        square_outcome: ExperimentSpec::new(v.clone(), b.clone(), &["A"], "C", parse("A^2")?)?,
        direct: ExperimentSpec::new(v.clone(), b.clone(), &["Q"], "C", parse("Q")?)?,
        two_copies: ExperimentSpec::new(v.clone(), b, &["A", "A2"], "C", parse("A*A2")?)?
            .with_setups(&[&["A"], &["A2"]])?,
    })
}

/// `Sx` and `Sz` measured one after the other on one copy, `f = Sx + Sz`.
pub fn sequential_spin_sum(alpha: f64, v: &QuantumState) -> Result<ExperimentSpec> {
    let half = c(alpha / 2.0, 0.0);
    let sx = HermitianOperator::new(pauli::x() * half)?;
    let sz = HermitianOperator::new(pauli::z() * half)?;
    let sum = sx.add(&sz)?;
    let b = BindingSet::from_operators([("Sx", sx), ("Sz", sz), ("S", sum)])?;
    ExperimentSpec::new(v.clone(), b, &["Sx", "Sz"], "S", parse("Sx + Sz")?)?.with_setups(&[&["Sx", "Sz"]])
}

fn avcp_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, Suite::Avcp.stream());
    let mut w = Worst::default();
    let mut max_z: f64 = 0.0;
    for k in 0..6 {
        let n = 2 + k % 5;
        let a = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let mean = a.expectation(&v)?;
        let mean_sq = a.powi(2).expectation(&v)?;
        let s = square_implementations(&a, &v)?;
        let tol = |x: f64| x.abs().max(1.0);
        w.note("a_squared.square_outcome", (enumerate_expectation(&s.square_outcome)? - mean_sq).abs() / tol(mean_sq), 1e-12);
        w.note("a_squared.direct", (enumerate_expectation(&s.direct)? - mean_sq).abs() / tol(mean_sq), 1e-12);
        w.note("a_squared.two_copies", (enumerate_expectation(&s.two_copies)? - mean * mean).abs() / tol(mean * mean), 1e-12);
        if k == 0 {
            for (i, spec) in [&s.square_outcome, &s.direct, &s.two_copies].into_iter().enumerate() {
                let r = run_trials(spec, cfg.trials, cfg.seed.wrapping_add(i as u64))?;
                max_z = max_z.max(r.z_rhs.unwrap_or(f64::INFINITY));
            }
        }
    }
    let mut checks = w.into_checks();
    checks.push(Check::at_most("a_squared.sampled_z", max_z, 4.0));

    let v = random_state(2, &mut rng);
    let spec = sequential_spin_sum(cfg.alpha, &v)?;
    let s = spec.bindings.get("S")?.operator.spectrum()?;
    let e = cfg.alpha / 2f64.sqrt();
    let spread = (s.eigenvalues[0] + e).abs().max((s.eigenvalues[1] - e).abs());
    checks.push(Check::at_most("spin_sum.eigenvalues", spread / cfg.alpha, 1e-12));
    let r = run_trials(&spec, cfg.trials.min(4096), cfg.seed)?;
    let off_grid = r
        .rhs_support
        .iter()
        .map(|s| [-cfg.alpha, 0.0, cfg.alpha].iter().map(|g| (s.value - g).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    checks.push(Check::at_most("spin_sum.sequential_values", off_grid / cfg.alpha, 1e-12));

    let mut worst_simple: f64 = 0.0;
    for _ in 0..40 {
        let spec = random_simple_case(&mut rng)?;
        let r = check_avcp(&spec)?;
        worst_simple = worst_simple.max(r.residual / (1.0 + r.lhs.abs()));
    }
    checks.push(Check::at_most("avcp.simple_sweep", worst_simple, 1e-9));

    let mut weakest: f64 = f64::INFINITY;
    for _ in 0..10 {
        let spec = random_nonsimple_case(&mut rng)?;
        let mut best: f64 = 0.0;
        for _ in 0..8 {
            best = best.max(compare_average_values(&with_random_state(&spec, &mut rng)?)?.residual);
        }
        weakest = weakest.min(best);
    }
    checks.push(Check::at_least("avcp.nonsimple_violation", weakest, 1e-6));

    let mut smallest: f64 = f64::INFINITY;
    for _ in 0..6 {
        let n = rng.random_range(2..=4);
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        smallest = smallest.min(demonstrate_inconsistency(&a, &b)?.difference_norm);
    }
    checks.push(Check::at_least("hermitization.difference", smallest, 1e-8));
    Ok(checks)
}

/// Error of midpoint slicing against a fine reference for
/// `H(t) = H₀ + tH₁` on `[0, 1]`, at `steps`, `2·steps`, `4·steps`.
pub fn slicing_errors(h0: &HermitianOperator, h1: &HermitianOperator, v: &QuantumState, alpha: f64, steps: usize) -> Result<[f64; 3]> {
    let (a, b) = (h0.clone(), h1.clone());
    let sched = HamiltonianSchedule::from_fn(0.0, 1.0, h0.dim(), alpha, move |t| {
        a.add(&b.scale(t)).expect("same dimension")
    })?;
    let reference = evolve(v, &sched, 10_000)?;
    let err = |k: usize| -> Result<f64> {
        let got = evolve(v, &sched, k)?;
        Ok((got.amplitudes() - reference.amplitudes()).norm())
    };
    Ok([err(steps)?, err(2 * steps)?, err(4 * steps)?])
}

fn evolution_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, Suite::Evolution.stream());
    let alpha = cfg.alpha;
    let mut w = Worst::default();
    for k in 0..50 {
        let n = 2 + k % 5;
        let h = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let dt = rng.random_range(-2.0..2.0);
        let u = propagator(&h, dt, alpha)?;
        w.note("unitarity", max_diff(&(u.adjoint() * &u), &identity(n)), 1e-10);
        let later = evolve(&v, &HamiltonianSchedule::constant(h.clone(), 0.0, dt.abs(), alpha)?, 1)?;
        w.note("norm", (later.norm() - 1.0).abs(), 1e-12);
        let e = h.expectation(&v)?;
        w.note("energy", check_energy_conservation(&v, &h, dt, alpha)? / (1.0 + e.abs()), 1e-10);

        let t2 = rng.random_range(-1.0..1.0);
        let composed = propagator(&h, t2, alpha)? * &u;
        w.note("composition", max_diff(&propagator(&h, dt + t2, alpha)?, &composed), 1e-10);

        let sliced = evolve(&v, &HamiltonianSchedule::constant(h.clone(), 0.0, 1.0, alpha)?, 16)?;
        let single = propagator(&h, 1.0, alpha)? * v.amplitudes();
        w.note("constant_slicing", largest(&(sliced.amplitudes() - single)), 1e-12);

        let s = h.spectrum()?;
        let eig = QuantumState::new(s.eigenvectors.column(k % n).iter().copied().collect())?;
        let moved = eig.apply(&u)?;
        let test = random_hermitian(n, &mut rng);
        w.note("eigenstate_invariance", (test.expectation(&moved)? - test.expectation(&eig)?).abs(), 1e-10);
    }
    let mut checks = w.into_checks();

    let h0 = random_hermitian(3, &mut rng);
    let h1 = random_hermitian(3, &mut rng);
    let v = random_state(3, &mut rng);
    let [e1, e2, e3] = slicing_errors(&h0, &h1, &v, alpha, 10)?;
    checks.push(Check::within("slicing.order_ratio_1", e1 / e2, 3.6, 4.4));
    checks.push(Check::within("slicing.order_ratio_2", e2 / e3, 3.6, 4.4));

    let omega = 1.3;
    let hx = HermitianOperator::new(pauli::x() * c(omega / 2.0, 0.0))?;
    let fz = HermitianOperator::new(pauli::z())?;
    let v = random_state(2, &mut rng);
    let coarse = check_ehrenfest(&fz, &hx, &v, 1e-2, alpha)?;
    let fine = check_ehrenfest(&fz, &hx, &v, 1e-3, alpha)?;
    checks.push(Check::within("ehrenfest.first_order_ratio", coarse / fine, 8.0, 12.0));
    let commuting = check_ehrenfest(&hx.powi(2), &hx, &v, 1e-3, alpha)?;
    checks.push(Check::at_most("ehrenfest.commuting", commuting, 1e-10));
    Ok(checks)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KinematicsReport {
    pub n_levels: usize,
    pub alpha: f64,
    /// Largest entry of `[x, p] − iα` away from the last diagonal entry.
    pub defect_off_corner: f64,
    /// `|defect[n−1, n−1] + iαn|`
    pub defect_corner_error: f64,
    pub displacement_commutator: f64,
    pub boundary_weight: f64,
    pub shift_residual: f64,
    pub momentum_residual: f64,
    pub drift_residual: f64,
}

pub const DISPLACEMENT_EPS: f64 = 0.1;
pub const DRIFT_DT: f64 = 1e-4;

fn defect_parts(f: &FockTruncation) -> (f64, f64) {
    let d = canonical_defect(f);
    let n = f.n_levels;
    let mut off: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if (i, j) != (n - 1, n - 1) {
                off = off.max(d[(i, j)].norm());
            }
        }
    }
    let corner = (d[(n - 1, n - 1)] - c(0.0, -f.alpha * n as f64)).norm();
    (off, corner)
}

/// Defects and displacement residuals for a Gaussian packet at `x0 = 0.4`, `p0 = −0.3`.
pub fn kinematics_report(levels: usize, alpha: f64) -> Result<KinematicsReport> {
    let f = build_fock(levels, alpha)?;
    let (off, corner) = defect_parts(&f);
    let v = gaussian_packet(&f, 0.4, -0.3)?;
    let d = check_displacement(&f, &v, DISPLACEMENT_EPS)?;
    Ok(KinematicsReport {
        n_levels: levels,
        alpha,
        defect_off_corner: off,
        defect_corner_error: corner,
        displacement_commutator: displacement_commutator_residual(&f)?,
        boundary_weight: f.boundary_weight(&v)?,
        shift_residual: d.shift_residual,
        momentum_residual: d.momentum_residual,
        drift_residual: photon_drift_check(&f, 1.0, &v, DRIFT_DT)?,
    })
}

/// Displacement shift residuals for one coherent state at `n = 16, 32, 64, 128`.
pub fn displacement_convergence(alpha: f64) -> Result<Vec<(usize, f64)>> {
    [16, 32, 64, 128]
        .into_iter()
        .map(|n| {
            let f = build_fock(n, alpha)?;
            let v = f.coherent_state(c(0.8, 0.4))?;
            Ok((n, check_displacement(&f, &v, DISPLACEMENT_EPS)?.shift_residual))
        })
        .collect()
}

/// Doublings that neither shrink the residual nor stay under `floor`.
pub fn non_decreasing_steps(seq: &[f64], floor: f64) -> usize {
    seq.windows(2)
        .filter(|w| !(w[1] < w[0] || (w[0] <= floor && w[1] <= floor)))
        .count()
}

fn kinematics_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut w = Worst::default();
    for n in 2..=cfg.levels.max(2) {
        let (off, corner) = defect_parts(&build_fock(n, cfg.alpha)?);
        w.note("defect.off_corner", off, 0.0);
        w.note("defect.corner", corner / (cfg.alpha * n as f64), 1e-12);
    }
    let mut checks = w.into_checks();
    let r = kinematics_report(cfg.levels, cfg.alpha)?;
    checks.push(Check::at_most("displacement.commutator", r.displacement_commutator, 1e-10));
    checks.push(Check::at_most("state.boundary_weight", r.boundary_weight, 1e-10));
    checks.push(Check::at_most("displacement.shift", r.shift_residual, 1e-6));
    checks.push(Check::at_most("displacement.momentum", r.momentum_residual, 1e-10));
    checks.push(Check::at_most("drift.rate", r.drift_residual, 1e-5));
    let conv: Vec<f64> = displacement_convergence(cfg.alpha)?.into_iter().map(|(_, r)| r).collect();
    checks.push(Check::at_most(
        "displacement.convergence_violations",
        non_decreasing_steps(&conv, 1e-12) as f64,
        0.0,
    ));
    Ok(checks)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngularRow {
    pub n: usize,
    pub j: f64,
    pub commutator: f64,
    pub casimir: f64,
    pub generator: f64,
    pub full_turn: f64,
    pub commutant_dimension: usize,
    pub commutant_scalar: f64,
    /// `residual(ε)/residual(ε/2)` for the rotation identity at `ε = 0.05`.
    pub rotation_ratio: f64,
    /// Same for frame covariance at `ε = 0.05`.
    pub frame_ratio: f64,
    /// `max(0, |⟨L⟩| − αj)` for a random state.
    pub expectation_excess: f64,
}

pub fn angular_row<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<AngularRow> {
    let t = spin_operators(n, alpha)?;
    let com = commutant(&t)?;
    let v = random_state(n, rng);
    let eps = 0.05;
    let rot = check_rotation_identity(&t, &v, eps)? / check_rotation_identity(&t, &v, eps / 2.0)?;
    let frame = check_frame_rotation_covariance(&t, &v, eps)? / check_frame_rotation_covariance(&t, &v, eps / 2.0)?;
    let [x, y, z] = expectation_vector(&t, &v)?;
    let len = (x * x + y * y + z * z).sqrt();
    Ok(AngularRow {
        n,
        j: t.j(),
        commutator: commutator_residual(&t)?,
        casimir: casimir_residual(&t),
        generator: generator_residual(&t)?,
        full_turn: full_turn_residual(&t)?,
        commutant_dimension: com.dimension,
        commutant_scalar: com.scalar_residual,
        rotation_ratio: rot,
        frame_ratio: frame,
        expectation_excess: (len - alpha * t.j()).max(0.0),
    })
}

pub fn angular_table(dims: RangeInclusive<usize>, alpha: f64, seed: u64) -> Result<Vec<AngularRow>> {
    let mut rng = stream_rng(seed, Suite::Angular.stream());
    dims.map(|n| angular_row(n, alpha, &mut rng)).collect()
}

fn angular_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let a2 = cfg.alpha * cfg.alpha;
    for r in angular_table(cfg.dims.clone(), cfg.alpha, cfg.seed)? {
        let n = r.n;
        checks.push(Check::at_most(format!("n{n}.commutators"), r.commutator / a2, 1e-10));
        checks.push(Check::at_most(format!("n{n}.casimir"), r.casimir / a2, 1e-10));
        checks.push(Check::at_most(format!("n{n}.generators"), r.generator / cfg.alpha, 1e-10));
        checks.push(Check::at_most(format!("n{n}.full_turn"), r.full_turn, 1e-10));
        checks.push(Check::within(format!("n{n}.commutant_dimension"), r.commutant_dimension as f64, 1.0, 1.0));
        checks.push(Check::at_most(format!("n{n}.commutant_scalar"), r.commutant_scalar, 1e-8));
        checks.push(Check::within(format!("n{n}.rotation_cubic_ratio"), r.rotation_ratio, 6.0, 10.0));
        checks.push(Check::within(format!("n{n}.frame_quadratic_ratio"), r.frame_ratio, 3.0, 5.0));
        checks.push(Check::at_most(format!("n{n}.expectation_bound"), r.expectation_excess, 1e-12));
    }
    Ok(checks)
}

/// Simple `(f, h)` pairs whose bracket is also simple.
pub const DIRAC_PAIRS: [(&str, &str); 10] = [
    ("x", "0.5*p^2 + 1.5*x^2"),
    ("x", "2.5*p"),
    ("p", "0.5*p^2 + 2*x^2"),
    ("x", "p^3"),
    ("p", "x^3"),
    ("x^2", "p"),
    ("p^2", "x"),
    ("x + p", "x^2 + p^2"),
    ("2*x + 3", "p^4"),
    ("x^2 + p", "p + x"),
];

/// Random polynomial with small integer coefficients, so bracket
/// arithmetic stays exact in floating point.
pub fn random_canonical_polynomial<R: Rng + ?Sized>(n_pairs: usize, rng: &mut R) -> CanonicalPolynomial {
    let terms: Vec<(Vec<u32>, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let e = (0..2 * n_pairs).map(|_| if rng.random_bool(0.4) { rng.random_range(1..=2) } else { 0 }).collect();
            (e, rng.random_range(-3..=3) as f64)
        })
        .collect();
    CanonicalPolynomial::from_terms(n_pairs, terms).expect("finite coefficients")
}

/// Failures of antisymmetry, Leibniz and Jacobi on one random triple.
pub fn bracket_axiom_failures(f: &CanonicalPolynomial, g: &CanonicalPolynomial, h: &CanonicalPolynomial) -> usize {
    let pb = poisson_bracket;
    let anti = pb(f, h) == pb(h, f).scale(-1.0);
    let leibniz = pb(&f.mul(g), h) == f.mul(&pb(g, h)).add(&pb(f, h).mul(g));
    let jacobi = pb(f, &pb(g, h)).add(&pb(g, &pb(h, f))).add(&pb(h, &pb(f, g))).is_zero();
    [anti, leibniz, jacobi].iter().filter(|ok| !**ok).count()
}

fn poisson_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = stream_rng(cfg.seed, Suite::Poisson.stream());
    let mut failures = 0;
    for k in 0..40 {
        let n = 1 + k % 3;
        let [f, g, h] = [0, 1, 2].map(|_| random_canonical_polynomial(n, &mut rng));
        failures += bracket_axiom_failures(&f, &g, &h);
    }
    let mut checks = vec![Check::at_most("bracket.axiom_failures", failures as f64, 0.0)];
    let mut canonical = 0;
    for n in 1..=3 {
        for i in 0..n {
            for j in 0..n {
                let b = poisson_bracket(&CanonicalPolynomial::q(n, i), &CanonicalPolynomial::p(n, j));
                canonical += usize::from(b != CanonicalPolynomial::constant(n, if i == j { 1.0 } else { 0.0 }));
            }
        }
    }
    checks.push(Check::at_most("bracket.canonical_pairs", canonical as f64, 0.0));

    let rep = build_fock(cfg.levels, cfg.alpha)?;
    let small = [16, 32].map(|n| build_fock(n, cfg.alpha)).into_iter().collect::<Result<Vec<_>>>()?;
    let mut violations = 0;
    for (fs, hs) in DIRAC_PAIRS {
        let f = CanonicalPolynomial::parse(fs, 1)?;
        let h = CanonicalPolynomial::parse(hs, 1)?;
        let r = check_dirac_rule(&f, &h, &rep)?;
        checks.push(Check::at_most(format!("dirac.{{{fs}, {hs}}}"), r.residual, r.tolerance));
        let mut seq = Vec::new();
        for s in small.iter().chain([&rep]) {
            seq.push(check_dirac_rule(&f, &h, s)?);
        }
        let res: Vec<f64> = seq.iter().map(|r| r.residual).collect();
        let floor = seq.iter().map(|r| r.tolerance).fold(f64::INFINITY, f64::min);
        violations += non_decreasing_steps(&res, floor);
    }
    checks.push(Check::at_most("dirac.convergence_violations", violations as f64, 0.0));

    let ce = counterexample_report(1.0, &rep)?;
    checks.push(Check::at_most("counterexample.symmetric_form", ce.symmetric_form_residual, 1e-8));
    checks.push(Check::at_most("counterexample.off_scalar", ce.gap_off_scalar, 1e-8));
    let z = ce.gap_per_gamma_alpha3.expect("gamma is nonzero");
    checks.push(Check::at_most("counterexample.gap_is_3i", (c(z.re, z.im) - c(0.0, 3.0)).norm(), 1e-8));
    let doubled = counterexample_report(2.0, &rep)?;
    let lin = (c(doubled.gap.re, doubled.gap.im) - c(ce.gap.re, ce.gap.im) * 2.0).norm();
    checks.push(Check::at_most("counterexample.linear_in_gamma", lin, 1e-8 * cfg.alpha.powi(3).max(1.0)));
    Ok(checks)
}
