//! Worked demonstrations with numbers and verdicts.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{enumerate_expectation, run_trials, Estimate, ExperimentSpec};
use crate::expr::{demonstrate_inconsistency, InconsistencyReport};
use crate::kinematics::build_fock;
use crate::operator::{c, pauli, HermitianOperator};
use crate::poisson::{counterexample_report, CounterexampleReport};
use crate::random::{random_hermitian, random_state, stream_rng};
use crate::state::QuantumState;
use crate::verify::{sequential_spin_sum, square_implementations};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DemoName {
    ASquared,
    APlusB,
    Hermitization,
    PoissonCounterexample,
}

impl DemoName {
    pub const ALL: [DemoName; 4] = [
        DemoName::ASquared,
        DemoName::APlusB,
        DemoName::Hermitization,
        DemoName::PoissonCounterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DemoName::ASquared => "a-squared",
            DemoName::APlusB => "a-plus-b",
            DemoName::Hermitization => "hermitization",
            DemoName::PoissonCounterexample => "poisson-counterexample",
        }
    }
}

impl FromStr for DemoName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DemoName::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownDemo(s.to_owned()))
    }
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub seed: u64,
    pub trials: usize,
    pub alpha: f64,
    pub levels: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 100_000,
            alpha: 1.0,
            levels: 64,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplementationResult {
    pub name: String,
    pub description: String,
    pub exact: f64,
    pub sampled: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ASquaredDemo {
    pub operator: HermitianOperator,
    pub state: QuantumState,
    pub mean_of_square: f64,
    pub square_of_mean: f64,
    pub gap: f64,
    pub implementations: Vec<ImplementationResult>,
}

#[derive(Clone, Debug, Serialize)]
pub struct APlusBDemo {
    pub alpha: f64,
    /// Eigenvalues of `Sx + Sz`.
    pub sum_eigenvalues: Vec<f64>,
    /// Distinct values of `sx + sz` seen when both are measured in sequence on one copy.
    pub sequential_values: Vec<f64>,
    pub sequential_mean: Estimate,
    /// `⟨Sx + Sz⟩` and the two-copy estimate of `E[sx + sz]`.
    pub expectation: f64,
    pub two_copy_mean: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct HermitizationDemo {
    pub a: HermitianOperator,
    pub b: HermitianOperator,
    pub report: InconsistencyReport,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "demo", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum DemoReport {
    ASquared(ASquaredDemo),
    APlusB(APlusBDemo),
    Hermitization(HermitizationDemo),
    PoissonCounterexample(CounterexampleReport),
}

pub fn run_demo(name: DemoName, cfg: &DemoConfig) -> Result<DemoReport> {
    Ok(match name {
        DemoName::ASquared => DemoReport::ASquared(a_squared(cfg)?),
        DemoName::APlusB => DemoReport::APlusB(a_plus_b(cfg)?),
        DemoName::Hermitization => DemoReport::Hermitization(hermitization()?),
        DemoName::PoissonCounterexample => {
            DemoReport::PoissonCounterexample(counterexample_report(1.0, &build_fock(cfg.levels, cfg.alpha)?)?)
        }
    })
}

fn implementation(name: &str, description: &str, spec: &ExperimentSpec, cfg: &DemoConfig, k: u64) -> Result<ImplementationResult> {
    Ok(ImplementationResult {
        name: name.into(),
        description: description.into(),
        exact: enumerate_expectation(spec)?,
        sampled: run_trials(spec, cfg.trials, cfg.seed.wrapping_add(k))?.sampled_rhs,
    })
}

fn a_squared(cfg: &DemoConfig) -> Result<ASquaredDemo> {
    let mut rng = stream_rng(cfg.seed, 0);
    let a = random_hermitian(3, &mut rng).scale(cfg.alpha);
    let v = random_state(3, &mut rng);
    let s = square_implementations(&a, &v)?;
    let mean = a.expectation(&v)?;
    let mean_of_square = a.powi(2).expectation(&v)?;
    Ok(ASquaredDemo {
        implementations: vec![
            implementation("i", "measure A once, square the outcome", &s.square_outcome, cfg, 0)?,
            implementation("ii", "measure A^2 directly", &s.direct, cfg, 1)?,
            implementation("iii", "measure A on two copies, multiply", &s.two_copies, cfg, 2)?,
        ],
        operator: a,
        state: v,
        mean_of_square,
        square_of_mean: mean * mean,
        gap: mean_of_square - mean * mean,
    })
}

fn a_plus_b(cfg: &DemoConfig) -> Result<APlusBDemo> {
    let v = QuantumState::from_real(&[1.0, 0.0])?;
    let seq = sequential_spin_sum(cfg.alpha, &v)?;
    let sum = &seq.bindings.get("S")?.operator;
    let r = run_trials(&seq, cfg.trials, cfg.seed)?;
    let copies = seq.clone().with_setups(&[&["Sx"], &["Sz"]])?;
    let two = run_trials(&copies, cfg.trials, cfg.seed.wrapping_add(1))?;
    // rounding noise splits e.g. 0 into ±1e-16
    let mut values: Vec<f64> = r.rhs_support.iter().map(|s| (s.value * 1e9).round() / 1e9 + 0.0).collect();
    values.dedup();
    Ok(APlusBDemo {
        alpha: cfg.alpha,
        sum_eigenvalues: sum.spectrum()?.eigenvalues.clone(),
        sequential_values: values,
        sequential_mean: r.sampled_rhs,
        expectation: sum.expectation(&v)?,
        two_copy_mean: two.sampled_rhs,
    })
}

fn hermitization() -> Result<HermitizationDemo> {
    let a = HermitianOperator::new(pauli::z())?;
    let b = HermitianOperator::new(pauli::x() + pauli::z() * c(0.5, 0.0))?;
    Ok(HermitizationDemo {
        report: demonstrate_inconsistency(&a, &b)?,
        a,
        b,
    })
}

fn fmt_estimate(e: &Estimate) -> String {
    format!("{:.6} ± {:.6}", e.mean, e.stderr)
}

impl fmt::Display for DemoReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemoReport::ASquared(d) => {
                writeln!(f, "Three ways to measure A^2 on a random 3-level state")?;
                writeln!(f, "  <A^2>   = {:.6}", d.mean_of_square)?;
                writeln!(f, "  <A>^2   = {:.6}", d.square_of_mean)?;
                writeln!(f, "  gap     = {:.6}", d.gap)?;
                writeln!(f)?;
                writeln!(f, "  {:<4} {:<40} {:>12} {:>24}", "impl", "procedure", "exact", "sampled")?;
                for i in &d.implementations {
                    writeln!(f, "  {:<4} {:<40} {:>12.6} {:>24}", i.name, i.description, i.exact, fmt_estimate(&i.sampled))?;
                }
                Ok(())
            }
            DemoReport::APlusB(d) => {
                writeln!(f, "Spin-1/2, Sx + Sz with alpha = {}", d.alpha)?;
                writeln!(f, "  eigenvalues of Sx + Sz      : {:?}", d.sum_eigenvalues)?;
                writeln!(f, "  sequential outcome values   : {:?}", d.sequential_values)?;
                writeln!(f, "  sequential mean             : {}", fmt_estimate(&d.sequential_mean))?;
                writeln!(f, "  <Sx + Sz>                   : {:.6}", d.expectation)?;
                writeln!(f, "  two-copy mean of sx + sz    : {}", fmt_estimate(&d.two_copy_mean))?;
                let agree = (d.two_copy_mean.mean - d.expectation).abs() <= 4.0 * d.two_copy_mean.stderr.max(1e-12);
                writeln!(f, "  two-copy average matches    : {}", if agree { "yes" } else { "no" })
            }
            DemoReport::Hermitization(d) => {
                writeln!(f, "Symmetrized products of A = sigma_z, B = sigma_x + sigma_z/2")?;
                writeln!(f, "  A*(A*B):")?;
                write_matrix(f, d.report.nested.matrix())?;
                writeln!(f, "  A^2*B:")?;
                write_matrix(f, d.report.power_first.matrix())?;
                writeln!(f, "  max |difference| = {:.6}", d.report.difference_norm)
            }
            DemoReport::PoissonCounterexample(r) => {
                writeln!(f, "F = x^3, H = gamma p^3, gamma = {}, alpha = {}, {} levels", r.gamma, r.alpha, r.n_levels)?;
                writeln!(f, "  safe block                                  : 0..{}", r.block)?;
                writeln!(f, "  [F,H] vs 3i gamma alpha (x2p2 + xp2x + p2x2) : {:.3e}", r.symmetric_form_residual)?;
                writeln!(f, "  [F,H] - (9i gamma alpha/2)(x2p2 + p2x2)      : {:.6} + {:.6}i times I", r.gap.re, r.gap.im)?;
                writeln!(f, "  deviation from a scalar matrix              : {:.3e}", r.gap_off_scalar)?;
                writeln!(f, "  |gap|                                       : {:.6}", r.gap_magnitude)?;
                if let Some(z) = r.gap_per_gamma_alpha3 {
                    writeln!(f, "  gap / (gamma alpha^3)                       : {:.6} + {:.6}i", z.re, z.im)?;
                }
                Ok(())
            }
        }
    }
}

fn write_matrix(f: &mut fmt::Formatter<'_>, m: &crate::operator::ComplexMatrix) -> fmt::Result {
    for i in 0..m.nrows() {
        write!(f, "   ")?;
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            write!(f, " {:>9.4}{:+.4}i", z.re, z.im)?;
        }
        writeln!(f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for d in DemoName::ALL {
            assert_eq!(d.name().parse::<DemoName>().unwrap(), d);
        }
        assert!(matches!("nope".parse::<DemoName>(), Err(Error::UnknownDemo(_))));
    }

    #[test]
    fn hermitization_groupings_differ() {
        let DemoReport::Hermitization(d) = run_demo(DemoName::Hermitization, &DemoConfig::default()).unwrap() else {
            unreachable!()
        };
        assert!(d.report.difference_norm > 0.5);
    }

    #[test]
    fn a_squared_gap_matches_variance() {
        let cfg = DemoConfig {
            trials: 4000,
            ..DemoConfig::default()
        };
        let DemoReport::ASquared(d) = run_demo(DemoName::ASquared, &cfg).unwrap() else {
            unreachable!()
        };
        assert!((d.implementations[0].exact - d.mean_of_square).abs() < 1e-12);
        assert!((d.implementations[1].exact - d.mean_of_square).abs() < 1e-12);
        assert!((d.implementations[2].exact - d.square_of_mean).abs() < 1e-12);
        assert!(d.gap > 0.0);
    }
}
