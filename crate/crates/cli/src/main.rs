use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use avcp::demo::{run_demo, DemoConfig, DemoName};
use avcp::evolution::EvolveFile;
use avcp::experiment::{arrangement, check_avcp, run_trials, ExperimentFile};
use avcp::expr::{parse, quantize, quantize_hermitized, BindingSet, BindingsJson};
use avcp::kinematics::build_fock;
use avcp::operator::MatrixJson;
use avcp::poisson::{check_dirac_rule, counterexample_report, CanonicalPolynomial};
use avcp::verify::{angular_table, kinematics_report, verify, Suite, VerifyConfig, VerifyReport};
use avcp::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "avcp", version, about = "Quantize classical observables and check operator identities")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "AVCP_ALPHA", default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for Monte Carlo trials (reports do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Quantize an expression against a bindings file.
    Quantize {
        expr: String,
        #[arg(long)]
        bindings: PathBuf,
        /// Use the symmetrized product rule instead of the simple-function gate.
        #[arg(long)]
        hermitized: bool,
    },
    /// Run a multi-copy experiment file.
    Experiment {
        file: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Evolve a state through a piecewise-constant schedule.
    Evolve { file: PathBuf },
    /// Run invariant suites: operators, avcp, evolution, kinematics, angular, poisson or all.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        levels: usize,
        #[arg(long, default_value = "2..12", value_parser = parse_dims)]
        dims: (usize, usize),
        /// Extra operators for the operator suite.
        #[arg(long)]
        bindings: Option<PathBuf>,
    },
    /// Worked demonstrations: a-squared, a-plus-b, hermitization, poisson-counterexample.
    Demo {
        name: String,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        levels: usize,
    },
    Kinematics {
        #[command(subcommand)]
        action: KinematicsAction,
    },
    Angular {
        #[command(subcommand)]
        action: AngularAction,
    },
    Poisson {
        #[command(subcommand)]
        action: PoissonAction,
    },
}

#[derive(Subcommand)]
enum KinematicsAction {
    /// Defect norms and displacement residuals for one truncation.
    Verify {
        #[arg(long, default_value_t = 64)]
        levels: usize,
    },
}

#[derive(Subcommand)]
enum AngularAction {
    /// Residual table for spin dimensions in a range.
    Verify {
        #[arg(long, default_value = "2..12", value_parser = parse_dims)]
        dims: (usize, usize),
    },
}

#[derive(Subcommand)]
enum PoissonAction {
    /// Compare iα·quantize({f,h}) with [F̂,Ĥ] in the truncated representation.
    Check {
        f: String,
        h: String,
        #[arg(long, default_value_t = 64)]
        levels: usize,
    },
    /// The x³, γp³ bracket and the gap left by symmetrization.
    Counterexample {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 64)]
        levels: usize,
    },
}

/// `a..b` (inclusive) or a single dimension.
fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let bad = || format!("expected `a..b` or `n`, got `{s}`");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim_start_matches('=').trim().parse().map_err(|_| bad())?),
        None => {
            let n = s.trim().parse().map_err(|_| bad())?;
            (n, n)
        }
    };
    if lo < 2 || hi < lo {
        return Err(format!("dimension range {lo}..{hi} must start at 2 or more and be nonempty"));
    }
    Ok((lo, hi))
}

enum Failure {
    Core(Error),
    Io(String),
    /// The command ran but at least one invariant failed.
    Invariant,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonSimpleExpression { .. } | Error::NonSimpleInput { .. } => 2,
        Error::NotHermitian { .. } => 3,
        _ => 1,
    }
}

/// JSON value and human rendering of a command result.
struct Output {
    json: Value,
    text: String,
    ok: bool,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn from_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Core(Error::Json(e)))
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load_bindings(path: &Path) -> Result<BindingSet, Failure> {
    let j: BindingsJson = from_json(path)?;
    Ok(BindingSet::from_json(j, None)?)
}

fn matrix_text(m: &avcp::ComplexMatrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            s.push_str(&format!(" {:>10.6}{:+.6}i", z.re, z.im));
        }
        s.push('\n');
    }
    s
}

fn verify_text(r: &VerifyReport) -> String {
    let mut s = String::new();
    for suite in &r.suites {
        for c in &suite.checks {
            let bound = match (c.min, c.max) {
                (Some(a), Some(b)) => format!("[{a:.3e}, {b:.3e}]"),
                (Some(a), None) => format!(">= {a:.3e}"),
                (None, Some(b)) => format!("<= {b:.3e}"),
                (None, None) => String::new(),
            };
            let status = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!("{:<11} {:<44} {:>12.4e} {:>26}  {status}\n", suite.suite.name(), c.name, c.value, bound));
        }
    }
    s.push_str(&format!("overall: {}\n", if r.passed { "PASS" } else { "FAIL" }));
    s
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let alpha = cli.alpha;
    match &cli.command {
        Command::Quantize { expr, bindings, hermitized } => {
            let b = load_bindings(bindings)?;
            let e = parse(expr)?;
            let op = if *hermitized { quantize_hermitized(&e, &b)? } else { quantize(&e, &b)? };
            let values = op.spectrum()?.eigenvalues.clone();
            let text = format!("{e}\n{}eigenvalues: {values:?}\n", matrix_text(op.matrix()));
            Ok(Output {
                json: json!({
                    "expression": e.to_string(),
                    "rule": if *hermitized { "hermitized" } else { "simple" },
                    "operator": MatrixJson::from(op.matrix()),
                    "eigenvalues": values,
                }),
                text,
                ok: true,
            })
        }
        Command::Experiment { file, trials } => {
            let f: ExperimentFile = from_json(file)?;
            let n = trials.unwrap_or(f.n_trials);
            let spec = f.into_spec(alpha)?;
            let report = run_trials(&spec, n, cli.seed)?;
            let exact = check_avcp(&spec).ok();
            let text = format!(
                "set-ups: {:?}\ntarget mean  : {:.6} ± {:.6} (exact {:.6})\nf mean       : {:.6} ± {:.6}{}\nverdict      : {:?}\n",
                arrangement(&spec)?.groups,
                report.sampled_lhs.mean,
                report.sampled_lhs.stderr,
                report.exact_lhs,
                report.sampled_rhs.mean,
                report.sampled_rhs.stderr,
                report.exact_rhs.map(|x| format!(" (exact {x:.6})")).unwrap_or_default(),
                report.verdict,
            );
            let mut json = to_value(&report);
            json["exact_check"] = to_value(&exact);
            Ok(Output { json, text, ok: true })
        }
        Command::Evolve { file } => {
            let f: EvolveFile = from_json(file)?;
            let out = f.run(alpha)?;
            let text = out
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(k, z)| format!("{k:>4} {:>12.8} {:+.8}i\n", z.re, z.im))
                .collect();
            Ok(Output { json: to_value(&out), text, ok: true })
        }
        Command::Verify { suite, trials, levels, dims, bindings } => {
            let cfg = VerifyConfig {
                seed: cli.seed,
                alpha,
                levels: *levels,
                dims: dims.0..=dims.1,
                trials: *trials,
                bindings: bindings.as_deref().map(load_bindings).transpose()?,
            };
            let r = verify(&Suite::parse_list(suite)?, &cfg)?;
            Ok(Output {
                text: verify_text(&r),
                ok: r.passed,
                json: to_value(&r),
            })
        }
        Command::Demo { name, trials, levels } => {
            let cfg = DemoConfig {
                seed: cli.seed,
                trials: *trials,
                alpha,
                levels: *levels,
            };
            let r = run_demo(name.parse::<DemoName>()?, &cfg)?;
            Ok(Output { json: to_value(&r), text: r.to_string(), ok: true })
        }
        Command::Kinematics { action: KinematicsAction::Verify { levels } } => {
            let r = kinematics_report(*levels, alpha)?;
            let ok = r.defect_off_corner == 0.0
                && r.defect_corner_error <= 1e-12 * alpha * *levels as f64
                && r.shift_residual <= 1e-6
                && r.momentum_residual <= 1e-10
                && r.drift_residual <= 1e-5;
            let text = serde_json::to_value(&r)
                .expect("serializable")
                .as_object()
                .expect("struct")
                .iter()
                .map(|(k, v)| format!("{k:<26} {v}\n"))
                .collect();
            Ok(Output { json: to_value(&r), text, ok })
        }
        Command::Angular { action: AngularAction::Verify { dims } } => {
            let rows = angular_table(dims.0..=dims.1, alpha, cli.seed)?;
            let a2 = alpha * alpha;
            let ok = rows.iter().all(|r| {
                r.commutator <= 1e-10 * a2
                    && r.casimir <= 1e-10 * a2
                    && r.generator <= 1e-10 * alpha
                    && r.full_turn <= 1e-10
                    && r.commutant_dimension == 1
                    && r.commutant_scalar <= 1e-8
                    && (6.0..=10.0).contains(&r.rotation_ratio)
            });
            let mut text = format!(
                "{:>3} {:>5} {:>10} {:>10} {:>10} {:>10} {:>4} {:>10} {:>8} {:>8}\n",
                "n", "j", "comm", "casimir", "gen", "2pi", "dim", "scalar", "rot", "frame"
            );
            for r in &rows {
                text.push_str(&format!(
                    "{:>3} {:>5.1} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>4} {:>10.2e} {:>8.3} {:>8.3}\n",
                    r.n, r.j, r.commutator, r.casimir, r.generator, r.full_turn, r.commutant_dimension,
                    r.commutant_scalar, r.rotation_ratio, r.frame_ratio
                ));
            }
            Ok(Output { json: to_value(&rows), text, ok })
        }
        Command::Poisson { action: PoissonAction::Check { f, h, levels } } => {
            let rep = build_fock(*levels, alpha)?;
            let r = check_dirac_rule(&CanonicalPolynomial::parse(f, 1)?, &CanonicalPolynomial::parse(h, 1)?, &rep)?;
            let text = format!(
                "{{f,h}} = {}\nresidual {:.3e} on block 0..{} (tolerance {:.3e}): {}\n",
                r.bracket,
                r.residual,
                r.block,
                r.tolerance,
                if r.passed { "PASS" } else { "FAIL" }
            );
            Ok(Output { ok: r.passed, json: to_value(&r), text })
        }
        Command::Poisson { action: PoissonAction::Counterexample { gamma, levels } } => {
            let rep = build_fock(*levels, alpha)?;
            let r = counterexample_report(*gamma, &rep)?;
            let text = avcp::demo::DemoReport::PoissonCounterexample(r.clone()).to_string();
            Ok(Output { json: to_value(&r), text, ok: true })
        }
    }
}

fn emit(cli: &Cli, out: &Output) -> Result<(), Failure> {
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
        Format::Text => out.text.clone(),
    };
    match &cli.out {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = run(&cli).and_then(|out| {
        emit(&cli, &out)?;
        if out.ok {
            Ok(())
        } else {
            Err(Failure::Invariant)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant) => ExitCode::from(3),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
