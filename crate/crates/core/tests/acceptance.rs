//! End-to-end acceptance criteria. Prints one line per criterion and exits
//! nonzero if any criterion fails for a reason other than a known deviation.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use avcp::angular::{
    casimir_residual, check_rotation_identity, commutant, commutator_residual, generator_residual, spin_operators,
};
use avcp::evolution::{check_energy_conservation, evolve, propagator, HamiltonianSchedule};
use avcp::experiment::{check_avcp, compare_average_values, enumerate_expectation, run_trials};
use avcp::expr::demonstrate_inconsistency;
use avcp::kinematics::{build_fock, canonical_defect, check_displacement, gaussian_packet, photon_drift_check};
use avcp::operator::{identity, max_diff};
use avcp::poisson::{check_dirac_rule, counterexample_report, CanonicalPolynomial};
use avcp::random::{random_hermitian, random_state, stream_rng};
use avcp::scenario::{random_nonsimple_case, random_simple_case, with_random_state};
use avcp::verify::{
    bracket_axiom_failures, random_canonical_polynomial, sequential_spin_sum, slicing_errors, square_implementations,
    verify, Suite, VerifyConfig, DIRAC_PAIRS,
};
use avcp::{QuantumState, Result};

#[derive(Default)]
struct Criterion {
    failures: Vec<String>,
    /// Failures that are documented deviations rather than defects.
    known: Vec<String>,
}

impl Criterion {
    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn known_deviation(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.known.push(what.into());
        }
    }

    fn within_time(&mut self, start: Instant, limit: Duration) {
        let took = start.elapsed();
        self.require(took < limit, format!("took {took:.1?}, limit {limit:?}"));
    }
}

fn a_squared() -> Result<Criterion> {
    let start = Instant::now();
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 1);
    for k in 0..20 {
        let n = 2 + k % 5;
        let a = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let mean = a.expectation(&v)?;
        let mean_sq = a.powi(2).expectation(&v)?;
        let s = square_implementations(&a, &v)?;
        let exact = [
            (&s.square_outcome, mean_sq, "i"),
            (&s.direct, mean_sq, "ii"),
            (&s.two_copies, mean * mean, "iii"),
        ];
        for (i, (spec, want, label)) in exact.into_iter().enumerate() {
            let got = enumerate_expectation(spec)?;
            cr.require((got - want).abs() <= 1e-12, format!("case {k} impl {label}: {got} vs {want}"));
            let r = run_trials(spec, 100_000, 1000 + 3 * k as u64 + i as u64)?;
            let z = (r.sampled_rhs.mean - want).abs() / r.sampled_rhs.stderr.max(f64::MIN_POSITIVE);
            cr.require(z <= 4.0 || (r.sampled_rhs.mean - want).abs() <= 1e-12, format!("case {k} impl {label}: z = {z:.2}"));
        }
    }
    cr.within_time(start, Duration::from_secs(30));
    Ok(cr)
}

fn spin_sum() -> Result<Criterion> {
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 2);
    for alpha in [1.0, 0.35] {
        let v = random_state(2, &mut rng);
        let spec = sequential_spin_sum(alpha, &v)?;
        let s = spec.bindings.get("S")?.operator.spectrum()?;
        let e = alpha / 2f64.sqrt();
        cr.require((s.eigenvalues[0] + e).abs() <= 1e-12, format!("lower eigenvalue {}", s.eigenvalues[0]));
        cr.require((s.eigenvalues[1] - e).abs() <= 1e-12, format!("upper eigenvalue {}", s.eigenvalues[1]));
        let r = run_trials(&spec, 20_000, 3)?;
        cr.require(!r.rhs_support_truncated, "support truncated");
        for entry in &r.rhs_support {
            let near = [-alpha, 0.0, alpha].iter().any(|g| (entry.value - g).abs() <= 1e-12);
            cr.require(near, format!("sequential value {} not in {{±α, 0}}", entry.value));
        }
    }
    Ok(cr)
}

fn avcp_sweep() -> Result<Criterion> {
    let start = Instant::now();
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 3);
    for k in 0..200 {
        let spec = random_simple_case(&mut rng)?;
        let r = check_avcp(&spec)?;
        cr.require(r.holds && r.residual <= 1e-9, format!("simple case {k} ({}): residual {}", spec.f, r.residual));
    }
    for k in 0..50 {
        let spec = random_nonsimple_case(&mut rng)?;
        let mut best: f64 = 0.0;
        for _ in 0..16 {
            best = best.max(compare_average_values(&with_random_state(&spec, &mut rng)?)?.residual);
            if best > 1e-6 {
                break;
            }
        }
        cr.require(best > 1e-6, format!("non-simple case {k} ({}): best violation {best}", spec.f));
    }
    cr.within_time(start, Duration::from_secs(60));
    Ok(cr)
}

fn hermitization() -> Result<Criterion> {
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 4);
    let mut k = 0;
    while k < 20 {
        let n = 2 + k % 4;
        let a = random_hermitian(n, &mut rng);
        let b = random_hermitian(n, &mut rng);
        if a.commutes_with(&b)? {
            continue;
        }
        let d = demonstrate_inconsistency(&a, &b)?.difference_norm;
        cr.require(d > 1e-8, format!("pair {k}: groupings differ by only {d}"));
        k += 1;
    }
    Ok(cr)
}

fn evolution() -> Result<Criterion> {
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 5);
    let mut worst = [0.0f64; 4];
    for k in 0..50 {
        let n = 1 + k % 6;
        let h = random_hermitian(n, &mut rng);
        let v = random_state(n, &mut rng);
        let dt = 0.1 + 3.0 * (k as f64 / 50.0);
        let u = propagator(&h, dt, 1.0)?;
        worst[0] = worst[0].max(max_diff(&(u.adjoint() * &u), &identity(n)));
        let out = evolve(&v, &HamiltonianSchedule::constant(h.clone(), 0.0, dt, 1.0)?, 4)?;
        worst[1] = worst[1].max((out.norm() - 1.0).abs());
        worst[2] = worst[2].max(check_energy_conservation(&v, &h, dt, 1.0)?);
        let s = h.spectrum()?;
        let e = QuantumState::new(s.eigenvectors.column(k % n).iter().copied().collect())?;
        let probe = random_hermitian(n, &mut rng);
        let later = e.apply(&u)?;
        worst[3] = worst[3].max((probe.expectation(&later)? - probe.expectation(&e)?).abs());
    }
    for (name, w) in ["unitarity", "norm", "energy", "eigenstate invariance"].iter().zip(worst) {
        cr.require(w <= 1e-10, format!("{name} residual {w:e}"));
    }
    let h0 = random_hermitian(4, &mut rng);
    let h1 = random_hermitian(4, &mut rng);
    let v = random_state(4, &mut rng);
    let [e1, e2, e3] = slicing_errors(&h0, &h1, &v, 1.0, 8)?;
    for ratio in [e1 / e2, e2 / e3] {
        cr.require((3.6..=4.4).contains(&ratio), format!("Richardson ratio {ratio:.3}"));
    }
    Ok(cr)
}

fn kinematics() -> Result<Criterion> {
    let mut cr = Criterion::default();
    for n in 2..=64 {
        let d = canonical_defect(&build_fock(n, 1.0)?);
        let off = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&ij| ij != (n - 1, n - 1))
            .map(|ij| d[ij].norm())
            .fold(0.0, f64::max);
        cr.require(off == 0.0, format!("n={n}: off-corner defect {off:e}"));
    }
    let f = build_fock(64, 1.0)?;
    let v = gaussian_packet(&f, 0.4, -0.3)?;
    let d = check_displacement(&f, &v, 0.1)?;
    cr.require(d.shift_residual <= 1e-6, format!("shift residual {:e}", d.shift_residual));
    cr.require(d.momentum_residual <= 1e-10, format!("momentum residual {:e}", d.momentum_residual));
    let drift = photon_drift_check(&f, 1.0, &v, 1e-4)?;
    cr.require(drift <= 1e-5, format!("drift residual {drift:e}"));
    Ok(cr)
}

fn angular() -> Result<Criterion> {
    let start = Instant::now();
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 7);
    for n in 2..=12 {
        let t = spin_operators(n, 1.0)?;
        let com = commutator_residual(&t)?;
        cr.require(com <= 1e-10, format!("n={n}: commutators {com:e}"));
        let cas = casimir_residual(&t);
        cr.require(cas <= 1e-10, format!("n={n}: Casimir {cas:e}"));
        let gen = generator_residual(&t)?;
        cr.require(gen <= 1e-10, format!("n={n}: generators {gen:e}"));
        let v = random_state(n, &mut rng);
        let ratio = check_rotation_identity(&t, &v, 0.05)? / check_rotation_identity(&t, &v, 0.025)?;
        cr.require((6.0..=10.0).contains(&ratio), format!("n={n}: rotation ratio {ratio:.3}"));
        let k = commutant(&t)?;
        cr.require(k.dimension == 1 && k.scalar_residual <= 1e-8, format!("n={n}: commutant {k:?}"));
    }
    cr.within_time(start, Duration::from_secs(20));
    Ok(cr)
}

fn poisson() -> Result<Criterion> {
    let mut cr = Criterion::default();
    let mut rng = stream_rng(2024, 8);
    // 34 triples, 102 polynomials
    let failures: usize = (0..34)
        .map(|t| {
            let [f, g, h] = [0, 1, 2].map(|_| random_canonical_polynomial(1 + t % 3, &mut rng));
            bracket_axiom_failures(&f, &g, &h)
        })
        .sum();
    cr.require(failures == 0, format!("{failures} bracket axiom failures"));

    let rep = build_fock(64, 1.0)?;
    for (f, h) in DIRAC_PAIRS {
        let r = check_dirac_rule(&CanonicalPolynomial::parse(f, 1)?, &CanonicalPolynomial::parse(h, 1)?, &rep)?;
        cr.require(r.residual <= 1e-9, format!("Dirac rule ({f}, {h}): residual {:e}", r.residual));
    }

    let gamma = 1.0;
    let r = counterexample_report(gamma, &rep)?;
    cr.require(r.gap_off_scalar <= 1e-8, format!("gap off-scalar part {:e}", r.gap_off_scalar));
    // sign frozen from an independent matrix computation: the gap is +iγα³·3
    cr.require(r.gap.re.abs() <= 1e-8 && r.gap.im > 0.0, format!("gap phase {:?}", r.gap));
    let expected = 2.0 * gamma * rep.alpha.powi(3);
    cr.known_deviation(
        (r.gap_magnitude - expected).abs() <= 1e-8,
        format!("gap magnitude {} where 2γα³ = {expected}", r.gap_magnitude),
    );
    Ok(cr)
}

fn determinism() -> Result<Criterion> {
    let mut cr = Criterion::default();
    let cfg = VerifyConfig {
        seed: 7,
        ..VerifyConfig::default()
    };
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let report = pool.install(|| verify(&Suite::ALL, &cfg))?;
        Ok(serde_json::to_string_pretty(&report).expect("report serializes"))
    };
    let first = run(4)?;
    cr.require(first == run(4)?, "repeat run differs");
    cr.require(first == run(1)?, "1-thread run differs from 4-thread run");
    cr.require(first.contains("\"passed\": true"), "verify all did not pass");
    Ok(cr)
}

type Check = fn() -> Result<Criterion>;

fn main() -> ExitCode {
    let criteria: [(&str, Check); 9] = [
        ("A² implementations", a_squared),
        ("spin-½ sum measurement", spin_sum),
        ("AVCP soundness sweep", avcp_sweep),
        ("Hermitization inconsistency", hermitization),
        ("evolution", evolution),
        ("kinematics", kinematics),
        ("angular momentum", angular),
        ("Poisson brackets", poisson),
        ("determinism", determinism),
    ];
    let mut unexpected = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let cr = match run() {
            Ok(cr) => cr,
            Err(e) => Criterion {
                failures: vec![format!("error: {e}")],
                known: Vec::new(),
            },
        };
        let status = if cr.failures.is_empty() && cr.known.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {}: {status}  {name}  ({:.2?})", k + 1, start.elapsed());
        for f in &cr.failures {
            println!("    {f}");
        }
        for f in &cr.known {
            println!("    known deviation: {f}");
        }
        if !cr.failures.is_empty() {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
