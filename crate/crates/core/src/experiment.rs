//! Multi-copy measurement experiments.
//!
//! An experiment prepares copies of one initial state, performs the
//! implementation measurements at `t1` (grouped into set-ups, one copy per
//! set-up) and the target measurement on a further copy at `t2`. The average
//! of `f` over implementation outcomes is compared with the average target
//! outcome, both by Monte Carlo and by exact enumeration.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve, HamiltonianSchedule, SchedulePiece};
use crate::expr::{
    classify_simple, expand_polynomial, parse, BindingSet, BindingsJson, ObservableExpr,
};
use crate::operator::C64;
use crate::random::stream_rng;
use crate::state::{ProjectiveMeasurement, QuantumState};

/// Largest number of joint outcome tuples `enumerate_expectation` will visit.
pub const ENUMERATION_LIMIT: usize = 1_000_000;
/// Sampled averages further apart than this many standard errors are a violation.
pub const Z_THRESHOLD: f64 = 4.0;
/// Trials per parallel work unit. Fixed so that summation order does not
/// depend on the thread count.
const CHUNK: usize = 2048;
/// Distinct per-trial values of `f` kept in the report.
const SUPPORT_LIMIT: usize = 256;

#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    pub schedule: HamiltonianSchedule,
    pub t1: f64,
    pub t2: f64,
    pub steps: usize,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub state: QuantumState,
    pub bindings: BindingSet,
    pub implementation: Vec<String>,
    pub target: String,
    pub f: ObservableExpr,
    /// Explicit arrangement of the implementation measurements; overrides
    /// planning. Used for sequential measurements of non-commuting
    /// observables and for splitting commuting ones across copies.
    pub setups: Option<Vec<Vec<String>>>,
    pub evolution: Option<EvolutionSpec>,
}

impl ExperimentSpec {
    pub fn new(
        state: QuantumState,
        bindings: BindingSet,
        implementation: &[&str],
        target: &str,
        f: ObservableExpr,
    ) -> Result<Self> {
        let spec = Self {
            state,
            bindings,
            implementation: implementation.iter().map(|s| s.to_string()).collect(),
            target: target.to_owned(),
            f,
            setups: None,
            evolution: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_setups(mut self, setups: &[&[&str]]) -> Result<Self> {
        self.setups = Some(
            setups
                .iter()
                .map(|g| g.iter().map(|s| s.to_string()).collect())
                .collect(),
        );
        self.validate()?;
        Ok(self)
    }

    pub fn with_evolution(mut self, evolution: EvolutionSpec) -> Result<Self> {
        self.evolution = Some(evolution);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let b = &self.bindings;
        if self.state.dim() != b.dim() {
            return Err(Error::DimMismatch {
                expected: b.dim(),
                found: self.state.dim(),
            });
        }
        b.get(&self.target)?;
        let mut seen = BTreeSet::new();
        for n in &self.implementation {
            b.get(n)?;
            if !seen.insert(n.as_str()) {
                return Err(Error::InvalidSpec(format!("`{n}` listed twice")));
            }
        }
        if seen.contains(self.target.as_str()) {
            return Err(Error::InvalidSpec(format!(
                "target `{}` is also an implementation measurement",
                self.target
            )));
        }
        for v in self.f.variables() {
            if !seen.contains(v.as_str()) {
                return Err(Error::InvalidSpec(format!(
                    "`{v}` appears in f but is not an implementation measurement"
                )));
            }
        }
        if let Some(setups) = &self.setups {
            let mut placed = BTreeSet::new();
            for n in setups.iter().flatten() {
                if !seen.contains(n.as_str()) {
                    return Err(Error::InvalidSpec(format!("set-up member `{n}` is not an implementation measurement")));
                }
                if !placed.insert(n.as_str()) {
                    return Err(Error::InvalidSpec(format!("`{n}` placed in two set-ups")));
                }
            }
            if placed.len() != seen.len() {
                return Err(Error::InvalidSpec("set-ups must cover every implementation measurement".into()));
            }
            if setups.iter().any(|g| g.is_empty()) {
                return Err(Error::InvalidSpec("empty set-up".into()));
            }
        }
        if let Some(e) = &self.evolution {
            if e.schedule.dim() != b.dim() {
                return Err(Error::DimMismatch {
                    expected: b.dim(),
                    found: e.schedule.dim(),
                });
            }
            if e.steps == 0 {
                return Err(Error::InvalidSpec("evolution steps must be at least 1".into()));
            }
            for t in [e.t1, e.t2] {
                if t < e.schedule.start() || t > e.schedule.end() {
                    return Err(Error::InvalidSpec(format!("time {t} outside the schedule")));
                }
            }
        }
        Ok(())
    }

    fn state_at(&self, t: impl Fn(&EvolutionSpec) -> f64) -> Result<QuantumState> {
        match &self.evolution {
            None => Ok(self.state.clone()),
            Some(e) => evolve(&self.state, &e.schedule.until(t(e))?, e.steps),
        }
    }
}

/// Partition of implementation measurements into set-ups, one system copy each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetupPlan {
    pub groups: Vec<Vec<String>>,
}

fn fits(group: &[String], members: &[String], b: &BindingSet) -> Result<bool> {
    for m in members {
        for g in group {
            if !b.commute(g, m)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Greedy first-fit: each name joins the first group whose members all
/// commute with it.
pub fn plan_setups(names: &[String], b: &BindingSet) -> Result<SetupPlan> {
    let mut groups: Vec<Vec<String>> = Vec::new();
    for n in names {
        b.get(n)?;
        let single = std::slice::from_ref(n);
        let mut placed = false;
        for g in groups.iter_mut() {
            if fits(g, single, b)? {
                g.push(n.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(vec![n.clone()]);
        }
    }
    Ok(SetupPlan { groups })
}

/// Measurements multiplied together anywhere in `f` (transitively) are kept
/// on one copy; the resulting blocks are then placed first-fit. When a block
/// contains a non-commuting pair no copy can hold it and the plain
/// name-by-name plan is used instead.
fn plan_for_expression(spec: &ExperimentSpec) -> Result<SetupPlan> {
    let names = &spec.implementation;
    let b = &spec.bindings;
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut parent: Vec<usize> = (0..names.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for vars in expand_polynomial(&spec.f).monomial_variable_sets() {
        let ids: Vec<usize> = vars.iter().map(|v| index[v.as_str()]).collect();
        for w in ids.windows(2) {
            let (a, c) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
            // keep the earliest declared name as representative
            parent[a.max(c)] = a.min(c);
        }
    }
    let mut blocks: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        let r = root(&mut parent, i);
        blocks.entry(r).or_default().push(n.clone());
    }
    let mut groups: Vec<Vec<String>> = Vec::new();
    for block in blocks.into_values() {
        if !fits(&block, &block, b)? {
            return plan_setups(names, b);
        }
        match groups.iter_mut().find(|g| fits(g, &block, b).unwrap_or(false)) {
            Some(g) => g.extend(block),
            None => groups.push(block),
        }
    }
    Ok(SetupPlan { groups })
}

/// The arrangement actually used by `run_trials` and `enumerate_expectation`.
pub fn arrangement(spec: &ExperimentSpec) -> Result<SetupPlan> {
    spec.validate()?;
    match &spec.setups {
        Some(groups) => Ok(SetupPlan {
            groups: groups.clone(),
        }),
        None => plan_for_expression(spec),
    }
}

struct Prepared {
    slots: Vec<String>,
    /// Per set-up, the slot index and measurement of each member in order.
    groups: Vec<Vec<(usize, ProjectiveMeasurement)>>,
    target: ProjectiveMeasurement,
    at_t1: QuantumState,
    at_t2: QuantumState,
    plan: SetupPlan,
}

impl Prepared {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        let plan = arrangement(spec)?;
        let mut slots = Vec::new();
        let mut groups = Vec::new();
        for g in &plan.groups {
            let mut members = Vec::new();
            for n in g {
                members.push((slots.len(), ProjectiveMeasurement::new(spec.bindings.embedded(n)?)?));
                slots.push(n.clone());
            }
            groups.push(members);
        }
        Ok(Self {
            slots,
            groups,
            target: ProjectiveMeasurement::new(spec.bindings.embedded(&spec.target)?)?,
            at_t1: spec.state_at(|e| e.t1)?,
            at_t2: spec.state_at(|e| e.t2)?,
            plan,
        })
    }

    fn evaluate(&self, f: &ObservableExpr, values: &[f64]) -> Result<f64> {
        let env = |name: &str| self.slots.iter().position(|s| s == name).map(|k| values[k]);
        f.evaluate(&env)
    }
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Self) -> Self {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + d * o.n as f64 / n as f64,
            m2: self.m2 + o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64,
        }
    }

    fn estimate(&self) -> Estimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        Estimate {
            mean: self.mean,
            stderr,
        }
    }
}

#[derive(Clone, Debug, Default)]
struct Tally {
    lhs: Moments,
    rhs: Moments,
    support: BTreeMap<u64, (f64, u64)>,
    truncated: bool,
}

impl Tally {
    fn record_support(&mut self, x: f64, count: u64) {
        let x = if x == 0.0 { 0.0 } else { x };
        let len = self.support.len();
        match self.support.get_mut(&x.to_bits()) {
            Some(e) => e.1 += count,
            None if len < SUPPORT_LIMIT => {
                self.support.insert(x.to_bits(), (x, count));
            }
            None => self.truncated = true,
        }
    }

    fn merge(mut self, o: Self) -> Self {
        self.lhs = self.lhs.merge(o.lhs);
        self.rhs = self.rhs.merge(o.rhs);
        self.truncated |= o.truncated;
        for (_, (x, k)) in o.support {
            self.record_support(x, k);
        }
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    pub value: f64,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub n_trials: usize,
    pub seed: u64,
    pub plan: SetupPlan,
    pub sampled_lhs: Estimate,
    pub sampled_rhs: Estimate,
    pub exact_lhs: f64,
    /// `None` when the outcome space is too large to enumerate.
    pub exact_rhs: Option<f64>,
    pub z_lhs: f64,
    pub z_rhs: Option<f64>,
    pub z_difference: f64,
    pub verdict: Verdict,
    /// Distinct per-trial values of `f`, ascending.
    pub rhs_support: Vec<SupportEntry>,
    pub rhs_support_truncated: bool,
}

fn z_score(diff: f64, stderr: f64) -> f64 {
    if stderr > 0.0 {
        diff.abs() / stderr
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Monte Carlo estimate of both sides. Trial `i` draws from the stream
/// `(seed, i)`, so the report is identical for any thread count.
pub fn run_trials(spec: &ExperimentSpec, n: usize, seed: u64) -> Result<ExperimentReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let verdict = classify_simple(&spec.f, &spec.bindings)?;
    if !verdict.simple {
        return Err(Error::NonSimpleExpression {
            pairs: verdict.offending_pairs,
        });
    }
    let prep = Prepared::new(spec)?;
    let chunks = n.div_ceil(CHUNK);
    let tallies: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|k| run_chunk(&prep, &spec.f, seed, k * CHUNK..((k + 1) * CHUNK).min(n)))
        .collect::<Result<_>>()?;
    let tally = tallies.into_iter().fold(Tally::default(), Tally::merge);

    let exact_lhs = spec.bindings.embedded(&spec.target)?.expectation(&prep.at_t2)?;
    let exact_rhs = match enumerate_prepared(&prep, &spec.f) {
        Ok(x) => Some(x),
        Err(Error::StateSpaceTooLarge { .. }) => None,
        Err(e) => return Err(e),
    };
    let (lhs, rhs) = (tally.lhs.estimate(), tally.rhs.estimate());
    let z_difference = z_score(
        lhs.mean - rhs.mean,
        (lhs.stderr.powi(2) + rhs.stderr.powi(2)).sqrt(),
    );
    let mut support: Vec<SupportEntry> = tally
        .support
        .values()
        .map(|&(value, count)| SupportEntry { value, count })
        .collect();
    support.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(ExperimentReport {
        n_trials: n,
        seed,
        plan: prep.plan.clone(),
        sampled_lhs: lhs,
        sampled_rhs: rhs,
        exact_lhs,
        exact_rhs,
        z_lhs: z_score(lhs.mean - exact_lhs, lhs.stderr),
        z_rhs: exact_rhs.map(|x| z_score(rhs.mean - x, rhs.stderr)),
        z_difference,
        verdict: if z_difference <= Z_THRESHOLD {
            Verdict::Holds
        } else {
            Verdict::Violated
        },
        rhs_support: support,
        rhs_support_truncated: tally.truncated,
    })
}

fn run_chunk(
    prep: &Prepared,
    f: &ObservableExpr,
    seed: u64,
    trials: std::ops::Range<usize>,
) -> Result<Tally> {
    let mut tally = Tally::default();
    let mut values = vec![0.0; prep.slots.len()];
    for i in trials {
        let mut rng = stream_rng(seed, i as u64);
        for group in &prep.groups {
            let mut copy = prep.at_t1.clone();
            for (slot, m) in group {
                let out = m.measure(&copy, &mut rng)?;
                values[*slot] = out.value;
                copy = out.collapsed;
            }
        }
        let rhs = prep.evaluate(f, &values)?;
        let lhs = prep.target.measure(&prep.at_t2, &mut rng)?.value;
        tally.lhs.push(lhs);
        tally.rhs.push(rhs);
        tally.record_support(rhs, 1);
    }
    Ok(tally)
}

/// Exact `E[f]` over the joint outcome distribution of the arrangement.
pub fn enumerate_expectation(spec: &ExperimentSpec) -> Result<f64> {
    enumerate_prepared(&Prepared::new(spec)?, &spec.f)
}

/// Outcome histories of one set-up: probability and the values recorded.
type Branches = Vec<(f64, Vec<(usize, f64)>)>;

fn group_branches(group: &[(usize, ProjectiveMeasurement)], v: &DVector<C64>) -> Branches {
    let mut out = Vec::new();
    fn walk(
        group: &[(usize, ProjectiveMeasurement)],
        v: DVector<C64>,
        path: &mut Vec<(usize, f64)>,
        out: &mut Branches,
    ) {
        let Some(((slot, m), rest)) = group.split_first() else {
            out.push((v.norm_squared(), path.clone()));
            return;
        };
        for (branch, &value) in m.branches(&v).into_iter().zip(m.values()) {
            if branch.norm_squared() <= 0.0 {
                continue;
            }
            path.push((*slot, value));
            walk(rest, branch, path, out);
            path.pop();
        }
    }
    walk(group, v.clone(), &mut Vec::new(), &mut out);
    out
}

fn enumerate_prepared(prep: &Prepared, f: &ObservableExpr) -> Result<f64> {
    let count: f64 = prep
        .groups
        .iter()
        .flatten()
        .map(|(_, m)| m.outcome_count() as f64)
        .product();
    if count > ENUMERATION_LIMIT as f64 {
        return Err(Error::StateSpaceTooLarge {
            count,
            limit: ENUMERATION_LIMIT,
        });
    }
    let per_group: Vec<Branches> = prep
        .groups
        .iter()
        .map(|g| group_branches(g, prep.at_t1.amplitudes()))
        .collect();
    let mut values = vec![0.0; prep.slots.len()];
    let mut total = 0.0;
    fn product(
        prep: &Prepared,
        f: &ObservableExpr,
        per_group: &[Branches],
        p: f64,
        values: &mut [f64],
        total: &mut f64,
    ) -> Result<()> {
        let Some((first, rest)) = per_group.split_first() else {
            *total += p * prep.evaluate(f, values)?;
            return Ok(());
        };
        for (q, assigned) in first {
            for &(slot, v) in assigned {
                values[slot] = v;
            }
            product(prep, f, rest, p * q, values, total)?;
        }
        Ok(())
    }
    product(prep, f, &per_group, 1.0, &mut values, &mut total)?;
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AvcpCheck {
    /// `⟨C⟩` at `t2`.
    pub lhs: f64,
    /// `E[f]` at `t1`, by enumeration.
    pub rhs: f64,
    pub residual: f64,
    pub holds: bool,
}

/// Exact comparison of the target average with the enumerated average of
/// `f`, without the simplicity gate.
pub fn compare_average_values(spec: &ExperimentSpec) -> Result<AvcpCheck> {
    let prep = Prepared::new(spec)?;
    let lhs = spec.bindings.embedded(&spec.target)?.expectation(&prep.at_t2)?;
    let rhs = enumerate_prepared(&prep, &spec.f)?;
    let residual = (lhs - rhs).abs();
    Ok(AvcpCheck {
        lhs,
        rhs,
        residual,
        holds: residual <= 1e-9 * (1.0 + lhs.abs()),
    })
}

/// Exact average-value check for a simple `f`.
pub fn check_avcp(spec: &ExperimentSpec) -> Result<AvcpCheck> {
    let verdict = classify_simple(&spec.f, &spec.bindings)?;
    if !verdict.simple {
        return Err(Error::NonSimpleExpression {
            pairs: verdict.offending_pairs,
        });
    }
    compare_average_values(spec)
}

/// On-disk form of an experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentFile {
    pub state: QuantumState,
    pub bindings: BindingsJson,
    pub implementation: Vec<String>,
    pub target: String,
    pub f: String,
    #[serde(default = "default_trials")]
    pub n_trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub setups: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionFile>,
}

fn default_trials() -> usize {
    10_000
}

fn default_steps() -> usize {
    1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvolutionFile {
    pub schedule: Vec<SchedulePiece>,
    pub t1: f64,
    pub t2: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl ExperimentFile {
    pub fn into_spec(self, default_alpha: f64) -> Result<ExperimentSpec> {
        let dims = self.state.factor_dims().to_vec();
        let bindings = BindingSet::from_json(self.bindings, Some(&dims))?;
        let evolution = match self.evolution {
            None => None,
            Some(e) => Some(EvolutionSpec {
                schedule: HamiltonianSchedule::pieces(e.schedule, e.alpha.unwrap_or(default_alpha))?,
                t1: e.t1,
                t2: e.t2,
                steps: e.steps,
            }),
        };
        let spec = ExperimentSpec {
            state: self.state,
            bindings,
            implementation: self.implementation,
            target: self.target,
            f: parse(&self.f)?,
            setups: self.setups,
            evolution,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MeasurementBinding;
    use crate::operator::{pauli, HermitianOperator};

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn diag(v: &[f64]) -> HermitianOperator {
        HermitianOperator::from_real_diagonal(v)
    }

    #[test]
    fn planner_groups_by_commutation() {
        let b = BindingSet::from_operators([
            ("A", diag(&[1.0, 2.0])),
            ("B", diag(&[3.0, -1.0])),
            ("X", HermitianOperator::new(pauli::x()).unwrap()),
        ])
        .unwrap();
        let plan = plan_setups(&names(&["A", "B"]), &b).unwrap();
        assert_eq!(plan.groups, vec![names(&["A", "B"])]);
        let plan = plan_setups(&names(&["A", "X"]), &b).unwrap();
        assert_eq!(plan.groups, vec![names(&["A"]), names(&["X"])]);
        let plan = plan_setups(&names(&["X"]), &b).unwrap();
        assert_eq!(plan.groups.len(), 1);
    }

    #[test]
    fn expression_blocks_stay_together() {
        // D fails to commute only with C. Greedy puts C next to A and leaves
        // D on its own copy, splitting the A*D product.
        let x = HermitianOperator::new(pauli::x()).unwrap();
        let b = BindingSet::new(
            vec![2, 2],
            vec![
                MeasurementBinding::on_subsystem("A", diag(&[1.0, -1.0]), 0),
                MeasurementBinding::on_subsystem("C", diag(&[0.5, 2.0]), 1),
                MeasurementBinding::on_subsystem("B", diag(&[2.0, 3.0]), 0),
                MeasurementBinding::on_subsystem("D", x, 1),
                MeasurementBinding::on_subsystem("T", diag(&[0.0, 0.0]), 0),
            ],
        )
        .unwrap();
        let greedy = plan_setups(&names(&["A", "C", "D", "B"]), &b).unwrap();
        assert_eq!(greedy.groups, vec![names(&["A", "C", "B"]), names(&["D"])]);
        let v = QuantumState::from_real(&[1.0, 2.0, 3.0, 4.0])
            .unwrap()
            .with_factor_dims(vec![2, 2])
            .unwrap();
        let spec = ExperimentSpec::new(v, b, &["A", "C", "D", "B"], "T", parse("A*D + C").unwrap()).unwrap();
        let plan = arrangement(&spec).unwrap();
        assert_eq!(plan.groups, vec![names(&["A", "D", "B"]), names(&["C"])]);
    }

    #[test]
    fn enumeration_of_square_implementations() {
        let a = diag(&[1.0, -2.0, 3.0]);
        let v = QuantumState::from_real(&[1.0, 1.0, 2.0]).unwrap();
        let p = [1.0 / 6.0, 1.0 / 6.0, 4.0 / 6.0];
        let mean: f64 = p[0] - 2.0 * p[1] + 3.0 * p[2];
        let mean_sq: f64 = p[0] + 4.0 * p[1] + 9.0 * p[2];
        let b = BindingSet::from_operators([
            ("A", a.clone()),
            ("A2", a.clone()),
            ("C", a.powi(2)),
        ])
        .unwrap();

        let once = ExperimentSpec::new(v.clone(), b.clone(), &["A"], "C", parse("A^2").unwrap()).unwrap();
        assert!((enumerate_expectation(&once).unwrap() - mean_sq).abs() < 1e-12);

        let twice = ExperimentSpec::new(v.clone(), b.clone(), &["A", "A2"], "C", parse("A*A2").unwrap())
            .unwrap();
        assert!((enumerate_expectation(&twice).unwrap() - mean_sq).abs() < 1e-12);

        let copies = twice.with_setups(&[&["A"], &["A2"]]).unwrap();
        assert!((enumerate_expectation(&copies).unwrap() - mean * mean).abs() < 1e-12);
        assert!(!compare_average_values(&copies).unwrap().holds);
    }

    #[test]
    fn constant_f_enumerates_to_constant() {
        let b = BindingSet::from_operators([("A", diag(&[1.0, 2.0])), ("C", diag(&[1.0, 1.0]))]).unwrap();
        let v = QuantumState::from_real(&[1.0, 1.0]).unwrap();
        let spec = ExperimentSpec::new(v, b, &["A"], "C", parse("2.5").unwrap()).unwrap();
        assert!((enumerate_expectation(&spec).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn report_is_deterministic_and_repetition_agrees() {
        let a = diag(&[1.0, -1.0, 2.0]);
        let b = BindingSet::from_operators([("A", a.clone()), ("A2", a.clone()), ("C", a.powi(2))]).unwrap();
        let v = QuantumState::from_real(&[1.0, 2.0, 2.0]).unwrap();
        let spec = ExperimentSpec::new(v, b, &["A", "A2"], "C", parse("A - A2").unwrap()).unwrap();
        let r = run_trials(&spec, 5000, 3).unwrap();
        // repeated measurement on one copy reproduces the first value
        assert_eq!(r.rhs_support, vec![SupportEntry { value: 0.0, count: 5000 }]);
        let again = run_trials(&spec, 5000, 3).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }

    #[test]
    fn validation() {
        let b = BindingSet::from_operators([("A", diag(&[1.0, 2.0])), ("C", diag(&[1.0, 1.0]))]).unwrap();
        let v = QuantumState::from_real(&[1.0, 1.0]).unwrap();
        assert!(ExperimentSpec::new(v.clone(), b.clone(), &["A"], "A", parse("A").unwrap()).is_err());
        assert!(ExperimentSpec::new(v.clone(), b.clone(), &["A"], "C", parse("A*C").unwrap()).is_err());
        let spec = ExperimentSpec::new(v, b, &["A"], "C", parse("A").unwrap()).unwrap();
        assert!(spec.with_setups(&[&["A"], &[]]).is_err());
    }

    #[test]
    fn too_many_outcomes() {
        let ops: Vec<(String, HermitianOperator)> = (0..7)
            .map(|k| (format!("A{k}"), diag(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])))
            .collect();
        let mut all = ops.iter().map(|(n, o)| (n.as_str(), o.clone())).collect::<Vec<_>>();
        all.push(("C", diag(&[0.0; 8])));
        let b = BindingSet::from_operators(all).unwrap();
        let v = QuantumState::basis(8, 0).unwrap();
        let impl_names: Vec<&str> = ops.iter().map(|(n, _)| n.as_str()).collect();
        let spec = ExperimentSpec::new(v, b, &impl_names, "C", parse("A0").unwrap()).unwrap();
        assert!(matches!(
            enumerate_expectation(&spec),
            Err(Error::StateSpaceTooLarge { .. })
        ));
    }
}
