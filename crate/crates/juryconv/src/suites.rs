//! Experiment batteries behind `juryconv suite <name>`.
//!
//! Each suite runs a set of named checks. Whether a check should hold or
//! should turn up a counterexample is declared in the embedded manifest
//! (`manifest.json`), so a found counterexample can count as success.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use juryconv_core::bruhat::{
    all_permutations, bruhat_leq_conv, bruhat_leq_oracle, verify_equivalences, Permutation, ORACLE_MAX_N,
};
use juryconv_core::cayley_hamilton::{annihilator_power, ch_residual, minimal_polynomial, nilpotency_index};
use juryconv_core::positivity::{
    closure_trial, difference_witness, fractional_power_entry, horn_witness, is_psd_exact, preserver_trial,
    sample_psd_with, schoenberg_h_counterexample, square_stepped_exact, ClosureReport, Interval, PowerExpectation,
    PreserverReport, TransformMode, Violation,
};
use juryconv_core::probgrid::{psd_chain_check, semiinfinite_checks, sum_distribution, GridDistribution, DEFAULT_KAPPA_CAP};
use juryconv_core::sampling::{random_one_line, random_rational_matrix, trial_rng};
use juryconv_core::transforms::{
    bivariate_power_matrix, exp_coefficients, factorial_scaled, series_transform, smooth_transform,
    stepped_transform, FunctionSpec, Poly, SeriesTruncation,
};
use juryconv_core::{ConvMatrix, Rational, Scalar, C64};
use num_traits::{Signed, Zero};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::format::{matrix_to_json, JsonScalar};
use crate::report::{CheckResult, Expectation, RunConfig, SuiteReport, ViolationRecord};
use crate::runner::{par_map, par_trials};
use crate::{AppError, AppResult};

pub const SUITES: [&str; 7] = ["closure", "schoenberg", "horn", "fh", "bruhat", "prob", "ch"];

/// Violations kept per check in a report; the count is always exact.
pub const MAX_RECORDED_VIOLATIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestExpect {
    Holds,
    Violation,
    Record,
    /// Decided per case from what is known about the case.
    Rule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub theorem: String,
    pub defaults: Map<String, Value>,
    pub checks: BTreeMap<String, ManifestExpect>,
}

pub fn manifest() -> &'static BTreeMap<String, SuiteEntry> {
    static MANIFEST: OnceLock<BTreeMap<String, SuiteEntry>> = OnceLock::new();
    MANIFEST.get_or_init(|| serde_json::from_str(include_str!("manifest.json")).expect("embedded manifest is valid"))
}

/// Expands `"start:stop:factor"` into `start, start*factor, ...` down to `stop`.
pub fn parse_h_grid(spec: &str) -> AppResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || AppError::usage(format!("h-grid must be start:stop:factor with start >= stop > 0 and 0 < factor < 1, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums = parts
        .iter()
        .map(|p| crate::format::parse_rational(p).ok().and_then(|r| num_traits::ToPrimitive::to_f64(&r)))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(bad)?;
    let (start, stop, factor) = (nums[0], nums[1], nums[2]);
    if !(stop > 0.0 && start >= stop && factor > 0.0 && factor < 1.0) {
        return Err(bad());
    }
    let mut grid = Vec::new();
    let mut h = start;
    while h >= stop * (1.0 - 1e-9) {
        grid.push(h);
        h *= factor;
    }
    Ok(grid)
}

/// Comma-separated list of reals.
pub fn parse_alpha_grid(spec: &str) -> AppResult<Vec<f64>> {
    spec.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| AppError::usage(format!("bad alpha {t:?} in {spec:?}")))
        })
        .collect()
}

struct Builder {
    name: &'static str,
    entry: &'static SuiteEntry,
    checks: Vec<CheckResult>,
    violations: Vec<ViolationRecord>,
    data: Map<String, Value>,
    trials: u64,
}

impl Builder {
    fn new(name: &'static str) -> Self {
        let entry = &manifest()[name];
        Builder { name, entry, checks: Vec::new(), violations: Vec::new(), data: Map::new(), trials: 0 }
    }

    fn default_u64(&self, key: &str) -> u64 {
        self.entry.defaults.get(key).and_then(Value::as_u64).unwrap_or_else(|| panic!("manifest default {key}"))
    }

    fn default_h_grid(&self) -> Vec<f64> {
        let spec = self.entry.defaults.get("h_grid").and_then(Value::as_str).expect("manifest default h_grid");
        parse_h_grid(spec).expect("manifest h_grid")
    }

    fn default_f64_list(&self, key: &str) -> Vec<f64> {
        serde_json::from_value(self.entry.defaults[key].clone()).expect("manifest list")
    }

    fn expectation(&self, family: &str) -> Expectation {
        match self.entry.checks.get(family) {
            Some(ManifestExpect::Holds) => Expectation::Holds,
            Some(ManifestExpect::Violation) => Expectation::Violation,
            Some(ManifestExpect::Record) => Expectation::Record,
            other => panic!("manifest has no fixed expectation for {}/{family}: {other:?}", self.name),
        }
    }

    fn check(&mut self, family: &str, name: impl Into<String>, violation_found: bool, detail: impl Into<String>) {
        let expect = self.expectation(family);
        self.checks.push(CheckResult::new(name, expect, violation_found, detail));
    }

    fn record(&mut self, check: &str, violations: &[Violation]) {
        let room = MAX_RECORDED_VIOLATIONS.min(violations.len());
        self.violations.extend(violations[..room].iter().map(|v| ViolationRecord::from_violation(check, v)));
    }

    fn data(&mut self, key: &str, value: Value) {
        self.data.insert(key.to_string(), value);
    }

    fn finish(self, config: RunConfig) -> SuiteReport {
        SuiteReport {
            suite: self.name.to_string(),
            theorem: self.entry.theorem.clone(),
            seed: config.seed,
            trials: self.trials,
            passed: self.checks.iter().all(|c| c.passed),
            config,
            checks: self.checks,
            violations: self.violations,
            data: Value::Object(self.data),
        }
    }
}

/// Runs a suite. Unset fields of `config` are filled from the manifest
/// defaults and written back into the report.
pub fn run_suite(name: &str, config: &RunConfig) -> AppResult<SuiteReport> {
    let name: &'static str = SUITES
        .iter()
        .find(|s| **s == name)
        .ok_or_else(|| AppError::usage(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", "))))?;
    let mut cfg = config.clone();
    let mut b = Builder::new(name);
    match name {
        "closure" => closure(&mut cfg, &mut b)?,
        "schoenberg" => schoenberg(&mut cfg, &mut b)?,
        "horn" => horn(&mut cfg, &mut b)?,
        "fh" => fh(&mut cfg, &mut b)?,
        "bruhat" => bruhat(&mut cfg, &mut b)?,
        "prob" => prob(&mut cfg, &mut b)?,
        "ch" => ch(&mut cfg, &mut b)?,
        _ => unreachable!(),
    }
    Ok(b.finish(cfg))
}

fn resolve_n(cfg: &mut RunConfig, b: &Builder) -> usize {
    let n = cfg.n.unwrap_or_else(|| b.default_u64("n") as usize);
    cfg.n = Some(n);
    n
}

fn resolve_trials(cfg: &mut RunConfig, b: &mut Builder) -> u64 {
    let t = cfg.trials.unwrap_or_else(|| b.default_u64("trials"));
    cfg.trials = Some(t);
    b.trials = t;
    t
}

fn closure(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let n_max = resolve_n(cfg, b);
    let trials = resolve_trials(cfg, b);
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let outcomes = par_trials(trials, |t| closure_trial(n, cfg.seed, t, cfg.tol))?;
        let rep = ClosureReport::from_outcomes(n, cfg.seed, cfg.tol, outcomes);
        let name = format!("closure n={n}");
        b.check(
            "closure",
            &name,
            !rep.violations.is_empty(),
            format!(
                "{} of {trials} products non-PSD; least min_eig/max(1,|A⋄B|max) = {:.3e}",
                rep.violations.len(),
                rep.worst_relative_eigenvalue
            ),
        );
        b.record(&name, &rep.violations);
        rows.push(json!({
            "n": n,
            "trials": trials,
            "violations": rep.violations.len(),
            "worst_relative_eigenvalue": rep.worst_relative_eigenvalue,
        }));
    }
    b.data("per_n", Value::Array(rows));
    Ok(())
}

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

fn qf(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn schoenberg(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let ce = schoenberg_h_counterexample()?;
    b.check(
        "h_counterexample",
        "h_counterexample",
        !ce.is_psd,
        format!("x^2 with h = {} on the all-ones 2x2 matrix; determinant {}", ce.h, ce.determinant),
    );
    b.data(
        "h_counterexample",
        json!({
            "matrix": matrix_to_json(&ce.matrix),
            "h": ce.h.to_value(),
            "transform": matrix_to_json(&ce.transform),
            "determinant": ce.determinant.to_value(),
        }),
    );

    let contrast_matrix = ConvMatrix::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(2)]])?;
    let contrast = square_stepped_exact(contrast_matrix.clone(), qf(1, 100))?;
    b.check(
        "small_step_contrast",
        "small_step_contrast",
        !contrast.is_psd,
        format!("x^2 with h = 1/100 on [[2,1],[1,2]]; determinant {}", contrast.determinant),
    );

    let linear = FunctionSpec::Polynomial(Poly::new(vec![q(2), q(3)]));
    let smooth = smooth_transform(&linear, &contrast_matrix)?;
    let mut linear_bad = Vec::new();
    for h in [qf(1, 2), q(2), q(10)] {
        let t = stepped_transform(&linear, &contrast_matrix, &h)?;
        if t != smooth || !is_psd_exact(&t)? {
            linear_bad.push(h.to_string());
        }
    }
    b.check(
        "linear_any_step",
        "linear_any_step",
        !linear_bad.is_empty(),
        if linear_bad.is_empty() {
            String::from("2 + 3x: stepped equals smooth and is PSD at h = 1/2, 2, 10")
        } else {
            format!("failed at h = {}", linear_bad.join(", "))
        },
    );

    let n = resolve_n(cfg, b);
    let trials = resolve_trials(cfg, b);
    let grid = cfg.h_grid.clone().unwrap_or_else(|| b.default_h_grid());
    cfg.h_grid = Some(grid.clone());
    let mode = TransformMode::Stepped { h_grid: grid.clone() };
    let interval = Interval::positive_reals();
    let outcomes = par_trials(trials, |t| preserver_trial(&FunctionSpec::Exp, n, interval, &mode, cfg.seed, t, cfg.tol))?;
    let mut finest_failures = Vec::new();
    for o in &outcomes {
        if let Some((h, v, t)) = o.results.iter().filter(|r| r.0.is_some()).min_by(|x, y| x.0.unwrap().total_cmp(&y.0.unwrap())) {
            if !v.is_psd {
                finest_failures.push(Violation {
                    trial: o.trial,
                    inputs: vec![o.a.clone()],
                    matrix: t.clone(),
                    min_eig: v.min_eigenvalue,
                    h: *h,
                });
            }
        }
    }
    let rep = PreserverReport::from_outcomes(String::from("exp"), n, cfg.seed, cfg.tol, outcomes);
    b.check(
        "stepped_exp_small_h",
        format!("stepped_exp_small_h n={n}"),
        !finest_failures.is_empty(),
        format!(
            "{} of {trials} trials non-PSD at the finest step; {} non-PSD of {} evaluations over the grid",
            finest_failures.len(),
            rep.violations.len(),
            rep.evaluations
        ),
    );
    b.record("stepped_exp_small_h", &finest_failures);

    let unit = Interval::new(1.0)?;
    let mut descending = grid.clone();
    descending.sort_by(|x, y| y.total_cmp(x));
    let limit = par_trials(trials, |t| -> AppResult<(bool, f64)> {
        let a = sample_psd_with(&mut trial_rng(cfg.seed, t), n, unit);
        let smooth = smooth_transform(&FunctionSpec::Exp, &a)?;
        let dists = descending
            .iter()
            .map(|&h| Ok(stepped_transform(&FunctionSpec::Exp, &a, &C64::new(h, 0.0))?.max_abs_diff(&smooth)?))
            .collect::<AppResult<Vec<f64>>>()?;
        Ok((dists.windows(2).all(|w| w[1] < w[0]), dists.last().copied().unwrap_or(f64::NAN)))
    })?;
    let non_monotone = limit.iter().filter(|(m, _)| !m).count();
    let worst_final = limit.iter().map(|(_, d)| *d).fold(0.0, f64::max);
    let finest = descending.last().copied().unwrap_or(f64::NAN);
    b.check(
        "stepped_limit_monotone",
        format!("stepped_limit_monotone n={n}"),
        non_monotone > 0,
        format!("{non_monotone} of {trials} samples of P_{n}((0,1)) with a non-decreasing step"),
    );
    b.check(
        "stepped_limit_distance",
        format!("stepped_limit_distance n={n}"),
        false,
        format!("largest max-entry distance to the smooth transform at h = {finest:e}: {worst_final:.3e}"),
    );
    b.data("stepped_limit", json!({"n": n, "finest_h": finest, "worst_final_distance": worst_final}));
    Ok(())
}

fn horn(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let n_max = resolve_n(cfg, b);
    let trials = resolve_trials(cfg, b);
    let positive = Interval::positive_reals();
    let unit = Interval::new(1.0)?;
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let outcomes =
            par_trials(trials, |t| preserver_trial(&FunctionSpec::Exp, n, positive, &TransformMode::Smooth, cfg.seed, t, cfg.tol))?;
        let rep = PreserverReport::from_outcomes(String::from("exp"), n, cfg.seed, cfg.tol, outcomes);
        let name = format!("absolutely_monotone_exp n={n}");
        b.check("absolutely_monotone_exp", &name, !rep.violations.is_empty(), format!("{} of {trials} transforms non-PSD", rep.violations.len()));
        b.record(&name, &rep.violations);

        let series_trials = trials.min(50);
        let errs = par_trials(series_trials, |t| -> AppResult<f64> {
            let a = sample_psd_with(&mut trial_rng(cfg.seed, t), n, unit);
            let sum = series_transform(exp_coefficients(), &a, SeriesTruncation::default())?;
            Ok(sum.matrix.max_abs_diff(&smooth_transform(&FunctionSpec::Exp, &a)?)?)
        })?;
        let worst = errs.iter().copied().fold(0.0, f64::max);
        b.check(
            "series_convergence",
            format!("series_convergence n={n}"),
            !(worst <= 1e-10),
            format!("largest entrywise gap between Maclaurin partial sums and the smooth transform: {worst:.3e}"),
        );
        rows.push(json!({"n": n, "violations": rep.violations.len(), "series_gap": worst}));
    }
    b.data("per_n", Value::Array(rows));

    for n in 2..=n_max.max(2) {
        let w = horn_witness(n, &FunctionSpec::Exp, 1.0, 0.01, cfg.tol)?;
        b.check(
            "horn_witness_exp",
            format!("horn_witness_exp n={n}"),
            !w.verdict.is_psd,
            format!("min eigenvalue {:.3e}", w.verdict.min_eigenvalue),
        );
    }

    let sqrt = FunctionSpec::Power { alpha: 0.5 };
    let w = horn_witness(3, &sqrt, 1.0, 0.01, cfg.tol)?;
    let certified = w.verdict.min_eigenvalue < -1e-6;
    b.check(
        "horn_witness_sqrt",
        "horn_witness_sqrt n=3",
        certified,
        format!("x^0.5 on diag(1,1,0)+0.01·1: min eigenvalue {:.5e}, diagonal {:?}", w.verdict.min_eigenvalue, w.diagonal),
    );
    b.data("horn_witness_sqrt", json!({"matrix": matrix_to_json(&w.matrix), "transform": matrix_to_json(&w.transform), "diagonal": w.diagonal}));

    let mut negative = Vec::new();
    let mut evaluated = 0;
    for n in 2..=n_max.clamp(2, 6) {
        for x in [0.25, 0.5, 1.0, 2.0, 4.0] {
            for h in [1.0, 0.5, 0.1, 0.01] {
                let d = difference_witness(n, &FunctionSpec::Exp, x, h, x / 100.0)?;
                evaluated += d.forward_differences.len();
                for (l, v) in d.forward_differences.iter().enumerate() {
                    if *v < 0.0 {
                        negative.push(json!({"n": n, "x": x, "h": h, "order": l, "value": v}));
                    }
                }
            }
        }
    }
    b.check(
        "difference_nonnegativity",
        "difference_nonnegativity",
        !negative.is_empty(),
        format!("{} negative of {evaluated} forward differences of exp", negative.len()),
    );
    b.data("negative_differences", Value::Array(negative));
    Ok(())
}

fn fh(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let ns: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => b.default_f64_list("n_list").into_iter().map(|x| x as usize).collect(),
    };
    let alphas = cfg.alpha_grid.clone().unwrap_or_else(|| b.default_f64_list("alpha_grid"));
    cfg.alpha_grid = Some(alphas.clone());
    let trials = resolve_trials(cfg, b);
    let interval = Interval::positive_reals();
    let mut rows = Vec::new();
    for &n in &ns {
        if n < 2 {
            return Err(AppError::usage("suite fh needs N >= 2"));
        }
        let entries = par_map(&alphas, |&alpha| fractional_power_entry(n, alpha, interval, trials, cfg.seed, n >= 3, cfg.tol))?;
        for e in entries {
            let expect = match e.expectation {
                PowerExpectation::Preserves => Expectation::Holds,
                PowerExpectation::Violates => Expectation::Violation,
                PowerExpectation::Open => Expectation::Record,
            };
            let name = format!("power N={n} alpha={}", e.alpha);
            b.checks.push(CheckResult::new(
                &name,
                expect,
                e.violation_found(),
                format!(
                    "known: {}; {} of {} random samples non-PSD; witness min eigenvalue {:.3e}",
                    e.expectation.name(),
                    e.random_violations,
                    e.trials,
                    e.horn.min_eigenvalue
                ),
            ));
            if let Some(v) = &e.first_violation {
                b.record(&name, std::slice::from_ref(v));
            }
            rows.push(json!({
                "n": n,
                "alpha": e.alpha,
                "expectation": e.expectation.name(),
                "random_violations": e.random_violations,
                "worst_relative_eigenvalue": e.worst_relative_eigenvalue,
                "horn": {
                    "x": e.horn.x,
                    "eps": e.horn.eps,
                    "min_eigenvalue": e.horn.min_eigenvalue,
                    "is_psd": e.horn.is_psd,
                    "negative_diagonal": e.horn.negative_diagonal,
                },
                "b_matrix": e.bivariate.map(|s| json!({
                    "tested": s.tested,
                    "non_psd": s.non_psd,
                    "min_relative_eigenvalue": s.min_relative_eigenvalue,
                })),
            }));
        }
    }
    b.data("powers", Value::Array(rows));

    let unit = Interval::new(1.0)?;
    let samples = trials.min(100);
    let mut worst: f64 = 0.0;
    for n in 2..=4 {
        for alpha in [0.5, 2.5] {
            let errs = par_trials(samples, |t| -> AppResult<f64> {
                let a = sample_psd_with(&mut trial_rng(cfg.seed, t), n, unit);
                let lhs = factorial_scaled(&smooth_transform(&FunctionSpec::Power { alpha }, &a)?);
                let rhs = bivariate_power_matrix(alpha, &a)?;
                Ok(lhs.max_abs_diff(&rhs)? / rhs.max_abs())
            })?;
            worst = errs.into_iter().fold(worst, f64::max);
        }
    }
    b.check(
        "b_matrix_identity",
        "b_matrix_identity",
        !(worst <= 1e-10),
        format!("largest relative gap between D·f⋄(A)·D and B(alpha, A), N <= 4, alpha in {{0.5, 2.5}}: {worst:.3e}"),
    );
    Ok(())
}

fn bruhat(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let n = resolve_n(cfg, b);
    if n == 0 || n > ORACLE_MAX_N {
        return Err(AppError::usage(format!("suite bruhat supports 1 <= n <= {ORACLE_MAX_N}")));
    }
    let exhaustive = n as u64 <= b.default_u64("exhaustive_max_n");
    let (count, pair): (u64, Box<dyn Fn(u64) -> (Permutation, Permutation) + Sync + Send>) = if exhaustive {
        let perms: Vec<Permutation> = all_permutations(n).collect();
        let m = perms.len() as u64;
        b.trials = m * m;
        (m * m, Box::new(move |k| (perms[(k / m) as usize].clone(), perms[(k % m) as usize].clone())))
    } else {
        let trials = resolve_trials(cfg, b);
        let seed = cfg.seed;
        let draw = move |k: u64| {
            let mut rng = trial_rng(seed, k);
            let s = Permutation::new(random_one_line(&mut rng, n)).expect("shuffle is a permutation");
            let t = Permutation::new(random_one_line(&mut rng, n)).expect("shuffle is a permutation");
            (s, t)
        };
        (trials, Box::new(draw))
    };
    let results = par_trials(count, |k| -> AppResult<(bool, bool, bool, bool)> {
        let (s, t) = pair(k);
        let agree = bruhat_leq_conv(&s, &t)? == bruhat_leq_oracle(&s, &t)?;
        let eq = verify_equivalences(&s, &t)?;
        Ok((
            agree,
            eq.all_agree(),
            eq.row_reversal_identity && eq.column_reversal_identity,
            eq.overlapping_failure.is_some(),
        ))
    })?;
    let tally = |f: fn(&(bool, bool, bool, bool)) -> bool| results.iter().filter(|r| f(r)).count();
    let agreements = tally(|r| r.0);
    let rows_agree = tally(|r| r.1);
    let identities = tally(|r| r.2);
    let literal_failures = tally(|r| r.3);
    let how = if exhaustive { "all ordered pairs" } else { "random pairs" };
    b.check(
        "oracle_agreement",
        format!("oracle_agreement n={n}"),
        agreements != results.len(),
        format!("{agreements}/{} oracle agreements over {how} of S_{n}", results.len()),
    );
    b.check(
        "equivalence_rows",
        format!("equivalence_rows n={n}"),
        rows_agree != results.len(),
        format!("{rows_agree}/{} pairs with all four forms in agreement", results.len()),
    );
    b.check(
        "reversal_identities",
        format!("reversal_identities n={n}"),
        identities != results.len(),
        format!("{identities}/{} pairs satisfy the reversal identities with blocks indexed n-2-i, n-2-j", results.len()),
    );
    b.check(
        "literal_overlapping_identities",
        format!("literal_overlapping_identities n={n}"),
        literal_failures > 0,
        format!("{literal_failures}/{} pairs fail the forms indexed n-1-i, n-1-j, whose blocks share row i (column j)", results.len()),
    );
    b.data(
        "counts",
        json!({"pairs": results.len(), "exhaustive": exhaustive, "agreements": agreements, "literal_failures": literal_failures}),
    );
    Ok(())
}

/// Nonnegative rational matrix of total mass one.
fn normalize(m: ConvMatrix<Rational>) -> ConvMatrix<Rational> {
    let mut m = m.map(|x| x.abs());
    let total = m.as_slice().iter().fold(Rational::zero(), |acc, x| acc + x);
    if total.is_zero() {
        m[(0, 0)] = q(1);
        return m;
    }
    m.map(|x| x / &total)
}

/// Law of the sum by enumerating every tuple of support points.
pub fn enumerate_sum_law(dists: &[ConvMatrix<Rational>]) -> HashMap<(usize, usize), Rational> {
    let mut law = HashMap::from([((0, 0), q(1))]);
    for d in dists {
        let mut next: HashMap<(usize, usize), Rational> = HashMap::new();
        for ((i0, j0), p0) in &law {
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    let p = &d[(i, j)];
                    if !p.is_zero() {
                        *next.entry((i0 + i, j0 + j)).or_insert_with(Rational::zero) += p0 * p;
                    }
                }
            }
        }
        law = next;
    }
    law
}

fn matches_law(m: &ConvMatrix<Rational>, law: &HashMap<(usize, usize), Rational>) -> bool {
    let inside = law.keys().all(|&(i, j)| i < m.rows() && j < m.cols());
    inside
        && (0..m.rows()).all(|i| {
            (0..m.cols()).all(|j| law.get(&(i, j)).cloned().unwrap_or_else(Rational::zero) == m[(i, j)])
        })
}

fn prob(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let trials = resolve_trials(cfg, b);
    let seed = cfg.seed;
    let sums = par_trials(trials, |t| -> AppResult<bool> {
        let mut rng = trial_rng(seed, t);
        let summands = 1 + (t / 16 % 3) as usize;
        let dists: Vec<ConvMatrix<Rational>> = (0..summands)
            .map(|s| {
                let rows = 1 + ((t as usize + s) % 4);
                let cols = 1 + ((t as usize / 4 + 2 * s) % 4);
                normalize(random_rational_matrix(&mut rng, rows, cols, 0.3))
            })
            .collect();
        let wrapped = dists.iter().cloned().map(GridDistribution::new).collect::<Result<Vec<_>, _>>()?;
        let sum = sum_distribution(&wrapped)?;
        Ok(matches_law(sum.matrix(), &enumerate_sum_law(&dists)))
    })?;
    let mismatches = sums.iter().filter(|ok| !**ok).count();
    b.check(
        "sum_law",
        "sum_law",
        mismatches > 0,
        format!("{mismatches} of {trials} exact sums differ from enumeration of the sum's law"),
    );

    let chains = par_trials(trials, |t| -> AppResult<(bool, bool)> {
        let mut rng = trial_rng(seed, t);
        let summands = 2 + (t % 2) as usize;
        let dists = (0..summands)
            .map(|s| {
                let n = 1 + (t as usize + s) % 4;
                let a = sample_psd_with(&mut rng, n, Interval::positive_reals());
                let total: C64 = a.as_slice().iter().sum();
                GridDistribution::new(a.scale(&total.inv()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inputs_pass = dists
            .iter()
            .map(|d| psd_chain_check(d.matrix(), d.matrix().rows(), cfg.tol).map(|r| r.all_pass()))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|x| x);
        let sum = sum_distribution(&dists)?;
        let sum_pass = psd_chain_check(sum.matrix(), sum.matrix().rows(), cfg.tol)?.all_pass();
        Ok((inputs_pass, sum_pass))
    })?;
    let broken = chains.iter().filter(|(i, s)| *i && !*s).count();
    let applicable = chains.iter().filter(|(i, _)| *i).count();
    b.check(
        "chain_preserved",
        "chain_preserved",
        broken > 0,
        format!("{broken} of {applicable} sums of PSD laws fail the leading-block check"),
    );

    let planted = ConvMatrix::from_rows(vec![vec![qf(1, 10), qf(4, 10)], vec![qf(4, 10), qf(1, 10)]])?;
    let report = psd_chain_check(&planted, 2, cfg.tol)?;
    b.check(
        "planted_non_psd_flagged",
        "planted_non_psd_flagged",
        !report.all_pass(),
        format!("[[1/10,4/10],[4/10,1/10]] first fails at k = {:?}", report.first_failure()),
    );

    let semi = semiinfinite_checks(DEFAULT_KAPPA_CAP)?;
    b.check(
        "semi_infinite",
        "semi_infinite",
        !semi.all_hold(),
        format!(
            "diag(0,1) powers {}; non-annihilation bound holds on {}/{} inputs up to kappa {}",
            if semi.diagonal_shift { "shift along the diagonal" } else { "fail" },
            semi.non_annihilation.iter().filter(|(_, ok)| *ok).count(),
            semi.non_annihilation.len(),
            semi.kappa_cap
        ),
    );
    Ok(())
}

const CH_SHAPES: [(usize, usize); 9] = [(1, 1), (1, 4), (2, 2), (2, 3), (3, 2), (3, 3), (2, 5), (4, 4), (5, 5)];

fn ch(cfg: &mut RunConfig, b: &mut Builder) -> AppResult<()> {
    let trials = resolve_trials(cfg, b);
    let seed = cfg.seed;
    let mut patterns = Vec::new();
    for (m, n) in CH_SHAPES {
        let ch_ok = par_trials(trials, |t| {
            let a = random_rational_matrix(&mut trial_rng(seed, t), m, n, 0.0);
            Ok::<_, AppError>(ch_residual(&a).is_zero())
        })?;
        let fails = ch_ok.iter().filter(|ok| !**ok).count();
        b.check(
            "cayley_hamilton",
            format!("cayley_hamilton {m}x{n}"),
            fails > 0,
            format!("{fails} of {trials} residuals (A - a00 I)^{} nonzero", m + n - 1),
        );

        let witness = ConvMatrix::<Rational>::ones(m, n).sub(&ConvMatrix::identity(m, n))?;
        let deg = m + n - 1;
        let tight = (1..deg).all(|l| !annihilator_power(&witness, l).is_zero()) && annihilator_power(&witness, deg).is_zero();
        b.check(
            "tightness",
            format!("tightness {m}x{n}"),
            !tight,
            format!("(1 - I)^l nonzero for l < {deg} and zero at l = {deg}"),
        );

        let degrees = par_trials(trials, |t| -> AppResult<(usize, usize)> {
            let a = random_rational_matrix(&mut trial_rng(seed, trials + t), m, n, 0.6);
            let report = match minimal_polynomial(&a) {
                Ok(r) => r.minimal_degree,
                Err(juryconv_core::Error::Inconsistent(_)) => usize::MAX,
                Err(e) => return Err(e.into()),
            };
            Ok((report, nilpotency_index(&a)))
        })?;
        let mismatches = degrees.iter().filter(|(k, nil)| k != nil).count();
        b.check(
            "minpoly_vs_nilpotency",
            format!("minpoly_vs_nilpotency {m}x{n}"),
            mismatches > 0,
            format!("{mismatches} of {trials} minimal degrees differ from the nilpotency index"),
        );
        let mut histogram = BTreeMap::new();
        for (k, _) in &degrees {
            *histogram.entry(k.to_string()).or_insert(0u64) += 1;
        }
        patterns.push(json!({"shape": [m, n], "minimal_degree_counts": histogram}));
    }
    b.data("minimal_degrees", Value::Array(patterns));

    let cases: [([i64; 4], usize); 6] =
        [([7, 2, 3, 0], 3), ([7, 2, 3, 5], 3), ([7, 0, 3, 5], 2), ([7, 2, 0, 0], 2), ([7, 0, 0, 5], 2), ([7, 0, 0, 0], 1)];
    let mut wrong = Vec::new();
    for ([a, bb, c, d], k) in cases {
        let m = ConvMatrix::from_rows(vec![vec![q(a), q(bb)], vec![q(c), q(d)]])?;
        let r = minimal_polynomial(&m)?;
        if r.minimal_degree != k || r.root != q(a) {
            wrong.push(format!("[[{a},{bb}],[{c},{d}]]"));
        }
    }
    b.check(
        "remark_table",
        "remark_table",
        !wrong.is_empty(),
        if wrong.is_empty() {
            String::from("2x2 minimal degrees match: 3 for b, c both nonzero; 2 for one of b, c zero or b = c = 0 != d; 1 for b = c = d = 0")
        } else {
            format!("wrong degree for {}", wrong.join(", "))
        },
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_covers_every_suite() {
        for s in SUITES {
            assert!(manifest().contains_key(s), "{s}");
        }
        assert_eq!(manifest().len(), SUITES.len());
    }

    #[test]
    fn h_grid_parsing() {
        let g = parse_h_grid("1:0.0009765625:0.5").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g[10], 0.0009765625);
        assert_eq!(parse_h_grid("1:1/8:1/2").unwrap(), vec![1.0, 0.5, 0.25, 0.125]);
        assert!(parse_h_grid("1:0:0.5").is_err());
        assert!(parse_h_grid("1:0.1:2").is_err());
        assert!(parse_h_grid("1:0.1").is_err());
    }

    #[test]
    fn alpha_grid_parsing() {
        assert_eq!(parse_alpha_grid("-0.5, 1.7,2").unwrap(), vec![-0.5, 1.7, 2.0]);
        assert!(parse_alpha_grid("1,x").is_err());
    }

    #[test]
    fn enumeration_oracle() {
        let half = qf(1, 2);
        let d = ConvMatrix::from_rows(vec![vec![half.clone(), q(0)], vec![q(0), half]]).unwrap();
        let law = enumerate_sum_law(&[d.clone(), d]);
        assert_eq!(law[&(0, 0)], qf(1, 4));
        assert_eq!(law[&(1, 1)], qf(1, 2));
        assert_eq!(law[&(2, 2)], qf(1, 4));
        assert_eq!(law.len(), 3);
    }
}
