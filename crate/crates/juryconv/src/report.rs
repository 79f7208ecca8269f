//! Run configuration and machine-readable suite reports.

use juryconv_core::positivity::Violation;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::format::matrix_to_json;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TOL: f64 = juryconv_core::positivity::DEFAULT_PSD_TOL;

/// Everything needed to rerun a command bit for bit on the same build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub backend: Option<String>,
    pub tol: f64,
    pub seed: u64,
    pub trials: Option<u64>,
    pub n: Option<usize>,
    pub h_grid: Option<Vec<f64>>,
    pub alpha_grid: Option<Vec<f64>>,
    pub out: Option<String>,
    pub threads: usize,
    pub version: String,
}

impl RunConfig {
    pub fn new(command: impl Into<String>) -> Self {
        RunConfig {
            command: command.into(),
            inputs: Vec::new(),
            backend: None,
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            trials: None,
            n: None,
            h_grid: None,
            alpha_grid: None,
            out: None,
            threads: crate::runner::thread_count(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

/// Partial settings read from a `suite --config` file. Command-line flags
/// take precedence over these.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub n: Option<usize>,
    pub h_grid: Option<String>,
    pub alpha_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    /// The property must hold in every trial.
    Holds,
    /// A counterexample must be found.
    Violation,
    /// Observed and reported, never graded.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub expect: Expectation,
    pub violation_found: bool,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, expect: Expectation, violation_found: bool, detail: impl Into<String>) -> Self {
        let passed = match expect {
            Expectation::Holds => !violation_found,
            Expectation::Violation => violation_found,
            Expectation::Record => true,
        };
        CheckResult { name: name.into(), expect, violation_found, passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub check: String,
    pub trial: u64,
    pub matrix: Value,
    pub inputs: Vec<Value>,
    pub min_eig: f64,
    pub h: Option<f64>,
}

impl ViolationRecord {
    pub fn from_violation(check: &str, v: &Violation) -> Self {
        ViolationRecord {
            check: check.to_string(),
            trial: v.trial,
            matrix: matrix_to_json(&v.matrix),
            inputs: v.inputs.iter().map(matrix_to_json).collect(),
            min_eig: v.min_eig,
            h: v.h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub theorem: String,
    pub seed: u64,
    pub trials: u64,
    pub passed: bool,
    pub config: RunConfig,
    pub checks: Vec<CheckResult>,
    pub violations: Vec<ViolationRecord>,
    pub data: Value,
}

impl SuiteReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// One CSV row per check.
pub fn write_checks_csv<W: std::io::Write>(report: &SuiteReport, out: W) -> csv::Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        suite: &'a str,
        check: &'a str,
        expect: Expectation,
        violation_found: bool,
        passed: bool,
        detail: &'a str,
    }
    let mut w = csv::Writer::from_writer(out);
    for c in &report.checks {
        w.serialize(Row {
            suite: &report.suite,
            check: &c.name,
            expect: c.expect,
            violation_found: c.violation_found,
            passed: c.passed,
            detail: &c.detail,
        })?;
    }
    w.flush()?;
    Ok(())
}
