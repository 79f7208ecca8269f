//! Argument parsing and command dispatch for the `juryconv` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use juryconv_core::bruhat::{bruhat_leq_conv, rank_matrix, Permutation};
use juryconv_core::cayley_hamilton::minimal_polynomial;
use juryconv_core::partitions::{enumerate_partitions, IndexGrid};
use juryconv_core::probgrid::{padded_conv, sum_distribution, GridDistribution};
use juryconv_core::transforms::{smooth_transform, stepped_transform, FunctionSpec, Poly};
use juryconv_core::{Backend, ConvMatrix, Scalar, C64};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::format::{
    distribution_to_json, function_to_json, parse_function, parse_rational, read_distribution,
    read_matrix, read_text, write_csv, AnyDistribution, AnyMatrix, JsonScalar,
};
use crate::report::{write_checks_csv, ConfigFile, RunConfig, SuiteReport};
use crate::suites::{parse_alpha_grid, parse_h_grid, run_suite};
use crate::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Rational,
    Complex,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Rational => Backend::Rational,
            BackendArg::Complex => Backend::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    /// Real matrices only.
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Smooth,
    Stepped,
}

/// Convolution-product matrix calculus: products, transforms, positivity
/// experiments and Bruhat comparisons.
#[derive(Debug, Parser)]
#[command(name = "juryconv", version)]
pub struct Cli {
    /// Scalar backend; by default the backend of the input files.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendArg>,
    /// PSD tolerance: min eigenvalue >= -tol * max(1, max |h_ij|).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Step grid "start:stop:factor", e.g. "1:1/1024:1/2".
    #[arg(long = "h-grid", global = true)]
    pub h_grid: Option<String>,
    /// Comma-separated exponents for the power study.
    #[arg(long = "alpha-grid", visible_alias = "alpha", global = true, allow_hyphen_values = true)]
    pub alpha_grid: Option<String>,
    /// Matrix size for suites.
    #[arg(long = "n", visible_alias = "N", global = true)]
    pub n: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convolution product of two matrix files.
    Conv {
        a: PathBuf,
        b: PathBuf,
        /// Full convolution instead of the truncated product.
        #[arg(long)]
        padded: bool,
    },
    /// Smooth or stepped transform f⋄(A).
    Transform {
        a: PathBuf,
        /// JSON spec, `@file`, or shorthand: `exp`, `power:0.5`, `poly:0,0,1`.
        #[arg(long)]
        function: String,
        #[arg(long, value_enum, default_value = "smooth")]
        mode: ModeArg,
        /// Step size for the stepped mode.
        #[arg(long)]
        h: Option<String>,
        /// Right end of the domain interval (0, rho) that every node must lie in.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Print the multiset partitions of a target index.
    Partitions {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        len: usize,
        /// Target index "i,j".
        #[arg(long)]
        target: String,
        /// Allow the index (0,0) as a part.
        #[arg(long)]
        include_origin: bool,
    },
    /// Minimal annihilating polynomial (z - a00)^k.
    Minpoly { a: PathBuf },
    /// Compare two permutations in Bruhat order.
    Bruhat {
        /// One-line notation, e.g. "3 1 2"; give exactly two.
        #[arg(long = "perm", required = true, num_args = 1)]
        perms: Vec<String>,
    },
    /// Law of the sum of independent grid variables.
    ProbSum {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run an experiment suite: closure, schoenberg, horn, fh, bruhat, prob, ch.
    Suite {
        name: String,
        /// JSON file with tol, seed, trials, n, h_grid, alpha_grid.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write one CSV row per check.
        #[arg(long = "summary-csv")]
        summary_csv: Option<PathBuf>,
    },
}

/// What a command produced.
#[derive(Debug)]
pub enum Output {
    Json(Value),
    Matrix(AnyMatrix),
    Text(String),
    Suite(Box<SuiteReport>),
}

impl Output {
    /// False when a suite expectation was violated.
    pub fn passed(&self) -> bool {
        match self {
            Output::Suite(r) => r.passed,
            _ => true,
        }
    }
}

fn resolve_backend(requested: Option<BackendArg>, found: &[Backend]) -> Backend {
    match requested {
        Some(b) => b.into(),
        None if found.iter().all(|b| *b == Backend::Rational) => Backend::Rational,
        None => Backend::Complex,
    }
}

fn load_matrices(paths: &[&Path], backend: Option<BackendArg>) -> AppResult<Vec<AnyMatrix>> {
    let ms = paths.iter().map(|p| read_matrix(p)).collect::<Result<Vec<_>, _>>()?;
    let target = resolve_backend(backend, &ms.iter().map(AnyMatrix::backend).collect::<Vec<_>>());
    Ok(ms.into_iter().map(|m| m.into_backend(target)).collect::<Result<Vec<_>, _>>()?)
}

/// `--function` value: inline JSON, `@path`, or a shorthand.
pub fn parse_function_arg(arg: &str) -> AppResult<FunctionSpec> {
    let t = arg.trim();
    if t.starts_with('{') {
        return Ok(parse_function(t)?);
    }
    if let Some(path) = t.strip_prefix('@') {
        return Ok(parse_function(&read_text(Path::new(path))?)?);
    }
    let (kind, rest) = t.split_once(':').unwrap_or((t, ""));
    let bad = || AppError::usage(format!("unrecognised function {arg:?}"));
    match kind {
        "exp" if rest.is_empty() => Ok(FunctionSpec::Exp),
        "power" => {
            let alpha: f64 = rest.parse().map_err(|_| bad())?;
            if !alpha.is_finite() {
                return Err(bad());
            }
            Ok(FunctionSpec::Power { alpha })
        }
        "poly" => {
            let coeffs = rest.split(',').map(|c| parse_rational(c).map_err(AppError::Usage)).collect::<AppResult<Vec<_>>>()?;
            Ok(FunctionSpec::Polynomial(Poly::new(coeffs)))
        }
        _ => Err(bad()),
    }
}

fn exact_on_rationals(f: &FunctionSpec) -> bool {
    match f {
        FunctionSpec::Polynomial(_) | FunctionSpec::Series { .. } => true,
        FunctionSpec::Power { alpha } => juryconv_core::numerics::is_nonnegative_integer(*alpha),
        FunctionSpec::Exp => false,
    }
}

fn check_nodes(f: &FunctionSpec, a00: f64, h: f64, top: usize, rho: Option<f64>) -> AppResult<()> {
    let Some(rho) = rho else { return Ok(()) };
    for k in 0..=top {
        let x = a00 + k as f64 * h;
        if !(x > 0.0 && x < rho) {
            return Err(juryconv_core::Error::Domain {
                function: f.label(),
                point: format!("{x} (node {k} of the step grid leaves (0, {rho}))"),
            }
            .into());
        }
    }
    Ok(())
}

fn transform_on<T: Scalar + JsonScalar>(
    f: &FunctionSpec,
    a: &ConvMatrix<T>,
    mode: ModeArg,
    h: Option<T>,
) -> AppResult<ConvMatrix<T>>
where
    FunctionSpec: juryconv_core::transforms::ScalarFunction<T>,
{
    Ok(match (mode, h) {
        (ModeArg::Smooth, _) => smooth_transform(f, a)?,
        (ModeArg::Stepped, Some(h)) => stepped_transform(f, a, &h)?,
        (ModeArg::Stepped, None) => return Err(AppError::usage("--mode stepped needs --h")),
    })
}

fn cmd_transform(
    cli: &Cli,
    path: &Path,
    function: &str,
    mode: ModeArg,
    h: Option<&str>,
    rho: Option<f64>,
) -> AppResult<Output> {
    let f = parse_function_arg(function)?;
    let input = read_matrix(path)?;
    let backend = match cli.backend {
        Some(b) => b.into(),
        None if input.backend() == Backend::Rational && exact_on_rationals(&f) => Backend::Rational,
        None => Backend::Complex,
    };
    let input = input.into_backend(backend)?;
    if mode == ModeArg::Smooth && h.is_some() {
        return Err(AppError::usage("--h applies to --mode stepped only"));
    }
    let h_exact = h.map(|s| parse_rational(s).map_err(AppError::Usage)).transpose()?;
    let h_float = h_exact.as_ref().and_then(|r| r.to_f64());
    let (m, n) = input.shape();
    if let (ModeArg::Stepped, Some(hf)) = (mode, h_float) {
        let a00 = input.to_complex()[(0, 0)].re;
        check_nodes(&f, a00, hf, m + n - 2, rho)?;
    }
    let result = match &input {
        AnyMatrix::Rational(a) => AnyMatrix::Rational(transform_on(&f, a, mode, h_exact.clone())?),
        AnyMatrix::Complex(a) => AnyMatrix::Complex(transform_on(&f, a, mode, h_float.map(|x| C64::new(x, 0.0)))?),
    };
    if cli.format == OutputFormat::Csv {
        return Ok(Output::Matrix(result));
    }
    Ok(Output::Json(json!({
        "function": function_to_json(&f),
        "mode": match mode { ModeArg::Smooth => "smooth", ModeArg::Stepped => "stepped" },
        "h": h_exact.map(|r| r.to_value()),
        "rho": rho,
        "backend": backend.name(),
        "input": input.to_json(),
        "result": result.to_json(),
    })))
}

fn cmd_partitions(rows: usize, cols: usize, len: usize, target: &str, include_origin: bool) -> AppResult<Output> {
    let parsed: Vec<usize> = target
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| AppError::usage(format!("target must be \"i,j\", got {target:?}")))?;
    let [i, j] = parsed[..] else {
        return Err(AppError::usage(format!("target must be \"i,j\", got {target:?}")));
    };
    let grid = IndexGrid::new(rows, cols)?;
    let parts = enumerate_partitions(grid, len, (i, j), !include_origin)?;
    let mut text = String::new();
    for p in &parts {
        text.push_str(&format!("{p}\tweight {}\n", p.weight()));
    }
    text.push_str(&format!("{} partitions\n", parts.len()));
    Ok(Output::Text(text))
}

fn minpoly_json<T: Scalar + JsonScalar>(a: &ConvMatrix<T>) -> AppResult<Value> {
    let r = minimal_polynomial(a)?;
    Ok(json!({
        "root": r.root.to_value(),
        "minimal_degree": r.minimal_degree,
        "ch_degree": r.ch_degree,
        "polynomial": r.display_polynomial(),
        "witness": r.witness.map(|(i, j)| [i, j]),
    }))
}

fn cmd_bruhat(perms: &[String]) -> AppResult<Output> {
    let [s, t] = perms else {
        return Err(AppError::usage(format!("bruhat takes exactly two --perm values, got {}", perms.len())));
    };
    let sigma: Permutation = s.parse()?;
    let tau: Permutation = t.parse()?;
    let leq = bruhat_leq_conv(&sigma, &tau)?;
    let geq = bruhat_leq_conv(&tau, &sigma)?;
    let rows = |w: &Permutation| rank_matrix(w).matrix().to_rows();
    Ok(Output::Json(json!({
        "sigma": sigma.to_string(),
        "tau": tau.to_string(),
        "leq": leq,
        "geq": geq,
        "incomparable": !leq && !geq,
        "rank_matrices": {"sigma": rows(&sigma), "tau": rows(&tau)},
    })))
}

fn cmd_prob_sum(cli: &Cli, files: &[PathBuf]) -> AppResult<Output> {
    let dists = files.iter().map(|p| read_distribution(p)).collect::<Result<Vec<_>, _>>()?;
    let found: Vec<Backend> = dists
        .iter()
        .map(|d| match d {
            AnyDistribution::Rational(_) => Backend::Rational,
            AnyDistribution::Complex(_) => Backend::Complex,
        })
        .collect();
    let out = match resolve_backend(cli.backend, &found) {
        Backend::Rational => {
            let ds = dists
                .into_iter()
                .map(|d| match d {
                    AnyDistribution::Rational(d) => Ok(d),
                    AnyDistribution::Complex(_) => {
                        Err(crate::format::FormatError::BackendMismatch { expected: "rational", found: "complex" })
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = sum_distribution(&ds)?;
            (distribution_to_json(&s), AnyMatrix::Rational(s.into_matrix()))
        }
        Backend::Complex => {
            let ds = dists
                .into_iter()
                .map(|d| match d {
                    AnyDistribution::Rational(d) => GridDistribution::new(d.matrix().to_complex()),
                    AnyDistribution::Complex(d) => Ok(d),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = sum_distribution(&ds)?;
            (distribution_to_json(&s), AnyMatrix::Complex(s.into_matrix()))
        }
    };
    Ok(match cli.format {
        OutputFormat::Json => Output::Json(out.0),
        OutputFormat::Csv => Output::Matrix(out.1),
    })
}

/// Builds the run configuration: flags override the config file, which
/// overrides the defaults.
pub fn run_config(cli: &Cli, command: &str, inputs: Vec<String>, file: Option<ConfigFile>) -> AppResult<RunConfig> {
    let file = file.unwrap_or_default();
    let mut cfg = RunConfig::new(command);
    cfg.inputs = inputs;
    cfg.backend = cli.backend.map(|b| Backend::from(b).name().to_string());
    cfg.tol = cli.tol.or(file.tol).unwrap_or(cfg.tol);
    if !(cfg.tol >= 0.0 && cfg.tol.is_finite()) {
        return Err(AppError::usage(format!("tolerance must be a nonnegative number, got {}", cfg.tol)));
    }
    cfg.seed = cli.seed.or(file.seed).unwrap_or(cfg.seed);
    cfg.trials = cli.trials.or(file.trials);
    cfg.n = cli.n.or(file.n);
    cfg.h_grid = cli.h_grid.as_deref().or(file.h_grid.as_deref()).map(parse_h_grid).transpose()?;
    cfg.alpha_grid = match &cli.alpha_grid {
        Some(s) => Some(parse_alpha_grid(s)?),
        None => file.alpha_grid,
    };
    cfg.out = cli.out.as_ref().map(|p| p.display().to_string());
    Ok(cfg)
}

fn cmd_suite(cli: &Cli, name: &str, config: Option<&Path>, summary_csv: Option<&Path>) -> AppResult<Output> {
    let file = config
        .map(|p| -> AppResult<ConfigFile> {
            let text = read_text(p)?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            serde_path_to_error::deserialize(de).map_err(|e| {
                AppError::usage(format!("{}: {}: {}", p.display(), e.path(), e.inner()))
            })
        })
        .transpose()?;
    let inputs = config.map(|p| vec![p.display().to_string()]).unwrap_or_default();
    let cfg = run_config(cli, &format!("suite {name}"), inputs, file)?;
    let report = run_suite(name, &cfg)?;
    if let Some(path) = summary_csv {
        let f = std::fs::File::create(path).map_err(|source| AppError::Io { path: path.display().to_string(), source })?;
        write_checks_csv(&report, f).map_err(|e| AppError::usage(format!("{}: {e}", path.display())))?;
    }
    Ok(Output::Suite(Box::new(report)))
}

pub fn execute(cli: &Cli) -> AppResult<Output> {
    match &cli.command {
        Command::Conv { a, b, padded } => {
            let ms = load_matrices(&[a, b], cli.backend)?;
            let result = match (&ms[0], &ms[1]) {
                (AnyMatrix::Rational(x), AnyMatrix::Rational(y)) => {
                    AnyMatrix::Rational(if *padded { padded_conv(x, y) } else { x.conv(y)? })
                }
                (AnyMatrix::Complex(x), AnyMatrix::Complex(y)) => {
                    AnyMatrix::Complex(if *padded { padded_conv(x, y) } else { x.conv(y)? })
                }
                _ => unreachable!("inputs share one backend"),
            };
            Ok(Output::Matrix(result))
        }
        Command::Transform { a, function, mode, h, rho } => cmd_transform(cli, a, function, *mode, h.as_deref(), *rho),
        Command::Partitions { rows, cols, len, target, include_origin } => {
            cmd_partitions(*rows, *cols, *len, target, *include_origin)
        }
        Command::Minpoly { a } => {
            let m = load_matrices(&[a], cli.backend)?.remove(0);
            let mut v = match &m {
                AnyMatrix::Rational(x) => minpoly_json(x)?,
                AnyMatrix::Complex(x) => minpoly_json(x)?,
            };
            v["backend"] = Value::from(m.backend().name());
            Ok(Output::Json(v))
        }
        Command::Bruhat { perms } => cmd_bruhat(perms),
        Command::ProbSum { files } => cmd_prob_sum(cli, files),
        Command::Suite { name, config, summary_csv } => cmd_suite(cli, name, config.as_deref(), summary_csv.as_deref()),
    }
}

/// Writes an output to `--out` or stdout.
pub fn emit(cli: &Cli, output: &Output) -> AppResult<()> {
    let mut buf = Vec::new();
    match (output, cli.format) {
        (Output::Matrix(m), OutputFormat::Csv) => write_csv(m, &mut buf)?,
        (Output::Matrix(m), OutputFormat::Json) => writeln!(buf, "{}", m.to_json()).expect("in-memory write"),
        (Output::Json(v), _) => writeln!(buf, "{v}").expect("in-memory write"),
        (Output::Suite(r), _) => writeln!(buf, "{}", serde_json::to_string_pretty(r).expect("report serializes"))
            .expect("in-memory write"),
        (Output::Text(t), _) => buf.extend_from_slice(t.as_bytes()),
    }
    match &cli.out {
        Some(path) => std::fs::write(path, &buf).map_err(|source| AppError::Io { path: path.display().to_string(), source }),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|source| AppError::Io { path: String::from("<stdout>"), source }),
    }
}

/// Runs the command line and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { crate::exit::USAGE } else { crate::exit::OK };
        }
    };
    let output = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return crate::exit::USAGE;
        }
    };
    if let Err(e) = emit(&cli, &output) {
        eprintln!("error: {e}");
        return crate::exit::USAGE;
    }
    if let Output::Suite(r) = &output {
        let location = cli.out.as_ref().map_or_else(|| String::from("stdout"), |p| p.display().to_string());
        for (k, c) in r.checks.iter().enumerate().filter(|(_, c)| !c.passed) {
            eprintln!("expectation violated: {location} checks[{k}] \"{}\": {}", c.name, c.detail);
        }
    }
    if output.passed() {
        crate::exit::OK
    } else {
        crate::exit::EXPECTATION_VIOLATED
    }
}
