//! Positive semidefiniteness under the convolution product and under the
//! matrix transforms.
//!
//! Floating-point verdicts compare the least eigenvalue of the Hermitian part
//! against `-tol * max(1, ||H||_max)`. Exact verdicts on rational input use
//! principal minors.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;
use crate::numerics::{falling_factorial, is_nonnegative_integer, Rational, Scalar, C64};
use crate::sampling::trial_rng;
use crate::transforms::{
    bivariate_power_matrix, forward_difference, smooth_transform, stepped_transform, FunctionSpec, Poly,
    ScalarFunction,
};

pub const DEFAULT_PSD_TOL: f64 = 1e-8;

/// Sweeps of the cyclic Jacobi method before giving up on convergence.
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues of a real symmetric `n x n` matrix (row-major), ascending.
pub fn symmetric_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let total: f64 = a.iter().map(|x| x * x).sum();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= f64::EPSILON * f64::EPSILON * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// Eigenvalues of a Hermitian matrix, ascending. Complex input goes through
/// the real embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of the
/// input with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &ConvMatrix<C64>) -> Vec<f64> {
    let n = h.rows();
    if h.as_slice().iter().all(|z| z.im == 0.0) {
        return symmetric_eigenvalues(h.as_slice().iter().map(|z| z.re).collect(), n);
    }
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            e[i * m + j] = z.re;
            e[(i + n) * m + j + n] = z.re;
            e[i * m + j + n] = -z.im;
            e[(i + n) * m + j] = z.im;
        }
    }
    symmetric_eigenvalues(e, m).into_iter().step_by(2).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    /// `||H||_max`.
    pub scale: f64,
}

impl PsdVerdict {
    fn from_eigenvalue(min_eigenvalue: f64, tolerance: f64, scale: f64) -> Self {
        PsdVerdict {
            is_psd: min_eigenvalue >= -tolerance * scale.max(1.0),
            min_eigenvalue,
            tolerance,
            scale,
        }
    }
}

/// PSD test for a square matrix that is Hermitian up to `tol * max(1, ||H||_max)`.
pub fn is_psd<T: Scalar>(h: &ConvMatrix<T>, tol: f64) -> Result<PsdVerdict> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let z = h.to_complex();
    if !z.all_finite() {
        return Err(Error::InvalidArgument(String::from("matrix has non-finite entries")));
    }
    let n = z.rows();
    let scale = z.max_abs();
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            deviation = deviation.max((z[(i, j)] - z[(j, i)].conj()).norm());
        }
    }
    if deviation > tol * scale.max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    let sym = ConvMatrix::from_fn(n, n, |i, j| (z[(i, j)] + z[(j, i)].conj()) * 0.5);
    let min = hermitian_eigenvalues(&sym).first().copied().unwrap_or(0.0);
    Ok(PsdVerdict::from_eigenvalue(min, tol, scale))
}

/// Determinant by Gaussian elimination over the rationals.
pub fn exact_determinant(a: &ConvMatrix<Rational>) -> Result<Rational> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut m = a.to_rows();
    let mut det = Rational::from_i64(1);
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Ok(Rational::zero());
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / p.clone();
            for c in col..n {
                let v = m[col][c].clone() * factor.clone();
                m[r][c] = m[r][c].clone() - v;
            }
        }
    }
    Ok(det)
}

/// Largest size accepted by [`is_psd_exact`] (it inspects `2^n - 1` minors).
pub const EXACT_PSD_MAX_N: usize = 12;

/// Exact PSD test for a symmetric rational matrix: every principal minor is
/// nonnegative.
pub fn is_psd_exact(a: &ConvMatrix<Rational>) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    if n > EXACT_PSD_MAX_N {
        return Err(Error::InvalidArgument(format!("exact PSD test limited to n <= {EXACT_PSD_MAX_N}")));
    }
    if a != &a.transpose() {
        return Err(Error::NotHermitian { deviation: a.sub(&a.transpose())?.max_abs() });
    }
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let minor = ConvMatrix::from_fn(k, k, |r, c| a[(idx[r], idx[c])].clone());
        if exact_determinant(&minor)?.is_negative() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The open interval `(0, upper)`; `upper` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    upper: f64,
}

impl Interval {
    pub fn new(upper: f64) -> Result<Self> {
        if !(upper > 0.0) {
            return Err(Error::InvalidArgument(format!("interval upper end must be positive, got {upper}")));
        }
        Ok(Interval { upper })
    }

    pub fn positive_reals() -> Self {
        Interval { upper: f64::INFINITY }
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, x: f64) -> bool {
        x > 0.0 && x < self.upper
    }
}

/// Largest entry produced by the sampler on unbounded intervals.
pub const SAMPLER_ENTRY_CAP: f64 = 10.0;

/// A real PSD `n x n` matrix with every entry in `interval`.
///
/// Draws `G` of random rank `r <= n` with entries in `(0, 1]` and rescales
/// `G G^T` so that its largest entry is `u * min(upper, 10)` for a uniform
/// `u` in `[0.05, 0.95]`.
pub fn sample_psd_with<R: Rng + ?Sized>(rng: &mut R, n: usize, interval: Interval) -> ConvMatrix<C64> {
    let rank = rng.gen_range(1..=n.max(1));
    let g: Vec<f64> = (0..n * rank).map(|_| 1.0 - rng.gen::<f64>()).collect();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = (0..rank).map(|k| g[i * rank + k] * g[j * rank + k]).sum();
            m[i * n + j] = v;
            m[j * n + i] = v;
        }
    }
    let max = m.iter().copied().fold(0.0, f64::max);
    let target = rng.gen_range(0.05..=0.95) * interval.upper.min(SAMPLER_ENTRY_CAP);
    let s = target / max;
    ConvMatrix::from_fn(n, n, |i, j| C64::new(s * m[i * n + j], 0.0))
}

/// [`sample_psd_with`] on the generator of trial 0 for `seed`.
pub fn sample_psd(n: usize, interval: Interval, seed: u64) -> ConvMatrix<C64> {
    sample_psd_with(&mut trial_rng(seed, 0), n, interval)
}

/// A failed PSD check together with the data needed to replay it.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub trial: u64,
    pub inputs: Vec<ConvMatrix<C64>>,
    pub matrix: ConvMatrix<C64>,
    pub min_eig: f64,
    pub h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureOutcome {
    pub trial: u64,
    pub a: ConvMatrix<C64>,
    pub b: ConvMatrix<C64>,
    pub product: ConvMatrix<C64>,
    pub verdict: PsdVerdict,
}

/// PSD verdict on `A ⋄ B`.
pub fn closure_check(a: &ConvMatrix<C64>, b: &ConvMatrix<C64>, tol: f64) -> Result<(ConvMatrix<C64>, PsdVerdict)> {
    let product = a.conv(b)?;
    let verdict = is_psd(&product, tol)?;
    Ok((product, verdict))
}

/// One trial of the closure experiment: `A`, `B` sampled from `P_n((0, 10))`.
pub fn closure_trial(n: usize, seed: u64, trial: u64, tol: f64) -> Result<ClosureOutcome> {
    let mut rng = trial_rng(seed, trial);
    let interval = Interval::positive_reals();
    let a = sample_psd_with(&mut rng, n, interval);
    let b = sample_psd_with(&mut rng, n, interval);
    let (product, verdict) = closure_check(&a, &b, tol)?;
    Ok(ClosureOutcome { trial, a, b, product, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClosureReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    /// Least value of `min_eig / max(1, ||A ⋄ B||_max)` over all trials.
    pub worst_relative_eigenvalue: f64,
    pub violations: Vec<Violation>,
}

impl ClosureReport {
    /// Merges per-trial outcomes, which must be sorted by trial index.
    pub fn from_outcomes(n: usize, seed: u64, tolerance: f64, outcomes: Vec<ClosureOutcome>) -> Self {
        let mut report = ClosureReport {
            n,
            trials: outcomes.len() as u64,
            seed,
            tolerance,
            worst_relative_eigenvalue: f64::INFINITY,
            violations: Vec::new(),
        };
        for o in outcomes {
            let rel = o.verdict.min_eigenvalue / o.verdict.scale.max(1.0);
            report.worst_relative_eigenvalue = report.worst_relative_eigenvalue.min(rel);
            if !o.verdict.is_psd {
                report.violations.push(Violation {
                    trial: o.trial,
                    inputs: vec![o.a, o.b],
                    matrix: o.product,
                    min_eig: o.verdict.min_eigenvalue,
                    h: None,
                });
            }
        }
        report
    }
}

pub fn jury_closure_test(n: usize, trials: u64, seed: u64, tol: f64) -> Result<ClosureReport> {
    let outcomes = (0..trials).map(|t| closure_trial(n, seed, t, tol)).collect::<Result<Vec<_>>>()?;
    Ok(ClosureReport::from_outcomes(n, seed, tol, outcomes))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransformMode {
    Smooth,
    /// Stepped transforms at every grid point `h` with
    /// `a00 + 2(N-1)h` inside the interval; other points are skipped.
    Stepped { h_grid: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreserverOutcome {
    pub trial: u64,
    pub a: ConvMatrix<C64>,
    /// `(h, verdict, transform)`; `h` is `None` in smooth mode.
    pub results: Vec<(Option<f64>, PsdVerdict, ConvMatrix<C64>)>,
    pub skipped_h: Vec<f64>,
}

impl PreserverOutcome {
    /// Smallest step at which the stepped transform passed.
    pub fn smallest_passing_h(&self) -> Option<f64> {
        self.results
            .iter()
            .filter(|(_, v, _)| v.is_psd)
            .filter_map(|(h, _, _)| *h)
            .min_by(f64::total_cmp)
    }

    /// Largest `h` such that every evaluated step `<= h` passed.
    pub fn passes_up_to(&self) -> Option<f64> {
        let mut steps: Vec<(f64, bool)> = self.results.iter().filter_map(|(h, v, _)| h.map(|h| (h, v.is_psd))).collect();
        steps.sort_by(|x, y| x.0.total_cmp(&y.0));
        steps.iter().take_while(|(_, ok)| *ok).map(|(h, _)| *h).last()
    }
}

/// Whether every node `a00 + k h`, `k <= 2(N-1)`, lies in the interval.
pub fn step_admissible(a00: f64, n: usize, h: f64, interval: Interval) -> bool {
    h > 0.0 && interval.contains(a00) && a00 + 2.0 * (n as f64 - 1.0) * h < interval.upper()
}

pub fn transform_verdicts<F>(
    f: &F,
    a: &ConvMatrix<C64>,
    interval: Interval,
    mode: &TransformMode,
    tol: f64,
) -> Result<(Vec<(Option<f64>, PsdVerdict, ConvMatrix<C64>)>, Vec<f64>)>
where
    F: ScalarFunction<C64> + ?Sized,
{
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    match mode {
        TransformMode::Smooth => {
            let t = smooth_transform(f, a)?;
            results.push((None, is_psd(&t, tol)?, t));
        }
        TransformMode::Stepped { h_grid } => {
            let a00 = a[(0, 0)].re;
            for &h in h_grid {
                if !step_admissible(a00, a.rows(), h, interval) {
                    skipped.push(h);
                    continue;
                }
                let t = stepped_transform(f, a, &C64::new(h, 0.0))?;
                results.push((Some(h), is_psd(&t, tol)?, t));
            }
        }
    }
    Ok((results, skipped))
}

/// One trial of the preserver experiment on `A` sampled from `P_n(interval)`.
pub fn preserver_trial<F>(
    f: &F,
    n: usize,
    interval: Interval,
    mode: &TransformMode,
    seed: u64,
    trial: u64,
    tol: f64,
) -> Result<PreserverOutcome>
where
    F: ScalarFunction<C64> + ?Sized,
{
    let a = sample_psd_with(&mut trial_rng(seed, trial), n, interval);
    let (results, skipped_h) = transform_verdicts(f, &a, interval, mode, tol)?;
    Ok(PreserverOutcome { trial, a, results, skipped_h })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreserverReport {
    pub function: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub tolerance: f64,
    pub evaluations: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
    /// Per trial, the smallest passing step (stepped mode only).
    pub smallest_passing_h: Vec<Option<f64>>,
}

impl PreserverReport {
    pub fn from_outcomes(function: String, n: usize, seed: u64, tolerance: f64, outcomes: Vec<PreserverOutcome>) -> Self {
        let mut report = PreserverReport {
            function,
            n,
            trials: outcomes.len() as u64,
            seed,
            tolerance,
            evaluations: 0,
            skipped: 0,
            violations: Vec::new(),
            smallest_passing_h: Vec::new(),
        };
        for o in outcomes {
            report.evaluations += o.results.len();
            report.skipped += o.skipped_h.len();
            report.smallest_passing_h.push(o.smallest_passing_h());
            for (h, verdict, t) in &o.results {
                if !verdict.is_psd {
                    report.violations.push(Violation {
                        trial: o.trial,
                        inputs: vec![o.a.clone()],
                        matrix: t.clone(),
                        min_eig: verdict.min_eigenvalue,
                        h: *h,
                    });
                }
            }
        }
        report
    }
}

pub fn preserver_test<F>(
    f: &F,
    n: usize,
    interval: Interval,
    mode: &TransformMode,
    trials: u64,
    seed: u64,
    tol: f64,
) -> Result<PreserverReport>
where
    F: ScalarFunction<C64> + ?Sized,
{
    let outcomes = (0..trials)
        .map(|t| preserver_trial(f, n, interval, mode, seed, t, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(PreserverReport::from_outcomes(f.name(), n, seed, tol, outcomes))
}

/// `diag(d, d, 0, ..., 0) + eps * 1`, an `n x n` PSD matrix for `d, eps >= 0`.
pub fn diagonal_bump_matrix(n: usize, d: f64, eps: f64) -> ConvMatrix<C64> {
    ConvMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j && i < 2 { d } else { 0.0 };
        C64::new(diag + eps, 0.0)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HornWitness {
    pub matrix: ConvMatrix<C64>,
    pub transform: ConvMatrix<C64>,
    /// `(f⋄(A))_kk`.
    pub diagonal: Vec<f64>,
    /// `(1/k!) (x + eps)^k f^(k)(x + eps)`.
    pub leading_terms: Vec<f64>,
    pub verdict: PsdVerdict,
}

/// `A = diag(x, x, 0, ..., 0) + eps * 1` and its smooth transform.
///
/// The `k`-th diagonal entry of `f⋄(A)` is `(1/k!) (x+eps)^k f^(k)(x+eps)`
/// up to `O(eps)`, so a negative derivative of order `k < n` shows up as a
/// negative diagonal entry for small `eps`.
pub fn horn_witness<F>(n: usize, f: &F, x: f64, eps: f64, tol: f64) -> Result<HornWitness>
where
    F: ScalarFunction<C64> + ?Sized,
{
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let matrix = diagonal_bump_matrix(n, x, eps);
    let transform = smooth_transform(f, &matrix)?;
    let diagonal = (0..n).map(|k| transform[(k, k)].re).collect();
    let base = x + eps;
    let mut leading_terms = Vec::with_capacity(n);
    let mut k_fact = 1.0;
    for k in 0..n {
        if k > 0 {
            k_fact *= k as f64;
        }
        let d = f.derivative(k, &C64::new(base, 0.0))?.re;
        leading_terms.push(libm::pow(base, k as f64) * d / k_fact);
    }
    let verdict = is_psd(&transform, tol)?;
    Ok(HornWitness { matrix, transform, diagonal, leading_terms, verdict })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceWitness {
    pub matrix: ConvMatrix<C64>,
    pub transform: ConvMatrix<C64>,
    /// `(f⋄(A)_h)_kk`.
    pub diagonal: Vec<f64>,
    /// `(1/k!) x^k (D_h^k f)(x)`.
    pub leading_terms: Vec<f64>,
    /// `(Δ_h^l f)(x)` for `l < n`.
    pub forward_differences: Vec<f64>,
}

/// `A = diag(x - eps, x - eps, 0, ..., 0) + eps * 1` and its stepped
/// transform, whose diagonal approaches `(1/k!) x^k (D_h^k f)(x)` as `eps -> 0`.
pub fn difference_witness<F>(n: usize, f: &F, x: f64, h: f64, eps: f64) -> Result<DifferenceWitness>
where
    F: ScalarFunction<C64> + ?Sized,
{
    if !(eps > 0.0 && eps < x) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, x), got {eps}")));
    }
    let matrix = diagonal_bump_matrix(n, x - eps, eps);
    let hc = C64::new(h, 0.0);
    let transform = stepped_transform(f, &matrix, &hc)?;
    let diagonal = (0..n).map(|k| transform[(k, k)].re).collect();
    let xc = C64::new(x, 0.0);
    let mut leading_terms = Vec::with_capacity(n);
    let mut forward_differences = Vec::with_capacity(n);
    let mut k_fact = 1.0;
    for k in 0..n {
        if k > 0 {
            k_fact *= k as f64;
        }
        let delta = forward_difference(f, &xc, &hc, k)?.re;
        forward_differences.push(delta);
        leading_terms.push(libm::pow(x, k as f64) * delta / libm::pow(h, k as f64) / k_fact);
    }
    Ok(DifferenceWitness { matrix, transform, diagonal, leading_terms, forward_differences })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCounterexample {
    pub matrix: ConvMatrix<Rational>,
    pub h: Rational,
    pub transform: ConvMatrix<Rational>,
    pub determinant: Rational,
    pub is_psd: bool,
}

/// Exact stepped transform of `x^2` with its PSD status.
pub fn square_stepped_exact(matrix: ConvMatrix<Rational>, h: Rational) -> Result<StepCounterexample> {
    let square = FunctionSpec::Polynomial(Poly::monomial(2));
    let transform = stepped_transform(&square, &matrix, &h)?;
    let determinant = exact_determinant(&transform)?;
    let is_psd = is_psd_exact(&transform)?;
    Ok(StepCounterexample { matrix, h, transform, determinant, is_psd })
}

/// `x^2` with step `h = 2` on the all-ones `2 x 2` matrix: the stepped
/// transform is `[[1, 4], [4, 6]]`, of determinant `-10`.
pub fn schoenberg_h_counterexample() -> Result<StepCounterexample> {
    square_stepped_exact(ConvMatrix::ones(2, 2), Rational::from_i64(2))
}

/// What is known about `x^alpha` as a preserver of `P_N(I)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerExpectation {
    Preserves,
    Violates,
    Open,
}

impl PowerExpectation {
    pub fn for_power(n: usize, alpha: f64) -> Self {
        let nonneg_integer = is_nonnegative_integer(alpha);
        if n <= 2 {
            if alpha >= 0.0 {
                PowerExpectation::Preserves
            } else {
                PowerExpectation::Violates
            }
        } else if nonneg_integer {
            PowerExpectation::Preserves
        } else if alpha < n as f64 - 2.0 {
            PowerExpectation::Violates
        } else {
            PowerExpectation::Open
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PowerExpectation::Preserves => "preserves",
            PowerExpectation::Violates => "violates",
            PowerExpectation::Open => "open",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HornSummary {
    pub x: f64,
    pub eps: f64,
    pub min_eigenvalue: f64,
    pub is_psd: bool,
    /// Least diagonal index `k` with `(f⋄(A))_kk < 0`.
    pub negative_diagonal: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateSummary {
    pub tested: u64,
    pub non_psd: u64,
    pub min_relative_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEntry {
    pub alpha: f64,
    pub expectation: PowerExpectation,
    pub trials: u64,
    pub random_violations: u64,
    pub worst_relative_eigenvalue: f64,
    pub first_violation: Option<Violation>,
    pub horn: HornSummary,
    pub bivariate: Option<BivariateSummary>,
}

impl AlphaEntry {
    pub fn violation_found(&self) -> bool {
        self.random_violations > 0 || !self.horn.is_psd
    }

    /// Whether the observations contradict the expectation. Open cases
    /// never conflict.
    pub fn conflicts_with_expectation(&self) -> bool {
        match self.expectation {
            PowerExpectation::Preserves => self.violation_found(),
            PowerExpectation::Violates => !self.violation_found(),
            PowerExpectation::Open => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalPowerReport {
    pub n: usize,
    pub interval: Interval,
    pub seed: u64,
    pub tolerance: f64,
    pub entries: Vec<AlphaEntry>,
}

/// Horn witness base point and offset used inside `interval`.
pub fn horn_parameters(interval: Interval) -> (f64, f64) {
    let x = interval.upper().min(4.0) / 4.0;
    (x, 0.01 * x)
}

/// Random search plus the deterministic witness for `x^alpha` at one `alpha`.
pub fn fractional_power_entry(
    n: usize,
    alpha: f64,
    interval: Interval,
    trials: u64,
    seed: u64,
    include_b_matrix: bool,
    tol: f64,
) -> Result<AlphaEntry> {
    let f = FunctionSpec::Power { alpha };
    let mut random_violations = 0;
    let mut first_violation = None;
    let mut worst = f64::INFINITY;
    let mut bivariate = include_b_matrix.then_some(BivariateSummary {
        tested: 0,
        non_psd: 0,
        min_relative_eigenvalue: f64::INFINITY,
    });
    for trial in 0..trials {
        let a = sample_psd_with(&mut trial_rng(seed, trial), n, interval);
        let t = smooth_transform(&f, &a)?;
        let v = is_psd(&t, tol)?;
        worst = worst.min(v.min_eigenvalue / v.scale.max(1.0));
        if !v.is_psd {
            random_violations += 1;
            if first_violation.is_none() {
                first_violation = Some(Violation { trial, inputs: vec![a.clone()], matrix: t, min_eig: v.min_eigenvalue, h: None });
            }
        }
        if let Some(b) = bivariate.as_mut() {
            if alpha > n as f64 - 2.0 {
                let bm = bivariate_power_matrix(alpha, &a)?;
                let bv = is_psd(&bm, tol)?;
                b.tested += 1;
                b.non_psd += u64::from(!bv.is_psd);
                b.min_relative_eigenvalue = b.min_relative_eigenvalue.min(bv.min_eigenvalue / bv.scale.max(1.0));
            }
        }
    }
    let (x, eps) = horn_parameters(interval);
    let w = horn_witness(n, &f, x, eps, tol)?;
    let horn = HornSummary {
        x,
        eps,
        min_eigenvalue: w.verdict.min_eigenvalue,
        is_psd: w.verdict.is_psd,
        negative_diagonal: w.diagonal.iter().position(|&d| d < 0.0),
    };
    Ok(AlphaEntry {
        alpha,
        expectation: PowerExpectation::for_power(n, alpha),
        trials,
        random_violations,
        worst_relative_eigenvalue: worst,
        first_violation,
        horn,
        bivariate,
    })
}

pub fn fractional_power_study(
    n: usize,
    alphas: &[f64],
    interval: Interval,
    trials: u64,
    seed: u64,
    include_b_matrix: bool,
    tol: f64,
) -> Result<FractionalPowerReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(String::from("fractional power study needs N >= 2")));
    }
    let entries = alphas
        .iter()
        .map(|&alpha| fractional_power_entry(n, alpha, interval, trials, seed, include_b_matrix, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(FractionalPowerReport { n, interval, seed, tolerance: tol, entries })
}

/// `det f⋄(A)` for `f = x^alpha` and `A = [[a, b], [b, c]]`, expanded from
/// the entries `f(a)`, `b f'(a)` and `c f'(a) + b^2 f''(a)`.
pub fn power_det_two_by_two(alpha: f64, a: f64, b: f64, c: f64) -> f64 {
    let f1 = falling_factorial(alpha, 1) * libm::pow(a, alpha - 1.0);
    let f2 = falling_factorial(alpha, 2) * libm::pow(a, alpha - 2.0);
    libm::pow(a, alpha) * (c * f1 + b * b * f2) - b * b * f1 * f1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn cm(rows: &[&[f64]]) -> ConvMatrix<C64> {
        ConvMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect()).unwrap()
    }

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn psd_examples() {
        let v = is_psd(&cm(&[&[2.0, 1.0], &[1.0, 2.0]]), DEFAULT_PSD_TOL).unwrap();
        assert!(v.is_psd);
        assert!((v.min_eigenvalue - 1.0).abs() < 1e-12);
        let v = is_psd(&cm(&[&[1.0, 2.0], &[2.0, 1.0]]), DEFAULT_PSD_TOL).unwrap();
        assert!(!v.is_psd);
        assert!((v.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(is_psd(&cm(&[&[0.0]]), DEFAULT_PSD_TOL).unwrap().is_psd);
    }

    #[test]
    fn non_hermitian_rejected() {
        assert!(matches!(
            is_psd(&cm(&[&[1.0, 2.0], &[0.0, 1.0]]), DEFAULT_PSD_TOL),
            Err(Error::NotHermitian { .. })
        ));
        assert!(matches!(is_psd(&cm(&[&[1.0, 2.0]]), DEFAULT_PSD_TOL), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn complex_hermitian_spectrum() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let h = ConvMatrix::from_rows(vec![vec![c(2.0), C64::new(0.0, 1.0)], vec![C64::new(0.0, -1.0), c(2.0)]]).unwrap();
        let e = hermitian_eigenvalues(&h);
        assert_eq!(e.len(), 2);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // Tridiagonal (2, -1) matrix: eigenvalues 2 - 2 cos(k pi / (n + 1)).
        let n: usize = 7;
        let a = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                if i == j {
                    2.0
                } else if i.abs_diff(j) == 1 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let e = symmetric_eigenvalues(a, n);
        for (k, ev) in e.iter().enumerate() {
            let expected = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((ev - expected).abs() < 1e-12, "{k}: {ev} vs {expected}");
        }
    }

    #[test]
    fn exact_determinant_and_minors() {
        assert_eq!(exact_determinant(&ConvMatrix::from_rows(vec![vec![q(1), q(4)], vec![q(4), q(6)]]).unwrap()).unwrap(), q(-10));
        let a = ConvMatrix::from_rows(vec![vec![q(2), q(1), q(0)], vec![q(1), q(2), q(1)], vec![q(0), q(1), q(2)]]).unwrap();
        assert_eq!(exact_determinant(&a).unwrap(), q(4));
        assert!(is_psd_exact(&a).unwrap());
        // All leading minors vanish but a 1x1 principal minor is negative.
        let b = ConvMatrix::from_rows(vec![vec![q(0), q(0)], vec![q(0), q(-1)]]).unwrap();
        assert!(!is_psd_exact(&b).unwrap());
    }

    #[test]
    fn sampler_is_deterministic_psd_and_in_range() {
        let interval = Interval::new(1.0).unwrap();
        assert_eq!(sample_psd(4, interval, 11), sample_psd(4, interval, 11));
        for t in 0..1000 {
            let n = 1 + (t % 6) as usize;
            let a = sample_psd_with(&mut trial_rng(5, t), n, interval);
            assert!(a.as_slice().iter().all(|z| interval.contains(z.re) && z.im == 0.0));
            assert!(is_psd(&a, DEFAULT_PSD_TOL).unwrap().is_psd);
        }
    }

    #[test]
    fn closure_detector_sanity() {
        let a = sample_psd(3, Interval::positive_reals(), 3);
        let minus_id = ConvMatrix::<C64>::identity(3, 3).neg();
        let (_, v) = closure_check(&a, &minus_id, DEFAULT_PSD_TOL).unwrap();
        assert!(!v.is_psd);
        let id = ConvMatrix::<C64>::identity(3, 3);
        let (p, v) = closure_check(&id, &id, DEFAULT_PSD_TOL).unwrap();
        assert_eq!(p, id);
        assert!(v.is_psd);
        let report = jury_closure_test(3, 20, 9, DEFAULT_PSD_TOL).unwrap();
        assert!(report.violations.is_empty());
    }

    #[test]
    fn schoenberg_example() {
        let ce = schoenberg_h_counterexample().unwrap();
        assert_eq!(ce.transform, ConvMatrix::from_rows(vec![vec![q(1), q(4)], vec![q(4), q(6)]]).unwrap());
        assert_eq!(ce.determinant, q(-10));
        assert!(!ce.is_psd);
    }

    #[test]
    fn horn_square_root_three_by_three() {
        let w = horn_witness(3, &FunctionSpec::Power { alpha: 0.5 }, 1.0, 0.01, DEFAULT_PSD_TOL).unwrap();
        assert!(w.diagonal[2] < 0.0);
        assert!((w.leading_terms[2] + 0.1256).abs() < 1e-3, "{}", w.leading_terms[2]);
        assert!(!w.verdict.is_psd);
        let e = horn_witness(2, &FunctionSpec::Exp, 0.7, 0.01, DEFAULT_PSD_TOL).unwrap();
        assert!(e.diagonal.iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn power_expectations() {
        assert_eq!(PowerExpectation::for_power(2, -0.5), PowerExpectation::Violates);
        assert_eq!(PowerExpectation::for_power(2, 0.5), PowerExpectation::Preserves);
        assert_eq!(PowerExpectation::for_power(3, 0.5), PowerExpectation::Violates);
        assert_eq!(PowerExpectation::for_power(3, 2.0), PowerExpectation::Preserves);
        assert_eq!(PowerExpectation::for_power(3, 1.5), PowerExpectation::Open);
    }

    #[test]
    fn two_by_two_power_determinant_oracle() {
        let (a, b, cc) = (0.8, 0.3, 0.5);
        let m = cm(&[&[a, b], &[b, cc]]);
        for alpha in [-0.7, 0.5, 1.5, 3.0] {
            let t = smooth_transform(&FunctionSpec::Power { alpha }, &m).unwrap();
            let det = t[(0, 0)] * t[(1, 1)] - t[(0, 1)] * t[(1, 0)];
            let closed = alpha * libm::pow(a, 2.0 * alpha - 2.0) * (a * cc - b * b);
            assert!((det.re - closed).abs() < 1e-12);
            assert!((det.re - power_det_two_by_two(alpha, a, b, cc)).abs() < 1e-12);
        }
    }
}
