//! Functional calculus compatible with the convolution product.
//!
//! For a scalar function `f` the transform `f⋄(A)` has `f(a00)` at the
//! origin and
//!
//! ```text
//! f⋄(A)_ij = sum_{l=1}^{i+j} f^(l)(a00) * E_l(A; i, j)
//! ```
//!
//! elsewhere, where `E_l` is [`elementary_sum`]. For polynomials this equals
//! `sum_k c_k A^{⋄k}`. The stepped variant `f⋄(A)_h` replaces `f^(l)(a00)`
//! by the forward divided difference `(D_h^l f)(a00)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;
use crate::numerics::{binomial, is_nonnegative_integer, factorial, falling_factorial, generalized_binomial, Rational, Scalar, C64};
use crate::partitions::elementary_sum;

/// Polynomial with coefficients `c_0, ..., c_n`; trailing zeros are trimmed.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = T::one();
        Poly { coeffs }
    }

    /// `(z - root)^k`.
    pub fn root_power(root: &T, k: usize) -> Self {
        let coeffs = (0..=k)
            .map(|j| {
                T::from_bigint(&binomial(k as u64, j as u64)) * (-root.clone()).pow(k - j)
            })
            .collect();
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| T::from_i64(k as i64) * c.clone())
                .collect(),
        )
    }

    pub fn nth_derivative(&self, order: usize) -> Self {
        (0..order).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    let a = self.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                    let b = other.coeffs.get(k).cloned().unwrap_or_else(T::zero);
                    a + b
                })
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

/// A scalar function with derivatives, evaluated on one scalar backend.
pub trait ScalarFunction<T: Scalar> {
    fn name(&self) -> String;

    /// `f^(order)(x)`; `order = 0` is the value.
    fn derivative(&self, order: usize, x: &T) -> Result<T>;

    fn value(&self, x: &T) -> Result<T> {
        self.derivative(0, x)
    }

    /// Highest derivative order available, `None` for smooth functions.
    fn max_order(&self) -> Option<usize> {
        None
    }

    /// `Δ_h^l f(x)` for `l = 0..=top`, from the values at `x + k h`.
    fn forward_differences(&self, x: &T, h: &T, top: usize) -> Result<Vec<T>> {
        let values = (0..=top)
            .map(|k| self.value(&(x.clone() + T::from_i64(k as i64) * h.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..=top).map(|l| difference_from_values(&values, l)).collect())
    }
}

impl<T: Scalar> ScalarFunction<T> for Poly<T> {
    fn name(&self) -> String {
        String::from("poly")
    }

    fn derivative(&self, order: usize, x: &T) -> Result<T> {
        Ok(self.nth_derivative(order).eval(x))
    }
}

/// Caps the derivative order of another function, e.g. for a function known
/// to be only `k` times differentiable.
#[derive(Debug, Clone)]
pub struct DeclaredOrder<F> {
    pub function: F,
    pub order: usize,
}

impl<T: Scalar, F: ScalarFunction<T>> ScalarFunction<T> for DeclaredOrder<F> {
    fn name(&self) -> String {
        self.function.name()
    }

    fn derivative(&self, order: usize, x: &T) -> Result<T> {
        if order > self.order {
            return Err(Error::DerivativeOrder {
                function: self.name(),
                required: order,
                available: self.order,
            });
        }
        self.function.derivative(order, x)
    }

    fn max_order(&self) -> Option<usize> {
        Some(self.order)
    }
}

/// The built-in function catalog.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    Polynomial(Poly<Rational>),
    /// `x^alpha` on `x > 0`.
    Power { alpha: f64 },
    Exp,
    /// `sum_k c_k x^k` on `|x| < radius`.
    Series { coeffs: Vec<Rational>, radius: f64 },
}

impl FunctionSpec {
    fn domain_error(&self, point: impl core::fmt::Display) -> Error {
        Error::Domain { function: self.label(), point: format!("{point}") }
    }

    pub fn label(&self) -> String {
        match self {
            FunctionSpec::Polynomial(p) => format!("poly(degree {:?})", p.degree()),
            FunctionSpec::Power { alpha } => format!("x^{alpha}"),
            FunctionSpec::Exp => String::from("exp"),
            FunctionSpec::Series { radius, .. } => format!("series(radius {radius})"),
        }
    }

    /// True when every Maclaurin coefficient is nonnegative.
    pub fn is_absolutely_monotone(&self) -> bool {
        match self {
            FunctionSpec::Exp => true,
            FunctionSpec::Polynomial(p) => p.coeffs().iter().all(|c| !c.is_negative()),
            FunctionSpec::Series { coeffs, .. } => coeffs.iter().all(|c| !c.is_negative()),
            FunctionSpec::Power { alpha } => is_nonnegative_integer(*alpha),
        }
    }

    /// Domain membership of a real point.
    pub fn contains(&self, x: f64) -> bool {
        match self {
            FunctionSpec::Polynomial(_) | FunctionSpec::Exp => x.is_finite(),
            FunctionSpec::Power { .. } => x > 0.0 && x.is_finite(),
            FunctionSpec::Series { radius, .. } => x.abs() < *radius,
        }
    }
}

fn series_poly(coeffs: &[Rational]) -> Poly<Rational> {
    Poly::new(coeffs.to_vec())
}

impl ScalarFunction<C64> for FunctionSpec {
    fn name(&self) -> String {
        self.label()
    }

    fn derivative(&self, order: usize, x: &C64) -> Result<C64> {
        match self {
            FunctionSpec::Polynomial(p) => {
                Ok(p.nth_derivative(order).map(C64::from_rational).eval(x))
            }
            FunctionSpec::Power { alpha } => {
                let xr = x.as_real().filter(|&r| r > 0.0).ok_or_else(|| self.domain_error(x))?;
                let v = falling_factorial(*alpha, order) * libm::pow(xr, *alpha - order as f64);
                Ok(C64::new(v, 0.0))
            }
            FunctionSpec::Exp => {
                if !x.is_finite() {
                    return Err(self.domain_error(x));
                }
                let r = libm::exp(x.re);
                Ok(if x.im == 0.0 {
                    C64::new(r, 0.0)
                } else {
                    C64::new(r * libm::cos(x.im), r * libm::sin(x.im))
                })
            }
            FunctionSpec::Series { coeffs, radius } => {
                if !(x.norm() < *radius) {
                    return Err(self.domain_error(x));
                }
                Ok(series_poly(coeffs).nth_derivative(order).map(C64::from_rational).eval(x))
            }
        }
    }

    fn forward_differences(&self, x: &C64, h: &C64, top: usize) -> Result<Vec<C64>> {
        match self {
            // Δ_h^l exp(x) = exp(x) (e^h - 1)^l
            FunctionSpec::Exp if h.im == 0.0 && x.is_finite() && h.is_finite() => {
                let base = self.value(x)?;
                let ratio = libm::expm1(h.re);
                Ok((0..=top).map(|l| base * libm::pow(ratio, l as f64)).collect())
            }
            _ => {
                let values = (0..=top)
                    .map(|k| self.value(&(*x + C64::new(k as f64, 0.0) * h)))
                    .collect::<Result<Vec<_>>>()?;
                Ok((0..=top).map(|l| difference_from_values(&values, l)).collect())
            }
        }
    }
}

impl ScalarFunction<Rational> for FunctionSpec {
    fn name(&self) -> String {
        self.label()
    }

    fn derivative(&self, order: usize, x: &Rational) -> Result<Rational> {
        match self {
            FunctionSpec::Polynomial(p) => Ok(p.nth_derivative(order).eval(x)),
            FunctionSpec::Power { alpha } if is_nonnegative_integer(*alpha) => {
                if !x.is_positive() {
                    return Err(self.domain_error(x));
                }
                let k = *alpha as usize;
                Ok(Poly::<Rational>::monomial(k).nth_derivative(order).eval(x))
            }
            FunctionSpec::Series { coeffs, radius } => {
                let xr = x.to_f64().unwrap_or(f64::INFINITY);
                if !(xr.abs() < *radius) {
                    return Err(self.domain_error(x));
                }
                Ok(series_poly(coeffs).nth_derivative(order).eval(x))
            }
            _ => Err(Error::NotExact { function: self.label(), backend: "rational" }),
        }
    }
}

fn check_step<T: Scalar>(h: &T) -> Result<()> {
    if !h.is_positive_real() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {h}")));
    }
    Ok(())
}

/// `(Δ_h^l f)(x) = sum_{j=0}^{l} C(l, j) (-1)^{l-j} f(x + j h)`.
pub fn forward_difference<T, F>(f: &F, x: &T, h: &T, order: usize) -> Result<T>
where
    T: Scalar,
    F: ScalarFunction<T> + ?Sized,
{
    check_step(h)?;
    let values = (0..=order)
        .map(|j| f.value(&(x.clone() + T::from_i64(j as i64) * h.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(difference_from_values(&values, order))
}

/// `(D_h^l f)(x) = (Δ_h^l f)(x) / h^l`.
pub fn divided_difference<T, F>(f: &F, x: &T, h: &T, order: usize) -> Result<T>
where
    T: Scalar,
    F: ScalarFunction<T> + ?Sized,
{
    let delta = forward_difference(f, x, h, order)?;
    let scale = h.pow(order).try_inv().ok_or_else(|| Error::InvalidArgument(String::from("step underflow")))?;
    Ok(delta * scale)
}

/// `Δ^order` from samples `f(x), f(x+h), ...` (needs at least `order + 1` values).
fn difference_from_values<T: Scalar>(values: &[T], order: usize) -> T {
    (0..=order).fold(T::zero(), |acc, j| {
        let c = T::from_bigint(&binomial(order as u64, j as u64)) * values[j].clone();
        if (order - j) % 2 == 0 {
            acc + c
        } else {
            acc - c
        }
    })
}

/// Assembles `f⋄(A)` from `derivs[l] = f^(l)(a00)` (or any replacement such as
/// divided differences), `l = 0..=M+N-2`.
pub fn transform_from_derivatives<T: Scalar>(a: &ConvMatrix<T>, derivs: &[T]) -> Result<ConvMatrix<T>> {
    let (m, n) = a.shape();
    let needed = m + n - 1;
    if derivs.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "{} derivative values supplied, {needed} needed",
            derivs.len()
        )));
    }
    let mut out = ConvMatrix::zeros(m, n);
    out[(0, 0)] = derivs[0].clone();
    for i in 0..m {
        for j in 0..n {
            if i + j == 0 {
                continue;
            }
            let mut acc = T::zero();
            for (l, d) in derivs.iter().enumerate().take(i + j + 1).skip(1) {
                if d.is_zero() {
                    continue;
                }
                acc = acc + d.clone() * elementary_sum(a, l, (i, j))?;
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyMode {
    /// `sum_k c_k A^{⋄k}` with repeated products.
    SumOfPowers,
    /// Derivatives of `p` at `a00` weighted by elementary partition sums.
    PartitionFormula,
}

pub fn poly_transform<T: Scalar>(p: &Poly<T>, a: &ConvMatrix<T>, mode: PolyMode) -> Result<ConvMatrix<T>> {
    let (m, n) = a.shape();
    match mode {
        PolyMode::SumOfPowers => {
            let mut power = ConvMatrix::identity(m, n);
            let mut acc = ConvMatrix::zeros(m, n);
            for (k, c) in p.coeffs().iter().enumerate() {
                if k > 0 {
                    power = power.conv(a)?;
                }
                if !c.is_zero() {
                    acc = acc.add(&power.scale(c))?;
                }
            }
            Ok(acc)
        }
        PolyMode::PartitionFormula => {
            let a00 = &a[(0, 0)];
            let derivs: Vec<T> = (0..m + n - 1).map(|l| p.nth_derivative(l).eval(a00)).collect();
            transform_from_derivatives(a, &derivs)
        }
    }
}

/// `f⋄(A)`: needs `f^(l)(a00)` for `l <= M + N - 2`.
pub fn smooth_transform<T, F>(f: &F, a: &ConvMatrix<T>) -> Result<ConvMatrix<T>>
where
    T: Scalar,
    F: ScalarFunction<T> + ?Sized,
{
    let (m, n) = a.shape();
    let top = m + n - 2;
    if let Some(available) = f.max_order() {
        if available < top {
            return Err(Error::DerivativeOrder { function: f.name(), required: top, available });
        }
    }
    let a00 = &a[(0, 0)];
    let derivs = (0..=top).map(|l| f.derivative(l, a00)).collect::<Result<Vec<_>>>()?;
    transform_from_derivatives(a, &derivs)
}

/// `f⋄(A)_h`: every node `a00 + k h`, `k in [0, M + N - 2]`, must lie in the
/// domain of `f`.
pub fn stepped_transform<T, F>(f: &F, a: &ConvMatrix<T>, h: &T) -> Result<ConvMatrix<T>>
where
    T: Scalar,
    F: ScalarFunction<T> + ?Sized,
{
    check_step(h)?;
    let (m, n) = a.shape();
    let top = m + n - 2;
    let diffs = f.forward_differences(&a[(0, 0)], h, top)?;
    let mut derivs = Vec::with_capacity(top + 1);
    let mut h_pow = T::one();
    for d in diffs {
        let inv = h_pow
            .try_inv()
            .ok_or_else(|| Error::InvalidArgument(String::from("step underflow")))?;
        derivs.push(d * inv);
        h_pow = h_pow * h.clone();
    }
    transform_from_derivatives(a, &derivs)
}

pub const DEFAULT_SERIES_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_SERIES_BUDGET: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SeriesTruncation {
    /// Sum the terms `k = 0..=n`.
    Terms(usize),
    /// Stop once two consecutive terms fall below `rel_tol` times the running
    /// partial sum (max-entry norm), giving up after `max_terms`.
    Tolerance { rel_tol: f64, max_terms: usize },
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation::Tolerance { rel_tol: DEFAULT_SERIES_TOLERANCE, max_terms: DEFAULT_SERIES_BUDGET }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSum<T> {
    pub matrix: ConvMatrix<T>,
    /// Number of terms summed.
    pub terms: usize,
    /// Max-entry norm of the last term added.
    pub tail_bound: f64,
}

/// Partial sums `sum_{k <= n} c_k A^{⋄k}` of a coefficient stream.
pub fn series_transform<T, I>(coeffs: I, a: &ConvMatrix<T>, truncation: SeriesTruncation) -> Result<SeriesSum<T>>
where
    T: Scalar,
    I: IntoIterator<Item = T>,
{
    let (m, n) = a.shape();
    let (limit, tol) = match truncation {
        SeriesTruncation::Terms(n) => (n + 1, None),
        SeriesTruncation::Tolerance { rel_tol, max_terms } => (max_terms, Some(rel_tol)),
    };
    let mut power = ConvMatrix::identity(m, n);
    let mut sum = ConvMatrix::zeros(m, n);
    let mut small_run = 0;
    let mut tail = 0.0;
    let mut terms = 0;
    let mut coeffs = coeffs.into_iter();
    while terms < limit {
        let Some(c) = coeffs.next() else {
            // A finite stream is summed exactly.
            return Ok(SeriesSum { matrix: sum, terms, tail_bound: 0.0 });
        };
        if terms > 0 {
            power = power.conv(a)?;
        }
        let term = power.scale(&c);
        sum = sum.add(&term)?;
        terms += 1;
        tail = term.max_abs();
        if !sum.all_finite() || !tail.is_finite() {
            return Err(Error::Divergence { terms });
        }
        if let Some(rel_tol) = tol {
            if tail <= rel_tol * sum.max_abs() {
                small_run += 1;
                if small_run >= 2 {
                    return Ok(SeriesSum { matrix: sum, terms, tail_bound: tail });
                }
            } else {
                small_run = 0;
            }
        }
    }
    if tol.is_some() {
        return Err(Error::Divergence { terms });
    }
    Ok(SeriesSum { matrix: sum, terms, tail_bound: tail })
}

/// Maclaurin coefficients `1/k!` of `exp`.
pub fn exp_coefficients() -> impl Iterator<Item = C64> {
    let mut c = 1.0;
    (0usize..).map(move |k| {
        if k > 0 {
            c /= k as f64;
        }
        C64::new(c, 0.0)
    })
}

/// `B(alpha, A)_ij = d^{i+j}/dx^i dy^j (a00 + sum_{(m,n) != 0} a_mn x^m y^n)^alpha` at the origin.
///
/// Computed from the truncated binomial series
/// `a00^alpha sum_k binom(alpha, k) (G / a00)^k`, with `G` the part of the
/// generating polynomial without constant term and every product truncated
/// to bidegree `(N-1, N-1)`.
pub fn bivariate_power_matrix(alpha: f64, a: &ConvMatrix<C64>) -> Result<ConvMatrix<C64>> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = a[(i, j)].as_real().ok_or_else(|| {
                Error::InvalidArgument(format!("entry ({i}, {j}) is not real"))
            })?;
        }
    }
    let a00 = entries[0];
    if !(a00 > 0.0) {
        return Err(Error::Domain { function: format!("x^{alpha}"), point: format!("{a00}") });
    }
    let mut g: Vec<f64> = entries.iter().map(|x| x / a00).collect();
    g[0] = 0.0;

    let truncated_mul = |lhs: &[f64], rhs: &[f64]| {
        let mut out = vec![0.0; n * n];
        for i1 in 0..n {
            for j1 in 0..n {
                let l = lhs[i1 * n + j1];
                if l == 0.0 {
                    continue;
                }
                for i2 in 0..n - i1 {
                    for j2 in 0..n - j1 {
                        out[(i1 + i2) * n + j1 + j2] += l * rhs[i2 * n + j2];
                    }
                }
            }
        }
        out
    };

    let mut power = vec![0.0; n * n];
    power[0] = 1.0;
    let mut sum = power.clone();
    for k in 1..=2 * (n - 1) {
        power = truncated_mul(&power, &g);
        let c = generalized_binomial(alpha, k);
        for (s, p) in sum.iter_mut().zip(&power) {
            *s += c * p;
        }
    }
    let lead = libm::pow(a00, alpha);
    let fact: Vec<f64> = (0..n).map(|k| factorial(k).to_f64().unwrap_or(f64::INFINITY)).collect();
    Ok(ConvMatrix::from_fn(n, n, |i, j| C64::new(lead * sum[i * n + j] * fact[i] * fact[j], 0.0)))
}

/// `D X D` with `D = diag(0!, 1!, ..., (n-1)!)` on both sides.
pub fn factorial_scaled<T: Scalar>(x: &ConvMatrix<T>) -> ConvMatrix<T> {
    ConvMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        T::from_bigint(&(factorial(i) * factorial(j))) * x[(i, j)].clone()
    })
}

/// Convenience constructor for the identity map `x`.
pub fn identity_function() -> FunctionSpec {
    FunctionSpec::Polynomial(Poly::new(vec![Rational::zero(), Rational::one()]))
}
