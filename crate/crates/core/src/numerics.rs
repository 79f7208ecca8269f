//! Scalar backends and exact combinatorial coefficients.

use alloc::vec::Vec;
use core::fmt::{Debug, Display};
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use spin::{Lazy, Mutex};

/// Exact rational scalar, always kept reduced with a positive denominator.
pub type Rational = BigRational;
/// Double-precision complex scalar.
pub type C64 = Complex64;

/// Anything the convolution product can be computed over.
///
/// Only ring operations are needed, so integer matrices (rank matrices of
/// permutations) use the same code path as field-valued ones.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Rational,
    Complex,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Rational => "rational",
            Backend::Complex => "complex",
        }
    }
}

/// A field backend: exact rationals or complex doubles.
pub trait Scalar: Ring + Display + Send + Sync + 'static {
    const BACKEND: Backend;

    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn try_inv(&self) -> Option<Self>;
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn to_complex(&self) -> C64;

    /// Exact equality for rationals, `|a - b| <= tol * max(1, |a|, |b|)` for floats.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    /// Exact zero test for rationals, `|a| <= threshold` for floats.
    fn is_negligible(&self, threshold: f64) -> bool;

    /// The value as a real number, if it has no imaginary part.
    fn as_real(&self) -> Option<f64>;

    fn is_positive_real(&self) -> bool;
    fn is_nonnegative_real(&self) -> bool;

    fn from_bigint(n: &BigInt) -> Self {
        Self::from_rational(&Rational::from_integer(n.clone()))
    }

    fn div(&self, other: &Self) -> Option<Self> {
        other.try_inv().map(|inv| self.clone() * inv)
    }

    fn pow(&self, exp: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for Rational {
    const BACKEND: Backend = Backend::Rational;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn to_complex(&self) -> C64 {
        C64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_negligible(&self, _threshold: f64) -> bool {
        self.is_zero()
    }

    fn as_real(&self) -> Option<f64> {
        self.to_f64()
    }

    fn is_positive_real(&self) -> bool {
        self.is_positive()
    }

    fn is_nonnegative_real(&self) -> bool {
        !self.is_negative()
    }
}

impl Scalar for C64 {
    const BACKEND: Backend = Backend::Complex;

    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }

    fn from_rational(r: &Rational) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.inv())
        }
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    fn to_complex(&self) -> C64 {
        *self
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        approx_eq_c64(*self, *other, tol)
    }

    fn is_negligible(&self, threshold: f64) -> bool {
        self.norm() <= threshold
    }

    fn as_real(&self) -> Option<f64> {
        if self.im == 0.0 {
            Some(self.re)
        } else {
            None
        }
    }

    fn is_positive_real(&self) -> bool {
        self.im == 0.0 && self.re > 0.0
    }

    fn is_nonnegative_real(&self) -> bool {
        self.im == 0.0 && self.re >= 0.0
    }
}

/// Relative-with-floor comparison: `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq_f64(a: f64, b: f64, tol: f64) -> bool {
    let scale = 1.0f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

pub fn approx_eq_c64(a: C64, b: C64, tol: f64) -> bool {
    let scale = 1.0f64.max(a.norm()).max(b.norm());
    (a - b).norm() <= tol * scale
}

/// `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1;
    }
    acc
}

/// `alpha (alpha - 1) ... (alpha - k + 1) / k!`.
pub fn generalized_binomial(alpha: f64, k: usize) -> f64 {
    let mut acc = 1.0;
    for j in 0..k {
        acc *= (alpha - j as f64) / (j + 1) as f64;
    }
    acc
}

pub fn is_nonnegative_integer(x: f64) -> bool {
    x >= 0.0 && libm::trunc(x) == x
}

/// `alpha (alpha - 1) ... (alpha - k + 1)`, the coefficient of `x^(alpha - k)`
/// in the `k`-th derivative of `x^alpha`.
pub fn falling_factorial(alpha: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (alpha - j as f64))
}

pub const DEFAULT_FACTORIAL_CACHE_CAP: usize = 64;

struct FactorialCache {
    cap: usize,
    table: Vec<BigInt>,
}

static FACTORIALS: Lazy<Mutex<FactorialCache>> = Lazy::new(|| {
    Mutex::new(FactorialCache {
        cap: DEFAULT_FACTORIAL_CACHE_CAP,
        table: alloc::vec![BigInt::one()],
    })
});

/// Changes how many factorials are memoized. Already cached values beyond
/// the new cap are dropped.
pub fn set_factorial_cache_cap(cap: usize) {
    let mut cache = FACTORIALS.lock();
    cache.cap = cap;
    cache.table.truncate(cap.max(1));
}

pub fn factorial(n: usize) -> BigInt {
    let mut cache = FACTORIALS.lock();
    if n < cache.cap {
        while cache.table.len() <= n {
            let k = cache.table.len();
            let next = &cache.table[k - 1] * BigInt::from(k);
            cache.table.push(next);
        }
        return cache.table[n].clone();
    }
    drop(cache);
    (2..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `1 / prod c!` over the multiplicities of a multiset.
pub fn multiset_weight<I>(multiplicities: I) -> Rational
where
    I: IntoIterator<Item = u32>,
{
    let denom = multiplicities
        .into_iter()
        .fold(BigInt::one(), |acc, c| acc * factorial(c as usize));
    Rational::new(BigInt::one(), denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pascal(rows: usize) -> Vec<Vec<u128>> {
        let mut tri: Vec<Vec<u128>> = Vec::new();
        for n in 0..rows {
            let mut row = alloc::vec![1u128; n + 1];
            for k in 1..n {
                row[k] = tri[n - 1][k - 1] + tri[n - 1][k];
            }
            tri.push(row);
        }
        tri
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(3, 1), BigInt::from(3));
        assert_eq!(binomial(3, 3), BigInt::from(1));
        assert_eq!(binomial(6, 3), BigInt::from(pascal(7)[6][3]));
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(2, 5), BigInt::zero());
    }

    #[test]
    fn binomial_matches_pascal_recurrence() {
        for n in 1..=30u64 {
            for k in 1..=n {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn generalized_binomial_examples() {
        assert_eq!(generalized_binomial(2.0, 1), 2.0);
        assert!((generalized_binomial(0.5, 2) + 0.125).abs() < 1e-15);
        assert_eq!(generalized_binomial(-3.7, 0), 1.0);
        assert_eq!(generalized_binomial(1.25, 0), 1.0);
    }

    #[test]
    fn generalized_binomial_agrees_with_integer_case() {
        for n in 0..=20u64 {
            for k in 0..=25usize {
                let exact = binomial(n, k as u64).to_f64().unwrap();
                let approx = generalized_binomial(n as f64, k);
                let err = (exact - approx).abs();
                assert!(err <= 1e-12 * exact.max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn multiset_weight_examples() {
        assert_eq!(multiset_weight([1, 1]), Rational::one());
        assert_eq!(multiset_weight([2]), Rational::new(1.into(), 2.into()));
        assert_eq!(multiset_weight([3, 2]), Rational::new(1.into(), 12.into()));
    }

    #[test]
    fn factorial_beyond_cache_cap() {
        assert_eq!(factorial(0), BigInt::one());
        assert_eq!(factorial(5), BigInt::from(120));
        let big = factorial(70);
        assert_eq!(big, factorial(69) * BigInt::from(70));
    }

    #[test]
    fn complex_comparisons_are_tolerant() {
        let a = C64::new(1.0, 2.0);
        let b = C64::new(1.0 + 1e-13, 2.0);
        assert!(a.approx_eq(&b, 1e-12));
        assert!(!a.approx_eq(&C64::new(1.1, 2.0), 1e-12));
    }
}
