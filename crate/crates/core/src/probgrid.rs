//! Finitely supported distributions on the grid `Z>=0 x Z>=0`.
//!
//! The law of a sum of independent grid-valued random variables is the full
//! (untruncated) convolution of their probability matrices. Matrices here
//! stand for semi-infinite arrays that vanish outside the stored window.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;
use crate::numerics::{Ring, Scalar};
use crate::positivity::is_psd;
use crate::transforms::Poly;

/// Total-mass tolerance on the float backend.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

/// Largest power used by [`semiinfinite_checks`].
pub const DEFAULT_KAPPA_CAP: usize = 6;

/// Full convolution, of shape `(M1 + M2 - 1) x (N1 + N2 - 1)`.
pub fn padded_conv<T: Ring>(a: &ConvMatrix<T>, b: &ConvMatrix<T>) -> ConvMatrix<T> {
    let (m1, n1) = a.shape();
    let (m2, n2) = b.shape();
    let mut out = ConvMatrix::zeros(m1 + m2 - 1, n1 + n2 - 1);
    for i1 in 0..m1 {
        for j1 in 0..n1 {
            let x = &a[(i1, j1)];
            if x.is_zero() {
                continue;
            }
            for i2 in 0..m2 {
                for j2 in 0..n2 {
                    let cell: &mut T = &mut out[(i1 + i2, j1 + j2)];
                    *cell = cell.clone() + x.clone() * b[(i2, j2)].clone();
                }
            }
        }
    }
    out
}

/// `A^{⋄k}` without truncation; `k = 0` gives the `1 x 1` identity.
pub fn padded_pow<T: Ring>(a: &ConvMatrix<T>, k: usize) -> ConvMatrix<T> {
    (0..k).fold(ConvMatrix::identity(1, 1), |acc, _| padded_conv(&acc, a))
}

/// `p⋄(A) = sum_k c_k A^{⋄k}` without truncation.
pub fn padded_poly_transform<T: Scalar>(p: &Poly<T>, a: &ConvMatrix<T>) -> ConvMatrix<T> {
    let deg = p.degree().unwrap_or(0);
    let (m, n) = a.shape();
    let mut out: ConvMatrix<T> = ConvMatrix::zeros(deg * (m - 1) + 1, deg * (n - 1) + 1);
    let mut power = ConvMatrix::identity(1, 1);
    for (k, c) in p.coeffs().iter().enumerate() {
        if k > 0 {
            power = padded_conv(&power, a);
        }
        for i in 0..power.rows() {
            for j in 0..power.cols() {
                out[(i, j)] = out[(i, j)].clone() + c.clone() * power[(i, j)].clone();
            }
        }
    }
    out
}

/// `p_ij = Prob(X = (i, j))` on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDistribution<T> {
    probs: ConvMatrix<T>,
}

impl<T: Scalar> GridDistribution<T> {
    /// Requires real nonnegative entries of total mass one (exactly on the
    /// rational backend, within `1e-12` otherwise).
    pub fn new(probs: ConvMatrix<T>) -> Result<Self> {
        for i in 0..probs.rows() {
            for j in 0..probs.cols() {
                if !probs[(i, j)].is_nonnegative_real() {
                    return Err(Error::NotADistribution(format!(
                        "entry ({i}, {j}) = {} is not a nonnegative real",
                        probs[(i, j)]
                    )));
                }
            }
        }
        let mass = probs.as_slice().iter().fold(T::zero(), |acc, x| acc + x.clone());
        if !mass.approx_eq(&T::one(), FLOAT_MASS_TOL) {
            return Err(Error::NotADistribution(format!("total mass is {mass}")));
        }
        Ok(GridDistribution { probs })
    }

    pub fn matrix(&self) -> &ConvMatrix<T> {
        &self.probs
    }

    pub fn into_matrix(self) -> ConvMatrix<T> {
        self.probs
    }

    /// Point mass at `(i, j)`.
    pub fn point_mass(i: usize, j: usize) -> Self {
        let mut probs = ConvMatrix::zeros(i + 1, j + 1);
        probs[(i, j)] = T::one();
        GridDistribution { probs }
    }
}

/// Law of the sum of independent variables with the given laws.
pub fn sum_distribution<T: Scalar>(dists: &[GridDistribution<T>]) -> Result<GridDistribution<T>> {
    let (first, rest) = dists
        .split_first()
        .ok_or_else(|| Error::InvalidArgument(String::from("no distributions to sum")))?;
    let probs = rest.iter().fold(first.probs.clone(), |acc, d| padded_conv(&acc, &d.probs));
    Ok(GridDistribution { probs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    /// Block size.
    pub k: usize,
    pub passes: bool,
    /// `None` when the block is not Hermitian.
    pub min_eigenvalue: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub entries: Vec<ChainEntry>,
}

impl ChainReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.passes)
    }

    /// Smallest failing block size.
    pub fn first_failure(&self) -> Option<usize> {
        self.entries.iter().find(|e| !e.passes).map(|e| e.k)
    }
}

/// PSD status of the leading `k x k` blocks, `k = 1..=k_max`, of the
/// semi-infinite matrix that extends `a` by zeros.
pub fn psd_chain_check<T: Scalar>(a: &ConvMatrix<T>, k_max: usize, tol: f64) -> Result<ChainReport> {
    let entries = (1..=k_max)
        .map(|k| {
            let block = ConvMatrix::from_fn(k, k, |i, j| {
                a.get(i, j).cloned().unwrap_or_else(T::zero)
            });
            match is_psd(&block, tol) {
                Ok(v) => Ok(ChainEntry { k, passes: v.is_psd, min_eigenvalue: Some(v.min_eigenvalue) }),
                Err(Error::NotHermitian { .. }) => Ok(ChainEntry { k, passes: false, min_eigenvalue: None }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChainReport { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonAnnihilation<T> {
    pub kappa: usize,
    pub index: (usize, usize),
    /// `((A - a00 I⋄)^{⋄κ})_{κi, κj}`, untruncated.
    pub value: T,
    /// `a_ij^κ`.
    pub bound: T,
    pub holds: bool,
}

/// For entrywise nonnegative `A`, `(z - a00)^κ` never annihilates the
/// semi-infinite `A`: entry `(κi, κj)` of the padded power is at least
/// `a_ij^κ > 0` at every `(i, j) != (0, 0)` with `a_ij > 0`.
pub fn non_annihilation_check<T: Scalar>(a: &ConvMatrix<T>, kappa_cap: usize) -> Result<Vec<NonAnnihilation<T>>> {
    let mut positive = Vec::new();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = &a[(i, j)];
            if !x.is_nonnegative_real() {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) = {x} is not nonnegative")));
            }
            if (i, j) != (0, 0) && !x.is_zero() {
                positive.push((i, j));
            }
        }
    }
    if positive.is_empty() {
        return Err(Error::InvalidArgument(String::from("no positive entry away from the origin")));
    }
    let shifted = a.shift_origin();
    let mut out = Vec::new();
    let mut power = ConvMatrix::identity(1, 1);
    for kappa in 1..=kappa_cap {
        power = padded_conv(&power, &shifted);
        for &(i, j) in &positive {
            let value = power[(kappa * i, kappa * j)].clone();
            let bound = a[(i, j)].pow(kappa);
            let margin = value.clone() - bound.clone();
            let holds = margin.is_nonnegative_real() && bound.is_positive_real();
            out.push(NonAnnihilation { kappa, index: (i, j), value, bound, holds });
        }
    }
    Ok(out)
}

/// With `A = diag(0, 1)`, checks that the padded `A^{⋄n}` is the unit at
/// `(n, n)` for `n <= cap` and that `p⋄(A)` carries the coefficients of `p`
/// along its diagonal.
pub fn diagonal_shift_check<T: Scalar>(p: &Poly<T>, cap: usize) -> bool {
    let a = ConvMatrix::diagonal(&[T::zero(), T::one()]);
    let powers_ok = (0..=cap).all(|n| {
        let pw = padded_pow(&a, n);
        pw.shape() == (n + 1, n + 1)
            && (0..=n).all(|i| (0..=n).all(|j| pw[(i, j)] == if i == n && j == n { T::one() } else { T::zero() }))
    });
    let t = padded_poly_transform(p, &a);
    let deg = p.degree().unwrap_or(0);
    let coeff = |k: usize| p.coeffs().get(k).cloned().unwrap_or_else(T::zero);
    let poly_ok = t.shape() == (deg + 1, deg + 1)
        && (0..=deg).all(|i| (0..=deg).all(|j| t[(i, j)] == if i == j { coeff(i) } else { T::zero() }));
    powers_ok && poly_ok
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiInfiniteReport {
    pub kappa_cap: usize,
    /// Inputs of the non-annihilation check, as rows of rationals.
    pub non_annihilation: Vec<(ConvMatrix<crate::Rational>, bool)>,
    pub diagonal_shift: bool,
}

impl SemiInfiniteReport {
    pub fn all_hold(&self) -> bool {
        self.diagonal_shift && self.non_annihilation.iter().all(|(_, ok)| *ok)
    }
}

/// Runs both semi-infinite checks on a fixed set of inputs.
pub fn semiinfinite_checks(kappa_cap: usize) -> Result<SemiInfiniteReport> {
    use crate::numerics::Rational;
    let q = Rational::from_i64;
    let inputs = [
        ConvMatrix::from_rows(alloc::vec![alloc::vec![q(0), q(1)], alloc::vec![q(0), q(0)]])?,
        ConvMatrix::from_rows(alloc::vec![alloc::vec![q(2), q(0)], alloc::vec![q(0), q(3)]])?,
        ConvMatrix::from_rows(alloc::vec![
            alloc::vec![q(1), q(2), q(0)],
            alloc::vec![Rational::new(1.into(), 2.into()), q(0), q(1)],
            alloc::vec![q(0), q(3), Rational::new(1.into(), 3.into())],
        ])?,
    ];
    let mut non_annihilation = Vec::new();
    for a in inputs {
        let ok = non_annihilation_check(&a, kappa_cap)?.iter().all(|r| r.holds);
        non_annihilation.push((a, ok));
    }
    let p = Poly::new((1..=kappa_cap as i64 + 1).map(q).collect());
    Ok(SemiInfiniteReport { kappa_cap, non_annihilation, diagonal_shift: diagonal_shift_check(&p, kappa_cap) })
}
