//! Annihilating polynomials in the convolution ring.
//!
//! Every `M x N` matrix `A` is a root of `(z - a00)^{M+N-1}`, and its minimal
//! polynomial is `(z - a00)^k` for the least `k` such that the elementary
//! partition sums `E_k(A; i, j)` vanish at every index.

use alloc::format;
use alloc::string::String;

use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;
use crate::numerics::{factorial, Scalar};
use crate::partitions::elementary_sum;
use crate::transforms::{poly_transform, Poly, PolyMode};

/// Relative vanishing tolerance on the float backend.
pub const FLOAT_VANISHING_TOL: f64 = 1e-10;

/// `M + N - 1`.
pub fn ch_degree<T: Scalar>(a: &ConvMatrix<T>) -> usize {
    a.rows() + a.cols() - 1
}

/// `(A - a00 I⋄)^{⋄k}`.
pub fn annihilator_power<T: Scalar>(a: &ConvMatrix<T>, k: usize) -> ConvMatrix<T> {
    a.shift_origin().conv_pow(k)
}

/// Absolute threshold below which a float entry counts as zero.
fn vanishing_threshold<T: Scalar>(a: &ConvMatrix<T>) -> f64 {
    FLOAT_VANISHING_TOL * a.max_abs()
}

/// `(z - a00)^{M+N-1}` applied to `A` through the polynomial calculus.
pub fn ch_residual<T: Scalar>(a: &ConvMatrix<T>) -> ConvMatrix<T> {
    let p = Poly::root_power(&a[(0, 0)], ch_degree(a));
    poly_transform(&p, a, PolyMode::SumOfPowers).expect("shapes agree")
}

/// Whether `(z - a00)^{M+N-1}` annihilates `A`.
///
/// Exact on the rational backend. On the float backend the residual is
/// compared against `1e-10 * max(1, max|a_ij|)^{M+N-1}`, the scale of the
/// largest power that enters the expansion.
pub fn ch_check<T: Scalar>(a: &ConvMatrix<T>) -> bool {
    let scale = libm::pow(a.max_abs().max(1.0), ch_degree(a) as f64);
    ch_residual(a).is_negligible(FLOAT_VANISHING_TOL * scale)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnihilatorReport<T> {
    pub root: T,
    pub ch_degree: usize,
    /// Degree `k` of the minimal polynomial `(z - a00)^k`.
    pub minimal_degree: usize,
    /// Entry of `(A - a00 I⋄)^{⋄(k-1)}` that does not vanish; `None` when `k = 1`.
    pub witness: Option<(usize, usize)>,
}

impl<T: Scalar> AnnihilatorReport<T> {
    pub fn polynomial(&self) -> Poly<T> {
        Poly::root_power(&self.root, self.minimal_degree)
    }

    /// `(z - a00)^k` with the root printed in place of `a00`.
    pub fn display_polynomial(&self) -> String {
        format!("(z - {})^{}", self.root, self.minimal_degree)
    }
}

/// Whether `E_k(A; i, j)` vanishes at every index, and otherwise the first
/// index (in anti-diagonal order) where it does not.
fn partition_sums_vanish<T: Scalar>(a: &ConvMatrix<T>, k: usize, threshold: f64) -> Result<Option<(usize, usize)>> {
    let (m, n) = a.shape();
    for d in k..(m + n - 1) {
        for i in d.saturating_sub(n - 1)..=d.min(m - 1) {
            let j = d - i;
            if !elementary_sum(a, k, (i, j))?.is_negligible(threshold) {
                return Ok(Some((i, j)));
            }
        }
    }
    Ok(None)
}

/// Least `k` with `(A - a00 I⋄)^{⋄k} = 0`, by repeated products.
pub fn nilpotency_index<T: Scalar>(a: &ConvMatrix<T>) -> usize {
    let shifted = a.shift_origin();
    let threshold = vanishing_threshold(a);
    let mut power = shifted.clone();
    let mut k = 1;
    while k < ch_degree(a) {
        // Entries of the k-th power are k! times the partition sums.
        let fact = factorial(k).to_f64().unwrap_or(f64::INFINITY);
        if power.is_negligible(threshold * fact) {
            break;
        }
        power = power.conv(&shifted).expect("shapes agree");
        k += 1;
    }
    k
}

/// Minimal polynomial from the vanishing of the partition sums, cross-checked
/// against [`nilpotency_index`].
///
/// On the float backend a partition sum counts as zero when its magnitude is
/// at most `1e-10 * max|a_ij|`.
pub fn minimal_polynomial<T: Scalar>(a: &ConvMatrix<T>) -> Result<AnnihilatorReport<T>> {
    let degree = ch_degree(a);
    let threshold = vanishing_threshold(a);
    let mut minimal = degree;
    let mut witness = None;
    let mut previous = None;
    for k in 1..degree {
        match partition_sums_vanish(a, k, threshold)? {
            None => {
                minimal = k;
                witness = previous;
                break;
            }
            found => previous = found,
        }
    }
    if minimal == degree {
        witness = previous;
    }
    let direct = nilpotency_index(a);
    if direct != minimal {
        return Err(Error::Inconsistent(format!(
            "partition criterion gives degree {minimal}, nilpotency index is {direct}"
        )));
    }
    Ok(AnnihilatorReport { root: a[(0, 0)].clone(), ch_degree: degree, minimal_degree: minimal, witness })
}
