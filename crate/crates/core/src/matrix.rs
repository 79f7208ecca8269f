//! The convolution ring: storage, the truncated product, identity, powers
//! and the two inverse constructions.

use alloc::format;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::numerics::{binomial, Ring, Scalar};

/// Singularity threshold for float matrices: `|a00| <= 1e-12 * max(1, max |a_ij|)`.
pub const FLOAT_SINGULAR_REL_TOL: f64 = 1e-12;

/// An `M x N` matrix indexed by `(i, j)` in `[0, M) x [0, N)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Ring> ConvMatrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape);
        }
        if data.len() != rows * cols {
            return Err(Error::DataLength { rows, cols, found: data.len() });
        }
        Ok(ConvMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::EmptyShape);
        }
        let mut data = Vec::with_capacity(m * n);
        for (row, values) in rows.into_iter().enumerate() {
            if values.len() != n {
                return Err(Error::RaggedRows { row, expected: n, found: values.len() });
            }
            data.extend(values);
        }
        Ok(ConvMatrix { rows: m, cols: n, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "empty shape");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ConvMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    /// The all-ones matrix (the identity of the entrywise product).
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::one())
    }

    /// The convolution identity: `1` at `(0, 0)`, zero elsewhere.
    pub fn identity(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| if i == 0 && j == 0 { T::one() } else { T::zero() })
    }

    pub fn diagonal(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i].clone() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        if i < self.rows && j < self.cols {
            self.data.get(i * self.cols + j)
        } else {
            None
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Ring>(&self, f: impl Fn(&T) -> U) -> ConvMatrix<U> {
        ConvMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(T::is_zero)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch { left: self.shape(), right: other.shape() });
        }
        Ok(())
    }

    /// Truncated 2-D convolution: `(A ⋄ B)_ij = sum_{l<=i, k<=j} a_lk b_{i-l, j-k}`.
    pub fn conv(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.conv_unchecked(other))
    }

    fn conv_unchecked(&self, other: &Self) -> Self {
        let (m, n) = self.shape();
        let mut out = Self::zeros(m, n);
        for l in 0..m {
            for k in 0..n {
                let a = &self[(l, k)];
                if a.is_zero() {
                    continue;
                }
                for i in l..m {
                    for j in k..n {
                        let b = &other[(i - l, j - k)];
                        if !b.is_zero() {
                            let idx = i * n + j;
                            out.data[idx] = out.data[idx].clone() + a.clone() * b.clone();
                        }
                    }
                }
            }
        }
        out
    }

    /// `A^{⋄k}` as a left fold of repeated products; `k = 0` gives the identity.
    pub fn conv_pow(&self, k: usize) -> Self {
        let mut acc = Self::identity(self.rows, self.cols);
        for _ in 0..k {
            acc = acc.conv_unchecked(self);
        }
        acc
    }

    /// `A^{⋄k}` by repeated squaring.
    pub fn conv_pow_squaring(&self, mut k: usize) -> Self {
        let mut acc = Self::identity(self.rows, self.cols);
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.conv_unchecked(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.conv_unchecked(&base);
            }
        }
        acc
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        ConvMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, alpha: &T) -> Self {
        self.map(|a| alpha.clone() * a.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// The ordinary matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch { left: self.shape(), right: other.shape() });
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)].clone() * other[(k, j)].clone())
        }))
    }

    /// `A - a00 I⋄`.
    pub fn shift_origin(&self) -> Self {
        let mut out = self.clone();
        out.data[0] = T::zero();
        out
    }

    /// Top-left `rows x cols` window.
    pub fn window(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || rows > self.rows || cols > self.cols {
            return Err(Error::InvalidArgument(format!(
                "window {rows}x{cols} of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        Ok(Self::from_fn(rows, cols, |i, j| self[(i, j)].clone()))
    }
}

impl<T: Scalar> ConvMatrix<T> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(T::magnitude).fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(T::is_finite)
    }

    /// Rejects non-finite entries; use at trust boundaries.
    pub fn validated(self) -> Result<Self> {
        if let Some(pos) = self.data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { row: pos / self.cols, col: pos % self.cols });
        }
        Ok(self)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape()
            && self.data.iter().zip(&other.data).all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Exact zero test on the rational backend; entries below `threshold` in
    /// magnitude count as zero on the float backend.
    pub fn is_negligible(&self, threshold: f64) -> bool {
        self.data.iter().all(|x| x.is_negligible(threshold))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).magnitude())
            .fold(0.0, f64::max))
    }

    pub fn to_complex(&self) -> ConvMatrix<crate::C64> {
        self.map(T::to_complex)
    }

    fn check_invertible(&self) -> Result<T> {
        let a00 = &self.data[0];
        let threshold = FLOAT_SINGULAR_REL_TOL * self.max_abs().max(1.0);
        if a00.is_negligible(threshold) {
            return Err(Error::Singular { a00: format!("{a00}") });
        }
        a00.try_inv().ok_or_else(|| Error::Singular { a00: format!("{a00}") })
    }

    /// Inverse by back-substitution along anti-diagonals:
    /// `b00 = 1/a00`, `b_ij = -(1/a00) ((A ⋄ B)_ij - a00 b_ij)`, where every
    /// `b_lk` with `l <= i, k <= j` is known before `b_ij`.
    pub fn conv_inverse_recursive(&self) -> Result<Self> {
        let inv00 = self.check_invertible()?;
        let (m, n) = self.shape();
        let mut b = Self::zeros(m, n);
        b[(0, 0)] = inv00.clone();
        for d in 1..(m + n - 1) {
            for i in d.saturating_sub(n - 1)..=d.min(m - 1) {
                let j = d - i;
                let mut acc = T::zero();
                for l in 0..=i {
                    for k in 0..=j {
                        if l == 0 && k == 0 {
                            continue;
                        }
                        acc = acc + self[(l, k)].clone() * b[(i - l, j - k)].clone();
                    }
                }
                b[(i, j)] = -(inv00.clone() * acc);
            }
        }
        Ok(b)
    }

    /// Closed-form inverse from the annihilating polynomial `(z - a00)^{M+N-1}`:
    /// `A^{⋄-1} = -sum_{j=1}^{M+N-1} C(M+N-1, j) (-1/a00)^j A^{⋄(j-1)}`.
    pub fn conv_inverse_ch(&self) -> Result<Self> {
        let inv00 = self.check_invertible()?;
        let (m, n) = self.shape();
        let degree = m + n - 1;
        let neg_inv = -inv00;
        let mut coeff_pow = T::one();
        let mut power = Self::identity(m, n);
        let mut sum = Self::zeros(m, n);
        for j in 1..=degree {
            coeff_pow = coeff_pow * neg_inv.clone();
            let c = T::from_bigint(&binomial(degree as u64, j as u64)) * coeff_pow.clone();
            sum = sum.zip_with(&power, |s, p| s.clone() + c.clone() * p.clone());
            if j < degree {
                power = power.conv_unchecked(self);
            }
        }
        Ok(sum.neg())
    }
}

impl<T> Index<(usize, usize)> for ConvMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ConvMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}
