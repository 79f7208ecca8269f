#![allow(dead_code)]

use juryconv_core::{ConvMatrix, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=4).prop_map(|(p, d)| Rational::new(p.into(), d.into()))
}

pub fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-9i64..=-1, 1i64..=9], 1i64..=4).prop_map(|(p, d)| Rational::new(p.into(), d.into()))
}

pub fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ConvMatrix<Rational>> {
    proptest::collection::vec(rational(), rows * cols)
        .prop_map(move |data| ConvMatrix::from_vec(rows, cols, data).unwrap())
}

pub fn invertible_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ConvMatrix<Rational>> {
    (matrix(rows, cols), nonzero_rational()).prop_map(|(m, a00)| {
        let mut m = m;
        m[(0, 0)] = a00;
        m
    })
}

/// Matrices with some zero entries, to reach degenerate minimal polynomials.
pub fn sparse_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ConvMatrix<Rational>> {
    proptest::collection::vec(prop_oneof![3 => Just(q(0)), 2 => rational()], rows * cols)
        .prop_map(move |data| ConvMatrix::from_vec(rows, cols, data).unwrap())
}

pub fn shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 2)), Just((3, 3)), Just((2, 5)), Just((5, 5))]
}

pub fn small_shape() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4)
}

/// Direct double-sum definition of the truncated convolution.
pub fn conv_oracle(a: &ConvMatrix<Rational>, b: &ConvMatrix<Rational>) -> ConvMatrix<Rational> {
    ConvMatrix::from_fn(a.rows(), a.cols(), |i, j| {
        let mut acc = q(0);
        for l in 0..=i {
            for k in 0..=j {
                acc += a[(l, k)].clone() * b[(i - l, j - k)].clone();
            }
        }
        acc
    })
}
