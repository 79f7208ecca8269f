//! Seeded random inputs shared by tests, experiments and the command line.
//!
//! Every randomized procedure draws trial `t` of a run with seed `s` from the
//! ChaCha8 stream `t` of seed `s`, so a single trial can be replayed without
//! the ones before it.

use alloc::vec::Vec;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::ConvMatrix;
use crate::numerics::Rational;

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Entries `p / q` with `p` in `[-9, 9]` and `q` in `[1, 4]`; each entry is
/// zero with probability `zero_prob`.
pub fn random_rational_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, zero_prob: f64) -> ConvMatrix<Rational> {
    ConvMatrix::from_fn(rows, cols, |_, _| {
        if zero_prob > 0.0 && rng.gen_bool(zero_prob.min(1.0)) {
            Rational::from_integer(BigInt::from(0))
        } else {
            let p: i64 = rng.gen_range(-9..=9);
            let q: i64 = rng.gen_range(1..=4);
            Rational::new(p.into(), q.into())
        }
    })
}

/// Uniformly random permutation of `1..=n` in one-line notation.
pub fn random_one_line<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut values: Vec<usize> = (1..=n).collect();
    values.shuffle(rng);
    values
}
