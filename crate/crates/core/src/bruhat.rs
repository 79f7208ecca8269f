//! Bruhat order on permutations through convolution rank matrices.
//!
//! For a permutation matrix `P` the product `P ⋄ 1` counts, at `(i, j)`, the
//! ones of `P` inside its leading `(i+1) x (j+1)` block. Then
//! `σ <= τ` in Bruhat order exactly when `rank(τ) <= rank(σ)` entrywise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use spin::{Lazy, Mutex};

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;

/// Largest `n` for which the cover-digraph oracle is built.
pub const ORACLE_MAX_N: usize = 7;

/// A permutation of `1..=n` in one-line notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(one_line: Vec<usize>) -> Result<Self> {
        let n = one_line.len();
        if n == 0 {
            return Err(Error::InvalidPermutation(String::from("empty permutation")));
        }
        let mut seen = vec![false; n];
        for &v in &one_line {
            if v == 0 || v > n || seen[v - 1] {
                return Err(Error::InvalidPermutation(format!("{one_line:?} is not a permutation of 1..={n}")));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation(one_line))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((1..=n).collect())
    }

    /// `n (n-1) ... 1`.
    pub fn longest(n: usize) -> Self {
        Permutation((1..=n).rev().collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn one_line(&self) -> &[usize] {
        &self.0
    }

    /// `ω(i)` for `1 <= i <= n`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.n()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation(inv)
    }

    /// `self ∘ other`, i.e. `i -> self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n() != other.n() {
            return Err(Error::SizeMismatch { left: self.n(), right: other.n() });
        }
        Ok(Permutation(other.0.iter().map(|&i| self.apply(i)).collect()))
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let n = self.n();
        (0..n).map(|i| (i + 1..n).filter(|&j| self.0[i] > self.0[j]).count()).sum()
    }

    /// Position in the lexicographic order of `S_n`, via the Lehmer code.
    pub fn lex_rank(&self) -> usize {
        let n = self.n();
        let mut rank = 0;
        for i in 0..n {
            let smaller = (i + 1..n).filter(|&j| self.0[j] < self.0[i]).count();
            rank = rank * (n - i) + smaller;
        }
        rank
    }

    pub fn from_lex_rank(n: usize, mut rank: usize) -> Self {
        let mut digits = vec![0; n];
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (1..=n).collect();
        Permutation(digits.into_iter().map(|d| pool.remove(d)).collect())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Whitespace- or comma-separated one-line notation, e.g. `"3 1 2"`.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?} in {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(values)
    }
}

/// 0/1 matrix with a one at `(i, ω(i+1) - 1)`.
pub fn perm_to_matrix(w: &Permutation) -> ConvMatrix<i64> {
    let n = w.n();
    ConvMatrix::from_fn(n, n, |i, j| i64::from(w.0[i] == j + 1))
}

/// Anti-diagonal permutation matrix of size `n`.
pub fn reversal_matrix(n: usize) -> ConvMatrix<i64> {
    perm_to_matrix(&Permutation::longest(n))
}

/// `A ⋄ 1` for a square integer matrix.
pub fn ones_product(a: &ConvMatrix<i64>) -> ConvMatrix<i64> {
    a.conv(&ConvMatrix::ones(a.rows(), a.cols())).expect("same shape")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankMatrix(ConvMatrix<i64>);

impl RankMatrix {
    pub fn matrix(&self) -> &ConvMatrix<i64> {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    /// Entrywise `self <= other`.
    pub fn leq_entry(&self, other: &Self) -> bool {
        entry_leq(&self.0, &other.0)
    }

    /// Last row `1..=n`, monotone rows and columns, `r(i, j) <= min(i, j) + 1`.
    pub fn satisfies_invariants(&self) -> bool {
        let n = self.n();
        let r = &self.0;
        (0..n).all(|j| r[(n - 1, j)] == j as i64 + 1)
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    r[(i, j)] <= i.min(j) as i64 + 1
                        && (i == 0 || r[(i - 1, j)] <= r[(i, j)])
                        && (j == 0 || r[(i, j - 1)] <= r[(i, j)])
                })
            })
    }
}

fn entry_leq(a: &ConvMatrix<i64>, b: &ConvMatrix<i64>) -> bool {
    a.shape() == b.shape() && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x <= y)
}

pub fn rank_matrix(w: &Permutation) -> RankMatrix {
    RankMatrix(ones_product(&perm_to_matrix(w)))
}

fn check_sizes(s: &Permutation, t: &Permutation) -> Result<()> {
    if s.n() != t.n() {
        return Err(Error::SizeMismatch { left: s.n(), right: t.n() });
    }
    Ok(())
}

/// `σ <= τ` in Bruhat order, decided by `rank(τ) <= rank(σ)` entrywise.
pub fn bruhat_leq_conv(sigma: &Permutation, tau: &Permutation) -> Result<bool> {
    check_sizes(sigma, tau)?;
    Ok(rank_matrix(tau).leq_entry(&rank_matrix(sigma)))
}

/// Reachability in the Bruhat cover digraph of `S_n`.
#[derive(Debug)]
pub struct BruhatOracle {
    n: usize,
    words: usize,
    /// Row `r` is the bitset of permutations above the one of lex rank `r`.
    above: Vec<u64>,
}

impl BruhatOracle {
    /// Builds the digraph of covers `w -> w (i j)` with `l(w (i j)) = l(w) + 1`
    /// and closes it transitively.
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 || n > ORACLE_MAX_N {
            return Err(Error::OracleTooLarge { n, max: ORACLE_MAX_N });
        }
        let count: usize = (1..=n).product();
        let words = count.div_ceil(64);
        let perms: Vec<Permutation> = (0..count).map(|r| Permutation::from_lex_rank(n, r)).collect();
        let lengths: Vec<usize> = perms.iter().map(Permutation::length).collect();
        let mut order: Vec<usize> = (0..count).collect();
        order.sort_by_key(|&r| core::cmp::Reverse(lengths[r]));
        let mut above = vec![0u64; count * words];
        for &r in &order {
            above[r * words + r / 64] |= 1 << (r % 64);
            let w = &perms[r];
            for i in 0..n {
                for j in i + 1..n {
                    if w.0[i] > w.0[j] {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.swap(i, j);
                    let up = Permutation(v);
                    if up.length() != lengths[r] + 1 {
                        continue;
                    }
                    let u = up.lex_rank();
                    for k in 0..words {
                        let bits = above[u * words + k];
                        above[r * words + k] |= bits;
                    }
                }
            }
        }
        Ok(BruhatOracle { n, words, above })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn leq(&self, sigma: &Permutation, tau: &Permutation) -> Result<bool> {
        check_sizes(sigma, tau)?;
        if sigma.n() != self.n {
            return Err(Error::SizeMismatch { left: sigma.n(), right: self.n });
        }
        let (s, t) = (sigma.lex_rank(), tau.lex_rank());
        Ok(self.above[s * self.words + t / 64] >> (t % 64) & 1 == 1)
    }
}

static ORACLES: Lazy<Mutex<BTreeMap<usize, Arc<BruhatOracle>>>> = Lazy::new(|| Mutex::new(BTreeMap::new()));

/// The oracle for `S_n`, built once per `n`.
pub fn oracle(n: usize) -> Result<Arc<BruhatOracle>> {
    if let Some(o) = ORACLES.lock().get(&n) {
        return Ok(o.clone());
    }
    let built = Arc::new(BruhatOracle::build(n)?);
    Ok(ORACLES.lock().entry(n).or_insert(built).clone())
}

/// `σ <= τ` from the cover digraph, for `n <= 7`.
pub fn bruhat_leq_oracle(sigma: &Permutation, tau: &Permutation) -> Result<bool> {
    check_sizes(sigma, tau)?;
    oracle(sigma.n())?.leq(sigma, tau)
}

/// Comparison of `σ = ω(Q)` and `τ = ω(P)` under the four equivalent forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub sigma: Permutation,
    pub tau: Permutation,
    /// Matrix-side relations:
    /// `P⋄1 <= Q⋄1`, `(∇Q)⋄1 <= (∇P)⋄1`, `(Q∇)⋄1 <= (P∇)⋄1`, `Pᵀ⋄1 <= Qᵀ⋄1`.
    pub matrix_side: [bool; 4],
    /// Permutation-side relations from the oracle:
    /// `σ <= τ`, `w0 τ <= w0 σ`, `τ w0 <= σ w0`, `σ⁻¹ <= τ⁻¹`; `None` for `n > 7`.
    pub permutation_side: Option<[bool; 4]>,
    /// Reversal identities for `A ⋄ 1`, checked on `P` and `Q`.
    pub row_reversal_identity: bool,
    pub column_reversal_identity: bool,
    /// First failure of the overlapping forms on `P`, then on `Q`.
    pub overlapping_failure: Option<(usize, usize)>,
}

impl EquivalenceReport {
    pub fn all_agree(&self) -> bool {
        let first = self.matrix_side[0];
        self.matrix_side.iter().all(|&b| b == first)
            && self.permutation_side.map_or(true, |p| p.iter().all(|&b| b == first))
            && self.row_reversal_identity
            && self.column_reversal_identity
    }
}

/// Checks `(A⋄1)_{n-1, j} = j + 1` and the row-reversal identity
/// `j + 1 = (A⋄1)_{ij} + ((∇A)⋄1)_{n-2-i, j}` (second term zero for `i = n-1`).
pub fn row_reversal_identity(a: &ConvMatrix<i64>) -> bool {
    let n = a.rows();
    let r = ones_product(a);
    let flipped = ones_product(&reversal_matrix(n).matmul(a).expect("square"));
    (0..n).all(|i| {
        (0..n).all(|j| {
            let rest = if i + 1 < n { flipped[(n - 2 - i, j)] } else { 0 };
            r[(n - 1, j)] == j as i64 + 1 && r[(i, j)] + rest == j as i64 + 1
        })
    })
}

/// `i + 1 = (A⋄1)_{ij} + ((A∇)⋄1)_{i, n-2-j}` (second term zero for `j = n-1`).
pub fn column_reversal_identity(a: &ConvMatrix<i64>) -> bool {
    let n = a.rows();
    let r = ones_product(a);
    let flipped = ones_product(&a.matmul(&reversal_matrix(n)).expect("square"));
    (0..n).all(|i| {
        (0..n).all(|j| {
            let rest = if j + 1 < n { flipped[(i, n - 2 - j)] } else { 0 };
            r[(i, j)] + rest == i as i64 + 1
        })
    })
}

/// Overlapping forms `j + 1 = (A⋄1)_{ij} + ((∇A)⋄1)_{n-1-i, j}` and
/// `i + 1 = (A⋄1)_{ij} + ((A∇)⋄1)_{i, n-1-j}`. Both blocks contain row `i`
/// (column `j`), so these fail whenever that row (column) has its one inside
/// the block; in particular at `j = n - 1` (`i = n - 1`) for every permutation.
///
/// Returns the first `(i, j)` where either form fails.
pub fn overlapping_identity_failure(a: &ConvMatrix<i64>) -> Option<(usize, usize)> {
    let n = a.rows();
    let r = ones_product(a);
    let rows = ones_product(&reversal_matrix(n).matmul(a).expect("square"));
    let cols = ones_product(&a.matmul(&reversal_matrix(n)).expect("square"));
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| {
            r[(i, j)] + rows[(n - 1 - i, j)] != j as i64 + 1 || r[(i, j)] + cols[(i, n - 1 - j)] != i as i64 + 1
        })
}

pub fn verify_equivalences(sigma: &Permutation, tau: &Permutation) -> Result<EquivalenceReport> {
    check_sizes(sigma, tau)?;
    let n = sigma.n();
    let q = perm_to_matrix(sigma);
    let p = perm_to_matrix(tau);
    let nabla = reversal_matrix(n);
    let rank = |m: &ConvMatrix<i64>| ones_product(m);
    let matrix_side = [
        entry_leq(&rank(&p), &rank(&q)),
        entry_leq(&rank(&nabla.matmul(&q)?), &rank(&nabla.matmul(&p)?)),
        entry_leq(&rank(&q.matmul(&nabla)?), &rank(&p.matmul(&nabla)?)),
        entry_leq(&rank(&p.transpose()), &rank(&q.transpose())),
    ];
    let permutation_side = if n <= ORACLE_MAX_N {
        let o = oracle(n)?;
        let w0 = Permutation::longest(n);
        Some([
            o.leq(sigma, tau)?,
            o.leq(&w0.compose(tau)?, &w0.compose(sigma)?)?,
            o.leq(&tau.compose(&w0)?, &sigma.compose(&w0)?)?,
            o.leq(&sigma.inverse(), &tau.inverse())?,
        ])
    } else {
        None
    };
    Ok(EquivalenceReport {
        sigma: sigma.clone(),
        tau: tau.clone(),
        matrix_side,
        permutation_side,
        row_reversal_identity: row_reversal_identity(&p) && row_reversal_identity(&q),
        column_reversal_identity: column_reversal_identity(&p) && column_reversal_identity(&q),
        overlapping_failure: overlapping_identity_failure(&p).or_else(|| overlapping_identity_failure(&q)),
    })
}

/// All of `S_n` in lexicographic order.
pub fn all_permutations(n: usize) -> impl Iterator<Item = Permutation> {
    let count: usize = (1..=n).product();
    (0..count).map(move |r| Permutation::from_lex_rank(n, r))
}
