//! Multiset partitions of grid indices and the partition sums built on them.
//!
//! A partition of `(i, j)` of length `l` is a multiset of `l` grid indices,
//! taken from `K = [0, M) x [0, N)` or from `K* = K \ {(0, 0)}`, whose
//! componentwise sum is `(i, j)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use spin::{Lazy, Mutex};

use crate::error::{Error, Result};
use crate::matrix::ConvMatrix;
use crate::numerics::{factorial, multiset_weight, Rational, Scalar};

/// Abort enumeration once a single call would produce more multisets than this.
pub const DEFAULT_PARTITION_LIMIT: usize = 1_000_000;

pub type Index2 = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexGrid {
    rows: usize,
    cols: usize,
}

impl IndexGrid {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyShape);
        }
        Ok(IndexGrid { rows, cols })
    }

    pub fn of<T: crate::Ring>(a: &ConvMatrix<T>) -> Self {
        IndexGrid { rows: a.rows(), cols: a.cols() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn contains(&self, (i, j): Index2) -> bool {
        i < self.rows && j < self.cols
    }

    /// Grid indices in lexicographic order, optionally without the origin.
    pub fn indices(&self, exclude_origin: bool) -> impl Iterator<Item = Index2> + '_ {
        (0..self.rows)
            .flat_map(move |p| (0..self.cols).map(move |q| (p, q)))
            .filter(move |&idx| !(exclude_origin && idx == (0, 0)))
    }
}

/// A multiset of grid indices with multiplicities, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultisetPartition {
    parts: Vec<(Index2, u32)>,
    len: usize,
    sum: Index2,
}

impl MultisetPartition {
    /// Builds a multiset from `(index, multiplicity)` pairs; repeated indices
    /// are merged and zero multiplicities dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (Index2, u32)>) -> Self {
        let mut merged: BTreeMap<Index2, u32> = BTreeMap::new();
        for (idx, c) in counts {
            if c > 0 {
                *merged.entry(idx).or_insert(0) += c;
            }
        }
        let parts: Vec<_> = merged.into_iter().collect();
        let len = parts.iter().map(|&(_, c)| c as usize).sum();
        let sum = parts.iter().fold((0, 0), |(si, sj), &((p, q), c)| {
            (si + p * c as usize, sj + q * c as usize)
        });
        MultisetPartition { parts, len, sum }
    }

    pub fn parts(&self) -> &[(Index2, u32)] {
        &self.parts
    }

    /// Number of elements counted with multiplicity.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn sum(&self) -> Index2 {
        self.sum
    }

    pub fn multiplicity(&self, idx: Index2) -> u32 {
        self.parts
            .binary_search_by(|(p, _)| p.cmp(&idx))
            .map_or(0, |pos| self.parts[pos].1)
    }

    /// `1 / prod c_S(p, q)!`.
    pub fn weight(&self) -> Rational {
        multiset_weight(self.parts.iter().map(|&(_, c)| c))
    }

    /// `prod_{(p,q) in S} a_pq`, with multiplicity.
    pub fn product<T: Scalar>(&self, a: &ConvMatrix<T>) -> T {
        self.parts
            .iter()
            .fold(T::one(), |acc, &((p, q), c)| acc * a[(p, q)].pow(c as usize))
    }
}

impl fmt::Display for MultisetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, &((p, q), c)) in self.parts.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "({p},{q})^{c}")?;
        }
        Ok(())
    }
}

struct Enumerator {
    elements: Vec<Index2>,
    max_i: usize,
    max_j: usize,
    limit: usize,
    current: Vec<(Index2, u32)>,
    out: Vec<MultisetPartition>,
}

impl Enumerator {
    fn run(&mut self, idx: usize, remaining: usize, rem_i: usize, rem_j: usize) -> Result<()> {
        if remaining == 0 {
            if rem_i == 0 && rem_j == 0 {
                if self.out.len() >= self.limit {
                    return Err(Error::PartitionLimit { limit: self.limit });
                }
                self.out.push(MultisetPartition::from_counts(self.current.iter().copied()));
            }
            return Ok(());
        }
        if idx == self.elements.len() {
            return Ok(());
        }
        let (p, q) = self.elements[idx];
        // Later elements are lexicographically larger, so their row index is >= p.
        if remaining * p > rem_i {
            return Ok(());
        }
        if rem_i > remaining * self.max_i || rem_j > remaining * self.max_j {
            return Ok(());
        }
        let mut max_c = remaining;
        if p > 0 {
            max_c = max_c.min(rem_i / p);
        }
        if q > 0 {
            max_c = max_c.min(rem_j / q);
        }
        // Higher multiplicities first gives lexicographic order of the sorted sequences.
        for c in (0..=max_c).rev() {
            if c > 0 {
                self.current.push(((p, q), c as u32));
            }
            let res = self.run(idx + 1, remaining - c, rem_i - c * p, rem_j - c * q);
            if c > 0 {
                self.current.pop();
            }
            res?;
        }
        Ok(())
    }
}

/// Every multiset of exactly `len` indices from `K` (or `K*` when
/// `exclude_origin`) summing to `target`, in lexicographic order.
pub fn enumerate_partitions(
    grid: IndexGrid,
    len: usize,
    target: Index2,
    exclude_origin: bool,
) -> Result<Vec<MultisetPartition>> {
    enumerate_partitions_with_limit(grid, len, target, exclude_origin, DEFAULT_PARTITION_LIMIT)
}

pub fn enumerate_partitions_with_limit(
    grid: IndexGrid,
    len: usize,
    target: Index2,
    exclude_origin: bool,
    limit: usize,
) -> Result<Vec<MultisetPartition>> {
    if !grid.contains(target) {
        return Err(Error::InvalidArgument(format!(
            "target {target:?} outside a {}x{} grid",
            grid.rows, grid.cols
        )));
    }
    if len == 0 {
        // The empty multiset partitions only the origin.
        return Ok(if target == (0, 0) {
            alloc::vec![MultisetPartition::from_counts([])]
        } else {
            Vec::new()
        });
    }
    if exclude_origin && len > target.0 + target.1 {
        return Ok(Vec::new());
    }
    let mut e = Enumerator {
        elements: grid.indices(exclude_origin).collect(),
        max_i: grid.rows - 1,
        max_j: grid.cols - 1,
        limit,
        current: Vec::new(),
        out: Vec::new(),
    };
    e.run(0, len, target.0, target.1)?;
    Ok(e.out)
}

type CacheKey = (IndexGrid, usize, Index2, bool);

static PARTITION_CACHE: Lazy<Mutex<BTreeMap<CacheKey, Arc<Vec<MultisetPartition>>>>> =
    Lazy::new(|| Mutex::new(BTreeMap::new()));

/// Memoized [`enumerate_partitions`]; safe to call from several threads.
pub fn cached_partitions(
    grid: IndexGrid,
    len: usize,
    target: Index2,
    exclude_origin: bool,
) -> Result<Arc<Vec<MultisetPartition>>> {
    let key = (grid, len, target, exclude_origin);
    if let Some(hit) = PARTITION_CACHE.lock().get(&key) {
        return Ok(hit.clone());
    }
    let fresh = Arc::new(enumerate_partitions(grid, len, target, exclude_origin)?);
    Ok(PARTITION_CACHE.lock().entry(key).or_insert(fresh).clone())
}

pub fn clear_partition_cache() {
    PARTITION_CACHE.lock().clear();
}

/// The elementary partition sum
/// `E_l(A; i, j) = sum_{S in P*_l(i, j)} (1 / prod c_S!) prod_{(p,q) in S} a_pq`.
///
/// This is the coefficient of `f^(l)(a00)` in entry `(i, j)` of the smooth
/// transform. It vanishes whenever `l > i + j`. For `l = 0` it is `1` at the
/// origin and `0` elsewhere.
pub fn elementary_sum<T: Scalar>(a: &ConvMatrix<T>, len: usize, target: Index2) -> Result<T> {
    let grid = IndexGrid::of(a);
    if !grid.contains(target) {
        return Err(Error::InvalidArgument(format!("target {target:?} outside the matrix")));
    }
    if len > target.0 + target.1 {
        return Ok(T::zero());
    }
    let parts = cached_partitions(grid, len, target, true)?;
    Ok(parts.iter().fold(T::zero(), |acc, s| {
        acc + T::from_rational(&s.weight()) * s.product(a)
    }))
}

/// `A^{⋄k}` from the multinomial expansion
/// `(A^{⋄k})_ij = sum_{S in P_k(i, j)} k! / prod c_S! prod a_pq`.
pub fn conv_power_partition<T: Scalar>(a: &ConvMatrix<T>, k: usize) -> Result<ConvMatrix<T>> {
    let grid = IndexGrid::of(a);
    let k_fact = T::from_bigint(&factorial(k));
    let mut out = ConvMatrix::zeros(a.rows(), a.cols());
    for (i, j) in grid.indices(false) {
        let parts = cached_partitions(grid, k, (i, j), false)?;
        out[(i, j)] = parts.iter().fold(T::zero(), |acc, s| {
            acc + k_fact.clone() * T::from_rational(&s.weight()) * s.product(a)
        });
    }
    Ok(out)
}
