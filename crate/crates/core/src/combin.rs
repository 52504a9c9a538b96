//! Exact combinatorial primitives.
//!
//! Vertex sets are strictly increasing vertex lists. s-sets of `[0, n)` are
//! ranked in colexicographic order: `{c_0 < c_1 < ... < c_{s-1}}` has rank
//! `sum_i C(c_i, i + 1)`. This ordering does not depend on `n`, so the rank of
//! a set is stable when the ground set grows.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// A strictly increasing list of vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<u32>);

/// An s-set (a "stop" of the auxiliary graph).
pub type SSet = VertexSet;

impl VertexSet {
    /// Builds a set from strictly increasing vertices, all `< n`.
    pub fn new(vertices: Vec<u32>, n: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::BadSet("empty vertex set".into()));
        }
        if let Some(w) = vertices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::BadSet(format!(
                "vertices not strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&v) = vertices.iter().find(|&&v| v as usize >= n) {
            return Err(Error::BadVertex { vertex: v, n });
        }
        Ok(VertexSet(vertices))
    }

    /// Sorts and deduplicates. Fails if duplicates were present.
    pub fn from_unsorted(mut vertices: Vec<u32>, n: usize) -> Result<Self> {
        vertices.sort_unstable();
        let len = vertices.len();
        vertices.dedup();
        if vertices.len() != len {
            return Err(Error::BadSet("repeated vertex".into()));
        }
        Self::new(vertices, n)
    }

    /// The empty set; only meaningful as a filler part (e.g. `r - 2s = 0` extra vertices).
    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<u32>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        VertexSet(vertices)
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `true` when every vertex of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &VertexSet) -> bool {
        let mut it = other.0.iter();
        self.0.iter().all(|v| it.any(|w| w == v))
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        disjoint_sorted(&self.0, &other.0)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut v: Vec<u32> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    /// Bitmask form; requires every vertex `< 64`.
    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &v| m | (1u64 << v))
    }

    pub fn from_mask(mask: u64) -> VertexSet {
        VertexSet((0..64u32).filter(|&v| mask >> v & 1 == 1).collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub value: f64,
    pub multiplicity: u128,
}

/// Disjointness of two strictly increasing vertex lists.
pub fn disjoint_sorted(a: &[u32], b: &[u32]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binom(n: usize, k: usize) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        let top = (n - k) as u128 + i;
        // acc * top is divisible by i; split the division to keep the product small.
        let g = gcd(acc, i);
        let top = top / (i / g);
        acc = (acc / g)
            .checked_mul(top)
            .ok_or(Error::Overflow("binomial"))?;
    }
    Ok(acc)
}

/// `C(n, k)` that must fit a `usize` (matrix dimensions, indices).
pub fn binom_usize(n: usize, k: usize) -> Result<usize> {
    usize::try_from(binom(n, k)?).map_err(|_| Error::Overflow("binomial (usize)"))
}

/// Floating-point `C(n, k)` for use inside real-valued formulas.
pub fn binom_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

pub fn factorial(n: usize) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, i| {
        acc.checked_mul(i).ok_or(Error::Overflow("factorial"))
    })
}

/// The `k`-th Catalan number `C(2k, k) / (k + 1)`.
pub fn catalan(k: usize) -> Result<u128> {
    Ok(binom(2 * k, k)? / (k as u128 + 1))
}

/// Multinomial coefficient `(sum parts)! / prod(part!)`, computed as a product
/// of binomials.
pub fn multinomial(parts: &[usize]) -> Result<u128> {
    let mut remaining: usize = parts.iter().sum();
    let mut acc: u128 = 1;
    for &p in parts {
        acc = acc
            .checked_mul(binom(remaining, p)?)
            .ok_or(Error::Overflow("multinomial"))?;
        remaining -= p;
    }
    Ok(acc)
}

/// Colexicographic rank of `set` among the `|set|`-subsets of `[0, n)`.
pub fn sset_rank(set: &VertexSet, n: usize) -> Result<u128> {
    let mut rank: u128 = 0;
    for (i, &c) in set.vertices().iter().enumerate() {
        if c as usize >= n {
            return Err(Error::BadVertex { vertex: c, n });
        }
        rank += binom(c as usize, i + 1)?;
    }
    Ok(rank)
}

/// [`sset_rank`] narrowed to `usize`, for indexing dense matrices.
pub fn sset_index(set: &VertexSet, n: usize) -> Result<usize> {
    usize::try_from(sset_rank(set, n)?).map_err(|_| Error::Overflow("s-set rank"))
}

/// Inverse of [`sset_rank`].
pub fn sset_unrank(idx: u128, n: usize, s: usize) -> Result<VertexSet> {
    if s == 0 || s > n {
        return Err(Error::BadParams(format!(
            "cannot unrank {s}-sets of [0,{n})"
        )));
    }
    let total = binom(n, s)?;
    if idx >= total {
        return Err(Error::BadRank {
            what: "s-set rank",
            value: idx,
            limit: total,
        });
    }
    let mut rest = idx;
    let mut out = vec![0u32; s];
    let mut hi = n;
    for i in (1..=s).rev() {
        // largest c < hi with C(c, i) <= rest
        let mut c = hi - 1;
        while binom(c, i)? > rest {
            c -= 1;
        }
        rest -= binom(c, i)?;
        out[i - 1] = c as u32;
        hi = c;
    }
    Ok(VertexSet(out))
}

/// All `k`-subsets of `[0, n)` in colex order (rank 0, 1, 2, ...).
pub fn colex_subsets(n: usize, k: usize) -> ColexSubsets {
    ColexSubsets {
        n,
        current: if k <= n {
            Some((0..k as u32).collect())
        } else {
            None
        },
    }
}

pub struct ColexSubsets {
    n: usize,
    current: Option<Vec<u32>>,
}

impl Iterator for ColexSubsets {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.current.take()?;
        let k = cur.len();
        let mut next = cur.clone();
        let mut j = 0;
        loop {
            if j == k {
                // exhausted (also covers k == 0)
                return Some(cur);
            }
            let limit = if j + 1 < k {
                next[j + 1]
            } else {
                self.n as u32
            };
            if next[j] + 1 < limit {
                next[j] += 1;
                for (t, slot) in next.iter_mut().enumerate().take(j) {
                    *slot = t as u32;
                }
                self.current = Some(next);
                return Some(cur);
            }
            j += 1;
        }
    }
}

/// Eigenvalue `(-1)^i C(n-s-i, s-i)` of the Kneser adjacency matrix, exactly.
pub fn kneser_eigenvalue(n: usize, s: usize, i: usize) -> Result<i128> {
    let mag = i128::try_from(binom(n - s - i, s - i)?)
        .map_err(|_| Error::Overflow("Kneser eigenvalue"))?;
    Ok(if i.is_multiple_of(2) { mag } else { -mag })
}

/// Multiplicity `C(n, i) - C(n, i-1)` shared by the Kneser and complete-hypergraph spectra.
pub fn kneser_multiplicity(n: usize, i: usize) -> Result<u128> {
    let lower = if i == 0 { 0 } else { binom(n, i - 1)? };
    Ok(binom(n, i)? - lower)
}

/// Spectrum of the 0/1 adjacency matrix of the Kneser graph `K(n, s)`, indexed by `i = 0..=s`.
pub fn kneser_spectrum(n: usize, s: usize) -> Result<Vec<EigenPair>> {
    if s == 0 || n < 2 * s {
        return Err(Error::DegenerateKneser { n, s });
    }
    (0..=s)
        .map(|i| {
            Ok(EigenPair {
                value: kneser_eigenvalue(n, s, i)? as f64,
                multiplicity: kneser_multiplicity(n, i)?,
            })
        })
        .collect()
}
