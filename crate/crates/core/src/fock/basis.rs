//! Occupation-number bases of the symmetric sectors `∨ⁿ ℂ^d`.
//!
//! Occupations of a sector are listed in reverse-lexicographic order on the
//! count vector: for `d = 2, n = 3` the order is `(3,0), (2,1), (1,2), (0,3)`.
//! Ranking and unranking are combinatorial, so no hash map is involved and the
//! order never depends on iteration order of a container.

use std::fmt;

use crate::{Error, Result};

/// Default ceiling on a single sector dimension.
pub const DEFAULT_SECTOR_CAP: usize = 1 << 23;

/// `binom(n, k)` in exact integer arithmetic.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `D(d, n) = binom(n + d - 1, d - 1)`.
pub fn sector_dim(d: usize, n: usize) -> u128 {
    if d == 0 {
        return if n == 0 { 1 } else { 0 };
    }
    binomial((n + d - 1) as u64, (d - 1) as u64)
}

/// Number of compositions of `total` into `parts` non-negative parts.
fn compositions(total: usize, parts: usize) -> usize {
    sector_dim(parts, total) as usize
}

/// Occupation numbers `α = (α_1, …, α_d)` of a basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation {
    counts: Vec<u32>,
}

impl Occupation {
    pub fn new(counts: Vec<u32>) -> Self {
        Occupation { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Ordered basis of the `n`-particle sector over `d` modes.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    d: usize,
    n: usize,
    dim: usize,
    counts: Vec<u32>,
}

impl SectorBasis {
    pub fn new(d: usize, n: usize) -> Result<Self> {
        Self::with_cap(d, n, DEFAULT_SECTOR_CAP)
    }

    pub fn with_cap(d: usize, n: usize, cap: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("mode count d must be >= 1".into()));
        }
        let dim = sector_dim(d, n);
        if dim > cap as u128 {
            return Err(Error::DimensionCap { d, n, dim, cap });
        }
        let dim = dim as usize;
        let mut counts = Vec::with_capacity(dim * d);
        let mut current = vec![0u32; d];
        fill_revlex(&mut counts, &mut current, 0, n);
        debug_assert_eq!(counts.len(), dim * d);
        Ok(SectorBasis { d, n, dim, counts })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Counts of the `i`-th basis occupation.
    pub fn occupation(&self, i: usize) -> &[u32] {
        &self.counts[i * self.d..(i + 1) * self.d]
    }

    pub fn unrank(&self, i: usize) -> Occupation {
        Occupation::new(self.occupation(i).to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.counts.chunks_exact(self.d)
    }

    /// Index of `counts` in this sector, or `None` if it does not belong here.
    pub fn rank(&self, counts: &[u32]) -> Option<usize> {
        if counts.len() != self.d {
            return None;
        }
        let total: usize = counts.iter().map(|&c| c as usize).sum();
        if total != self.n {
            return None;
        }
        Some(rank_unchecked(counts, self.n))
    }
}

/// Rank of `counts` among all compositions of `n` with the same length.
/// The caller guarantees that `counts` sums to `n`.
pub fn rank_unchecked(counts: &[u32], n: usize) -> usize {
    let d = counts.len();
    let mut rank = 0usize;
    let mut rem = n;
    for (i, &c) in counts.iter().enumerate().take(d.saturating_sub(1)) {
        let c = c as usize;
        let parts = d - i - 1;
        // occupations with a larger value at position i come first
        for v in (c + 1)..=rem {
            rank += compositions(rem - v, parts);
        }
        rem -= c;
    }
    rank
}

fn fill_revlex(out: &mut Vec<u32>, current: &mut [u32], pos: usize, rem: usize) {
    let d = current.len();
    if pos == d - 1 {
        current[pos] = rem as u32;
        out.extend_from_slice(current);
        return;
    }
    for v in (0..=rem).rev() {
        current[pos] = v as u32;
        fill_revlex(out, current, pos + 1, rem - v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_modes_three_particles() {
        let b = SectorBasis::new(2, 3).unwrap();
        assert_eq!(b.dim(), 4);
        let occ: Vec<Vec<u32>> = b.iter().map(|o| o.to_vec()).collect();
        assert_eq!(occ, vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(SectorBasis::new(1, 7).unwrap().dim(), 1);
        assert_eq!(SectorBasis::new(3, 2).unwrap().dim(), 6);
        assert_eq!(SectorBasis::new(4, 0).unwrap().dim(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let err = SectorBasis::with_cap(6, 40, 1000).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { .. }));
    }

    #[test]
    fn rank_rejects_foreign_occupations() {
        let b = SectorBasis::new(3, 4).unwrap();
        assert_eq!(b.rank(&[1, 1, 1]), None);
        assert_eq!(b.rank(&[4, 0]), None);
        assert_eq!(b.rank(&[4, 0, 0]), Some(0));
        assert_eq!(b.rank(&[0, 0, 4]), Some(b.dim() - 1));
    }

    #[test]
    fn display_occupation() {
        assert_eq!(Occupation::new(vec![2, 0, 1]).to_string(), "(2,0,1)");
    }

    proptest! {
        #[test]
        fn rank_inverts_unrank(d in 1usize..5, n in 0usize..9) {
            let b = SectorBasis::new(d, n).unwrap();
            prop_assert_eq!(b.dim() as u128, binomial((n + d - 1) as u64, (d - 1) as u64));
            for i in 0..b.dim() {
                let occ = b.unrank(i);
                prop_assert_eq!(occ.total(), n);
                prop_assert_eq!(b.rank(occ.counts()), Some(i));
            }
        }
    }
}
