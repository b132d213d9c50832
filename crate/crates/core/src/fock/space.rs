use std::sync::Arc;

use super::basis::{sector_dim, SectorBasis, DEFAULT_SECTOR_CAP};
use crate::{Error, Result};

/// Default ceiling on the total dimension of a truncated Fock space.
pub const DEFAULT_SPACE_CAP: usize = 1 << 24;

const NO_NEIGHBOUR: u32 = u32::MAX;

/// Truncated Fock space `⊕_{n ≤ n_max} ∨ⁿ ℂ^d`, flattened sector after sector.
#[derive(Debug)]
pub struct FockSpace {
    d: usize,
    n_max: usize,
    sectors: Vec<SectorBasis>,
    offsets: Vec<usize>,
    // down[n][idx * d + i]: index of α - e_i in sector n - 1
    down: Vec<Vec<u32>>,
}

impl FockSpace {
    pub fn new(d: usize, n_max: usize) -> Result<Arc<Self>> {
        Self::with_cap(d, n_max, DEFAULT_SPACE_CAP)
    }

    pub fn with_cap(d: usize, n_max: usize, cap: usize) -> Result<Arc<Self>> {
        if d == 0 {
            return Err(Error::InvalidArgument("mode count d must be >= 1".into()));
        }
        let total = Self::predicted_dim(d, n_max);
        if total > cap as u128 {
            return Err(Error::DimensionCap {
                d,
                n: n_max,
                dim: total,
                cap,
            });
        }
        let mut sectors = Vec::with_capacity(n_max + 1);
        let mut offsets = Vec::with_capacity(n_max + 2);
        let mut acc = 0usize;
        for n in 0..=n_max {
            let b = SectorBasis::with_cap(d, n, DEFAULT_SECTOR_CAP.max(cap))?;
            offsets.push(acc);
            acc += b.dim();
            sectors.push(b);
        }
        offsets.push(acc);

        let mut down = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let basis = &sectors[n];
            let mut table = vec![NO_NEIGHBOUR; basis.dim() * d];
            if n > 0 {
                let lower = &sectors[n - 1];
                let mut scratch = vec![0u32; d];
                for (idx, occ) in basis.iter().enumerate() {
                    for i in 0..d {
                        if occ[i] > 0 {
                            scratch.copy_from_slice(occ);
                            scratch[i] -= 1;
                            table[idx * d + i] = lower.rank(&scratch).expect("neighbour") as u32;
                        }
                    }
                }
            }
            down.push(table);
        }

        Ok(Arc::new(FockSpace {
            d,
            n_max,
            sectors,
            offsets,
            down,
        }))
    }

    /// Total dimension `Σ_{n ≤ n_max} D(d, n) = binom(n_max + d, d)`.
    pub fn predicted_dim(d: usize, n_max: usize) -> u128 {
        sector_dim(d + 1, n_max)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.n_max + 1]
    }

    pub fn sector(&self, n: usize) -> &SectorBasis {
        &self.sectors[n]
    }

    pub fn sector_dim(&self, n: usize) -> usize {
        self.sectors[n].dim()
    }

    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    pub fn range(&self, n: usize) -> std::ops::Range<usize> {
        self.offsets[n]..self.offsets[n + 1]
    }

    /// Global index of an occupation, if it lies inside the truncation.
    pub fn global_index(&self, counts: &[u32]) -> Option<usize> {
        let n: usize = counts.iter().map(|&c| c as usize).sum();
        if n > self.n_max {
            return None;
        }
        self.sectors[n].rank(counts).map(|r| self.offsets[n] + r)
    }

    /// Index in sector `n - 1` of `α - e_i`, where `α` is entry `idx` of sector `n`.
    #[inline]
    pub fn lower_neighbour(&self, n: usize, idx: usize, i: usize) -> Option<usize> {
        let v = self.down[n][idx * self.d + i];
        (v != NO_NEIGHBOUR).then_some(v as usize)
    }

    /// Whether two spaces have the same mode count and truncation.
    pub fn same_shape(&self, other: &FockSpace) -> bool {
        self.d == other.d && self.n_max == other.n_max
    }
}
