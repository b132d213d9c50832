//! Sector-blocked operators and the ε-scaled ladder, number and `dΓ` operators.

use std::sync::Arc;

use super::space::FockSpace;
use crate::linalg::check_hermitian;
use crate::{CMatrix, Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Operator mapping sector `n` to sector `n + shift` for every admissible `n`.
///
/// `blocks[n]` is indexed by the source sector and has shape
/// `D(d, n + shift) × D(d, n)`. Missing blocks are zero.
#[derive(Clone, Debug)]
pub struct BlockOperator {
    space: Arc<FockSpace>,
    eps: f64,
    shift: isize,
    blocks: Vec<Option<CMatrix>>,
}

impl BlockOperator {
    pub fn zeros(space: &Arc<FockSpace>, eps: f64, shift: isize) -> Self {
        BlockOperator {
            space: space.clone(),
            eps,
            shift,
            blocks: vec![None; space.n_max() + 1],
        }
    }

    pub fn identity(space: &Arc<FockSpace>, eps: f64) -> Self {
        let mut op = Self::zeros(space, eps, 0);
        for n in 0..=space.n_max() {
            let dim = space.sector_dim(n);
            op.blocks[n] = Some(CMatrix::identity(dim, dim));
        }
        op
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn shift(&self) -> isize {
        self.shift
    }

    /// Target sector of source `n`, if it lies inside the truncation.
    pub fn target(&self, n: usize) -> Option<usize> {
        let m = n as isize + self.shift;
        (m >= 0 && m as usize <= self.space.n_max()).then_some(m as usize)
    }

    pub fn block(&self, n: usize) -> Option<&CMatrix> {
        self.blocks.get(n).and_then(|b| b.as_ref())
    }

    /// Block from source `n`, materialized as zeros when absent.
    pub fn block_or_zero(&self, n: usize) -> Option<CMatrix> {
        let m = self.target(n)?;
        Some(
            self.block(n)
                .cloned()
                .unwrap_or_else(|| CMatrix::zeros(self.space.sector_dim(m), self.space.sector_dim(n))),
        )
    }

    pub fn set_block(&mut self, n: usize, block: CMatrix) -> Result<()> {
        let m = self
            .target(n)
            .ok_or_else(|| Error::Shape(format!("source sector {n} has no target for shift {}", self.shift)))?;
        let expect = (self.space.sector_dim(m), self.space.sector_dim(n));
        if block.shape() != expect {
            return Err(Error::Shape(format!(
                "block from sector {n} has shape {:?}, expected {:?}",
                block.shape(),
                expect
            )));
        }
        self.blocks[n] = Some(block);
        Ok(())
    }

    /// Source sectors with a stored block.
    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.blocks.len()).filter(|&n| self.blocks[n].is_some())
    }

    fn check_compatible(&self, other: &BlockOperator) -> Result<()> {
        if !self.space.same_shape(&other.space) {
            return Err(Error::Shape("operators live on different truncated spaces".into()));
        }
        Ok(())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.check_compatible(other)?;
        let mut out = BlockOperator::zeros(&self.space, self.eps, self.shift + other.shift);
        for n in other.sources() {
            let Some(mid) = other.target(n) else { continue };
            let (Some(left), Some(right)) = (self.block(mid), other.block(n)) else {
                continue;
            };
            if self.target(mid).is_none() {
                continue;
            }
            out.blocks[n] = Some(left * right);
        }
        Ok(out)
    }

    /// `α self + β other`, for equal shifts.
    pub fn combine(&self, alpha: C64, other: &BlockOperator, beta: C64) -> Result<BlockOperator> {
        self.check_compatible(other)?;
        if self.shift != other.shift {
            return Err(Error::Shape(format!(
                "cannot add shift {} and shift {}",
                self.shift, other.shift
            )));
        }
        let mut out = BlockOperator::zeros(&self.space, self.eps, self.shift);
        for n in 0..self.blocks.len() {
            out.blocks[n] = match (self.block(n), other.block(n)) {
                (Some(a), Some(b)) => Some(a * alpha + b * beta),
                (Some(a), None) => Some(a * alpha),
                (None, Some(b)) => Some(b * beta),
                (None, None) => None,
            };
        }
        Ok(out)
    }

    pub fn add(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.combine(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> BlockOperator {
        let mut out = self.clone();
        for b in out.blocks.iter_mut().flatten() {
            *b *= c;
        }
        out
    }

    /// `[self, other] = self∘other − other∘self`.
    pub fn commutator(&self, other: &BlockOperator) -> Result<BlockOperator> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    pub fn adjoint(&self) -> BlockOperator {
        let mut out = BlockOperator::zeros(&self.space, self.eps, -self.shift);
        for n in self.sources() {
            let m = self.target(n).expect("stored block has a target");
            out.blocks[m] = Some(self.blocks[n].as_ref().unwrap().adjoint());
        }
        out
    }

    /// Apply to a flattened state vector.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.space.dim(), "vector does not match the space");
        let mut out = vec![ZERO; v.len()];
        for n in self.sources() {
            let m = self.target(n).unwrap();
            let block = self.blocks[n].as_ref().unwrap();
            let src = &v[self.space.range(n)];
            let dst = &mut out[self.space.range(m)];
            for (j, &x) in src.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                for (i, o) in dst.iter_mut().enumerate() {
                    *o += block[(i, j)] * x;
                }
            }
        }
        out
    }

    /// Full-space dense matrix. Only sensible for small truncations.
    pub fn to_dense(&self) -> CMatrix {
        let dim = self.space.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for n in self.sources() {
            let m = self.target(n).unwrap();
            let block = self.blocks[n].as_ref().unwrap();
            let (r0, c0) = (self.space.offset(m), self.space.offset(n));
            out.view_mut((r0, c0), block.shape()).copy_from(block);
        }
        out
    }

    /// Largest entry of `self − other` over the source sectors accepted by `keep`.
    pub fn max_diff_where(&self, other: &BlockOperator, keep: impl Fn(usize) -> bool) -> Result<f64> {
        self.check_compatible(other)?;
        if self.shift != other.shift {
            return Err(Error::Shape("shift mismatch".into()));
        }
        let mut worst = 0.0f64;
        for n in 0..self.blocks.len() {
            if !keep(n) || self.target(n).is_none() {
                continue;
            }
            let a = self.block_or_zero(n).unwrap();
            let b = other.block_or_zero(n).unwrap();
            worst = worst.max(crate::linalg::max_abs_diff(&a, &b));
        }
        Ok(worst)
    }

    /// Largest entry of `self − other` over every sector.
    pub fn max_diff(&self, other: &BlockOperator) -> Result<f64> {
        self.max_diff_where(other, |_| true)
    }
}

/// Which ladder operator to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
}

/// `a_i` with `a_i|α⟩ = √(ε α_i)|α − e_i⟩`.
pub fn mode_annihilator(i: usize, eps: f64, space: &Arc<FockSpace>) -> BlockOperator {
    let mut z = vec![ZERO; space.d()];
    z[i] = C64::new(1.0, 0.0);
    ladder(&z, LadderKind::Annihilate, eps, space)
}

/// `a(z) = Σ_i conj(z_i) a_i` or `a^*(z) = Σ_i z_i a_i^*`.
pub fn ladder(z: &[C64], kind: LadderKind, eps: f64, space: &Arc<FockSpace>) -> BlockOperator {
    assert_eq!(z.len(), space.d());
    let d = space.d();
    let mut ann = BlockOperator::zeros(space, eps, -1);
    for n in 1..=space.n_max() {
        let basis = space.sector(n);
        let mut block = CMatrix::zeros(space.sector_dim(n - 1), basis.dim());
        for (col, occ) in basis.iter().enumerate() {
            for i in 0..d {
                if let Some(row) = space.lower_neighbour(n, col, i) {
                    block[(row, col)] += z[i].conj() * (eps * occ[i] as f64).sqrt();
                }
            }
        }
        ann.blocks[n] = Some(block);
    }
    match kind {
        LadderKind::Annihilate => ann,
        LadderKind::Create => ann.adjoint(),
    }
}

/// `N = dΓ(Id)`, diagonal with `εn` on sector `n`.
pub fn number_operator(eps: f64, space: &Arc<FockSpace>) -> BlockOperator {
    let mut op = BlockOperator::zeros(space, eps, 0);
    for n in 0..=space.n_max() {
        let dim = space.sector_dim(n);
        op.blocks[n] = Some(CMatrix::identity(dim, dim) * C64::new(eps * n as f64, 0.0));
    }
    op
}

/// `dΓ(A) = ε Σ_k Id ⊗ … ⊗ A ⊗ … ⊗ Id` for a Hermitian `d × d` matrix.
pub fn dgamma(a: &CMatrix, eps: f64, space: &Arc<FockSpace>) -> Result<BlockOperator> {
    let d = space.d();
    if a.shape() != (d, d) {
        return Err(Error::Shape(format!("one-particle matrix must be {d}×{d}")));
    }
    check_hermitian(a, "one-particle matrix A", 1e-12)?;
    Ok(dgamma_unchecked(a, eps, space))
}

/// `dΓ(B)` for any `d × d` matrix `B`, Hermitian or not.
pub fn dgamma_unchecked(a: &CMatrix, eps: f64, space: &Arc<FockSpace>) -> BlockOperator {
    let d = space.d();
    let mut op = BlockOperator::zeros(space, eps, 0);
    let mut scratch = vec![0u32; d];
    for n in 0..=space.n_max() {
        let basis = space.sector(n);
        let mut block = CMatrix::zeros(basis.dim(), basis.dim());
        for (col, occ) in basis.iter().enumerate() {
            for j in 0..d {
                if occ[j] == 0 {
                    continue;
                }
                for i in 0..d {
                    let aij = a[(i, j)];
                    if aij == ZERO {
                        continue;
                    }
                    // β = α − e_j + e_i
                    scratch.copy_from_slice(occ);
                    scratch[j] -= 1;
                    scratch[i] += 1;
                    let row = basis.rank(&scratch).expect("same sector");
                    let amp = (occ[j] as f64).sqrt() * (scratch[i] as f64).sqrt();
                    block[(row, col)] += aij * eps * amp;
                }
            }
        }
        op.blocks[n] = Some(block);
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, max_abs_diff};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn annihilator_on_two_particles() {
        let space = FockSpace::new(2, 3).unwrap();
        let a1 = mode_annihilator(0, 0.5, &space);
        let mut v = vec![ZERO; space.dim()];
        v[space.global_index(&[2, 0]).unwrap()] = c(1.0);
        let out = a1.apply(&v);
        let idx = space.global_index(&[1, 0]).unwrap();
        assert!((out[idx] - c(1.0)).norm() < 1e-15);
        assert!((linalg::norm(&out) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vacuum_is_annihilated() {
        let space = FockSpace::new(3, 2).unwrap();
        let z = vec![C64::new(0.3, 0.1), C64::new(-1.0, 0.2), C64::new(0.0, 0.7)];
        let a = ladder(&z, LadderKind::Annihilate, 0.25, &space);
        let mut v = vec![ZERO; space.dim()];
        v[0] = c(1.0);
        assert!(a.apply(&v).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn ccr_on_inner_sectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let space = FockSpace::new(3, 5).unwrap();
        let eps = 0.3;
        let z1 = linalg::random_vector(3, &mut rng);
        let z2 = linalg::random_vector(3, &mut rng);
        let a = ladder(&z1, LadderKind::Annihilate, eps, &space);
        let ad = ladder(&z2, LadderKind::Create, eps, &space);
        let comm = a.commutator(&ad).unwrap();
        let expect = BlockOperator::identity(&space, eps).scale(linalg::inner(&z1, &z2) * eps);
        let err = comm.max_diff_where(&expect, |n| n < space.n_max()).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn dgamma_identity_is_number() {
        let space = FockSpace::new(3, 4).unwrap();
        let id = CMatrix::identity(3, 3);
        let g = dgamma(&id, 0.2, &space).unwrap();
        assert!(g.max_diff(&number_operator(0.2, &space)).unwrap() < 1e-15);
    }

    #[test]
    fn dgamma_matches_ladder_sum() {
        // dΓ(A) = Σ_ij A_ij a_i^* a_j with ε-scaled ladders
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let space = FockSpace::new(3, 4).unwrap();
        let eps = 0.4;
        let a = linalg::random_hermitian(3, &mut rng);
        let mut sum = BlockOperator::zeros(&space, eps, 0);
        for i in 0..3 {
            for j in 0..3 {
                let ai = mode_annihilator(i, eps, &space).adjoint();
                let aj = mode_annihilator(j, eps, &space);
                let term = ai.compose(&aj).unwrap().scale(a[(i, j)]);
                sum = sum.add(&term).unwrap();
            }
        }
        let g = dgamma(&a, eps, &space).unwrap();
        assert!(g.max_diff(&sum).unwrap() < 1e-13);
    }

    #[test]
    fn dgamma_rejects_non_hermitian() {
        let space = FockSpace::new(2, 2).unwrap();
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(1.0);
        assert!(matches!(dgamma(&a, 0.1, &space), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn adjoint_matches_dense() {
        let space = FockSpace::new(2, 3).unwrap();
        let z = vec![C64::new(0.2, -0.4), C64::new(0.9, 0.1)];
        let a = ladder(&z, LadderKind::Annihilate, 0.5, &space);
        let dense = a.to_dense().adjoint();
        assert!(max_abs_diff(&dense, &a.adjoint().to_dense()) < 1e-15);
        let ad = ladder(&z, LadderKind::Create, 0.5, &space);
        assert!(max_abs_diff(&dense, &ad.to_dense()) < 1e-15);
    }
}
