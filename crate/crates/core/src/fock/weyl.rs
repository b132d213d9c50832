//! Weyl operators `W(ξ) = exp(i Φ(ξ))`, `Φ(ξ) = (a(ξ) + a^*(ξ))/√2`, on the truncated space.
//!
//! The production route rotates `ξ` onto a single mode. With `U` a one-particle
//! unitary such that `U e_m = ξ/|ξ|`, we have `Φ(ξ) = Γ(U) Φ(|ξ| e_m) Γ(U)^*`
//! on the truncated space, because `Γ(U)` preserves the particle number and
//! therefore commutes with the truncation. `U` is a product of two-mode Givens
//! rotations, so `Γ(U)` acts on small two-mode blocks, and `Φ(|ξ| e_m)` is a
//! direct sum of tridiagonal Jacobi matrices whose eigendecompositions are
//! computed once per length and reused for every `ξ`.
//!
//! [`weyl_dense`] exponentiates the full-space field operator directly and is
//! the cross-check for small truncations.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use super::operator::{ladder, LadderKind};
use super::space::FockSpace;
use super::sym::gamma_rep;
use crate::linalg::{self, HermitianEigen};
use crate::{CMatrix, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Index groups; group `g` is `idx[starts[g]..starts[g + 1]]`.
#[derive(Debug)]
struct Groups {
    starts: Vec<usize>,
    idx: Vec<usize>,
}

impl Groups {
    fn iter(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.starts.windows(2).map(move |w| &self.idx[w[0]..w[1]])
    }
}

/// Eigendecomposition of the Jacobi matrix with off-diagonal `√(j+1)`.
#[derive(Debug)]
struct Jacobi {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl Jacobi {
    fn new(len: usize) -> Self {
        let mut m = DMatrix::<f64>::zeros(len, len);
        for j in 0..len.saturating_sub(1) {
            let x = ((j + 1) as f64).sqrt();
            m[(j, j + 1)] = x;
            m[(j + 1, j)] = x;
        }
        let eig = SymmetricEigen::new(m);
        Jacobi {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    /// In-place `exp(i s J) x`.
    fn apply(&self, s: f64, x: &mut [C64]) {
        let n = x.len();
        let mut coeffs = vec![ZERO; n];
        for k in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += x[j] * self.vectors[(j, k)];
            }
            coeffs[k] = acc * C64::from_polar(1.0, s * self.values[k]);
        }
        for (j, xj) in x.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in 0..n {
                acc += coeffs[k] * self.vectors[(j, k)];
            }
            *xj = acc;
        }
    }
}

/// Shared per-space data for building Weyl operators at one ε.
#[derive(Debug)]
pub struct WeylFactory {
    space: Arc<FockSpace>,
    eps: f64,
    pair_space: Arc<FockSpace>,
    jacobi: Vec<OnceLock<Jacobi>>,
    mode_groups: Vec<OnceLock<Groups>>,
    pair_groups: Vec<OnceLock<Groups>>,
}

impl WeylFactory {
    pub fn new(space: &Arc<FockSpace>, eps: f64) -> Result<Arc<Self>> {
        let d = space.d();
        Ok(Arc::new(WeylFactory {
            space: space.clone(),
            eps,
            pair_space: FockSpace::new(2, space.n_max())?,
            jacobi: (0..=space.n_max()).map(|_| OnceLock::new()).collect(),
            mode_groups: (0..d).map(|_| OnceLock::new()).collect(),
            pair_groups: (0..d * d).map(|_| OnceLock::new()).collect(),
        }))
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    fn jacobi(&self, len: usize) -> &Jacobi {
        self.jacobi[len - 1].get_or_init(|| Jacobi::new(len))
    }

    /// Groups `{α + t e_m : t = 0..=n_max − |α|}` over occupations with `α_m = 0`.
    fn mode_groups(&self, m: usize) -> &Groups {
        self.mode_groups[m].get_or_init(|| {
            let space = &self.space;
            let mut starts = vec![0];
            let mut idx = Vec::with_capacity(space.dim());
            let mut scratch = vec![0u32; space.d()];
            for r in 0..=space.n_max() {
                for occ in space.sector(r).iter() {
                    if occ[m] != 0 {
                        continue;
                    }
                    scratch.copy_from_slice(occ);
                    for t in 0..=(space.n_max() - r) {
                        scratch[m] = t as u32;
                        idx.push(space.global_index(&scratch).expect("inside truncation"));
                    }
                    starts.push(idx.len());
                }
            }
            Groups { starts, idx }
        })
    }

    /// Groups `{(α_i − t, α_j + t)}` over occupations with `α_j = 0`, in the
    /// two-mode basis order of the pair `(i, j)`.
    fn pair_groups(&self, i: usize, j: usize) -> &Groups {
        let d = self.space.d();
        self.pair_groups[i * d + j].get_or_init(|| {
            let space = &self.space;
            let mut starts = vec![0];
            let mut idx = Vec::with_capacity(space.dim());
            let mut scratch = vec![0u32; d];
            for n in 0..=space.n_max() {
                for occ in space.sector(n).iter() {
                    if occ[j] != 0 {
                        continue;
                    }
                    scratch.copy_from_slice(occ);
                    let m = occ[i];
                    for t in 0..=m {
                        scratch[i] = m - t;
                        scratch[j] = t;
                        idx.push(space.global_index(&scratch).expect("same sector"));
                    }
                    starts.push(idx.len());
                }
            }
            Groups { starts, idx }
        })
    }

    /// `W(ξ)` for the given one-particle vector.
    pub fn weyl(self: &Arc<Self>, xi: &[C64]) -> WeylOperator {
        assert_eq!(xi.len(), self.space.d(), "ξ must have one entry per mode");
        let support: Vec<usize> = (0..xi.len()).filter(|&i| xi[i] != ZERO).collect();
        let norm = linalg::norm(xi);
        let mut rotations = Vec::new();
        let mut mode = 0;
        let mut mode_phase = None;
        if !support.is_empty() {
            // Givens sweep V with V (ξ/|ξ|) = e_{support[0]}
            let mut x: Vec<C64> = xi.iter().map(|z| z / norm).collect();
            for t in (1..support.len()).rev() {
                let (i, j) = (support[t - 1], support[t]);
                let (a, b) = (x[i], x[j]);
                let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
                if r == 0.0 {
                    continue;
                }
                let mut g = CMatrix::zeros(2, 2);
                g[(0, 0)] = a.conj() / r;
                g[(0, 1)] = b.conj() / r;
                g[(1, 0)] = -b / r;
                g[(1, 1)] = a / r;
                x[i] = C64::new(r, 0.0);
                x[j] = ZERO;
                rotations.push(Rotation {
                    i,
                    j,
                    reps: gamma_rep(&g, &self.pair_space),
                });
            }
            mode = support[0];
            // a one-mode support keeps its phase; V multiplies mode m by its conjugate
            if support.len() == 1 {
                mode_phase = Some((x[mode] / x[mode].norm()).conj());
            }
        }
        WeylOperator {
            factory: self.clone(),
            rotations,
            mode,
            scale: norm * (self.eps / 2.0).sqrt(),
            mode_phase,
        }
    }
}

#[derive(Debug)]
struct Rotation {
    i: usize,
    j: usize,
    reps: Vec<CMatrix>,
}

/// `W(ξ)` in factored form: `Γ(V)^* exp(i s J_m) Γ(V)` with `V ξ = |ξ| e_m`.
#[derive(Debug)]
pub struct WeylOperator {
    factory: Arc<WeylFactory>,
    rotations: Vec<Rotation>,
    mode: usize,
    scale: f64,
    // Γ(V) on |α⟩ for a one-mode support: multiplication by phase^{α_m}
    mode_phase: Option<C64>,
}

impl WeylOperator {
    pub fn space(&self) -> &Arc<FockSpace> {
        &self.factory.space
    }

    fn apply_rotation(&self, rot: &Rotation, v: &mut [C64], adjoint: bool) {
        let groups = self.factory.pair_groups(rot.i, rot.j);
        let mut buf = Vec::new();
        for g in groups.iter() {
            let m = g.len() - 1;
            let rep = &rot.reps[m];
            buf.clear();
            buf.extend(g.iter().map(|&k| v[k]));
            for (r, &k) in g.iter().enumerate() {
                let mut acc = ZERO;
                for (c, &x) in buf.iter().enumerate() {
                    let entry = if adjoint { rep[(c, r)].conj() } else { rep[(r, c)] };
                    acc += entry * x;
                }
                v[k] = acc;
            }
        }
    }

    fn apply_mode_phase(&self, v: &mut [C64], phase: C64) {
        for g in self.factory.mode_groups(self.mode).iter() {
            let mut p = C64::new(1.0, 0.0);
            for &k in g {
                v[k] *= p;
                p *= phase;
            }
        }
    }

    /// `W(ξ) v`.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let space = &self.factory.space;
        assert_eq!(v.len(), space.dim());
        let mut out = v.to_vec();
        if self.scale == 0.0 {
            return out;
        }
        if let Some(ph) = self.mode_phase {
            self.apply_mode_phase(&mut out, ph);
        }
        for rot in &self.rotations {
            self.apply_rotation(rot, &mut out, false);
        }
        let mut buf = Vec::new();
        for g in self.factory.mode_groups(self.mode).iter() {
            buf.clear();
            buf.extend(g.iter().map(|&k| out[k]));
            self.factory.jacobi(g.len()).apply(self.scale, &mut buf);
            for (&k, &x) in g.iter().zip(&buf) {
                out[k] = x;
            }
        }
        for rot in self.rotations.iter().rev() {
            self.apply_rotation(rot, &mut out, true);
        }
        if let Some(ph) = self.mode_phase {
            self.apply_mode_phase(&mut out, ph.conj());
        }
        out
    }

    /// `⟨v, W(ξ) v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        linalg::inner(v, &self.apply(v))
    }

    /// Full-space dense matrix, built column by column.
    pub fn to_dense(&self) -> CMatrix {
        let dim = self.space().dim();
        let mut out = CMatrix::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        for col in 0..dim {
            e[col] = C64::new(1.0, 0.0);
            let w = self.apply(&e);
            for (row, x) in w.into_iter().enumerate() {
                out[(row, col)] = x;
            }
            e[col] = ZERO;
        }
        out
    }
}

/// `W(ξ)` by one-shot factored route.
pub fn weyl(xi: &[C64], eps: f64, space: &Arc<FockSpace>) -> Result<WeylOperator> {
    Ok(WeylFactory::new(space, eps)?.weyl(xi))
}

/// Field operator `Φ(ξ) = (a(ξ) + a^*(ξ))/√2` as a full-space dense matrix.
pub fn field_dense(xi: &[C64], eps: f64, space: &Arc<FockSpace>) -> CMatrix {
    let a = ladder(xi, LadderKind::Annihilate, eps, space).to_dense();
    let ad = ladder(xi, LadderKind::Create, eps, space).to_dense();
    (a + ad) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)
}

/// `W(ξ)` by dense Hermitian eigendecomposition of `Φ(ξ)` on the full space.
pub fn weyl_dense(xi: &[C64], eps: f64, space: &Arc<FockSpace>) -> CMatrix {
    HermitianEigen::new(&field_dense(xi, eps, space)).exp_i(1.0)
}
