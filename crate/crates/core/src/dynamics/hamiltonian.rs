use std::sync::{Arc, OnceLock};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fock::{dgamma, BlockOperator, FockSpace, FockState};
use crate::linalg::{self, check_hermitian, HermitianEigen};
use crate::wick::quantize::Words;
use crate::wick::{wick_matrix, WickSymbol};
use crate::{CMatrix, Error, Result, C64};

/// Polynomial interaction `Q(z) = Σ_ℓ ⟨z^{⊗ℓ}, Q̃_ℓ z^{⊗ℓ}⟩`, `ℓ ≥ 2`.
#[derive(Clone, Debug)]
pub struct InteractionSpec {
    d: usize,
    terms: Vec<WickSymbol>,
}

impl InteractionSpec {
    pub fn empty(d: usize) -> Self {
        InteractionSpec { d, terms: vec![] }
    }

    /// Validates orders and Hermiticity; terms are sorted by order.
    pub fn new(d: usize, terms: Vec<WickSymbol>) -> Result<Self> {
        let mut seen = vec![];
        for t in &terms {
            if t.d() != d {
                return Err(Error::Shape(format!("interaction term over {} modes, expected {d}", t.d())));
            }
            if t.p() != t.q() || t.p() < 2 {
                return Err(Error::InvalidArgument(format!(
                    "interaction terms need bidegree (l, l) with l >= 2, got ({}, {})",
                    t.p(),
                    t.q()
                )));
            }
            if seen.contains(&t.p()) {
                return Err(Error::InvalidArgument(format!("order {} given twice", t.p())));
            }
            seen.push(t.p());
            check_hermitian(t.kernel(), &format!("interaction kernel of order {}", t.p()), 1e-12)?;
        }
        let mut terms = terms;
        terms.sort_by_key(|t| t.p());
        Ok(InteractionSpec { d, terms })
    }

    /// Reproducible Hermitian kernels with `‖Q̃_ℓ‖ = 1`, one per order.
    pub fn seeded_random(d: usize, orders: &[usize], seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = orders
            .iter()
            .map(|&l| WickSymbol::random_hermitian(d, l, &mut rng))
            .collect();
        Self::new(d, terms)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[WickSymbol] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest order `r` (0 when empty).
    pub fn r(&self) -> usize {
        self.terms.iter().map(|t| t.p()).max().unwrap_or(0)
    }

    /// `M = max_ℓ ‖Q̃_ℓ‖`.
    pub fn m_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    /// `Q(z)`, real for Hermitian kernels.
    pub fn eval(&self, z: &[C64]) -> f64 {
        self.terms.iter().map(|t| t.eval(z).re).sum()
    }
}

/// Default ceiling on the dimension of a sector that gets diagonalized.
pub const DEFAULT_EIG_CAP: usize = 2500;

/// Largest tensor dimension used by the direct route check during assembly.
pub const ROUTE_CHECK_CAP: usize = 1024;

/// Gauge-invariant many-body Hamiltonian `H_ε = dΓ(A) + Σ_ℓ (Q̃_ℓ)^Wick`,
/// block diagonal in the particle number.
#[derive(Debug)]
pub struct Hamiltonian {
    space: Arc<FockSpace>,
    eps: f64,
    a: CMatrix,
    interaction: InteractionSpec,
    free: Vec<CMatrix>,
    full: Vec<CMatrix>,
    free_eig: Vec<OnceLock<HermitianEigen>>,
    full_eig: Vec<OnceLock<HermitianEigen>>,
    route_deviation: f64,
}

/// Literal tensor-space block of sector `n`:
/// `ε Σ_k A_k + Σ_ℓ ε^ℓ n!/(n−ℓ)! S_n (Q̃_ℓ ⊗ Id^{⊗(n−ℓ)}) S_n`.
pub fn hamiltonian_tensor_sector(a: &CMatrix, interaction: &InteractionSpec, eps: f64, n: usize) -> Result<CMatrix> {
    let d = a.nrows();
    let words = Words::new(d, n)?;
    let e = words.embedding();
    let count = words.count;
    let mut h = CMatrix::zeros(count, count);
    // one-body part, A acting on each factor in turn
    for w in 0..count {
        let mut place = 1usize;
        for _ in 0..n {
            let letter = (w / place) % d;
            for l2 in 0..d {
                let w2 = w - letter * place + l2 * place;
                h[(w2, w)] += a[(l2, letter)] * eps;
            }
            place *= d;
        }
    }
    for t in interaction.terms() {
        let l = t.p();
        if l > n {
            continue;
        }
        let el = Words::new(d, l)?.embedding();
        let q_full = &el * t.kernel() * el.adjoint();
        let tail = d.pow((n - l) as u32);
        let mut op = CMatrix::zeros(count, count);
        for h1 in 0..q_full.nrows() {
            for h2 in 0..q_full.ncols() {
                let x = q_full[(h1, h2)];
                if x.norm() == 0.0 {
                    continue;
                }
                for tt in 0..tail {
                    op[(h1 * tail + tt, h2 * tail + tt)] += x;
                }
            }
        }
        let scale = crate::fock::sym::falling_factorial(n, l) * eps.powi(l as i32);
        // S_n op S_n, with S_n applied to columns and then to rows
        let right = words.symmetrize(&op.adjoint()).adjoint();
        let both = words.symmetrize(&right);
        h += both * C64::new(scale, 0.0);
    }
    Ok(e.adjoint() * h * e)
}

impl Hamiltonian {
    /// Builds the blocks through the Wick route and cross-checks them against
    /// the literal tensor route on every sector with `dⁿ ≤ ROUTE_CHECK_CAP`.
    pub fn assemble(a: &CMatrix, interaction: &InteractionSpec, eps: f64, space: &Arc<FockSpace>) -> Result<Self> {
        Self::assemble_with(a, interaction, eps, space, ROUTE_CHECK_CAP)
    }

    pub fn assemble_with(
        a: &CMatrix,
        interaction: &InteractionSpec,
        eps: f64,
        space: &Arc<FockSpace>,
        route_cap: usize,
    ) -> Result<Self> {
        if interaction.d() != space.d() {
            return Err(Error::Shape("interaction and space disagree on d".into()));
        }
        if space.n_max() < interaction.r() {
            return Err(Error::InvalidArgument(format!(
                "n_max = {} is below the interaction order {}",
                space.n_max(),
                interaction.r()
            )));
        }
        let free_op = dgamma(a, eps, space)?;
        let mut total = free_op.clone();
        for t in interaction.terms() {
            total = total.add(&wick_matrix(t, eps, space)?)?;
        }
        let blocks = |op: &BlockOperator| -> Vec<CMatrix> {
            (0..=space.n_max()).map(|n| op.block_or_zero(n).unwrap()).collect()
        };
        let free = blocks(&free_op);
        let full = blocks(&total);

        let mut route_deviation = 0.0f64;
        for (n, block) in full.iter().enumerate() {
            let fits = (space.d() as u128)
                .checked_pow(n as u32)
                .is_some_and(|x| x <= route_cap as u128);
            if !fits {
                continue;
            }
            let direct = hamiltonian_tensor_sector(a, interaction, eps, n)?;
            route_deviation = route_deviation.max(linalg::max_abs_diff(&direct, block));
        }
        if route_deviation > 1e-10 {
            return Err(Error::RouteMismatch {
                what: "Hamiltonian blocks".into(),
                deviation: route_deviation,
                tol: 1e-10,
            });
        }
        for (n, block) in full.iter().enumerate() {
            check_hermitian(block, &format!("Hamiltonian block {n}"), 1e-12)?;
        }
        Ok(Hamiltonian {
            space: space.clone(),
            eps,
            a: a.clone(),
            interaction: interaction.clone(),
            free,
            full,
            free_eig: (0..=space.n_max()).map(|_| OnceLock::new()).collect(),
            full_eig: (0..=space.n_max()).map(|_| OnceLock::new()).collect(),
            route_deviation,
        })
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn one_particle(&self) -> &CMatrix {
        &self.a
    }

    pub fn interaction(&self) -> &InteractionSpec {
        &self.interaction
    }

    pub fn block(&self, n: usize) -> &CMatrix {
        &self.full[n]
    }

    pub fn free_block(&self, n: usize) -> &CMatrix {
        &self.free[n]
    }

    /// Largest deviation seen between the Wick and tensor routes.
    pub fn route_deviation(&self) -> f64 {
        self.route_deviation
    }

    /// Full Hamiltonian as a block operator.
    pub fn to_operator(&self) -> BlockOperator {
        let mut op = BlockOperator::zeros(&self.space, self.eps, 0);
        for (n, b) in self.full.iter().enumerate() {
            op.set_block(n, b.clone()).expect("shape");
        }
        op
    }

    fn full_eig(&self, n: usize) -> &HermitianEigen {
        self.full_eig[n].get_or_init(|| HermitianEigen::new(&self.full[n]))
    }

    fn free_eig(&self, n: usize) -> &HermitianEigen {
        self.free_eig[n].get_or_init(|| HermitianEigen::new(&self.free[n]))
    }

    /// Forces every per-sector eigendecomposition, refusing sectors above `cap`.
    pub fn prepare(&self, cap: usize) -> Result<()> {
        for n in 0..=self.space.n_max() {
            let dim = self.space.sector_dim(n);
            if dim > cap {
                return Err(Error::DimensionCap {
                    d: self.space.d(),
                    n,
                    dim: dim as u128,
                    cap,
                });
            }
            self.full_eig(n);
            self.free_eig(n);
        }
        Ok(())
    }

    /// `e^{−i(t/ε)H} v` on a flattened vector.
    pub fn propagate(&self, t: f64, v: &[C64]) -> Vec<C64> {
        self.apply_sectorwise(v, |n, x| self.full_eig(n).apply_exp_i(-t / self.eps, x))
    }

    /// `e^{+i(t/ε)dΓ(A)} v` on a flattened vector.
    pub fn free_rotate(&self, t: f64, v: &[C64]) -> Vec<C64> {
        self.apply_sectorwise(v, |n, x| self.free_eig(n).apply_exp_i(t / self.eps, x))
    }

    fn apply_sectorwise(&self, v: &[C64], f: impl Fn(usize, &[C64]) -> Vec<C64>) -> Vec<C64> {
        assert_eq!(v.len(), self.space.dim());
        let mut out = Vec::with_capacity(v.len());
        for n in 0..=self.space.n_max() {
            let x = &v[self.space.range(n)];
            if x.iter().all(|z| z.norm_sqr() == 0.0) {
                out.extend_from_slice(x);
            } else {
                out.extend(f(n, x));
            }
        }
        out
    }

    /// `Q^Wick v`, the interaction part alone.
    pub fn apply_interaction(&self, v: &[C64]) -> Vec<C64> {
        self.apply_sectorwise(v, |n, x| linalg::mat_vec(&(&self.full[n] - &self.free[n]), x))
    }
}

/// Which picture `evolve` returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Picture {
    /// `e^{−i(t/ε)H} u`.
    Schrodinger,
    /// `e^{i(t/ε)dΓ(A)} e^{−i(t/ε)H} u`.
    Interaction,
}

/// Exact evolution of a pure state to time `t`.
pub fn evolve(u: &FockState, t: f64, h: &Hamiltonian, picture: Picture) -> Result<FockState> {
    if !u.space().same_shape(h.space()) {
        return Err(Error::Shape("state and Hamiltonian live on different truncations".into()));
    }
    if u.eps() != h.eps() {
        return Err(Error::InvalidArgument(format!(
            "state eps {} differs from Hamiltonian eps {}",
            u.eps(),
            h.eps()
        )));
    }
    if t == 0.0 {
        return Ok(u.clone());
    }
    let mut v = h.propagate(t, u.data());
    if picture == Picture::Interaction {
        v = h.free_rotate(t, &v);
    }
    Ok(u.with_data(v))
}
