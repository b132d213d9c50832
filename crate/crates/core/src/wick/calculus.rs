//! Symbol-level calculus: derivative kernels, Wick products, commutators and
//! Taylor shifts. Every leg contraction goes through the merge isometries
//! `U_{a,b} : ∨^{a+b} → ∨^a ⊗ ∨^b`.

use super::symbol::{basis, PolySymbol, WickSymbol};
use crate::fock::sym::{attach, binomial_f64, falling_factorial, merge_coefficient};
use crate::fock::sym_power;
use crate::{CMatrix, Error, Result, C64};

/// `U_{a,b}` as a `D(a)·D(b) × D(a+b)` matrix; row `(i, j)` is `i·D(b) + j`.
pub fn merge_matrix(d: usize, a: usize, b: usize) -> CMatrix {
    let ba = basis(d, a);
    let bb = basis(d, b);
    let bm = basis(d, a + b);
    let mut out = CMatrix::zeros(ba.dim() * bb.dim(), bm.dim());
    let mut sum = vec![0u32; d];
    for (i, x) in ba.iter().enumerate() {
        for (j, y) in bb.iter().enumerate() {
            for k in 0..d {
                sum[k] = x[k] + y[k];
            }
            let col = bm.rank(&sum).unwrap();
            out[(i * bb.dim() + j, col)] = C64::new(merge_coefficient(&sum, x), 0.0);
        }
    }
    out
}

/// `|z^{⊗a}⟩ ∨ Id : ∨^b → ∨^{a+b}`.
fn attach_power(z: &[C64], a: usize, b: usize) -> CMatrix {
    let d = z.len();
    let part = basis(d, a);
    attach(&sym_power(z, &part), &part, &basis(d, b), &basis(d, a + b))
}

/// `∂_z̄^j ∂_z^k b(z)` as a map `∨^k → ∨^j`:
/// `p!/(p−k)! · q!/(q−j)! · (⟨z^{⊗(q−j)}| ∨ Id) b̃ (|z^{⊗(p−k)}⟩ ∨ Id)`.
///
/// Pairing with `v^{⊗j}` on the left and `u^{⊗k}` on the right gives the
/// mixed directional derivative `(Σ v̄_i ∂_{z̄_i})^j (Σ u_i ∂_{z_i})^k b`.
pub fn derivative_kernel(b: &WickSymbol, j: usize, k: usize, z: &[C64]) -> Result<CMatrix> {
    if k > b.p() || j > b.q() {
        return Err(Error::InvalidArgument(format!(
            "derivative order ({j},{k}) exceeds bidegree ({},{})",
            b.p(),
            b.q()
        )));
    }
    if z.len() != b.d() {
        return Err(Error::Shape("point has the wrong number of modes".into()));
    }
    let (p, q) = (b.p(), b.q());
    let scale = falling_factorial(p, k) * falling_factorial(q, j);
    let right = attach_power(z, p - k, k);
    let left = attach_power(z, q - j, j);
    Ok(left.adjoint() * b.kernel() * right * C64::new(scale, 0.0))
}

/// Kernel of the contraction `∂_z^k b₁ · ∂_z̄^k b₂`, of bidegree
/// `(p₁ − k + p₂, q₁ + q₂ − k)`.
fn contraction_kernel(b1: &WickSymbol, b2: &WickSymbol, k: usize) -> CMatrix {
    let d = b1.d();
    let (p1, q1, p2, q2) = (b1.p(), b1.q(), b2.p(), b2.q());
    let dk = basis(d, k).dim();
    // M1[c, (a, g)] = Σ b̃₁[c, a+g] U(a+g; a, g)
    let m1 = b1.kernel() * merge_matrix(d, p1 - k, k).transpose();
    // M2[(e, g), b] = U(e+g; e, g) b̃₂[e+g, b]
    let m2 = merge_matrix(d, q2 - k, k) * b2.kernel();
    let (da, de) = (basis(d, p1 - k).dim(), basis(d, q2 - k).dim());
    let (dc, db) = (m1.nrows(), m2.ncols());
    // T[(c, e), (a, b)] = Σ_g M1[c, (a, g)] M2[(e, g), b]
    let mut t = CMatrix::zeros(dc * de, da * db);
    for c in 0..dc {
        for e in 0..de {
            for a in 0..da {
                for bb in 0..db {
                    let mut acc = C64::new(0.0, 0.0);
                    for g in 0..dk {
                        acc += m1[(c, a * dk + g)] * m2[(e * dk + g, bb)];
                    }
                    t[(c * de + e, a * db + bb)] = acc;
                }
            }
        }
    }
    let scale = falling_factorial(p1, k) * falling_factorial(q2, k);
    merge_matrix(d, q1, q2 - k).transpose() * t * merge_matrix(d, p1 - k, p2) * C64::new(scale, 0.0)
}

/// The contraction terms `ε^k/k! ∂_z^k b₁ · ∂_z̄^k b₂`, `k = 0..=min(p₁, q₂)`,
/// each as a homogeneous symbol. Their Wick quantizations sum to
/// `b₁^Wick ∘ b₂^Wick`.
pub fn compose_terms(b1: &WickSymbol, b2: &WickSymbol, eps: f64) -> Result<Vec<WickSymbol>> {
    if b1.d() != b2.d() {
        return Err(Error::Shape("symbols over different mode counts".into()));
    }
    let d = b1.d();
    let kmax = b1.p().min(b2.q());
    (0..=kmax)
        .map(|k| {
            let weight = eps.powi(k as i32) / falling_factorial(k, k);
            let kernel = contraction_kernel(b1, b2, k) * C64::new(weight, 0.0);
            WickSymbol::new(d, b1.p() - k + b2.p(), b1.q() + b2.q() - k, kernel)
        })
        .collect()
}

/// `b₁ ♯ b₂`, the symbol of `b₁^Wick ∘ b₂^Wick`, collected by bidegree.
pub fn compose(b1: &WickSymbol, b2: &WickSymbol, eps: f64) -> Result<PolySymbol> {
    PolySymbol::from_terms(compose_terms(b1, b2, eps)?)
}

/// Symbol of `[b₁^Wick, b₂^Wick]`: `Σ_{k≥1} ε^k/k! {b₁, b₂}^{(k)}`.
/// The `k = 0` products cancel identically and terms that vanish are dropped.
pub fn commutator(b1: &WickSymbol, b2: &WickSymbol, eps: f64) -> Result<PolySymbol> {
    let mut out = PolySymbol::new();
    for t in compose_terms(b1, b2, eps)?.into_iter().skip(1) {
        out.add_term(t)?;
    }
    for t in compose_terms(b2, b1, eps)?.into_iter().skip(1) {
        out.add_term(t.scale(C64::new(-1.0, 0.0)))?;
    }
    let scale = b1.norm().max(1.0) * b2.norm().max(1.0);
    Ok(out.pruned(1e-13 * scale))
}

/// Exact expansion of `z ↦ b(z + w)` into bidegrees `(p − k, q − j)`; the term
/// has kernel `binom(p,k) binom(q,j) (|w^{⊗j}⟩∨Id)^* b̃ (|w^{⊗k}⟩∨Id)`.
pub fn taylor_shift(b: &WickSymbol, w: &[C64]) -> Result<PolySymbol> {
    if w.len() != b.d() {
        return Err(Error::Shape("shift has the wrong number of modes".into()));
    }
    let (p, q) = (b.p(), b.q());
    let mut out = PolySymbol::new();
    let rights: Vec<CMatrix> = (0..=p).map(|k| attach_power(w, k, p - k)).collect();
    let lefts: Vec<CMatrix> = (0..=q).map(|j| attach_power(w, j, q - j)).collect();
    for k in 0..=p {
        for j in 0..=q {
            let scale = binomial_f64(p, k) * binomial_f64(q, j);
            let kernel = lefts[j].adjoint() * b.kernel() * &rights[k] * C64::new(scale, 0.0);
            out.add_term(WickSymbol::new(b.d(), p - k, q - j, kernel)?)?;
        }
    }
    Ok(out)
}
