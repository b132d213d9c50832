//! Symmetric tensor powers and the isometries that split and merge them.
//!
//! Basis vectors `|α⟩` of `∨ⁿ` are the normalized symmetrized tensors, so the
//! coefficient of `z^{⊗n}` on `|α⟩` is `√(n!/α!) Π_i z_i^{α_i}`.
//!
//! The merge isometry `U_{a,b}: ∨^{a+b} → ∨^a ⊗ ∨^b` has entries
//! `⟨α'| ⊗ ⟨α''| U |α⟩ = δ_{α, α'+α''} √(Π_i binom(α_i, α'_i) / binom(a+b, a))`
//! and maps `z^{⊗(a+b)}` onto `z^{⊗a} ⊗ z^{⊗b}`. Its adjoint restricted to
//! `∨^a ⊗ ∨^b` is the symmetrizer `S_{a+b}`, which is how every leg
//! contraction in the Wick calculus is expressed.

use super::basis::SectorBasis;
use super::space::FockSpace;
use crate::{CMatrix, Result, C64};

/// `binom(n, k)` as a float.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Multinomial coefficient `n! / Π α_i!`.
pub fn multinomial(counts: &[u32]) -> f64 {
    let mut rem: usize = counts.iter().map(|&c| c as usize).sum();
    let mut acc = 1.0f64;
    for &c in counts {
        acc *= binomial_f64(rem, c as usize);
        rem -= c as usize;
    }
    acc
}

/// `n! / (n - k)!` as a float.
pub fn falling_factorial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, m| acc * m as f64)
}

/// `Π_i z_i^{α_i}`.
pub fn monomial(z: &[C64], counts: &[u32]) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for (zi, &c) in z.iter().zip(counts) {
        if c > 0 {
            acc *= zi.powu(c);
        }
    }
    acc
}

/// Coefficients of `z^{⊗n}` in the occupation basis of `basis`.
pub fn sym_power(z: &[C64], basis: &SectorBasis) -> Vec<C64> {
    assert_eq!(z.len(), basis.d(), "vector length must equal the mode count");
    basis
        .iter()
        .map(|occ| monomial(z, occ) * multinomial(occ).sqrt())
        .collect()
}

/// Entry of the merge isometry for `α = part + rest`.
pub fn merge_coefficient(alpha: &[u32], part: &[u32]) -> f64 {
    let total: usize = alpha.iter().map(|&c| c as usize).sum();
    let a: usize = part.iter().map(|&c| c as usize).sum();
    let num: f64 = alpha
        .iter()
        .zip(part)
        .map(|(&al, &pa)| binomial_f64(al as usize, pa as usize))
        .product();
    (num / binomial_f64(total, a)).sqrt()
}

/// Matrix of `ψ ↦ S_{a+b}(x ⊗ ψ)` from `∨^b` to `∨^{a+b}`, for a fixed `x ∈ ∨^a`.
///
/// With `x = z^{⊗a}` this is the operator `|z^{⊗a}⟩ ∨ Id_{∨^b}`.
pub fn attach(x: &[C64], part: &SectorBasis, rest: &SectorBasis, merged: &SectorBasis) -> CMatrix {
    assert_eq!(x.len(), part.dim());
    assert_eq!(merged.n(), part.n() + rest.n());
    let d = merged.d();
    let mut out = CMatrix::zeros(merged.dim(), rest.dim());
    let mut diff = vec![0u32; d];
    for (col, g) in rest.iter().enumerate() {
        for (row, alpha) in merged.iter().enumerate() {
            let mut ok = true;
            for i in 0..d {
                if alpha[i] < g[i] {
                    ok = false;
                    break;
                }
                diff[i] = alpha[i] - g[i];
            }
            if !ok {
                continue;
            }
            let a_idx = part.rank(&diff).expect("part occupation");
            let coeff = x[a_idx];
            if coeff != C64::new(0.0, 0.0) {
                out[(row, col)] = coeff * merge_coefficient(alpha, g);
            }
        }
    }
    out
}

/// Sector representations `Γ(U)|_{∨ⁿ} = U^{⊗n}|_{∨ⁿ}` of a one-particle unitary,
/// for every sector of `space`.
///
/// Built recursively from `|α⟩ = a_j^* |α - e_j⟩ / √α_j` (unit ε), so that
/// `Γ(U)|α⟩ = a^*(U e_j) Γ(U)|α - e_j⟩ / √α_j` with `j` the last occupied mode.
pub fn gamma_rep(u: &CMatrix, space: &FockSpace) -> Vec<CMatrix> {
    let d = space.d();
    assert_eq!(u.nrows(), d);
    assert_eq!(u.ncols(), d);
    let mut reps: Vec<CMatrix> = Vec::with_capacity(space.n_max() + 1);
    reps.push(CMatrix::from_element(1, 1, C64::new(1.0, 0.0)));
    for n in 1..=space.n_max() {
        let basis = space.sector(n);
        let prev = &reps[n - 1];
        let lower = space.sector(n - 1);
        let mut rep = CMatrix::zeros(basis.dim(), basis.dim());
        let mut scratch = vec![0u32; d];
        for (col, alpha) in basis.iter().enumerate() {
            let j = (0..d).rev().find(|&i| alpha[i] > 0).expect("n > 0");
            scratch.copy_from_slice(alpha);
            scratch[j] -= 1;
            let src = lower.rank(&scratch).expect("lower occupation");
            let norm = (alpha[j] as f64).sqrt();
            // (a^*(v) ψ)_β = Σ_i v_i √β_i ψ_{β - e_i}
            for (row, _) in basis.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d {
                    if let Some(low) = space.lower_neighbour(n, row, i) {
                        let beta_i = basis.occupation(row)[i] as f64;
                        acc += u[(i, j)] * beta_i.sqrt() * prev[(low, src)];
                    }
                }
                rep[(row, col)] = acc / norm;
            }
        }
        reps.push(rep);
    }
    reps
}

/// `Γ(U)` on the single sector `∨ⁿ`.
pub fn gamma_rep_sector(u: &CMatrix, n: usize) -> Result<CMatrix> {
    let space = FockSpace::new(u.nrows(), n)?;
    Ok(gamma_rep(u, &space).pop().expect("non-empty"))
}
