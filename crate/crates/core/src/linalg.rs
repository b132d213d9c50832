//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::{CMatrix, CVector, Error, Result, C64};

/// Largest entry of `|M - M*|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Rejects matrices whose Hermitian deviation exceeds `tol` (scaled by `max(1, max|m_ij|)`).
pub fn check_hermitian(m: &CMatrix, what: &str, tol: f64) -> Result<()> {
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    let deviation = hermitian_deviation(m);
    if deviation > tol * scale {
        return Err(Error::NotHermitian {
            what: what.to_string(),
            deviation,
        });
    }
    Ok(())
}

/// Eigendecomposition `M = V diag(λ) V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(m: &CMatrix) -> Self {
        // symmetrize first so roundoff asymmetry never leaks into the solver
        let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        HermitianEigen {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(i t M)` as a dense matrix.
    pub fn exp_i(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, t * lam);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    /// `exp(i t M) v` without forming the exponential.
    pub fn apply_exp_i(&self, t: f64, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        let x = CVector::from_column_slice(v);
        let mut coeffs = self.vectors.adjoint() * x;
        for (j, &lam) in self.values.iter().enumerate() {
            coeffs[j] *= C64::from_polar(1.0, t * lam);
        }
        (&self.vectors * coeffs).iter().copied().collect()
    }
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
}

/// Frobenius-type max-entry distance between two equally shaped matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Random Hermitian matrix with operator norm exactly 1 (unless `dim == 0`).
pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> CMatrix {
    let x = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let h = (&x + x.adjoint()) * C64::new(0.5, 0.0);
    let norm = HermitianEigen::new(&h)
        .values
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    if norm > 0.0 {
        h / C64::new(norm, 0.0)
    } else {
        h
    }
}

/// Random complex vector with entries uniform in the unit square.
pub fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Random complex matrix with entries uniform in the unit square.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Euclidean norm of a complex vector.
pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `⟨x, y⟩`, antilinear in `x`.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

/// A unitary whose first column is `v / |v|`, completed by Gram-Schmidt against
/// the standard basis in index order.
pub fn unitary_with_first_column(v: &[C64]) -> CMatrix {
    let k = v.len();
    let nv = norm(v);
    assert!(nv > 0.0, "cannot complete a zero vector");
    let mut cols: Vec<Vec<C64>> = vec![v.iter().map(|z| z / nv).collect()];
    for e in 0..k {
        if cols.len() == k {
            break;
        }
        let mut w = vec![C64::new(0.0, 0.0); k];
        w[e] = C64::new(1.0, 0.0);
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj = inner(c, &w);
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= proj * ci;
                }
            }
        }
        let nw = norm(&w);
        if nw > 1e-8 {
            cols.push(w.iter().map(|z| z / nw).collect());
        }
    }
    CMatrix::from_fn(k, k, |i, j| cols[j][i])
}

/// `exp(i t A)` for a Hermitian one-particle matrix.
pub fn exp_i_hermitian(a: &CMatrix, t: f64) -> CMatrix {
    HermitianEigen::new(a).exp_i(t)
}

/// `M v` for a dense matrix and a slice.
pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    let rows = m.nrows();
    let cols = m.ncols();
    debug_assert_eq!(cols, v.len());
    let mut out = vec![C64::new(0.0, 0.0); rows];
    for (j, &vj) in v.iter().enumerate() {
        if vj == C64::new(0.0, 0.0) {
            continue;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o += m[(i, j)] * vj;
        }
    }
    out
}
