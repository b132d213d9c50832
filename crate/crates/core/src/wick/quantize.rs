use std::collections::BTreeMap;
use std::sync::Arc;

use super::symbol::{basis, PolySymbol, WickSymbol};
use crate::fock::sym::{falling_factorial, multinomial};
use crate::fock::{BlockOperator, FockSpace};
use crate::linalg;
use crate::{CMatrix, Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Largest tensor-space dimension the oracle will build.
pub const ORACLE_CAP: usize = 4096;

/// `√(γ!/(γ − α)!)`, assuming `α ≤ γ` componentwise.
fn ladder_weight(gamma: &[u32], alpha: &[u32]) -> f64 {
    gamma
        .iter()
        .zip(alpha)
        .map(|(&g, &a)| falling_factorial(g as usize, a as usize))
        .product::<f64>()
        .sqrt()
}

/// Wick quantization by normal ordering:
/// `b^Wick = Σ_{|β|=q, |α|=p} b̃_{βα} √(q!/β!) √(p!/α!) a^{*β} a^α`
/// with ε-scaled mode ladders.
pub fn wick_matrix(b: &WickSymbol, eps: f64, space: &Arc<FockSpace>) -> Result<BlockOperator> {
    if b.d() != space.d() {
        return Err(Error::Shape(format!(
            "symbol over {} modes, space over {}",
            b.d(),
            space.d()
        )));
    }
    let (p, q) = (b.p(), b.q());
    let d = space.d();
    let bp = basis(d, p);
    let bq = basis(d, q);
    let cp: Vec<f64> = bp.iter().map(|a| multinomial(a).sqrt()).collect();
    let cq: Vec<f64> = bq.iter().map(|a| multinomial(a).sqrt()).collect();
    let eps_factor = eps.powf((p + q) as f64 / 2.0);
    let kernel = b.kernel();

    let mut op = BlockOperator::zeros(space, eps, b.shift());
    let mut delta = vec![0u32; d];
    let mut target = vec![0u32; d];
    for n in p..=space.n_max() {
        let Some(m) = op.target(n) else { continue };
        let src = space.sector(n);
        let dst = space.sector(m);
        let mut block = CMatrix::zeros(dst.dim(), src.dim());
        for (col, gamma) in src.iter().enumerate() {
            for (ia, alpha) in bp.iter().enumerate() {
                if gamma.iter().zip(alpha).any(|(g, a)| a > g) {
                    continue;
                }
                for i in 0..d {
                    delta[i] = gamma[i] - alpha[i];
                }
                let down = ladder_weight(gamma, alpha) * cp[ia] * eps_factor;
                for (ib, beta) in bq.iter().enumerate() {
                    let k = kernel[(ib, ia)];
                    if k == ZERO {
                        continue;
                    }
                    for i in 0..d {
                        target[i] = delta[i] + beta[i];
                    }
                    let row = dst.rank(&target).expect("target sector");
                    let up = ladder_weight(&target, beta) * cq[ib];
                    block[(row, col)] += k * (down * up);
                }
            }
        }
        op.set_block(n, block)?;
    }
    Ok(op)
}

/// Quantizes every term and sums terms that share a sector shift.
pub fn wick_poly(b: &PolySymbol, eps: f64, space: &Arc<FockSpace>) -> Result<BTreeMap<isize, BlockOperator>> {
    let mut out: BTreeMap<isize, BlockOperator> = BTreeMap::new();
    for t in b.terms() {
        let m = wick_matrix(t, eps, space)?;
        let merged = match out.remove(&t.shift()) {
            Some(prev) => prev.add(&m)?,
            None => m,
        };
        out.insert(t.shift(), merged);
    }
    Ok(out)
}

/// Words of length `n` over `d` letters, first factor most significant.
pub(crate) struct Words {
    d: usize,
    n: usize,
    pub(crate) count: usize,
    content_rank: Vec<usize>,
}

impl Words {
    pub(crate) fn new(d: usize, n: usize) -> Result<Self> {
        let count = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if count > ORACLE_CAP as u128 {
            return Err(Error::OracleCap(format!("{d}^{n} = {count} exceeds {ORACLE_CAP}")));
        }
        let count = count as usize;
        let b = basis(d, n);
        let mut content_rank = Vec::with_capacity(count);
        let mut content = vec![0u32; d];
        for w in 0..count {
            content.iter_mut().for_each(|c| *c = 0);
            let mut x = w;
            for _ in 0..n {
                content[x % d] += 1;
                x /= d;
            }
            content_rank.push(b.rank(&content).expect("content"));
        }
        Ok(Words {
            d,
            n,
            count,
            content_rank,
        })
    }

    /// Isometric embedding `∨ⁿ → (ℂ^d)^{⊗n}`: column `α` is the normalized
    /// sum of all words with content `α`.
    pub(crate) fn embedding(&self) -> CMatrix {
        let b = basis(self.d, self.n);
        let mut e = CMatrix::zeros(self.count, b.dim());
        for (w, &r) in self.content_rank.iter().enumerate() {
            e[(w, r)] = C64::new(1.0 / multinomial(b.occupation(r)).sqrt(), 0.0);
        }
        e
    }

    /// Symmetrizer `S_n = (1/n!) Σ_σ U_σ`. A permutation orbit of a word is the
    /// set of words with the same content, and every orbit element is hit
    /// `n!/|orbit|` times, so `S_n` averages each vector over content classes.
    pub(crate) fn symmetrize(&self, m: &CMatrix) -> CMatrix {
        let classes = basis(self.d, self.n).dim();
        let mut sums = CMatrix::zeros(classes, m.ncols());
        let mut sizes = vec![0usize; classes];
        for (w, &r) in self.content_rank.iter().enumerate() {
            sizes[r] += 1;
            for j in 0..m.ncols() {
                sums[(r, j)] += m[(w, j)];
            }
        }
        CMatrix::from_fn(m.nrows(), m.ncols(), |w, j| {
            let r = self.content_rank[w];
            sums[(r, j)] / sizes[r] as f64
        })
    }
}

/// Literal tensor-space construction of `b^Wick` on the single sector `∨ⁿ`:
/// `√(n!(n+q−p)!)/(n−p)! ε^{(p+q)/2} S_{n−p+q}(b̃ ⊗ Id^{⊗(n−p)})`,
/// compressed back to occupation bases. Returns a `D(n+q−p) × D(n)` matrix.
pub fn wick_oracle(b: &WickSymbol, eps: f64, n: usize) -> Result<CMatrix> {
    let (d, p, q) = (b.d(), b.p(), b.q());
    if n < p {
        let rows = if n + q >= p { basis(d, n + q - p).dim() } else { 0 };
        return Ok(CMatrix::zeros(rows, basis(d, n).dim()));
    }
    let m = n - p + q;
    let src = Words::new(d, n)?;
    let dst = Words::new(d, m)?;
    let e_src = src.embedding();
    let e_dst = dst.embedding();
    let b_full = Words::new(d, q)?.embedding() * b.kernel() * Words::new(d, p)?.embedding().adjoint();

    // (b̃ ⊗ Id^{⊗(n−p)}) on the first p factors
    let tail = d.pow((n - p) as u32);
    let mut applied = CMatrix::zeros(dst.count, e_src.ncols());
    for col in 0..e_src.ncols() {
        for h in 0..b_full.ncols() {
            for t in 0..tail {
                let x = e_src[(h * tail + t, col)];
                if x == ZERO {
                    continue;
                }
                for h2 in 0..b_full.nrows() {
                    applied[(h2 * tail + t, col)] += b_full[(h2, h)] * x;
                }
            }
        }
    }
    let symmetrized = dst.symmetrize(&applied);
    let factor = (falling_factorial(n, p) * falling_factorial(m, q)).sqrt() * eps.powf((p + q) as f64 / 2.0);
    Ok(e_dst.adjoint() * symmetrized * C64::new(factor, 0.0))
}

/// Weighted number-estimate report for one symbol on a truncation.
#[derive(Clone, Debug)]
pub struct NormReport {
    /// `|b| = ‖b̃‖`.
    pub symbol_norm: f64,
    /// `sup ‖⟨N⟩^{−q/2} b^Wick ⟨N⟩^{−p/2}‖`.
    pub two_sided: f64,
    /// `sup ‖⟨N⟩^{−(p+q)/2} b^Wick‖`.
    pub one_sided: f64,
    /// Constant used for the one-sided bound, `2^{(p+q)/2}`.
    pub c_pq: f64,
    pub two_sided_ok: bool,
    pub one_sided_ok: bool,
}

impl NormReport {
    pub fn two_sided_margin(&self) -> f64 {
        self.symbol_norm - self.two_sided
    }

    pub fn one_sided_margin(&self) -> f64 {
        self.c_pq * self.symbol_norm - self.one_sided
    }
}

/// Evaluates both weighted operator norms sector by sector, with
/// `⟨N⟩ = (1 + N²)^{1/2}`.
pub fn norm_estimates(b: &WickSymbol, eps: f64, space: &Arc<FockSpace>) -> Result<NormReport> {
    let op = wick_matrix(b, eps, space)?;
    let bracket = |n: usize| (1.0 + (eps * n as f64).powi(2)).sqrt();
    let (p, q) = (b.p() as f64, b.q() as f64);
    let mut two = 0.0f64;
    let mut one = 0.0f64;
    for n in op.sources() {
        let m = op.target(n).unwrap();
        let norm = linalg::operator_norm(op.block(n).unwrap());
        two = two.max(norm * bracket(m).powf(-q / 2.0) * bracket(n).powf(-p / 2.0));
        one = one.max(norm * bracket(m).powf(-(p + q) / 2.0));
    }
    let symbol_norm = b.norm();
    let c_pq = 2f64.powf((p + q) / 2.0);
    let slack = 1e-12 * symbol_norm.max(1.0);
    Ok(NormReport {
        symbol_norm,
        two_sided: two,
        one_sided: one,
        c_pq,
        two_sided_ok: two <= symbol_norm + slack,
        one_sided_ok: one <= c_pq * symbol_norm + slack,
    })
}
