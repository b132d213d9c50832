use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fock::{sector_dim, sym_power, SectorBasis};
use crate::linalg::{self, check_hermitian};
use crate::{CMatrix, Error, Result, C64};

/// Homogeneous polynomial `b(z) = ⟨z^{⊗q}, b̃ z^{⊗p}⟩` stored through its kernel
/// `b̃ : ∨^p ℂ^d → ∨^q ℂ^d` in the occupation bases.
#[derive(Clone, Debug, PartialEq)]
pub struct WickSymbol {
    d: usize,
    p: usize,
    q: usize,
    kernel: CMatrix,
}

impl WickSymbol {
    pub fn new(d: usize, p: usize, q: usize, kernel: CMatrix) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("mode count d must be >= 1".into()));
        }
        let expect = (sector_dim(d, q) as usize, sector_dim(d, p) as usize);
        if kernel.shape() != expect {
            return Err(Error::Shape(format!(
                "kernel of bidegree ({p},{q}) over {d} modes must be {}×{}, got {}×{}",
                expect.0,
                expect.1,
                kernel.nrows(),
                kernel.ncols()
            )));
        }
        Ok(WickSymbol { d, p, q, kernel })
    }

    pub fn zeros(d: usize, p: usize, q: usize) -> Self {
        let kernel = CMatrix::zeros(sector_dim(d, q) as usize, sector_dim(d, p) as usize);
        WickSymbol { d, p, q, kernel }
    }

    /// Constant symbol `c`.
    pub fn constant(d: usize, c: C64) -> Self {
        WickSymbol {
            d,
            p: 0,
            q: 0,
            kernel: CMatrix::from_element(1, 1, c),
        }
    }

    /// `⟨z, A z⟩`.
    pub fn quadratic(a: &CMatrix) -> Result<Self> {
        Self::new(a.nrows(), 1, 1, a.clone())
    }

    /// `|z|^{2ℓ}`, whose kernel is the identity of `∨^ℓ`.
    pub fn norm_power(d: usize, l: usize) -> Self {
        let dim = sector_dim(d, l) as usize;
        WickSymbol {
            d,
            p: l,
            q: l,
            kernel: CMatrix::identity(dim, dim),
        }
    }

    /// `z ↦ ⟨ξ, z⟩`; quantizes to `a(ξ)`.
    pub fn annihilation(xi: &[C64]) -> Self {
        let d = xi.len();
        WickSymbol {
            d,
            p: 1,
            q: 0,
            kernel: CMatrix::from_fn(1, d, |_, j| xi[j].conj()),
        }
    }

    /// `z ↦ ⟨z, η⟩`; quantizes to `a^*(η)`.
    pub fn creation(eta: &[C64]) -> Self {
        let d = eta.len();
        WickSymbol {
            d,
            p: 0,
            q: 1,
            kernel: CMatrix::from_fn(d, 1, |i, _| eta[i]),
        }
    }

    /// Kernel with entries uniform in the unit square.
    pub fn random<R: Rng>(d: usize, p: usize, q: usize, rng: &mut R) -> Self {
        let kernel = linalg::random_matrix(sector_dim(d, q) as usize, sector_dim(d, p) as usize, rng);
        WickSymbol { d, p, q, kernel }
    }

    /// Hermitian kernel of bidegree `(l, l)` with operator norm 1.
    pub fn random_hermitian<R: Rng>(d: usize, l: usize, rng: &mut R) -> Self {
        let kernel = linalg::random_hermitian(sector_dim(d, l) as usize, rng);
        WickSymbol { d, p: l, q: l, kernel }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn kernel(&self) -> &CMatrix {
        &self.kernel
    }

    /// Sector shift `q − p` of the quantized operator.
    pub fn shift(&self) -> isize {
        self.q as isize - self.p as isize
    }

    /// `|b|_{P_{p,q}} = ‖b̃‖`.
    pub fn norm(&self) -> f64 {
        linalg::operator_norm(&self.kernel)
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.p == self.q && check_hermitian(&self.kernel, "kernel", tol).is_ok()
    }

    /// `b^*(z) = conj(b(z))`, with kernel `b̃^*` and swapped bidegree.
    pub fn adjoint(&self) -> Self {
        WickSymbol {
            d: self.d,
            p: self.q,
            q: self.p,
            kernel: self.kernel.adjoint(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        WickSymbol {
            kernel: &self.kernel * c,
            ..self.clone()
        }
    }

    /// `α self + β other` for equal bidegrees.
    pub fn combine(&self, alpha: C64, other: &WickSymbol, beta: C64) -> Result<Self> {
        if (self.d, self.p, self.q) != (other.d, other.p, other.q) {
            return Err(Error::Shape("symbols of different bidegree cannot be added".into()));
        }
        Ok(WickSymbol {
            kernel: &self.kernel * alpha + &other.kernel * beta,
            ..self.clone()
        })
    }

    /// `b(z)`.
    pub fn eval(&self, z: &[C64]) -> C64 {
        let zp = sym_power(z, &basis(self.d, self.p));
        let zq = sym_power(z, &basis(self.d, self.q));
        linalg::inner(&zq, &linalg::mat_vec(&self.kernel, &zp))
    }

    pub fn to_json(&self) -> KernelJson {
        KernelJson {
            d: self.d,
            p: self.p,
            q: self.q,
            kernel: (0..self.kernel.nrows())
                .map(|i| {
                    (0..self.kernel.ncols())
                        .map(|j| [self.kernel[(i, j)].re, self.kernel[(i, j)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(j: &KernelJson) -> Result<Self> {
        let rows = j.kernel.len();
        let cols = j.kernel.first().map_or(0, |r| r.len());
        if j.kernel.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged kernel rows".into()));
        }
        let kernel = CMatrix::from_fn(rows, cols, |i, k| C64::new(j.kernel[i][k][0], j.kernel[i][k][1]));
        Self::new(j.d, j.p, j.q, kernel)
    }
}

/// Serialized kernel: rows index `∨^q`, columns `∨^p`, entries `[re, im]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct KernelJson {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub kernel: Vec<Vec<[f64; 2]>>,
}

pub(crate) fn basis(d: usize, n: usize) -> SectorBasis {
    SectorBasis::new(d, n).expect("small symbol sector")
}

/// Finite sum of homogeneous symbols, at most one per bidegree.
#[derive(Clone, Debug, Default)]
pub struct PolySymbol {
    terms: BTreeMap<(usize, usize), WickSymbol>,
}

impl PolySymbol {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = WickSymbol>) -> Result<Self> {
        let mut out = Self::new();
        for t in terms {
            out.add_term(t)?;
        }
        Ok(out)
    }

    /// Adds `term`, merging it into an existing term of the same bidegree.
    pub fn add_term(&mut self, term: WickSymbol) -> Result<()> {
        if let Some(first) = self.terms.values().next() {
            if first.d() != term.d() {
                return Err(Error::Shape("terms over different mode counts".into()));
            }
        }
        let key = (term.p(), term.q());
        let merged = match self.terms.remove(&key) {
            Some(prev) => prev.combine(C64::new(1.0, 0.0), &term, C64::new(1.0, 0.0))?,
            None => term,
        };
        self.terms.insert(key, merged);
        Ok(())
    }

    /// `self − other`, term by term.
    pub fn sub(&self, other: &PolySymbol) -> Result<PolySymbol> {
        let mut out = self.clone();
        for t in other.terms() {
            out.add_term(t.scale(C64::new(-1.0, 0.0)))?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: C64) -> PolySymbol {
        PolySymbol {
            terms: self.terms.iter().map(|(k, v)| (*k, v.scale(c))).collect(),
        }
    }

    /// Drops terms whose kernel entries are all below `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.terms
            .retain(|_, t| t.kernel().iter().any(|z| z.norm() > tol));
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = &WickSymbol> + '_ {
        self.terms.values()
    }

    pub fn term(&self, p: usize, q: usize) -> Option<&WickSymbol> {
        self.terms.get(&(p, q))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        self.terms().map(|t| t.eval(z)).sum()
    }
}

impl From<WickSymbol> for PolySymbol {
    fn from(t: WickSymbol) -> Self {
        let mut out = PolySymbol::new();
        out.terms.insert((t.p(), t.q()), t);
        out
    }
}
