//! Reduced density matrices, their distance to mean-field targets, and Wick
//! expectations.

use super::measure::LimitMeasure;
use crate::fock::{mode_annihilator, sym_power, BlockOperator, FockState, SectorBasis};
use crate::linalg;
use crate::wick::{wick_matrix, PolySymbol};
use crate::{CMatrix, Error, Result, C64};

/// `γ^{(p)}` on `∨^p ℂ^d`, normalized so that `Tr[γ b̃] · normalization`
/// equals `⟨u, b^Wick u⟩` for every `(p,p)` kernel `b̃`.
#[derive(Clone, Debug)]
pub struct ReducedDensity {
    pub p: usize,
    pub matrix: CMatrix,
    /// `⟨u, (|z|^{2p})^Wick u⟩`.
    pub normalization: f64,
    /// Set when the normalization vanishes; `matrix` is then zero.
    pub is_zero: bool,
}

impl ReducedDensity {
    /// `Tr[γ b̃]`.
    pub fn pair(&self, kernel: &CMatrix) -> C64 {
        (&self.matrix * kernel).trace()
    }
}

/// `γ_{αβ} ∝ √(p!/α!) √(p!/β!) ⟨a^β u, a^α u⟩`.
pub fn reduced_density(u: &FockState, p: usize) -> Result<ReducedDensity> {
    let space = u.space();
    let d = space.d();
    let basis = SectorBasis::new(d, p)?;
    let ann: Vec<BlockOperator> = (0..d).map(|i| mode_annihilator(i, u.eps(), space)).collect();
    let lowered: Vec<Vec<C64>> = basis
        .iter()
        .map(|alpha| {
            let mut v = u.data().to_vec();
            for (i, &k) in alpha.iter().enumerate() {
                for _ in 0..k {
                    v = ann[i].apply(&v);
                }
            }
            let c = crate::fock::sym::multinomial(alpha).sqrt();
            v.iter_mut().for_each(|x| *x *= c);
            v
        })
        .collect();
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..=a {
            let g = linalg::inner(&lowered[b], &lowered[a]);
            m[(a, b)] = g;
            m[(b, a)] = g.conj();
        }
    }
    let normalization = m.trace().re;
    if normalization <= 0.0 {
        return Ok(ReducedDensity {
            p,
            matrix: CMatrix::zeros(dim, dim),
            normalization: 0.0,
            is_zero: true,
        });
    }
    Ok(ReducedDensity {
        p,
        matrix: m / C64::new(normalization, 0.0),
        normalization,
        is_zero: false,
    })
}

/// `∫ |z^{⊗p}⟩⟨z^{⊗p}| dμ / ∫ |z|^{2p} dμ`.
pub fn meanfield_target(mu: &LimitMeasure, p: usize) -> Result<CMatrix> {
    let atoms = mu.atoms();
    let d = atoms.first().map(|(_, f)| f.len()).unwrap_or(0);
    let basis = SectorBasis::new(d, p)?;
    let mut out = CMatrix::zeros(basis.dim(), basis.dim());
    let mut total = 0.0;
    for (w, f) in atoms {
        let v = CMatrix::from_column_slice(basis.dim(), 1, &sym_power(f, &basis));
        out += &v * v.adjoint() * C64::new(w, 0.0);
        total += w * linalg::norm(f).powi(2 * p as i32);
    }
    if total <= 0.0 {
        return Err(Error::InvalidArgument("limit measure has no mass away from 0".into()));
    }
    Ok(out / C64::new(total, 0.0))
}

/// Trace norm of `γ^{(p)} − target(μ)`.
pub fn meanfield_distance(u: &FockState, mu: &LimitMeasure, p: usize) -> Result<f64> {
    let gamma = reduced_density(u, p)?;
    let target = meanfield_target(mu, p)?;
    Ok(linalg::trace_norm(&(gamma.matrix - target)))
}

/// `⟨u, b^Wick u⟩`.
pub fn wick_expectation(u: &FockState, b: &PolySymbol) -> Result<C64> {
    let mut acc = C64::new(0.0, 0.0);
    for t in b.terms() {
        let v = wick_matrix(t, u.eps(), u.space())?.apply(u.data());
        acc += linalg::inner(u.data(), &v);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent_state_auto, hermite_state, FockSpace};
    use crate::wick::WickSymbol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hermite_is_pure_product() {
        let f = [c(0.6, 0.0), c(0.0, 0.8)];
        let space = FockSpace::new(2, 10).unwrap();
        let u = hermite_state(&f, 0.1, &space).unwrap();
        for p in 1..=3 {
            let mu = LimitMeasure::Circle(f.to_vec());
            assert!(meanfield_distance(&u, &mu, p).unwrap() < 1e-12);
        }
        let g = reduced_density(&u, 1).unwrap();
        assert!((g.normalization - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_matches_point_target() {
        let f = [c(0.8, 0.0), c(0.6, 0.0)];
        let u = coherent_state_auto(&f, 1.0 / 8.0, 1e-12, 0).unwrap();
        for p in 1..=2 {
            let dist = meanfield_distance(&u, &LimitMeasure::Point(f.to_vec()), p).unwrap();
            assert!(dist < 1e-10, "{dist}");
        }
    }

    #[test]
    fn vacuum_is_flagged() {
        let space = FockSpace::new(2, 3).unwrap();
        let g = reduced_density(&FockState::vacuum(&space, 0.5).unwrap(), 1).unwrap();
        assert!(g.is_zero && g.matrix.iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn duality_with_wick_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let space = FockSpace::new(2, 6).unwrap();
        let data = linalg::random_vector(space.dim(), &mut rng);
        let u = FockState::from_vec(&space, 0.3, data, 0.0).unwrap().normalized().unwrap();
        for p in 1..=2 {
            let g = reduced_density(&u, p).unwrap();
            let eig = nalgebra::SymmetricEigen::new(g.matrix.clone());
            assert!(eig.eigenvalues.min() > -1e-10);
            assert!((g.matrix.trace().re - 1.0).abs() < 1e-10);
            for _ in 0..20 {
                let b = WickSymbol::random(2, p, p, &mut rng);
                let lhs = g.pair(b.kernel()) * g.normalization;
                let rhs = wick_expectation(&u, &PolySymbol::from(b)).unwrap();
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn wick_expectation_closed_forms() {
        let space = FockSpace::new(2, 8).unwrap();
        let u = hermite_state(&[c(1.0, 0.0), c(0.0, 0.0)], 0.125, &space).unwrap();
        let n = wick_expectation(&u, &PolySymbol::from(WickSymbol::norm_power(2, 1))).unwrap();
        assert!((n - 1.0).norm() < 1e-12);
        let k = wick_expectation(&u, &PolySymbol::from(WickSymbol::constant(2, c(0.3, -2.0)))).unwrap();
        assert!((k - c(0.3, -2.0)).norm() < 1e-12);
    }
}
