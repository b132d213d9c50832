//! Integral identity for the interaction-picture characteristic function
//!
//! `Tr[ρ̃(t)W] − Tr[ρW] = ∫_0^t (i/ε) Tr[ρ̃(s)(Q_s W − W Q_s)] ds`,
//!
//! with `W = W(√2πξ)` and `Q_s = e^{isH₀/ε} Q^Wick e^{−isH₀/ε}`. The integrand
//! is also available in shift form `(i/ε)⟨ũ, W (Q_s(·+iπεξ) − Q_s)^Wick ũ⟩`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::hamiltonian::{Hamiltonian, Picture};
use crate::fock::{gamma_rep, FockState, WeylFactory, WeylOperator};
use crate::linalg;
use crate::wick::{taylor_shift, wick_matrix, WickSymbol};
use crate::{Error, Result, C64};

/// Outcome of one identity check.
#[derive(Clone, Debug)]
pub struct DysonReport {
    /// `Tr[ρ̃(t)W] − Tr[ρW]`.
    pub lhs: C64,
    /// Composite-Simpson value of the right-hand side.
    pub integral: C64,
    /// `|lhs − integral|`.
    pub residual: f64,
    /// Largest gap between the commutator and shift forms of the integrand,
    /// when the shift form was evaluated.
    pub max_form_mismatch: Option<f64>,
}

/// `Q_s` as a list of symbols: kernels `Γ_ℓ(e^{isA}) Q̃_ℓ Γ_ℓ(e^{−isA})`.
pub fn rotated_interaction(h: &Hamiltonian, s: f64) -> Result<Vec<WickSymbol>> {
    let d = h.space().d();
    let u = linalg::exp_i_hermitian(h.one_particle(), s);
    let r = h.interaction().r();
    let probe = crate::fock::FockSpace::new(d, r)?;
    let reps = gamma_rep(&u, &probe);
    h.interaction()
        .terms()
        .iter()
        .map(|t| {
            let g = &reps[t.p()];
            WickSymbol::new(d, t.p(), t.q(), g * t.kernel() * g.adjoint())
        })
        .collect()
}

/// Evaluates the integrand in both forms at one node.
struct Integrand<'a> {
    h: &'a Hamiltonian,
    u: &'a FockState,
    w: WeylOperator,
    shift: Vec<C64>,
}

impl Integrand<'_> {
    fn state(&self, s: f64) -> Result<FockState> {
        super::hamiltonian::evolve(self.u, s, self.h, Picture::Interaction)
    }

    /// `(i/ε)(⟨Q_s ũ, W ũ⟩ − ⟨ũ, W Q_s ũ⟩)`.
    fn commutator_form(&self, s: f64, ut: &[C64]) -> C64 {
        let h = self.h;
        let q_u = h.free_rotate(s, &h.apply_interaction(&h.free_rotate(-s, ut)));
        let val = linalg::inner(&q_u, &self.w.apply(ut)) - linalg::inner(ut, &self.w.apply(&q_u));
        val * C64::new(0.0, 1.0 / h.eps())
    }

    fn shift_form(&self, s: f64, ut: &[C64]) -> Result<C64> {
        let h = self.h;
        let space = h.space();
        let mut acc = vec![C64::new(0.0, 0.0); ut.len()];
        for qs in rotated_interaction(h, s)? {
            let (p, q) = (qs.p(), qs.q());
            for term in taylor_shift(&qs, &self.shift)?.terms() {
                if term.p() == p && term.q() == q {
                    continue;
                }
                let v = wick_matrix(term, h.eps(), space)?.apply(ut);
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
            }
        }
        Ok(linalg::inner(ut, &self.w.apply(&acc)) * C64::new(0.0, 1.0 / h.eps()))
    }
}

/// Checks the identity at time `t` with `n_quad` Simpson subintervals (even).
/// `check_forms` additionally evaluates the shift form at every node.
pub fn dyson_residual(
    u: &FockState,
    xi: &[C64],
    t: f64,
    h: &Hamiltonian,
    n_quad: usize,
    check_forms: bool,
) -> Result<DysonReport> {
    if n_quad == 0 || !n_quad.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "n_quad must be a positive even number, got {n_quad}"
        )));
    }
    if xi.len() != h.space().d() {
        return Err(Error::Shape("probe has the wrong number of modes".into()));
    }
    let factory: Arc<WeylFactory> = WeylFactory::new(h.space(), h.eps())?;
    let scaled: Vec<C64> = xi.iter().map(|x| x * (2f64.sqrt() * PI)).collect();
    let integrand = Integrand {
        h,
        u,
        w: factory.weyl(&scaled),
        shift: xi.iter().map(|x| x * C64::new(0.0, PI * h.eps())).collect(),
    };

    let step = t / n_quad as f64;
    let mut integral = C64::new(0.0, 0.0);
    let mut mismatch = check_forms.then_some(0.0f64);
    let mut end = C64::new(0.0, 0.0);
    for k in 0..=n_quad {
        let s = k as f64 * step;
        let ut = integrand.state(s)?;
        let f = integrand.commutator_form(s, ut.data());
        if let Some(m) = mismatch.as_mut() {
            let g = integrand.shift_form(s, ut.data())?;
            *m = m.max((f - g).norm());
        }
        let weight = if k == 0 || k == n_quad {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        integral += f * (weight * step / 3.0);
        if k == n_quad {
            end = integrand.w.expectation(ut.data());
        }
    }
    let lhs = end - integrand.w.expectation(u.data());
    Ok(DysonReport {
        lhs,
        integral,
        residual: (lhs - integral).norm(),
        max_form_mismatch: mismatch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::InteractionSpec;
    use crate::fock::{coherent_state, FockSpace};
    use crate::wick::wick_matrix;
    use crate::CMatrix;

    fn setup(n_max: usize) -> (Hamiltonian, FockState) {
        let eps = 0.25;
        let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => C64::new(0.3, 0.0),
            (1, 1) => C64::new(-0.2, 0.0),
            (0, 1) => C64::new(0.05, 0.02),
            _ => C64::new(0.05, -0.02),
        });
        let inter = InteractionSpec::seeded_random(2, &[2], 4).unwrap();
        let space = FockSpace::new(2, n_max).unwrap();
        let h = Hamiltonian::assemble(&a, &inter, eps, &space).unwrap();
        let f = [C64::new(0.8, 0.0), C64::new(0.0, 0.6)];
        (h, coherent_state(&f, eps, &space).unwrap())
    }

    #[test]
    fn rotated_symbol_matches_operator_conjugation() {
        let (h, _) = setup(5);
        let s = 0.7;
        let qs = rotated_interaction(&h, s).unwrap();
        let op = wick_matrix(&qs[0], h.eps(), h.space()).unwrap();
        let v = crate::linalg::random_vector(h.space().dim(), &mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(2));
        let direct = h.free_rotate(s, &h.apply_interaction(&h.free_rotate(-s, &v)));
        let via = op.apply(&v);
        let diff = direct.iter().zip(&via).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn identity_and_forms() {
        let (h, u) = setup(32);
        let xi = [C64::new(0.3, -0.1), C64::new(0.2, 0.25)];
        let r = dyson_residual(&u, &xi, 0.5, &h, 64, true).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        assert!(r.max_form_mismatch.unwrap() < 1e-8, "{r:?}");
        assert!(r.lhs.norm() > 1e-4);
    }

    #[test]
    fn odd_panels_rejected() {
        let (h, u) = setup(4);
        assert!(dyson_residual(&u, &[C64::new(0.1, 0.0); 2], 0.5, &h, 7, false).is_err());
    }
}
