//! Characteristic functions `Tr[ρ W(√2πξ)]` of pure states and finite mixtures.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use crate::fock::{FockState, WeylFactory};
use crate::{Error, Result, C64};

/// Evaluates characteristic functions on one truncation, reusing the Weyl
/// factorization caches across probes.
pub struct CharEvaluator {
    factory: Arc<WeylFactory>,
}

impl CharEvaluator {
    pub fn new(u: &FockState) -> Result<Self> {
        Ok(CharEvaluator {
            factory: WeylFactory::new(u.space(), u.eps())?,
        })
    }

    /// `⟨u, W(√2πξ) u⟩`.
    pub fn eval(&self, u: &FockState, xi: &[C64]) -> Result<C64> {
        if !u.space().same_shape(self.factory.space()) || u.eps() != self.factory.eps() {
            return Err(Error::Shape("state does not match the evaluator".into()));
        }
        if xi.len() != u.space().d() {
            return Err(Error::Shape("probe has the wrong number of modes".into()));
        }
        let scaled: Vec<C64> = xi.iter().map(|x| x * (SQRT_2 * PI)).collect();
        Ok(self.factory.weyl(&scaled).expectation(u.data()))
    }
}

/// `Tr[|u⟩⟨u| W(√2πξ)]`.
pub fn char_function(u: &FockState, xi: &[C64]) -> Result<C64> {
    CharEvaluator::new(u)?.eval(u, xi)
}

/// `Σ_j w_j ⟨u_j, W(√2πξ) u_j⟩` for weights summing to one.
pub fn char_function_mixture(parts: &[(f64, &FockState)], xi: &[C64]) -> Result<C64> {
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument("mixture weights must be a probability vector".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (w, u) in parts {
        acc += char_function(u, xi)? * *w;
    }
    Ok(acc)
}
