//! Limit measures with closed-form characteristic functions.

use std::f64::consts::PI;

use crate::linalg;
use crate::{Error, Result, C64};

/// `J₀(x)` by Miller's backward recurrence, normalized with
/// `J₀ + 2 Σ_k J_{2k} = 1`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-8 {
        return 1.0 - x * x / 4.0;
    }
    let start = 2 * (((x + 30.0 + 10.0 * x.sqrt()) / 2.0).ceil() as usize);
    let (mut next, mut cur) = (0.0f64, 1e-300f64);
    let mut sum = 0.0f64;
    let mut j0 = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k, next = J_{k+1} (unnormalized)
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            sum += 2.0 * cur;
        }
        if k == 1 {
            j0 = cur;
        }
        if cur.abs() > 1e250 {
            next *= 1e-250;
            cur *= 1e-250;
            sum *= 1e-250;
        }
    }
    j0 / (sum + j0)
}

/// Descriptor of a limit Wigner measure.
#[derive(Clone, Debug, PartialEq)]
pub enum LimitMeasure {
    /// `δ_f`.
    Point(Vec<C64>),
    /// `(1/2π)∫ δ_{e^{iθ}f} dθ`.
    Circle(Vec<C64>),
    /// Convex combination; weights are positive and sum to one.
    Mixture(Vec<(f64, LimitMeasure)>),
}

impl LimitMeasure {
    pub fn mixture(parts: Vec<(f64, LimitMeasure)>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|(w, _)| !(*w > 0.0)) {
            return Err(Error::InvalidArgument("mixture weights must be positive".into()));
        }
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("mixture weights sum to {total}")));
        }
        Ok(LimitMeasure::Mixture(parts))
    }

    /// `∫ e^{2iπ Re⟨ξ,z⟩} dμ(z)`.
    pub fn char_function(&self, xi: &[C64]) -> C64 {
        match self {
            LimitMeasure::Point(f) => C64::from_polar(1.0, 2.0 * PI * linalg::inner(xi, f).re),
            LimitMeasure::Circle(f) => C64::new(bessel_j0(2.0 * PI * linalg::inner(xi, f).norm()), 0.0),
            LimitMeasure::Mixture(parts) => parts.iter().map(|(w, m)| m.char_function(xi) * *w).sum(),
        }
    }

    /// `∫ |z|^{2k} dμ(z)`.
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            LimitMeasure::Point(f) | LimitMeasure::Circle(f) => linalg::norm(f).powi(2 * k as i32),
            LimitMeasure::Mixture(parts) => parts.iter().map(|(w, m)| w * m.moment(k)).sum(),
        }
    }

    /// Push-forward under a map of the one-particle space. Circles stay circles,
    /// which is correct for phase-equivariant maps such as the Hartree flow.
    pub fn push_forward(&self, phi: &impl Fn(&[C64]) -> Result<Vec<C64>>) -> Result<Self> {
        Ok(match self {
            LimitMeasure::Point(f) => LimitMeasure::Point(phi(f)?),
            LimitMeasure::Circle(f) => LimitMeasure::Circle(phi(f)?),
            LimitMeasure::Mixture(parts) => LimitMeasure::Mixture(
                parts
                    .iter()
                    .map(|(w, m)| Ok((*w, m.push_forward(phi)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    /// Atoms `(weight, f)` with circles counted once; enough for phase-invariant
    /// quantities such as reduced densities.
    pub fn atoms(&self) -> Vec<(f64, &[C64])> {
        match self {
            LimitMeasure::Point(f) | LimitMeasure::Circle(f) => vec![(1.0, f.as_slice())],
            LimitMeasure::Mixture(parts) => parts
                .iter()
                .flat_map(|(w, m)| m.atoms().into_iter().map(move |(v, f)| (w * v, f)))
                .collect(),
        }
    }
}
