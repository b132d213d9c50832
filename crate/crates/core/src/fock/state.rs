//! Pure states on the truncated Fock space and the standard families.

use std::sync::Arc;

use super::space::FockSpace;
use super::sym::sym_power;
use crate::linalg;
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Sector-blocked coefficient vector of a pure state.
///
/// `tail_mass` is the probability discarded by the truncation, so that
/// `Σ_n ‖block_n‖² + tail_mass = 1` for the families built here.
#[derive(Clone, Debug)]
pub struct FockState {
    space: Arc<FockSpace>,
    eps: f64,
    data: Vec<C64>,
    tail_mass: f64,
}

impl FockState {
    pub fn from_vec(space: &Arc<FockSpace>, eps: f64, data: Vec<C64>, tail_mass: f64) -> Result<Self> {
        if data.len() != space.dim() {
            return Err(Error::Shape(format!(
                "state has {} coefficients, space has dimension {}",
                data.len(),
                space.dim()
            )));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
        }
        Ok(FockState {
            space: space.clone(),
            eps,
            data,
            tail_mass: tail_mass.max(0.0),
        })
    }

    pub fn vacuum(space: &Arc<FockSpace>, eps: f64) -> Result<Self> {
        let mut data = vec![ZERO; space.dim()];
        data[0] = C64::new(1.0, 0.0);
        Self::from_vec(space, eps, data, 0.0)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_max(&self) -> usize {
        self.space.n_max()
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn block(&self, n: usize) -> &[C64] {
        &self.data[self.space.range(n)]
    }

    pub fn block_norm_sqr(&self, n: usize) -> f64 {
        self.block(n).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rescaled to unit norm on the truncated space; the tail is dropped.
    pub fn normalized(&self) -> Result<FockState> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        let s = 1.0 / n2.sqrt();
        Ok(FockState {
            space: self.space.clone(),
            eps: self.eps,
            data: self.data.iter().map(|z| z * s).collect(),
            tail_mass: 0.0,
        })
    }

    /// Same state with new coefficients, e.g. after a unitary evolution.
    pub fn with_data(&self, data: Vec<C64>) -> FockState {
        assert_eq!(data.len(), self.data.len());
        FockState {
            space: self.space.clone(),
            eps: self.eps,
            data,
            tail_mass: self.tail_mass,
        }
    }

    /// `Σ_n (εn)^k ‖block_n‖²`.
    pub fn number_moment(&self, k: u32) -> f64 {
        (0..=self.n_max())
            .map(|n| (self.eps * n as f64).powi(k as i32) * self.block_norm_sqr(n))
            .sum()
    }

    /// Sharp truncation at `m` particles, renormalized, together with the trace
    /// distance `‖|u⟩⟨u| − |v⟩⟨v|‖₁ = 2√(1 − |⟨u,v⟩|²)` between the normalized
    /// input and the result.
    pub fn truncate(&self, m: usize) -> Result<(FockState, f64)> {
        if m > self.n_max() {
            return Err(Error::InvalidArgument(format!(
                "cutoff {m} exceeds n_max {}",
                self.n_max()
            )));
        }
        let total = self.norm_sqr();
        let kept: f64 = (0..=m).map(|n| self.block_norm_sqr(n)).sum();
        if kept == 0.0 {
            return Err(Error::EmptyTruncation { cutoff: m });
        }
        let s = 1.0 / kept.sqrt();
        let end = self.space.range(m).end;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, z)| if i < end { z * s } else { ZERO })
            .collect();
        let discarded = ((total - kept) / total).max(0.0);
        Ok((
            FockState {
                space: self.space.clone(),
                eps: self.eps,
                data,
                tail_mass: 0.0,
            },
            2.0 * discarded.sqrt(),
        ))
    }
}

/// `⟨u, v⟩` on the shared space.
pub fn state_inner(u: &FockState, v: &FockState) -> C64 {
    linalg::inner(u.data(), v.data())
}

/// Poisson probabilities `e^{−λ} λⁿ/n!` for `n ≤ n_top`.
fn poisson_pmf(lambda: f64, n_top: usize) -> Vec<f64> {
    // log-space avoids underflow of e^{−λ} for large λ
    let mut out = Vec::with_capacity(n_top + 1);
    let mut log_p = -lambda;
    for n in 0..=n_top {
        if n > 0 {
            log_p += lambda.ln() - (n as f64).ln();
        }
        out.push(if lambda == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            log_p.exp()
        });
    }
    out
}

/// `P(X > m)` for `X ~ Poisson(λ)`, summed directly over the upper tail.
pub fn poisson_tail(lambda: f64, m: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let top = (lambda + 60.0 * lambda.sqrt() + 200.0).ceil() as usize;
    if m >= top {
        return 0.0;
    }
    poisson_pmf(lambda, top)[m + 1..].iter().rev().sum()
}

/// Smallest `m` whose Poisson(`|f|²/ε`) tail beyond `m` is below `tail_tol`.
pub fn coherent_n_max(f_norm_sqr: f64, eps: f64, tail_tol: f64) -> usize {
    let lambda = f_norm_sqr / eps;
    let mut m = 0usize;
    while poisson_tail(lambda, m) >= tail_tol {
        m += 1;
    }
    m
}

/// Coherent state `E(f) = Σ_n e^{−|f|²/2ε} ε^{−n/2}/√(n!) f^{⊗n}` on `space`.
pub fn coherent_state(f: &[C64], eps: f64, space: &Arc<FockSpace>) -> Result<FockState> {
    if f.len() != space.d() {
        return Err(Error::Shape(format!("f has {} entries, expected {}", f.len(), space.d())));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let f2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let lambda = f2 / eps;
    let mut data = Vec::with_capacity(space.dim());
    // c_n = e^{−λ/2} ε^{−n/2} / √(n!), accumulated in log space
    let mut log_c = -0.5 * lambda;
    for n in 0..=space.n_max() {
        if n > 0 {
            log_c -= 0.5 * (eps * n as f64).ln();
        }
        let c = log_c.exp();
        data.extend(sym_power(f, space.sector(n)).into_iter().map(|z| z * c));
    }
    let tail = poisson_tail(lambda, space.n_max());
    FockState::from_vec(space, eps, data, tail)
}

/// Coherent state on the smallest truncation with tail below `tail_tol`,
/// optionally enlarged to at least `min_n_max`.
pub fn coherent_state_auto(f: &[C64], eps: f64, tail_tol: f64, min_n_max: usize) -> Result<FockState> {
    let f2: f64 = f.iter().map(|z| z.norm_sqr()).sum();
    let n_max = coherent_n_max(f2, eps, tail_tol).max(min_n_max);
    let space = FockSpace::new(f.len(), n_max)?;
    coherent_state(f, eps, &space)
}

/// Particle number `⌊1/ε⌋` of the Hermite family, robust to `ε = 1/n` roundoff.
pub fn hermite_particle_number(eps: f64) -> usize {
    (1.0 / eps + 1e-9).floor() as usize
}

/// Hermite state `f^{⊗⌊1/ε⌋}` for a unit vector `f`.
pub fn hermite_state(f: &[C64], eps: f64, space: &Arc<FockSpace>) -> Result<FockState> {
    if f.len() != space.d() {
        return Err(Error::Shape(format!("f has {} entries, expected {}", f.len(), space.d())));
    }
    let nf = linalg::norm(f);
    if (nf - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "Hermite states need |f| = 1, got |f| = {nf}"
        )));
    }
    let n = hermite_particle_number(eps);
    if n > space.n_max() {
        return Err(Error::InvalidArgument(format!(
            "Hermite sector {n} lies above n_max {}",
            space.n_max()
        )));
    }
    let mut data = vec![ZERO; space.dim()];
    let block = sym_power(f, space.sector(n));
    data[space.range(n)].copy_from_slice(&block);
    FockState::from_vec(space, eps, data, 0.0)
}

/// Normalized `(u + v)/‖u + v‖` on a shared space.
pub fn superposition(u: &FockState, v: &FockState) -> Result<FockState> {
    if !u.space().same_shape(v.space()) || u.eps() != v.eps() {
        return Err(Error::Shape("superposed states must share space and eps".into()));
    }
    let data: Vec<C64> = u.data().iter().zip(v.data()).map(|(a, b)| a + b).collect();
    FockState::from_vec(u.space(), u.eps(), data, 0.0)?.normalized()
}
