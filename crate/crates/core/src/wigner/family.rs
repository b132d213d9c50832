//! ε-indexed families of initial states and the moment diagnostic.

use serde::{Deserialize, Serialize};

use super::measure::LimitMeasure;
use crate::fock::state::{coherent_n_max, hermite_particle_number};
use crate::fock::{coherent_state, hermite_state, superposition, FockSpace, FockState};
use crate::linalg;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// `E(f_ε)`.
    Coherent,
    /// `f_ε^{⊗⌊1/ε⌋}`.
    Hermite,
    /// Normalized `u^{⊗⌊1/ε⌋} + E(f_ε)`.
    Superposition,
}

/// Escaping-mode schedule: the first `persistent` modes carry `f₀` and
/// `f_ε = f₀ + √(1 − |f₀|²) e_{m(ε)}` with
/// `m(ε) = persistent + (⌊log₂(1/ε)⌋ mod n_escaping)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EscapingSchedule {
    pub persistent: usize,
    pub n_escaping: usize,
}

impl EscapingSchedule {
    pub fn mode(&self, eps: f64) -> usize {
        let level = (1.0 / eps).log2().floor().max(0.0) as usize;
        self.persistent + level % self.n_escaping
    }
}

#[derive(Clone, Debug)]
pub struct EpsilonFamily {
    kind: FamilyKind,
    f0: Vec<C64>,
    u: Option<Vec<C64>>,
    escaping: Option<EscapingSchedule>,
}

fn unit(v: &[C64], what: &str) -> Result<()> {
    let n = linalg::norm(v);
    if (n - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("{what} must have unit norm, got {n}")));
    }
    Ok(())
}

impl EpsilonFamily {
    /// `u` is the Hermite part of a superposition and ignored otherwise.
    pub fn new(
        kind: FamilyKind,
        f0: Vec<C64>,
        u: Option<Vec<C64>>,
        escaping: Option<EscapingSchedule>,
    ) -> Result<Self> {
        let d = f0.len();
        if d == 0 {
            return Err(Error::Shape("empty one-particle vector".into()));
        }
        if let Some(s) = escaping {
            if s.n_escaping == 0 || s.persistent + s.n_escaping > d {
                return Err(Error::InvalidArgument(format!(
                    "escaping schedule needs persistent + n_escaping ≤ d = {d}"
                )));
            }
            if f0[s.persistent..].iter().any(|z| z.norm() != 0.0) {
                return Err(Error::InvalidArgument("f0 must vanish on the escaping modes".into()));
            }
            if linalg::norm(&f0) > 1.0 {
                return Err(Error::InvalidArgument("escaping schedule needs |f0| ≤ 1".into()));
            }
        } else if kind == FamilyKind::Hermite {
            unit(&f0, "Hermite vector f")?;
        }
        let u = match kind {
            FamilyKind::Superposition => {
                let u = u.ok_or_else(|| Error::InvalidArgument("superposition needs a Hermite vector u".into()))?;
                if u.len() != d {
                    return Err(Error::Shape("u and f0 have different lengths".into()));
                }
                unit(&u, "Hermite vector u")?;
                Some(u)
            }
            _ => None,
        };
        Ok(EpsilonFamily { kind, f0, u, escaping })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn d(&self) -> usize {
        self.f0.len()
    }

    pub fn escaping(&self) -> Option<EscapingSchedule> {
        self.escaping
    }

    /// `f_ε`.
    pub fn vector(&self, eps: f64) -> Vec<C64> {
        let mut f = self.f0.clone();
        if let Some(s) = self.escaping {
            let rest = (1.0 - linalg::norm(&self.f0).powi(2)).max(0.0).sqrt();
            f[s.mode(eps)] += C64::new(rest, 0.0);
        }
        f
    }

    /// Truncation level used for `state(eps, tail_tol)`.
    pub fn n_max(&self, eps: f64, tail_tol: f64) -> usize {
        let f = self.vector(eps);
        match self.kind {
            FamilyKind::Coherent => coherent_n_max(linalg::norm(&f).powi(2), eps, tail_tol),
            FamilyKind::Hermite => hermite_particle_number(eps),
            FamilyKind::Superposition => {
                coherent_n_max(linalg::norm(&f).powi(2), eps, tail_tol).max(hermite_particle_number(eps))
            }
        }
    }

    /// Normalized initial state, with at least `min_n_max` particles of room.
    pub fn state(&self, eps: f64, tail_tol: f64, min_n_max: usize) -> Result<FockState> {
        let space = FockSpace::new(self.d(), self.n_max(eps, tail_tol).max(min_n_max))?;
        self.state_on(eps, &space)
    }

    pub fn state_on(&self, eps: f64, space: &std::sync::Arc<FockSpace>) -> Result<FockState> {
        let f = self.vector(eps);
        match self.kind {
            FamilyKind::Coherent => coherent_state(&f, eps, space),
            FamilyKind::Hermite => hermite_state(&f, eps, space),
            FamilyKind::Superposition => {
                let h = hermite_state(self.u.as_ref().expect("checked in new"), eps, space)?;
                superposition(&h, &coherent_state(&f, eps, space)?)
            }
        }
    }

    /// Limit measure of the family at time zero.
    pub fn limit_measure(&self) -> LimitMeasure {
        match self.kind {
            FamilyKind::Coherent => LimitMeasure::Point(self.f0.clone()),
            FamilyKind::Hermite => LimitMeasure::Circle(self.f0.clone()),
            FamilyKind::Superposition => LimitMeasure::Mixture(vec![
                (0.5, LimitMeasure::Circle(self.u.clone().expect("checked in new"))),
                (0.5, LimitMeasure::Point(self.f0.clone())),
            ]),
        }
    }
}

/// One line of the moment diagnostic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiRow {
    pub eps: f64,
    pub k: u32,
    /// `Tr[ρ_ε N^k]`.
    pub moment: f64,
    /// `∫ |z|^{2k} dμ₀`.
    pub measure_moment: f64,
    pub gap: f64,
}

/// `Tr[ρ_ε N^k]` against the limit-measure moments, for every `(ε, k)`.
pub fn pi_diagnostic(family: &EpsilonFamily, eps_list: &[f64], k_list: &[u32], tail_tol: f64) -> Result<Vec<PiRow>> {
    let mu = family.limit_measure();
    let mut rows = Vec::with_capacity(eps_list.len() * k_list.len());
    for &eps in eps_list {
        let u = family.state(eps, tail_tol, 0)?;
        for &k in k_list {
            let moment = u.number_moment(k);
            let measure_moment = mu.moment(k);
            rows.push(PiRow {
                eps,
                k,
                moment,
                measure_moment,
                gap: (moment - measure_moment).abs(),
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn escaping_vector_is_unit_and_moves() {
        let s = EscapingSchedule { persistent: 2, n_escaping: 2 };
        let fam = EpsilonFamily::new(FamilyKind::Hermite, vec![c(0.5), c(0.5), c(0.0), c(0.0)], None, Some(s)).unwrap();
        let a = fam.vector(1.0 / 8.0);
        let b = fam.vector(1.0 / 16.0);
        assert!((linalg::norm(&a) - 1.0).abs() < 1e-15);
        assert_ne!(a, b);
        assert_eq!(s.mode(1.0 / 8.0), 3);
        assert_eq!(s.mode(1.0 / 16.0), 2);
    }

    #[test]
    fn moment_gap_for_escaping_hermite() {
        let s = EscapingSchedule { persistent: 2, n_escaping: 2 };
        let f0 = vec![c(0.5), c(0.5), c(0.0), c(0.0)];
        let fam = EpsilonFamily::new(FamilyKind::Hermite, f0, None, Some(s)).unwrap();
        let rows = pi_diagnostic(&fam, &[0.125, 0.0625], &[0, 1, 2], 1e-10).unwrap();
        for r in rows {
            match r.k {
                0 => assert!(r.gap < 1e-14),
                1 => assert!((r.moment - 1.0).abs() < 1e-12 && (r.gap - 0.5).abs() < 1e-12),
                _ => assert!((r.measure_moment - 0.25).abs() < 1e-12),
            }
        }
    }

    #[test]
    fn coherent_without_escape_has_no_gap() {
        let fam = EpsilonFamily::new(FamilyKind::Coherent, vec![c(0.8), c(0.6)], None, None).unwrap();
        let rows = pi_diagnostic(&fam, &[0.125], &[1], 1e-12).unwrap();
        assert!(rows[0].gap < 1e-10);
    }

    #[test]
    fn validation() {
        assert!(EpsilonFamily::new(FamilyKind::Hermite, vec![c(0.9), c(0.0)], None, None).is_err());
        assert!(EpsilonFamily::new(FamilyKind::Superposition, vec![c(0.9), c(0.0)], None, None).is_err());
        let s = EscapingSchedule { persistent: 1, n_escaping: 1 };
        assert!(EpsilonFamily::new(FamilyKind::Coherent, vec![c(0.5), c(0.1)], None, Some(s)).is_err());
    }

    #[test]
    fn superposition_state_is_normalized() {
        let fam = EpsilonFamily::new(
            FamilyKind::Superposition,
            vec![c(0.8), c(0.6)],
            Some(vec![c(0.0), c(1.0)]),
            None,
        )
        .unwrap();
        let u = fam.state(0.125, 1e-10, 0).unwrap();
        assert!((u.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(matches!(fam.limit_measure(), LimitMeasure::Mixture(_)));
    }
}
