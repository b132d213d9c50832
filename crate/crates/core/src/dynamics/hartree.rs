//! Hartree flow `i∂_t z = Az + ∂_z̄Q(z)`, integrated in the interaction picture
//! `z̃_t = e^{itA} z_t` with `∂_t z̃ = −i e^{itA} [∂_z̄Q](e^{−itA} z̃)`.

use std::io::Write;

use super::hamiltonian::InteractionSpec;
use crate::fock::sym::multinomial;
use crate::fock::{sym_power, SectorBasis};
use crate::linalg::{self, check_hermitian, HermitianEigen};
use crate::{CMatrix, Error, Result, C64};

/// `∂_z̄Q(z)`, component `i` being
/// `Σ_ℓ Σ_{|β|=ℓ} conj(β_i √(ℓ!/β!) z^{β−e_i}) (Q̃_ℓ z^{⊗ℓ})_β`.
pub fn dbar_q(z: &[C64], interaction: &InteractionSpec) -> Vec<C64> {
    let d = z.len();
    let mut out = vec![C64::new(0.0, 0.0); d];
    for t in interaction.terms() {
        let l = t.p();
        let basis = SectorBasis::new(d, l).expect("small sector");
        let qz = linalg::mat_vec(t.kernel(), &sym_power(z, &basis));
        for (ib, beta) in basis.iter().enumerate() {
            if qz[ib] == C64::new(0.0, 0.0) {
                continue;
            }
            let c = multinomial(beta).sqrt();
            for i in 0..d {
                if beta[i] == 0 {
                    continue;
                }
                // ∂/∂z_i of √(ℓ!/β!) z^β
                let mut mono = C64::new(beta[i] as f64 * c, 0.0);
                for (k, &bk) in beta.iter().enumerate() {
                    let e = if k == i { bk - 1 } else { bk };
                    if e > 0 {
                        mono *= z[k].powu(e);
                    }
                }
                out[i] += mono.conj() * qz[ib];
            }
        }
    }
    out
}

/// `r M Σ_{j=2}^r |z|^{2j−1}`.
pub fn velocity_bound(z_norm: f64, interaction: &InteractionSpec) -> f64 {
    let r = interaction.r();
    let m = interaction.m_bound();
    (2..=r).map(|j| z_norm.powi(2 * j as i32 - 1)).sum::<f64>() * r as f64 * m
}

/// One-particle data of the Hartree equation.
#[derive(Clone, Debug)]
pub struct HartreeFlow {
    a: CMatrix,
    a_eig: HermitianEigen,
    interaction: InteractionSpec,
}

impl HartreeFlow {
    pub fn new(a: &CMatrix, interaction: &InteractionSpec) -> Result<Self> {
        if a.nrows() != interaction.d() || a.ncols() != interaction.d() {
            return Err(Error::Shape("A and the interaction disagree on d".into()));
        }
        check_hermitian(a, "one-particle matrix A", 1e-12)?;
        Ok(HartreeFlow {
            a: a.clone(),
            a_eig: HermitianEigen::new(a),
            interaction: interaction.clone(),
        })
    }

    pub fn interaction(&self) -> &InteractionSpec {
        &self.interaction
    }

    /// `e^{itA} z`.
    pub fn free(&self, t: f64, z: &[C64]) -> Vec<C64> {
        self.a_eig.apply_exp_i(t, z)
    }

    /// `v(t, z̃) = −i e^{itA} [∂_z̄Q](e^{−itA} z̃)`.
    pub fn velocity(&self, t: f64, z_tilde: &[C64]) -> Vec<C64> {
        let z = self.free(-t, z_tilde);
        let g = dbar_q(&z, &self.interaction);
        self.free(t, &g)
            .into_iter()
            .map(|x| x * C64::new(0.0, -1.0))
            .collect()
    }

    /// `h(z) = ⟨z, Az⟩ + Q(z)`.
    pub fn energy(&self, z: &[C64]) -> f64 {
        linalg::inner(z, &linalg::mat_vec(&self.a, z)).re + self.interaction.eval(z)
    }

    fn rk4_step(&self, t: f64, h: f64, y: &[C64]) -> Vec<C64> {
        let axpy = |base: &[C64], k: &[C64], s: f64| -> Vec<C64> {
            base.iter().zip(k).map(|(b, x)| b + x * s).collect()
        };
        let k1 = self.velocity(t, y);
        let k2 = self.velocity(t + h / 2.0, &axpy(y, &k1, h / 2.0));
        let k3 = self.velocity(t + h / 2.0, &axpy(y, &k2, h / 2.0));
        let k4 = self.velocity(t + h, &axpy(y, &k3, h));
        y.iter()
            .enumerate()
            .map(|(i, yi)| yi + (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0))
            .collect()
    }
}

/// Drift tolerances; the integrator aborts at 100 times these.
#[derive(Clone, Copy, Debug)]
pub struct HartreeTolerances {
    pub mass: f64,
    pub energy: f64,
}

impl Default for HartreeTolerances {
    fn default() -> Self {
        HartreeTolerances {
            mass: 1e-8,
            energy: 1e-6,
        }
    }
}

/// Per-step log of a Hartree run in the original (not rotated) variables.
#[derive(Clone, Debug)]
pub struct HartreeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub mass_drift: Vec<f64>,
    pub energy_drift: Vec<f64>,
    /// Largest `|v| / bound` seen, with the bound of [`velocity_bound`].
    pub velocity_ratio: f64,
}

impl HartreeTrajectory {
    pub fn max_mass_drift(&self) -> f64 {
        self.mass_drift.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_energy_drift(&self) -> f64 {
        self.energy_drift.iter().copied().fold(0.0, f64::max)
    }

    /// State logged at the time closest to `t`.
    pub fn at(&self, t: f64) -> &[C64] {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("non-empty trajectory");
        &self.states[i]
    }

    /// CSV with columns `t, re_z0, im_z0, …, mass_drift, energy_drift`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        let d = self.states.first().map_or(0, |s| s.len());
        let mut header = vec!["t".to_string()];
        for i in 0..d {
            header.push(format!("re_z{i}"));
            header.push(format!("im_z{i}"));
        }
        header.push("mass_drift".into());
        header.push("energy_drift".into());
        writeln!(w, "{}", header.join(","))?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t:.17e}")];
            for z in &self.states[k] {
                row.push(format!("{:.17e}", z.re));
                row.push(format!("{:.17e}", z.im));
            }
            row.push(format!("{:.6e}", self.mass_drift[k]));
            row.push(format!("{:.6e}", self.energy_drift[k]));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Fixed-step classical RK4 on `z̃`, stepping exactly onto every requested
/// time. `times` must be non-negative and non-decreasing.
pub fn hartree_integrate(
    z0: &[C64],
    times: &[f64],
    dt: f64,
    flow: &HartreeFlow,
    tol: HartreeTolerances,
) -> Result<HartreeTrajectory> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if times.iter().any(|&t| t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be non-negative and sorted".into()));
    }
    let mass0 = linalg::norm(z0);
    let e0 = flow.energy(z0);
    let bound = velocity_bound(mass0, flow.interaction());

    let mut traj = HartreeTrajectory {
        times: vec![0.0],
        states: vec![z0.to_vec()],
        mass_drift: vec![0.0],
        energy_drift: vec![0.0],
        velocity_ratio: 0.0,
    };
    let mut t = 0.0f64;
    let mut y = z0.to_vec();
    for &target in times {
        let span = target - t;
        if span <= 0.0 {
            continue;
        }
        let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for s in 0..steps {
            if bound > 0.0 {
                let v = linalg::norm(&flow.velocity(t, &y));
                traj.velocity_ratio = traj.velocity_ratio.max(v / bound);
            }
            y = flow.rk4_step(t, h, &y);
            t = if s + 1 == steps { target } else { t + h };
            let z = flow.free(-t, &y);
            let dm = (linalg::norm(&z) - mass0).abs();
            let de = (flow.energy(&z) - e0).abs();
            if dm > 100.0 * tol.mass {
                return Err(Error::Drift {
                    what: "mass",
                    drift: dm,
                    limit: 100.0 * tol.mass,
                });
            }
            if de > 100.0 * tol.energy {
                return Err(Error::Drift {
                    what: "energy",
                    drift: de,
                    limit: 100.0 * tol.energy,
                });
            }
            traj.times.push(t);
            traj.states.push(z);
            traj.mass_drift.push(dm);
            traj.energy_drift.push(de);
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wick::{derivative_kernel, WickSymbol};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn one_mode(lambda: f64) -> InteractionSpec {
        let q = WickSymbol::new(1, 2, 2, CMatrix::from_element(1, 1, c(lambda, 0.0))).unwrap();
        InteractionSpec::new(1, vec![q]).unwrap()
    }

    #[test]
    fn zero_point_has_zero_velocity() {
        let inter = InteractionSpec::seeded_random(2, &[2, 3], 3).unwrap();
        assert!(dbar_q(&[c(0.0, 0.0); 2], &inter).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn one_mode_gradient() {
        let lambda = 0.9;
        let z = [c(0.4, -0.7)];
        let g = dbar_q(&z, &one_mode(lambda));
        assert!((g[0] - z[0] * (2.0 * lambda * z[0].norm_sqr())).norm() < 1e-14);
    }

    #[test]
    fn chain_rule_matches_derivative_kernel() {
        let inter = InteractionSpec::seeded_random(3, &[2, 3], 9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = linalg::random_vector(3, &mut rng);
        let g = dbar_q(&z, &inter);
        let mut k = vec![c(0.0, 0.0); 3];
        for t in inter.terms() {
            let dk = derivative_kernel(t, 1, 0, &z).unwrap();
            for i in 0..3 {
                k[i] += dk[(i, 0)];
            }
        }
        for i in 0..3 {
            assert!((g[i] - k[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn free_flow() {
        let a = CMatrix::from_fn(2, 2, |i, j| if i == j { c([0.3, -0.2][i], 0.0) } else { c(0.1, 0.0) });
        let flow = HartreeFlow::new(&a, &InteractionSpec::empty(2)).unwrap();
        let z0 = [c(0.8, 0.0), c(0.6, 0.0)];
        let traj = hartree_integrate(&z0, &[1.0], 1e-3, &flow, HartreeTolerances::default()).unwrap();
        let exact = flow.free(-1.0, &z0);
        let got = traj.at(1.0);
        for i in 0..2 {
            assert!((got[i] - exact[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn one_mode_closed_form() {
        let lambda = 0.7;
        let flow = HartreeFlow::new(&CMatrix::zeros(1, 1), &one_mode(lambda)).unwrap();
        let z0 = [c(0.9, 0.5)];
        let traj = hartree_integrate(&z0, &[1.0], 1e-3, &flow, HartreeTolerances::default()).unwrap();
        let m = z0[0].norm_sqr();
        let worst = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, z)| (z[0] - z0[0] * C64::from_polar(1.0, -2.0 * lambda * m * t)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        assert!(traj.max_mass_drift() < 1e-8);
    }

    #[test]
    fn stepping_lands_on_requested_times() {
        let flow = HartreeFlow::new(&CMatrix::zeros(1, 1), &one_mode(0.1)).unwrap();
        let traj = hartree_integrate(&[c(1.0, 0.0)], &[0.25, 0.5], 0.07, &flow, HartreeTolerances::default()).unwrap();
        assert!(traj.times.contains(&0.25) && traj.times.contains(&0.5));
        assert!(hartree_integrate(&[c(1.0, 0.0)], &[0.5, 0.25], 0.1, &flow, HartreeTolerances::default()).is_err());
    }

    #[test]
    fn csv_header() {
        let flow = HartreeFlow::new(&CMatrix::zeros(1, 1), &one_mode(0.1)).unwrap();
        let traj = hartree_integrate(&[c(1.0, 0.0)], &[0.01], 0.005, &flow, HartreeTolerances::default()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,re_z0,im_z0,mass_drift,energy_drift\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
