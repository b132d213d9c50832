//! Fixed-seed invariant suites behind `meanfield validate`.

use std::f64::consts::PI;
use std::fmt;

use meanfield_core::dynamics::{
    dbar_q, dyson_residual, hartree_integrate, Hamiltonian, HartreeFlow, HartreeTolerances, InteractionSpec,
};
use meanfield_core::fock::{
    coherent_state, coherent_state_auto, dgamma, gamma_rep, hermite_state, ladder, number_operator, weyl_dense,
    BlockOperator, FockSpace, FockState, LadderKind, WeylFactory,
};
use meanfield_core::linalg;
use meanfield_core::wick::{commutator, compose, taylor_shift, wick_matrix, wick_oracle, wick_poly, PolySymbol, WickSymbol};
use meanfield_core::wigner::{bessel_j0, char_function, reduced_density, wick_expectation, LimitMeasure};
use meanfield_core::{CMatrix, Result, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SUITES: [&str; 13] = [
    "ccr",
    "weyl",
    "dgamma",
    "wick-oracle",
    "wick-compose",
    "wick-commutator",
    "taylor",
    "conjugation",
    "hamiltonian-routes",
    "hartree",
    "dyson",
    "wigner",
    "rdm",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Below(f64),
    AtLeast(f64),
}

#[derive(Clone, Debug)]
pub struct Check {
    pub label: String,
    pub value: f64,
    pub bound: Bound,
}

impl Check {
    pub fn below(label: impl Into<String>, value: f64, tol: f64) -> Self {
        Check {
            label: label.into(),
            value,
            bound: Bound::Below(tol),
        }
    }

    pub fn at_least(label: impl Into<String>, value: f64, min: f64) -> Self {
        Check {
            label: label.into(),
            value,
            bound: Bound::AtLeast(min),
        }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below(t) => self.value < t,
            Bound::AtLeast(m) => self.value >= m,
        }
    }

    /// Distance to the bound in decades; negative on failure.
    pub fn margin(&self) -> f64 {
        let (num, den) = match self.bound {
            Bound::Below(t) => (t, self.value),
            Bound::AtLeast(m) => (self.value, m),
        };
        if den <= 0.0 {
            return f64::INFINITY;
        }
        if !(num > 0.0) || !den.is_finite() {
            return f64::NEG_INFINITY;
        }
        (num / den).log10()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bound {
            Bound::Below(t) => write!(f, "{}: {:.3e} < {:.1e}", self.label, self.value, t),
            Bound::AtLeast(m) => write!(f, "{}: {:.3} >= {}", self.label, self.value, m),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().min_by(|a, b| a.margin().total_cmp(&b.margin()))
    }
}

pub fn run_suite(name: &str) -> Option<Result<SuiteReport>> {
    let (name, f): (&'static str, fn() -> Result<Vec<Check>>) = match name {
        "ccr" => ("ccr", ccr),
        "weyl" => ("weyl", weyl_suite),
        "dgamma" => ("dgamma", dgamma_suite),
        "wick-oracle" => ("wick-oracle", wick_oracle_suite),
        "wick-compose" => ("wick-compose", wick_compose),
        "wick-commutator" => ("wick-commutator", wick_commutator),
        "taylor" => ("taylor", taylor),
        "conjugation" => ("conjugation", conjugation),
        "hamiltonian-routes" => ("hamiltonian-routes", hamiltonian_routes),
        "hartree" => ("hartree", hartree),
        "dyson" => ("dyson", dyson),
        "wigner" => ("wigner", wigner),
        "rdm" => ("rdm", rdm),
        _ => return None,
    };
    Some(f().map(|checks| SuiteReport { name, checks }))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn block_diff(a: &BlockOperator, b: &BlockOperator, keep: impl Fn(usize) -> bool) -> Result<f64> {
    a.max_diff_where(b, keep)
}

fn ccr() -> Result<Vec<Check>> {
    let mut r = rng(1);
    let mut worst_ccr = 0.0f64;
    let mut worst_aa = 0.0f64;
    for (d, n_max) in [(1usize, 10usize), (2, 10), (3, 7)] {
        let space = FockSpace::new(d, n_max)?;
        for _ in 0..4 {
            let eps = r.gen_range(0.05..1.0);
            let z1 = linalg::random_vector(d, &mut r);
            let z2 = linalg::random_vector(d, &mut r);
            let a1 = ladder(&z1, LadderKind::Annihilate, eps, &space);
            let a2 = ladder(&z2, LadderKind::Annihilate, eps, &space);
            let c1 = ladder(&z1, LadderKind::Create, eps, &space);
            let c2 = ladder(&z2, LadderKind::Create, eps, &space);
            let comm = a1.commutator(&c2)?;
            let want = BlockOperator::identity(&space, eps).scale(linalg::inner(&z1, &z2) * eps);
            worst_ccr = worst_ccr.max(block_diff(&comm, &want, |n| n < n_max)?);
            let zero_m = BlockOperator::zeros(&space, eps, -2);
            let zero_p = BlockOperator::zeros(&space, eps, 2);
            worst_aa = worst_aa.max(block_diff(&a1.commutator(&a2)?, &zero_m, |_| true)?);
            worst_aa = worst_aa.max(block_diff(&c1.commutator(&c2)?, &zero_p, |n| n + 2 < n_max)?);
        }
    }
    Ok(vec![
        Check::below("[a(z1), a*(z2)] - eps<z1,z2> off the edge", worst_ccr, 1e-12),
        Check::below("[a, a] and [a*, a*]", worst_aa, 1e-12),
    ])
}

fn weyl_suite() -> Result<Vec<Check>> {
    let mut r = rng(2);
    let mut unitary = 0.0f64;
    let mut dense = 0.0f64;
    for (d, n_max) in [(1usize, 8usize), (2, 6), (3, 4)] {
        let space = FockSpace::new(d, n_max)?;
        let eps = 0.4;
        let factory = WeylFactory::new(&space, eps)?;
        for _ in 0..3 {
            let xi = linalg::random_vector(d, &mut r);
            let w = factory.weyl(&xi).to_dense();
            let id = CMatrix::identity(space.dim(), space.dim());
            unitary = unitary.max(linalg::max_abs_diff(&(w.adjoint() * &w), &id));
            dense = dense.max(linalg::max_abs_diff(&w, &weyl_dense(&xi, eps, &space)));
        }
    }
    // W(ξ1)W(ξ2) = e^{−(iε/2)Im⟨ξ1,ξ2⟩} W(ξ1+ξ2) on a low-tail state
    let eps = 0.1;
    let u = coherent_state_auto(&[C64::new(0.5, 0.2), C64::new(-0.3, 0.4)], eps, 1e-12, 40)?;
    let factory = WeylFactory::new(u.space(), eps)?;
    let mut product = 0.0f64;
    for _ in 0..5 {
        let x1 = linalg::random_vector(2, &mut r);
        let x2 = linalg::random_vector(2, &mut r);
        let sum: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let lhs = factory.weyl(&x1).apply(&factory.weyl(&x2).apply(u.data()));
        let phase = C64::from_polar(1.0, -eps / 2.0 * linalg::inner(&x1, &x2).im);
        let rhs = factory.weyl(&sum).apply(u.data());
        let res: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b * phase).collect();
        product = product.max(linalg::norm(&res));
    }
    // W(ξ)^* b^Wick W(ξ) = b(· + iεξ/√2)^Wick, through expectations
    let mut shift = 0.0f64;
    for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let b = WickSymbol::random(2, p, q, &mut r);
        let xi = linalg::random_vector(2, &mut r);
        let wu = factory.weyl(&xi).apply(u.data());
        let lhs = linalg::inner(&wu, &wick_matrix(&b, eps, u.space())?.apply(&wu));
        let w: Vec<C64> = xi.iter().map(|x| x * C64::new(0.0, eps / 2f64.sqrt())).collect();
        let rhs = wick_expectation(&u, &taylor_shift(&b, &w)?)?;
        shift = shift.max((lhs - rhs).norm());
    }
    Ok(vec![
        Check::below("W*W - Id", unitary, 1e-10),
        Check::below("factored vs dense exponential", dense, 1e-10),
        Check::below("Weyl product relation", product, 1e-6),
        Check::below("Weyl conjugation vs Taylor shift", shift, 1e-6),
    ])
}

fn dgamma_suite() -> Result<Vec<Check>> {
    let mut r = rng(3);
    let mut number = 0.0f64;
    let mut wick = 0.0f64;
    for (d, n_max) in [(1usize, 10usize), (2, 10), (3, 7)] {
        let space = FockSpace::new(d, n_max)?;
        let eps = r.gen_range(0.05..1.0);
        let id = CMatrix::identity(d, d);
        number = number.max(dgamma(&id, eps, &space)?.max_diff(&number_operator(eps, &space))?);
        let a = linalg::random_hermitian(d, &mut r);
        let via_symbol = wick_matrix(&WickSymbol::quadratic(&a)?, eps, &space)?;
        wick = wick.max(dgamma(&a, eps, &space)?.max_diff(&via_symbol)?);
    }
    Ok(vec![
        Check::below("dGamma(Id) - N", number, 1e-13),
        Check::below("dGamma(A) - <z,Az>^Wick", wick, 1e-12),
    ])
}

fn wick_oracle_suite() -> Result<Vec<Check>> {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut sectors = 0usize;
    for (d, n_max) in [(1usize, 10usize), (2, 10), (3, 7)] {
        let space = FockSpace::new(d, n_max)?;
        let eps = 0.5;
        for p in 0..=2 {
            for q in 0..=2 {
                let b = WickSymbol::random(d, p, q, &mut r);
                let op = wick_matrix(&b, eps, &space)?;
                for n in 0..=n_max {
                    let Some(m) = op.target(n) else { continue };
                    let fits = |k: usize| (d as u128).pow(k as u32) <= 4096;
                    if !fits(n) || !fits(m) {
                        continue;
                    }
                    let oracle = wick_oracle(&b, eps, n)?;
                    worst = worst.max(linalg::max_abs_diff(&op.block_or_zero(n).unwrap(), &oracle));
                    sectors += 1;
                }
            }
        }
    }
    Ok(vec![Check::below(
        format!("normal-ordered vs symmetrized tensor route ({sectors} sectors)"),
        worst,
        1e-12,
    )])
}

fn random_pair(r: &mut ChaCha8Rng, d: usize) -> (WickSymbol, WickSymbol) {
    let mut deg = || r.gen_range(0..=2usize);
    let (p1, q1, p2, q2) = (deg(), deg(), deg(), deg());
    (WickSymbol::random(d, p1, q1, r), WickSymbol::random(d, p2, q2, r))
}

/// Sum of a polynomial's quantizations at one shift, zero when absent.
fn poly_at_shift(poly: &PolySymbol, shift: isize, eps: f64, space: &std::sync::Arc<FockSpace>) -> Result<BlockOperator> {
    Ok(wick_poly(poly, eps, space)?
        .remove(&shift)
        .unwrap_or_else(|| BlockOperator::zeros(space, eps, shift)))
}

fn wick_compose() -> Result<Vec<Check>> {
    let mut r = rng(5);
    let eps = 0.25;
    let space = FockSpace::new(2, 8)?;
    let n_max = space.n_max() as isize;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (b1, b2) = random_pair(&mut r, 2);
        let exact = wick_matrix(&b1, eps, &space)?.compose(&wick_matrix(&b2, eps, &space)?)?;
        let sym = poly_at_shift(&compose(&b1, &b2, eps)?, exact.shift(), eps, &space)?;
        let mid_ok = |n: usize| (0..=n_max).contains(&(n as isize + b2.shift()));
        worst = worst.max(exact.max_diff_where(&sym, mid_ok)?);
    }
    Ok(vec![Check::below("b1^W b2^W - (b1 # b2)^W, 20 pairs", worst, 1e-10)])
}

fn wick_commutator() -> Result<Vec<Check>> {
    let mut r = rng(6);
    let eps = 0.25;
    let space = FockSpace::new(2, 8)?;
    let n_max = space.n_max() as isize;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (b1, b2) = random_pair(&mut r, 2);
        let o1 = wick_matrix(&b1, eps, &space)?;
        let o2 = wick_matrix(&b2, eps, &space)?;
        let exact = o1.commutator(&o2)?;
        let sym = poly_at_shift(&commutator(&b1, &b2, eps)?, exact.shift(), eps, &space)?;
        let mid_ok = |n: usize| {
            let n = n as isize;
            (0..=n_max).contains(&(n + b1.shift())) && (0..=n_max).contains(&(n + b2.shift()))
        };
        worst = worst.max(exact.max_diff_where(&sym, mid_ok)?);
    }
    Ok(vec![Check::below("[b1^W, b2^W] - {b1, b2}^W, 20 pairs", worst, 1e-10)])
}

fn taylor() -> Result<Vec<Check>> {
    let mut r = rng(7);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (p, q) = (r.gen_range(0..=3usize), r.gen_range(0..=3usize));
        let b = WickSymbol::random(3, p, q, &mut r);
        let z = linalg::random_vector(3, &mut r);
        let w = linalg::random_vector(3, &mut r);
        let zw: Vec<C64> = z.iter().zip(&w).map(|(a, c)| a + c).collect();
        worst = worst.max((taylor_shift(&b, &w)?.eval(&z) - b.eval(&zw)).norm());
    }
    Ok(vec![Check::below("sum of shifted terms at z vs b(z + w), 20 points", worst, 1e-10)])
}

fn conjugation() -> Result<Vec<Check>> {
    let mut r = rng(8);
    let d = 2;
    let space = FockSpace::new(d, 8)?;
    let pair = FockSpace::new(d, 2)?;
    let eps = 0.3;
    let mut worst = 0.0f64;
    for _ in 0..6 {
        let a = linalg::random_hermitian(d, &mut r);
        let t = r.gen_range(0.1..1.5);
        let free = dgamma(&a, eps, &space)?;
        let g = gamma_rep(&linalg::exp_i_hermitian(&a, t), &pair);
        let (p, q) = (r.gen_range(0..=2usize), r.gen_range(0..=2usize));
        let b = WickSymbol::random(d, p, q, &mut r);
        let op = wick_matrix(&b, eps, &space)?;
        let rotated = WickSymbol::new(d, p, q, &g[q] * b.kernel() * g[p].adjoint())?;
        let rhs = wick_matrix(&rotated, eps, &space)?;
        for n in 0..=space.n_max() {
            let Some(m) = op.target(n) else { continue };
            let left = linalg::exp_i_hermitian(&free.block_or_zero(m).unwrap(), t / eps);
            let right = linalg::exp_i_hermitian(&free.block_or_zero(n).unwrap(), -t / eps);
            let lhs = left * op.block_or_zero(n).unwrap() * right;
            worst = worst.max(linalg::max_abs_diff(&lhs, &rhs.block_or_zero(n).unwrap()));
        }
    }
    Ok(vec![Check::below("free conjugation vs rotated kernel", worst, 1e-10)])
}

fn hamiltonian_routes() -> Result<Vec<Check>> {
    let mut r = rng(9);
    let mut worst = 0.0f64;
    for (d, n_max, orders) in [(1usize, 10usize, vec![2usize, 3]), (2, 10, vec![2]), (2, 8, vec![2, 3]), (3, 6, vec![2])] {
        let a = linalg::random_hermitian(d, &mut r);
        let inter = InteractionSpec::seeded_random(d, &orders, r.gen())?;
        let space = FockSpace::new(d, n_max)?;
        let h = Hamiltonian::assemble(&a, &inter, r.gen_range(0.05..0.5), &space)?;
        worst = worst.max(h.route_deviation());
    }
    Ok(vec![Check::below("Wick-quantized vs tensor-space Hamiltonian", worst, 1e-10)])
}

/// Central-difference `∂_z̄ Q = ½(∂_x + i∂_y) Q` for real `Q`.
fn fd_gradient(z: &[C64], inter: &InteractionSpec, h: f64) -> Vec<C64> {
    (0..z.len())
        .map(|i| {
            let shifted = |dz: C64| {
                let mut w = z.to_vec();
                w[i] += dz;
                inter.eval(&w)
            };
            let dx = (shifted(C64::new(h, 0.0)) - shifted(C64::new(-h, 0.0))) / (2.0 * h);
            let dy = (shifted(C64::new(0.0, h)) - shifted(C64::new(0.0, -h))) / (2.0 * h);
            C64::new(dx, dy) * 0.5
        })
        .collect()
}

fn hartree() -> Result<Vec<Check>> {
    let mut r = rng(10);
    let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => C64::new(0.3, 0.0),
        (1, 1) => C64::new(-0.2, 0.0),
        (0, 1) => C64::new(0.1, 0.05),
        _ => C64::new(0.1, -0.05),
    });
    let mut mass = 0.0f64;
    let mut energy = 0.0f64;
    for orders in [vec![2usize], vec![2, 3]] {
        let inter = InteractionSpec::seeded_random(2, &orders, 11)?;
        let flow = HartreeFlow::new(&a, &inter)?;
        let traj = hartree_integrate(&[C64::new(0.8, 0.0), C64::new(0.6, 0.0)], &[1.0], 1e-3, &flow, HartreeTolerances::default())?;
        mass = mass.max(traj.max_mass_drift());
        energy = energy.max(traj.max_energy_drift());
    }
    let lambda = 0.7;
    let one = InteractionSpec::new(1, vec![WickSymbol::new(1, 2, 2, CMatrix::from_element(1, 1, C64::new(lambda, 0.0)))?])?;
    let flow = HartreeFlow::new(&CMatrix::zeros(1, 1), &one)?;
    let z0 = C64::new(0.9, 0.5);
    let traj = hartree_integrate(&[z0], &[1.0], 1e-3, &flow, HartreeTolerances::default())?;
    let closed = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, z)| (z[0] - z0 * C64::from_polar(1.0, -2.0 * lambda * z0.norm_sqr() * t)).norm())
        .fold(0.0, f64::max);
    let inter = InteractionSpec::seeded_random(3, &[2, 3], 12)?;
    let mut grad = 0.0f64;
    for _ in 0..10 {
        let z = linalg::random_vector(3, &mut r);
        let g = dbar_q(&z, &inter);
        let fd = fd_gradient(&z, &inter, 1e-5);
        let diff: Vec<C64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        grad = grad.max(linalg::norm(&diff) / linalg::norm(&g));
    }
    Ok(vec![
        Check::below("mass drift over [0,1]", mass, 1e-8),
        Check::below("energy drift over [0,1]", energy, 1e-6),
        Check::below("one-mode closed form", closed, 1e-8),
        Check::below("Wirtinger gradient vs finite differences (relative)", grad, 1e-6),
    ])
}

/// The setting shared by the Dyson checks: d = 2, quadratic interaction,
/// coherent data.
pub fn dyson_setting(n_max: usize) -> Result<(Hamiltonian, FockState)> {
    let eps = 0.125;
    let a = CMatrix::from_fn(2, 2, |i, j| if i == j { C64::new([0.3, -0.2][i], 0.0) } else { C64::new(0.05, 0.0) });
    let inter = InteractionSpec::seeded_random(2, &[2], 17)?;
    let space = FockSpace::new(2, n_max)?;
    let h = Hamiltonian::assemble(&a, &inter, eps, &space)?;
    let u = coherent_state(&[C64::new(0.8, 0.0), C64::new(0.6, 0.0)], eps, &space)?;
    Ok((h, u))
}

/// `log₂(|I_n − I_{2n}| / |I_{2n} − I_{4n}|)` from Simpson values at `n, 2n, 4n`.
pub fn self_convergence_order(values: [C64; 3]) -> f64 {
    ((values[0] - values[1]).norm() / (values[1] - values[2]).norm()).log2()
}

fn dyson() -> Result<Vec<Check>> {
    let (h, u) = dyson_setting(48)?;
    let xi = [C64::new(0.3, -0.1), C64::new(0.2, 0.25)];
    let t = 0.5;
    let main = dyson_residual(&u, &xi, t, &h, 200, false)?;
    let coarse: Vec<C64> = [4usize, 8, 16]
        .iter()
        .map(|&n| dyson_residual(&u, &xi, t, &h, n, false).map(|r| r.integral))
        .collect::<Result<_>>()?;
    let order = self_convergence_order([coarse[0], coarse[1], coarse[2]]);
    let forms = dyson_residual(&u, &xi, t, &h, 8, true)?.max_form_mismatch.unwrap_or(f64::INFINITY);
    Ok(vec![
        Check::below("residual at n_quad = 200", main.residual, 1e-4),
        Check::at_least("Simpson self-convergence order", order, 3.5),
        Check::below("commutator vs shift form of the integrand", forms, 1e-8),
    ])
}

fn wigner() -> Result<Vec<Check>> {
    let mut r = rng(13);
    let f = [C64::new(0.8, 0.1), C64::new(-0.2, 0.55)];
    let mut coherent = 0.0f64;
    for eps in [0.25, 0.125, 0.0625] {
        let u = coherent_state_auto(&f, eps, 1e-10, 0)?;
        for _ in 0..6 {
            let xi: Vec<C64> = linalg::random_vector(2, &mut r).iter().map(|z| z * 0.5).collect();
            let want = C64::from_polar(1.0, 2.0 * PI * linalg::inner(&xi, &f).re)
                * (-eps * PI * PI * linalg::norm(&xi).powi(2) / 2.0).exp();
            coherent = coherent.max((char_function(&u, &xi)? - want).norm());
        }
    }
    let mut hermite = 0.0f64;
    for n in [4usize, 8, 16] {
        let eps = 1.0 / n as f64;
        let g = [C64::new(0.6, 0.0), C64::new(0.0, 0.8)];
        let u = hermite_state(&g, eps, &FockSpace::new(2, n)?)?;
        for k in 0..=4 {
            hermite = hermite.max((u.number_moment(k) - (eps * n as f64).powi(k as i32)).abs());
        }
    }
    let mut circle = 0.0f64;
    for _ in 0..50 {
        let g = linalg::random_vector(3, &mut r);
        let xi = linalg::random_vector(3, &mut r);
        let m = 256;
        let quad = (0..m)
            .map(|k| {
                let ph = C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
                (2.0 * PI * (linalg::inner(&xi, &g) * ph).re).cos()
            })
            .sum::<f64>()
            / m as f64;
        circle = circle.max((LimitMeasure::Circle(g.clone()).char_function(&xi).re - quad).abs());
    }
    let zero = (bessel_j0(0.0) - 1.0).abs();
    Ok(vec![
        Check::below("coherent characteristic function, tail 1e-10", coherent, 1e-6),
        Check::below("Hermite moments (eps n)^k", hermite, 1e-12),
        Check::below("circle measure vs theta quadrature, 50 draws", circle, 1e-10),
        Check::below("J0(0) - 1", zero, 1e-15),
    ])
}

fn rdm() -> Result<Vec<Check>> {
    let mut r = rng(14);
    let space = FockSpace::new(2, 6)?;
    let mut duality = 0.0f64;
    let mut trace = 0.0f64;
    let mut negativity = 0.0f64;
    for _ in 0..3 {
        let data = linalg::random_vector(space.dim(), &mut r);
        let u = FockState::from_vec(&space, 0.3, data, 0.0)?.normalized()?;
        for p in 1..=2 {
            let g = reduced_density(&u, p)?;
            trace = trace.max((g.matrix.trace().re - 1.0).abs());
            let eig = linalg::HermitianEigen::new(&g.matrix);
            negativity = negativity.max(eig.values.iter().fold(0.0f64, |a, &v| a.max(-v)));
            for _ in 0..20 {
                let b = WickSymbol::random(2, p, p, &mut r);
                let lhs = g.pair(b.kernel()) * g.normalization;
                let rhs = wick_expectation(&u, &PolySymbol::from(b))?;
                duality = duality.max((lhs - rhs).norm());
            }
        }
    }
    Ok(vec![
        Check::below("Tr[gamma b] N_p - <u, b^W u>, 20 kernels per order", duality, 1e-10),
        Check::below("|Tr gamma - 1|", trace, 1e-10),
        Check::below("most negative eigenvalue", negativity, 1e-10),
    ])
}
