//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the log.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use meanfield::config::{parse_config, ExperimentConfig};
use meanfield::suites::run_suite;
use meanfield::sweep::{run_sweep, write_results, ResultRow, SweepOptions};
use meanfield_core::dynamics::{dbar_q, dyson_residual, hartree_integrate, Hamiltonian, HartreeFlow, HartreeTolerances, InteractionSpec};
use meanfield_core::fock::{coherent_state, coherent_state_auto, hermite_state, FockSpace, WeylFactory};
use meanfield_core::linalg;
use meanfield_core::wick::{taylor_shift, wick_matrix, WickSymbol};
use meanfield_core::wigner::{char_function, wick_expectation};
use meanfield_core::{CMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const SUITE_BUDGET: Duration = Duration::from_secs(30);
const EXACT_SUITES: [&str; 8] = [
    "ccr",
    "dgamma",
    "wick-oracle",
    "hamiltonian-routes",
    "wick-compose",
    "wick-commutator",
    "conjugation",
    "taylor",
];
// criterion 2
const COHERENT_CHAR_TOL: f64 = 1e-6;
const HERMITE_MOMENT_TOL: f64 = 1e-12;
const WEYL_PRODUCT_TOL: f64 = 1e-6;
const WEYL_SHIFT_TOL: f64 = 1e-6;
// criterion 3
const MASS_TOL: f64 = 1e-8;
const ENERGY_TOL: f64 = 1e-6;
const CLOSED_FORM_TOL: f64 = 1e-8;
const GRADIENT_REL_TOL: f64 = 1e-6;
// criterion 4
const DYSON_TOL: f64 = 1e-4;
const DYSON_MIN_ORDER: f64 = 3.5;
// criterion 5
const SWEEP_BUDGET: Duration = Duration::from_secs(600);
const RDM_AT_FINEST: f64 = 0.15;
// criterion 6
const PI_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn scaled(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|x| x * s).collect()
}

fn exact_algebra() -> Outcome {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut worst = Vec::new();
    for name in EXACT_SUITES {
        match run_suite(name).expect("known suite") {
            Ok(r) => {
                if !r.passed() {
                    failed.push(name.to_string());
                }
                if let Some(w) = r.worst() {
                    worst.push(format!("{name} {:.1e}", w.value));
                }
            }
            Err(e) => failed.push(format!("{name} ({e})")),
        }
    }
    let elapsed = start.elapsed();
    let pass = failed.is_empty() && elapsed < SUITE_BUDGET;
    outcome(
        pass,
        format!("{:.2}s; worst: {}; failed: [{}]", elapsed.as_secs_f64(), worst.join(", "), failed.join(", ")),
    )
}

fn closed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let f = [c(0.8, 0.1), c(-0.2, 0.55)];
    let mut coherent = 0.0f64;
    for eps in [0.25, 0.125, 0.0625, 0.03125] {
        let u = coherent_state_auto(&f, eps, 1e-10, 0).unwrap();
        for _ in 0..8 {
            let xi = scaled(&linalg::random_vector(2, &mut rng), c(rng.gen_range(0.1..1.0), 0.0));
            let phase = 2.0 * PI * linalg::inner(&xi, &f).re;
            let want = C64::from_polar(1.0, phase) * (-eps * PI * PI * linalg::norm(&xi).powi(2) / 2.0).exp();
            coherent = coherent.max((char_function(&u, &xi).unwrap() - want).norm());
        }
    }

    let mut moments = 0.0f64;
    let g = [c(0.6, 0.0), c(0.0, 0.8)];
    for (eps, n) in [(0.125, 8usize), (0.0625, 16), (0.3, 3), (0.15, 6)] {
        let u = hermite_state(&g, eps, &FockSpace::new(2, n).unwrap()).unwrap();
        for k in 0..=4u32 {
            moments = moments.max((u.number_moment(k) - (eps * n as f64).powi(k as i32)).abs());
        }
    }

    let eps = 0.1;
    let h = [c(0.5, 0.2), c(-0.3, 0.4)];
    let u = coherent_state_auto(&h, eps, 1e-12, 40).unwrap();
    let factory = WeylFactory::new(u.space(), eps).unwrap();
    let mut product = 0.0f64;
    for _ in 0..8 {
        let x1 = linalg::random_vector(2, &mut rng);
        let x2 = linalg::random_vector(2, &mut rng);
        let sum: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let lhs = factory.weyl(&x1).apply(&factory.weyl(&x2).apply(u.data()));
        let phase = C64::from_polar(1.0, -eps / 2.0 * linalg::inner(&x1, &x2).im);
        let rhs = factory.weyl(&sum).apply(u.data());
        let res: Vec<C64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b * phase).collect();
        product = product.max(linalg::norm(&res));
    }
    let mut shift = 0.0f64;
    for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2), (0, 2)] {
        let b = WickSymbol::random(2, p, q, &mut rng);
        let xi = linalg::random_vector(2, &mut rng);
        let wu = factory.weyl(&xi).apply(u.data());
        let lhs = linalg::inner(&wu, &wick_matrix(&b, eps, u.space()).unwrap().apply(&wu));
        let rhs = wick_expectation(&u, &taylor_shift(&b, &scaled(&xi, c(0.0, eps / 2f64.sqrt()))).unwrap()).unwrap();
        shift = shift.max((lhs - rhs).norm());
    }

    let pass = coherent < COHERENT_CHAR_TOL
        && moments < HERMITE_MOMENT_TOL
        && product < WEYL_PRODUCT_TOL
        && shift < WEYL_SHIFT_TOL;
    outcome(
        pass,
        format!(
            "coherent char {coherent:.1e}; Hermite moments {moments:.1e}; Weyl product {product:.1e}; conjugation shift {shift:.1e}"
        ),
    )
}

fn hartree() -> Outcome {
    let a = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(0.3, 0.0),
        (1, 1) => c(-0.2, 0.0),
        (0, 1) => c(0.1, 0.05),
        _ => c(0.1, -0.05),
    });
    let mut mass = 0.0f64;
    let mut energy = 0.0f64;
    for (orders, seed) in [(vec![2usize], 1u64), (vec![2, 3], 2), (vec![3], 3)] {
        let inter = InteractionSpec::seeded_random(2, &orders, seed).unwrap();
        let flow = HartreeFlow::new(&a, &inter).unwrap();
        let times: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
        let z0 = [c(0.8, 0.0), c(0.6, 0.0)];
        let traj = hartree_integrate(&z0, &times, 1e-3, &flow, HartreeTolerances::default()).unwrap();
        // drifts recomputed here from the states rather than read off the trajectory
        let q = |z: &[C64]| linalg::inner(z, &linalg::mat_vec(&a, z)).re + inter.eval(z);
        for z in &traj.states {
            mass = mass.max((linalg::norm(z).powi(2) - linalg::norm(&z0).powi(2)).abs());
            energy = energy.max((q(z) - q(&z0)).abs());
        }
    }

    let lambda = 0.7;
    let one = InteractionSpec::new(1, vec![WickSymbol::new(1, 2, 2, CMatrix::from_element(1, 1, c(lambda, 0.0))).unwrap()]).unwrap();
    let flow = HartreeFlow::new(&CMatrix::zeros(1, 1), &one).unwrap();
    let z0 = c(0.9, 0.5);
    let times: Vec<f64> = (1..=20).map(|k| k as f64 / 20.0).collect();
    let traj = hartree_integrate(&[z0], &times, 1e-3, &flow, HartreeTolerances::default()).unwrap();
    let closed = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, z)| (z[0] - z0 * C64::from_polar(1.0, -2.0 * lambda * z0.norm_sqr() * t)).norm())
        .fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let inter = InteractionSpec::seeded_random(3, &[2, 3], 4).unwrap();
    let mut grad = 0.0f64;
    for _ in 0..10 {
        let z = linalg::random_vector(3, &mut rng);
        let g = dbar_q(&z, &inter);
        let h = 1e-5;
        let fd: Vec<C64> = (0..3)
            .map(|i| {
                let at = |dz: C64| {
                    let mut w = z.clone();
                    w[i] += dz;
                    inter.eval(&w)
                };
                let dx = (at(c(h, 0.0)) - at(c(-h, 0.0))) / (2.0 * h);
                let dy = (at(c(0.0, h)) - at(c(0.0, -h))) / (2.0 * h);
                c(dx, dy) * 0.5
            })
            .collect();
        let diff: Vec<C64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        grad = grad.max(linalg::norm(&diff) / linalg::norm(&g));
    }
    let pass = mass < MASS_TOL && energy < ENERGY_TOL && closed < CLOSED_FORM_TOL && grad < GRADIENT_REL_TOL;
    outcome(
        pass,
        format!("mass {mass:.1e}; energy {energy:.1e}; d=1 closed form {closed:.1e}; gradient rel {grad:.1e}"),
    )
}

fn dyson() -> Outcome {
    let eps = 0.125;
    let a = CMatrix::from_fn(2, 2, |i, j| if i == j { c([0.3, -0.2][i], 0.0) } else { c(0.05, 0.0) });
    let inter = InteractionSpec::seeded_random(2, &[2], 17).unwrap();
    let space = FockSpace::new(2, 48).unwrap();
    let h = Hamiltonian::assemble(&a, &inter, eps, &space).unwrap();
    let u = coherent_state(&[c(0.8, 0.0), c(0.6, 0.0)], eps, &space).unwrap();
    let xi = [c(0.3, -0.1), c(0.2, 0.25)];
    let t = 0.5;
    let main = dyson_residual(&u, &xi, t, &h, 200, false).unwrap();
    let i: Vec<C64> = [4usize, 8, 16]
        .iter()
        .map(|&n| dyson_residual(&u, &xi, t, &h, n, false).unwrap().integral)
        .collect();
    let order = ((i[0] - i[1]).norm() / (i[1] - i[2]).norm()).log2();
    outcome(
        main.residual < DYSON_TOL && order >= DYSON_MIN_ORDER,
        format!("residual {:.2e} at n_quad=200; observed order {order:.2} (panels 4, 8, 16)", main.residual),
    )
}

fn sweep_config(kind: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{
  "d": 2,
  "n_list": [8, 16, 32],
  "a": {{"diagonal": [0.3, -0.2]}},
  "interaction": {{"source": "seeded-random", "orders": [2]}},
  "family": {{"kind": "{kind}", "f": [[0.8, 0.0], [0.6, 0.0]]}},
  "times": [0.0, 0.5],
  "probes": {{"random": {{"count": 8, "radius": 0.5}}}},
  "orders": [1],
  "seed": 7
}}"#
    );
    parse_config(&text, kind).unwrap()
}

fn max_char_gap(rows: &[ResultRow], eps: f64, t: f64) -> f64 {
    rows.iter()
        .filter(|r| r.eps == eps && r.t == t && r.probe_id.starts_with("xi"))
        .map(|r| r.abs_gap)
        .fold(0.0, f64::max)
}

fn rdm_gap(rows: &[ResultRow], eps: f64, t: f64) -> f64 {
    rows.iter()
        .find(|r| r.eps == eps && r.t == t && r.probe_id == "rdm" && r.k_or_p == "1")
        .map(|r| r.abs_gap)
        .unwrap_or(f64::NAN)
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `J₀` by its power series, independent of the library's recurrence.
fn j0_series(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn csv_bytes(rows: &[ResultRow]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_results(rows, &mut buf).unwrap();
    buf
}

fn meanfield_convergence() -> (Outcome, Vec<(ExperimentConfig, Vec<u8>)>) {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    let mut runs = Vec::new();
    for kind in ["coherent", "hermite"] {
        let cfg = sweep_config(kind);
        let out = run_sweep(&cfg, SweepOptions::default()).unwrap();
        let t = 0.5;
        let chars: Vec<f64> = cfg.eps.iter().map(|&e| max_char_gap(&out.rows, e, t)).collect();
        let rdms: Vec<f64> = cfg.eps.iter().map(|&e| rdm_gap(&out.rows, e, t)).collect();
        let ok = strictly_decreasing(&chars) && strictly_decreasing(&rdms) && rdms[2] < RDM_AT_FINEST;
        pass &= ok;
        details.push(format!(
            "{kind}: char [{}], rdm [{}]",
            chars.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > "),
            rdms.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")
        ));
        if kind == "hermite" {
            // at t = 0 the target is J₀(2π|⟨ξ,f⟩|)
            let f = [c(0.8, 0.0), c(0.6, 0.0)];
            let target = out
                .rows
                .iter()
                .filter(|r| r.t == 0.0 && r.probe_id.starts_with("xi"))
                .map(|r| {
                    let i: usize = r.probe_id[2..].parse().unwrap();
                    let want = j0_series(2.0 * PI * linalg::inner(&cfg.probes[i], &f).norm());
                    (r.limit - want).norm()
                })
                .fold(0.0, f64::max);
            pass &= target < 1e-12;
            details.push(format!("J0 targets {target:.1e}"));
        }
        runs.push((cfg, csv_bytes(&out.rows)));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < SWEEP_BUDGET;
    details.push(format!("{:.1}s", elapsed.as_secs_f64()));
    (outcome(pass, details.join("; ")), runs)
}

fn pi_failure() -> Outcome {
    let cfg = parse_config(
        r#"{
  "d": 4,
  "n_list": [8, 16, 32],
  "family": {
    "kind": "hermite",
    "f": [[0.5, 0.0], [0.5, 0.0], [0.0, 0.0], [0.0, 0.0]],
    "escaping": {"persistent": 2, "n_escaping": 2}
  },
  "times": [0.0],
  "probes": {"random": {"count": 6, "radius": 0.5, "span": [0, 1]}},
  "orders": [],
  "moments": [1],
  "seed": 3
}"#,
        "escaping",
    )
    .unwrap();
    let out = run_sweep(&cfg, SweepOptions::default()).unwrap();
    let mut pass = true;
    let mut modes = Vec::new();
    for &eps in &cfg.eps {
        let v = cfg.family.vector(eps);
        modes.push((2..4).find(|&m| v[m].norm() > 0.5).unwrap_or(usize::MAX));
        let m = out.rows.iter().find(|r| r.eps == eps && r.probe_id == "moment").unwrap();
        pass &= (m.measured.re - 1.0).abs() < PI_TOL && (m.limit.re - 0.5).abs() < PI_TOL && (m.abs_gap - 0.5).abs() < PI_TOL;
    }
    let chars: Vec<f64> = cfg.eps.iter().map(|&e| max_char_gap(&out.rows, e, 0.0)).collect();
    // the escaping direction must actually move between consecutive ε
    pass &= strictly_decreasing(&chars) && modes.windows(2).all(|w| w[0] != w[1]);
    outcome(
        pass,
        format!(
            "Tr[rho N] = 1.000, moment 0.500, gap 0.500 at every eps; escaping modes {modes:?}; char [{}]",
            chars.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" > ")
        ),
    )
}

fn determinism(first: &[(ExperimentConfig, Vec<u8>)]) -> Outcome {
    let mut same = true;
    let mut sizes = Vec::new();
    for (cfg, bytes) in first {
        let again = csv_bytes(&run_sweep(cfg, SweepOptions::default()).unwrap().rows);
        same &= &again == bytes;
        sizes.push(bytes.len());
    }
    outcome(same, format!("results.csv sizes {sizes:?}, byte-identical: {same}"))
}

fn main() {
    // the libtest flags cargo passes are irrelevant here; `--list` must print nothing
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut results = vec![
        ("1 exact algebra", exact_algebra()),
        ("2 closed forms", closed_forms()),
        ("3 Hartree integrator", hartree()),
        ("4 Dyson formula", dyson()),
    ];
    let (five, runs) = meanfield_convergence();
    results.push(("5 mean-field convergence", five));
    results.push(("6 loss of compactness", pi_failure()));
    results.push(("7 determinism", determinism(&runs)));
    let mut failed = 0;
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
