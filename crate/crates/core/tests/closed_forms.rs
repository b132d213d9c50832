use std::f64::consts::PI;

use meanfield_core::fock::{coherent_state, coherent_state_auto, hermite_state, FockSpace, WeylFactory};
use meanfield_core::linalg;
use meanfield_core::wick::{taylor_shift, wick_matrix, wick_poly, WickSymbol};
use meanfield_core::wigner::{char_function, wick_expectation, LimitMeasure};
use meanfield_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn scaled(v: &[C64], s: C64) -> Vec<C64> {
    v.iter().map(|x| x * s).collect()
}

#[test]
fn coherent_characteristic_function() {
    let f = [c(0.8, 0.1), c(-0.2, 0.55)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for eps in [0.25, 0.125, 0.0625] {
        let u = coherent_state_auto(&f, eps, 1e-10, 0).unwrap();
        // the displaced state needs room above the tail of the undisplaced one
        let roomy = coherent_state_auto(&f, eps, 1e-10, u.n_max() + 10).unwrap();
        for _ in 0..6 {
            let xi = scaled(&linalg::random_vector(2, &mut rng), c(rng.gen_range(0.1..1.0), 0.0));
            let want = LimitMeasure::Point(f.to_vec()).char_function(&xi)
                * (-eps * PI * PI * linalg::norm(&xi).powi(2) / 2.0).exp();
            assert!((char_function(&u, &xi).unwrap() - want).norm() < 1e-6);
            assert!((char_function(&roomy, &xi).unwrap() - want).norm() < 1e-8);
        }
    }
}

#[test]
fn vacuum_overlap_of_displaced_vacuum() {
    // ⟨Ω, W(√2 f/(iε)) Ω⟩ = e^{−|f|²/(2ε)}
    let eps = 0.2;
    let f = [c(0.3, 0.2), c(0.1, -0.4)];
    let space = FockSpace::new(2, 30).unwrap();
    let factory = WeylFactory::new(&space, eps).unwrap();
    let xi = scaled(&f, c(0.0, -2f64.sqrt() / eps));
    let vac = meanfield_core::fock::FockState::vacuum(&space, eps).unwrap();
    let got = factory.weyl(&xi).expectation(vac.data());
    let want = (-linalg::norm(&f).powi(2) / (2.0 * eps)).exp();
    assert!((got - want).norm() < 1e-10, "{got} vs {want}");
}

#[test]
fn hermite_moments_are_exact() {
    let f = [c(0.6, 0.0), c(0.0, 0.8)];
    for n in [4usize, 8, 10] {
        let eps = 1.0 / n as f64;
        let space = FockSpace::new(2, n).unwrap();
        let u = hermite_state(&f, eps, &space).unwrap();
        for k in 0..5 {
            assert!((u.number_moment(k) - 1.0).abs() < 1e-12);
        }
    }
    let space = FockSpace::new(2, 3).unwrap();
    let u = hermite_state(&f, 0.3, &space).unwrap();
    assert!((u.number_moment(2) - 0.81).abs() < 1e-12);
}

#[test]
fn truncation_distance_matches_poisson_tail() {
    // independent oracle: Poisson(8) tail by direct summation of e^{−λ}λⁿ/n!
    let eps = 0.125;
    let f = [c(1.0, 0.0), c(0.0, 0.0)];
    let space = FockSpace::new(2, 60).unwrap();
    let u = coherent_state(&f, eps, &space).unwrap();
    let mut last = f64::INFINITY;
    for m in [10usize, 12, 16, 20] {
        let (_, dist) = u.truncate(m).unwrap();
        let mut pmf = (-8.0f64).exp();
        let mut kept = 0.0;
        for n in 0..=m {
            if n > 0 {
                pmf *= 8.0 / n as f64;
            }
            kept += pmf;
        }
        let oracle = 2.0 * (1.0 - kept).sqrt();
        assert!((dist - oracle).abs() < 1e-9, "m={m}: {dist} vs {oracle}");
        assert!(dist < last);
        last = dist;
    }
    assert!(u.truncate(16).unwrap().1 < 0.2);
}

#[test]
fn weyl_product_relation_on_low_tail_states() {
    let eps = 0.1;
    let f = [c(0.5, 0.2), c(-0.3, 0.4)];
    let u = coherent_state_auto(&f, eps, 1e-12, 40).unwrap();
    let factory = WeylFactory::new(u.space(), eps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let x1 = linalg::random_vector(2, &mut rng);
        let x2 = linalg::random_vector(2, &mut rng);
        let sum: Vec<C64> = x1.iter().zip(&x2).map(|(a, b)| a + b).collect();
        let lhs = factory.weyl(&x1).apply(&factory.weyl(&x2).apply(u.data()));
        let phase = C64::from_polar(1.0, -eps / 2.0 * linalg::inner(&x1, &x2).im);
        let rhs: Vec<C64> = factory.weyl(&sum).apply(u.data()).iter().map(|z| z * phase).collect();
        let res = linalg::norm(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(res < 1e-6, "{res}");
    }
}

#[test]
fn weyl_conjugation_is_a_taylor_shift() {
    // W(ξ)^* b^Wick W(ξ) = b(· + iεξ/√2)^Wick, compared through expectations
    let eps = 0.1;
    let f = [c(0.4, -0.1), c(0.2, 0.3)];
    let u = coherent_state_auto(&f, eps, 1e-12, 40).unwrap();
    let factory = WeylFactory::new(u.space(), eps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for (p, q) in [(1, 1), (2, 1), (2, 2), (0, 2)] {
        let b = WickSymbol::random(2, p, q, &mut rng);
        let xi = linalg::random_vector(2, &mut rng);
        let w = factory.weyl(&xi);
        let wu = w.apply(u.data());
        let lhs = linalg::inner(&wu, &wick_matrix(&b, eps, u.space()).unwrap().apply(&wu));
        let shift = scaled(&xi, c(0.0, eps / 2f64.sqrt()));
        let poly = taylor_shift(&b, &shift).unwrap();
        let rhs = wick_expectation(&u, &poly).unwrap();
        assert!((lhs - rhs).norm() < 1e-6, "({p},{q}): {lhs} vs {rhs}");
        // the operator map keyed by shift covers the same terms
        assert_eq!(wick_poly(&poly, eps, u.space()).unwrap().len(), (0..=p).flat_map(|k| (0..=q).map(move |j| (q - j) as isize - (p - k) as isize)).collect::<std::collections::BTreeSet<_>>().len());
    }
}

#[test]
fn coherent_eigenvalue_relation() {
    let eps = 0.05;
    let f = [c(0.7, 0.2), c(0.1, -0.5)];
    let u = coherent_state_auto(&f, eps, 1e-12, 0).unwrap();
    let xi = [c(0.3, 0.4), c(-0.2, 0.1)];
    let b = WickSymbol::annihilation(&xi);
    let got = wick_expectation(&u, &b.clone().into()).unwrap();
    assert!((got - b.eval(&f)).norm() < 1e-9);
}

/// `L_n(x)` by the three-term recurrence.
fn laguerre(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = ((2 * k + 1) as f64 - x) * cur / (k + 1) as f64 - k as f64 * prev / (k + 1) as f64;
        prev = cur;
        cur = next;
    }
    cur
}

#[test]
fn hermite_characteristic_function_is_laguerre() {
    // single-mode displacement matrix element ⟨n|D(α)|n⟩ = e^{−|α|²/2} L_n(|α|²)
    let f = [c(0.6, 0.0), c(0.0, 0.8)];
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for n in [8usize, 16] {
        let eps = 1.0 / n as f64;
        let base = FockSpace::new(2, n).unwrap();
        let roomy = FockSpace::new(2, n + 4 * (n as f64).sqrt().ceil() as usize + 4).unwrap();
        let u = hermite_state(&f, eps, &roomy).unwrap();
        let tight = hermite_state(&f, eps, &base).unwrap();
        for _ in 0..4 {
            let xi = scaled(&linalg::random_vector(2, &mut rng), c(0.6, 0.0));
            let x = eps * PI * PI * linalg::inner(&f, &xi).norm_sqr();
            let want = (-eps * PI * PI * linalg::norm(&xi).powi(2) / 2.0).exp() * laguerre(n, x);
            let got = char_function(&u, &xi).unwrap();
            assert!((got - want).norm() < 1e-8, "n={n}: {got} vs {want}");
            // without room above the occupied sector the truncated W is visibly off
            assert!((char_function(&tight, &xi).unwrap() - want).norm() > 1e-3);
        }
    }
}
