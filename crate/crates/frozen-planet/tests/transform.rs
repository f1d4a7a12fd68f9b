mod common;

use common::*;
use frozen_planet::grid::{derivative, inner, project_symmetry, SymmetryClass, ZLoop, ZPair};
use frozen_planet::levi_civita::{cross_eval, mean_q, q_to_z, time_change, z_to_q};
use frozen_planet::solvers::{decoupled_seed, kepler_seed};
use frozen_planet::verify::random_direction;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn random_loop(n: usize, class: SymmetryClass, rng: &mut ChaCha8Rng) -> ZLoop {
    let base = ZLoop::constant(grid(n), class, 0.0);
    random_direction(&base, rng, 20)
}

#[test]
fn inner_product_axioms_and_integration_by_parts() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for class in [SymmetryClass::Plain, SymmetryClass::Periodic1, SymmetryClass::Antiperiodic] {
        let u = random_loop(128, class, &mut rng);
        let v = random_loop(128, class, &mut rng);
        let w = random_loop(128, class, &mut rng);
        assert_eq!(inner(&u, &v).unwrap(), inner(&v, &u).unwrap());
        let lhs = inner(&u.axpy(2.5, &w), &v).unwrap();
        assert!((lhs - inner(&u, &v).unwrap() - 2.5 * inner(&w, &v).unwrap()).abs() <= 1e-14);
        assert!(inner(&u, &u).unwrap() > 0.0);
        let ibp = inner(&derivative(&u), &v).unwrap() + inner(&u, &derivative(&v)).unwrap();
        assert!(ibp.abs() <= 1e-10, "{class:?}: {ibp:e}");
    }
}

#[test]
fn quadrature_is_exact_below_nyquist() {
    let g = grid(64);
    for m in 1..16 {
        for k in 1..16 {
            let u = ZLoop::from_fn(g, SymmetryClass::Plain, |t| (PI * m as f64 * t).sin());
            let v = ZLoop::from_fn(g, SymmetryClass::Plain, |t| (PI * k as f64 * t).sin());
            let exact = if m == k { 0.5 } else { 0.0 };
            assert!((inner(&u, &v).unwrap() - exact).abs() <= 1e-12);
        }
    }
}

#[test]
fn symmetric_projection_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for class in [SymmetryClass::Periodic1, SymmetryClass::Antiperiodic] {
        let z = random_loop(128, class, &mut rng);
        let p = project_symmetry(&z, class.symmetric());
        assert_eq!(project_symmetry(&p, class.symmetric()), p);
        let n = p.n();
        for j in 0..n {
            assert!((p.values[j] - p.values[(n + n / 2 - j) % n]).abs() <= 1e-15);
        }
    }
}

#[test]
fn sine_time_change_closed_form() {
    let g = grid(256);
    let z = ZLoop::from_fn(g, SymmetryClass::SymmetricAntiperiodic, |t| (PI * t).sin());
    let tc = time_change(&z).unwrap();
    for (j, tau) in g.points().into_iter().enumerate() {
        let exact = tau - (2.0 * PI * tau).sin() / (2.0 * PI);
        assert!((tc.t_of_tau[j] - exact).abs() <= 1e-13);
    }
    assert!((tc.t_at(0.25) - (0.25 - 1.0 / (2.0 * PI))).abs() <= 1e-13);
    assert!((tc.t_at(0.5) - 0.5).abs() <= 1e-14);
    assert!((tc.t_at(2.25) - tc.t_at(0.25) - 2.0).abs() <= 1e-13);
}

#[test]
fn time_change_inverts_and_reverses() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let z = random_pair(grid(256), &mut rng, 0.1);
    for l in [&z.z1, &z.z2] {
        let tc = time_change(l).unwrap();
        assert!(tc.t_of_tau.windows(2).all(|w| w[1] > w[0]));
        for t in [0.013, 0.3, 0.77, 1.5, 1.99] {
            assert!((tc.t_at(tc.tau_at(t)) - t).abs() <= 1e-8);
        }
        // t_{Rz}(tau) = -t_z(-tau)
        let rev = time_change(&l.reverse()).unwrap();
        for tau in l.grid.points() {
            assert!((rev.t_at(tau) + tc.t_at(-tau)).abs() <= 1e-13);
        }
    }
}

/// Low-mode perturbation of the decoupled seed: uniform t-samples of `q`
/// resolve `z` near a collision only down to `tau ~ h^{1/3}`, so the round
/// trip is sharp for loops that are smooth on that scale.
fn smooth_pair(n: usize, seed: u64) -> ZPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = decoupled_seed(grid(n), N);
    let d1 = random_direction(&base.z1, &mut rng, 3);
    let d2 = random_direction(&base.z2, &mut rng, 3);
    ZPair { z1: base.z1.axpy(0.1, &d1), z2: base.z2.axpy(0.1, &d2) }
}

#[test]
fn levi_civita_round_trip_on_both_sign_branches() {
    for seed in [4, 5, 6] {
        let z = smooth_pair(512, seed);
        for (l, odd) in [(&z.z1, false), (&z.z2, true)] {
            let q = z_to_q(l).unwrap();
            for sign in [1.0, -1.0] {
                let back = q_to_z(&q, odd, sign).unwrap();
                let err = back.axpy(-sign, l).sup_norm();
                assert!(err <= 1e-6, "odd={odd} sign={sign}: {err:e}");
            }
        }
    }
    // two sign changes per unit: sin(2 pi tau)
    let s = ZLoop::from_fn(grid(512), SymmetryClass::Periodic1, |t| (2.0 * PI * t).sin());
    let back = q_to_z(&z_to_q(&s).unwrap(), false, 1.0).unwrap();
    assert_eq!(back.class, SymmetryClass::Periodic1);
    let err = back.axpy(-1.0, &s).sup_norm().min(back.axpy(1.0, &s).sup_norm());
    assert!(err <= 1e-6, "{err:e}");
    assert!(q_to_z(&z_to_q(&s).unwrap(), true, 1.0).is_err());
}

#[test]
fn mean_q_matches_time_domain_trapezoid() {
    let z = smooth_pair(512, 7);
    let trap = |l: &ZLoop| {
        let q = z_to_q(l).unwrap();
        q.iter().sum::<f64>() / q.len() as f64
    };
    assert!((mean_q(&z.z1) - trap(&z.z1)).abs() <= 1e-6);
    // q2 ~ |t|^{2/3} at the collision limits the trapezoid rule to O(h^{5/3})
    let errs: Vec<f64> = [256, 512, 1024]
        .iter()
        .map(|&n| {
            let l = smooth_pair(n, 7).z2;
            (mean_q(&l) - trap(&l)).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((rate - 5.0 / 3.0).abs() <= 0.1, "{errs:?}");
    }
}

#[test]
fn cross_eval_collapses() {
    let g = grid(128);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let z = random_pair(g, &mut rng, 0.1);
    let same = cross_eval(&z.z2, &z.z2).unwrap();
    for (a, b) in same.iter().zip(&z.z2.values) {
        assert!((a - b).abs() <= 1e-10);
    }
    let c = ZLoop::constant(g, SymmetryClass::SymmetricPeriodic1, 1.3);
    let phys = cross_eval(&c, &z.z2).unwrap();
    let q = z_to_q(&z.z2).unwrap();
    for (a, b) in phys.iter().zip(&q) {
        assert!((a * a - b).abs() <= 1e-10);
    }
}

#[test]
fn kepler_seed_symmetric_on_grid() {
    let z = kepler_seed(grid(512), N);
    let n = z.n();
    for j in 0..n {
        assert!((z.values[j] - z.values[(n + n / 2 - j) % n]).abs() <= 1e-15);
        assert!((z.values[j] + z.values[(j + n / 2) % n]).abs() <= 1e-15);
    }
}
