//! Independent reference values: interactions and means by direct
//! quadrature in physical time, the Kepler collision orbit against its
//! cycloid parametrization.

mod common;

use common::*;
use frozen_planet::functionals::{closed_form, eval_a, eval_i};
use frozen_planet::grid::{SymmetryClass, ZLoop, ZPair};
use frozen_planet::levi_civita::{mean_q, z_to_q_at};
use frozen_planet::solvers::kepler_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn instantaneous_interaction_matches_time_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [128, 256] {
        for _ in 0..3 {
            let z = random_pair(grid(n), &mut rng, 0.08);
            let oracle = -time_average(&z, |q1, q2| 1.0 / (q1 - q2), 400);
            let got = eval_i(&z).unwrap();
            assert!((got - oracle).abs() <= 1e-8, "n={n}: I = {got}, oracle {oracle}");
        }
    }
}

#[test]
fn instantaneous_interaction_without_reflection_symmetry() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let z = random_unsymmetric_pair(grid(128), &mut rng, 0.08);
    let oracle = -time_average(&z, |q1, q2| 1.0 / (q1 - q2), 400);
    assert!((eval_i(&z).unwrap() - oracle).abs() <= 1e-8);
}

#[test]
fn mean_interaction_matches_quadrature_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let z = random_pair(grid(128), &mut rng, 0.08);
    let q1 = time_average(&z, |a, _| a, 400);
    let q2 = time_average(&z, |_, b| b, 400);
    assert!((mean_q(&z.z1) - q1).abs() <= 1e-10);
    assert!((mean_q(&z.z2) - q2).abs() <= 1e-10);
    assert!((eval_a(&z).unwrap() + 1.0 / (q1 - q2)).abs() <= 1e-10);
}

#[test]
fn small_inner_loop_series() {
    // z1 = c, z2 = eps sin(pi tau): I = -1/c^2 - qbar2/c^4 + O(eps^4),
    // qbar2 = 3 eps^2 / 4
    let g = grid(128);
    let c: f64 = 1.5;
    for eps in [1e-1, 3e-2, 1e-2] {
        let z = ZPair {
            z1: ZLoop::constant(g, SymmetryClass::SymmetricPeriodic1, c),
            z2: ZLoop::from_fn(g, SymmetryClass::SymmetricAntiperiodic, |t| eps * (PI * t).sin()),
        };
        let series = -1.0 / (c * c) - 0.75 * eps * eps / c.powi(4);
        let err = (eval_i(&z).unwrap() - series).abs();
        assert!(err <= 2.0 * eps.powi(4) / c.powi(6), "eps={eps}: {err:e}");
    }
}

#[test]
fn kepler_loop_traces_the_cycloid() {
    // q = A(1 - cos th), t = (th - sin th)/(2 pi), A^3 = N/(4 pi^2)
    let z = kepler_seed(grid(512), N);
    let amp = (N / (4.0 * PI * PI)).cbrt();
    let th: Vec<f64> = (0..=200).map(|k| 2.0 * PI * k as f64 / 200.0).collect();
    let t: Vec<f64> = th.iter().map(|th| (th - th.sin()) / (2.0 * PI)).collect();
    let q = z_to_q_at(&z, &t).unwrap();
    for (th, q) in th.iter().zip(&q) {
        assert!((q - amp * (1.0 - th.cos())).abs() <= 1e-10, "theta={th}");
    }
    assert!((mean_q(&z) - 1.5 * amp).abs() <= 1e-13);
    assert!((closed_form::kepler_mean(N) - 1.5 * amp).abs() <= 1e-13);
    assert!((closed_form::kepler_energy(N) + N / (2.0 * amp)).abs() <= 1e-12);
}
