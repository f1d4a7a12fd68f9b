mod common;

use common::*;
use frozen_planet::functionals::ModelParams;
use frozen_planet::grid::{SymmetryClass, ZLoop, ZPair};
use frozen_planet::levi_civita::{kepler_energy, QOrbit};
use frozen_planet::solvers::{continue_to, decoupled_seed, kepler_seed, Model, Schedule, SolveOptions};
use frozen_planet::verify::{
    correspondence_check, energy_checks, legendre_check, legendre_check_loop, ode_residual, rescale_check, symmetry_check, verify_kepler,
    verify_pair, Equations,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[test]
fn exact_decoupled_pair_solves_its_equations() {
    let z = decoupled_seed(grid(512), N);
    let q = QOrbit::from_pair(&z, 0.0, N).unwrap();
    let eq = Equations::Decoupled(0.0);
    assert!(ode_residual(&q, eq).unwrap() <= 1e-6);
    assert!(energy_checks(&q, eq).unwrap().variation <= 1e-6);
    let rep = verify_pair(&z, Model::Decoupled(0.0), N).unwrap();
    assert!(rep.passed(), "{}", rep.to_text());
}

#[test]
fn perturbed_outer_loop_fails_the_equations() {
    let z = decoupled_seed(grid(512), N);
    let bumped = ZPair { z1: z.z1.axpy(1e-3, &ZLoop::from_fn(z.grid(), z.z1.class, |t| (2.0 * PI * (t - 0.5)).cos())), z2: z.z2.clone() };
    let q = QOrbit::from_pair(&bumped, 0.0, N).unwrap();
    assert!(ode_residual(&q, Equations::Decoupled(0.0)).unwrap() > 1e-3);
    let rep = verify_pair(&bumped, Model::Decoupled(0.0), N).unwrap();
    assert!(!rep.passed());
    assert!(rep.to_text().contains("FAIL"));
}

#[test]
fn kepler_energy_is_the_closed_form() {
    // rounding near the collision grows with n; compare on a coarse grid
    let target = -(2.0 * PI * PI).cbrt();
    for e in kepler_energy(&kepler_seed(grid(64), N), N).unwrap() {
        assert!((e - target).abs() <= 1e-10);
    }
    let rep = verify_kepler(&kepler_seed(grid(512), N), N).unwrap();
    assert!(rep.passed(), "{}", rep.to_text());
    assert!(rep.to_text().contains("qbar1=none"));
}

#[test]
fn mean_interaction_conserves_only_the_derived_quantity() {
    let trace = continue_to(grid(128), N, Schedule::new(2, 0), &SolveOptions { grad_tol: 1e-8, ..SolveOptions::default() }, 1.0, 0.0).unwrap();
    let z = trace.last().report.solution();
    let q = QOrbit::from_pair(z, 0.0, N).unwrap();
    let e = energy_checks(&q, Equations::Interpolated(0.0)).unwrap();
    assert!(e.variation <= 1e-6, "{}", e.variation);
    // E1 + E2 alone trades energy with the mean repulsion
    assert!(e.sum_variation > 1e-3, "{}", e.sum_variation);
    assert!(e.energy < 0.0);
}

#[test]
fn rescaling_maps_orbits_to_orbits() {
    let z = decoupled_seed(grid(256), N);
    let q = QOrbit::from_pair(&z, 0.0, N).unwrap();
    let eq = Equations::Decoupled(0.0);
    let one = rescale_check(&q, 1.0, eq).unwrap();
    assert_eq!(one.residual, ode_residual(&q, eq).unwrap());
    assert_eq!(one.energy_error, 0.0);
    assert_eq!(one.period_ratio, 1.0);
    let two = rescale_check(&q, 2.0, eq).unwrap();
    assert!((two.period_ratio - 8.0).abs() <= 1e-12);
    assert!(two.residual <= 1e-6 && two.energy_error <= 1e-10);
    assert!(rescale_check(&q, -1.0, eq).is_err());
}

#[test]
fn symmetry_defects() {
    let seed = decoupled_seed(grid(256), N);
    assert!(symmetry_check(&seed).unwrap().max() <= 1e-10);
    let g = grid(256);
    let z = ZPair {
        z1: ZLoop::constant(g, SymmetryClass::Plain, 1.5),
        z2: ZLoop::from_fn(g, SymmetryClass::Plain, |t| (PI * t).sin() + 0.1 * (2.0 * PI * t).sin()),
    };
    let rep = symmetry_check(&z).unwrap();
    assert!((rep.dz2_at_half - 0.2 * PI).abs() <= 1e-10);
    assert!(rep.q_reflection > 1e-2);
}

#[test]
fn topological_class_and_sign_branches() {
    let seed = decoupled_seed(grid(256), N);
    let model = Model::Decoupled(0.0);
    let corr = correspondence_check(&seed, &|p: &ZPair| model.gradient(p, N), 1e-9).unwrap();
    assert!(corr.passed());
    assert_eq!(corr.critical_branches, 4);
    assert!(corr.worst_branch_gradient <= 1e-9);
    // an inner loop that never reaches the nucleus
    let g = grid(256);
    let z = ZPair {
        z1: seed.z1.clone(),
        z2: ZLoop::from_fn(g, SymmetryClass::Plain, |t| 0.3 + 0.1 * (PI * t).sin()),
    };
    let zero = |p: &ZPair| Ok((p.z1.scale(0.0), p.z2.scale(0.0)));
    let corr = correspondence_check(&z, &zero, 1e-9).unwrap();
    assert!(!corr.class_ok());
    assert_eq!(corr.z2_zeros_per_period, 0.0);
}

#[test]
fn hamilton_equations_hold_only_at_critical_points() {
    assert!(legendre_check_loop(&kepler_seed(grid(256), N), N).unwrap() <= 1e-8);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let z = random_pair(grid(128), &mut rng, 0.08);
    assert!(legendre_check(&z, &ModelParams::new(N, 1.0).unwrap()).unwrap() > 1e-2);
}

#[test]
fn strict_checks_are_marked() {
    let rep = verify_pair(&decoupled_seed(grid(128), N), Model::Decoupled(0.0), N).unwrap();
    let energy = rep.checks.iter().find(|c| c.name == "total energy").unwrap();
    assert!(energy.strict && energy.passed && energy.value < 0.0);
    let text = rep.to_text();
    assert!(text.lines().any(|l| l.starts_with("total energy") && l.ends_with("(< 0)")), "{text}");
    let json = serde_json::to_value(&rep).unwrap();
    assert_eq!(json["checks"].as_array().unwrap().len(), rep.checks.len());
}
