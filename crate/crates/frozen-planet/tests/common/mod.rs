#![allow(dead_code)]

use frozen_planet::grid::{LoopGrid, SymmetryClass, ZLoop, ZPair};
use frozen_planet::levi_civita::{loop_zeros, time_change, z_to_q_at};
use frozen_planet::solvers::{decoupled_seed, Model};
use frozen_planet::verify::random_direction;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub const N: f64 = 2.0;

pub fn grid(n: usize) -> LoopGrid {
    LoopGrid::new(n).unwrap()
}

/// Decoupled seed plus smooth random perturbations, admissible for the
/// instantaneous interaction.
pub fn random_pair(grid: LoopGrid, rng: &mut ChaCha8Rng, amp: f64) -> ZPair {
    let base = decoupled_seed(grid, N);
    loop {
        let d1 = random_direction(&base.z1, rng, 10);
        let d2 = random_direction(&base.z2, rng, 10);
        let z = ZPair { z1: base.z1.axpy(amp, &d1), z2: base.z2.axpy(amp, &d2) };
        if Model::Interp(1.0).admissible(&z) {
            return z;
        }
    }
}

/// Same, with the reflection constraint dropped (`Periodic1`/`Antiperiodic`).
pub fn random_unsymmetric_pair(grid: LoopGrid, rng: &mut ChaCha8Rng, amp: f64) -> ZPair {
    let base = decoupled_seed(grid, N);
    let base = ZPair {
        z1: ZLoop { class: SymmetryClass::Periodic1, ..base.z1 },
        z2: ZLoop { class: SymmetryClass::Antiperiodic, ..base.z2 },
    };
    loop {
        let d1 = random_direction(&base.z1, rng, 10);
        let d2 = random_direction(&base.z2, rng, 10);
        let z = ZPair { z1: base.z1.axpy(amp, &d1), z2: base.z2.axpy(amp, &d2) };
        if Model::Interp(1.0).admissible(&z) {
            return z;
        }
    }
}

/// Composite Simpson on `[0, 1]` with `m` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, m: usize) -> f64 {
    let h = 1.0 / m as f64;
    let mut s = f(0.0) + f(1.0);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    s * h / 3.0
}

/// `int_a^b g(t) dt` for integrands with `|t - a|^{2/3}`-type endpoint
/// behaviour: substitute `t = a + (b - a)(s - sin(2 pi s)/(2 pi))`, which is
/// cubic at both ends, and integrate the smooth result in `s`.
pub fn sidi(g: &dyn Fn(&[f64]) -> Vec<f64>, a: f64, b: f64, m: usize) -> f64 {
    let ss: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let ts: Vec<f64> = ss.iter().map(|s| a + (b - a) * (s - (2.0 * PI * s).sin() / (2.0 * PI))).collect();
    let vals = g(&ts);
    let w: Vec<f64> = ss.iter().map(|s| (b - a) * (1.0 - (2.0 * PI * s).cos())).collect();
    let h = 1.0 / m as f64;
    let mut acc = 0.0;
    for k in 0..=m {
        let c = if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += c * vals[k] * w[k];
    }
    acc * h / 3.0
}

/// Collision times of `q = z^2` in `[0, 2)`.
pub fn collision_times(z: &ZLoop) -> Vec<f64> {
    let tc = time_change(z).unwrap();
    let mut t: Vec<f64> = loop_zeros(z).into_iter().map(|tau| tc.t_at(tau).rem_euclid(2.0)).collect();
    t.sort_by(f64::total_cmp);
    t
}

/// Time average over `[0, 2)` of `g(q1(t), q2(t))`, panelled at the
/// collisions of both electrons.
pub fn time_average(z: &ZPair, g: impl Fn(f64, f64) -> f64, m: usize) -> f64 {
    let mut cuts = collision_times(&z.z1);
    cuts.extend(collision_times(&z.z2));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if cuts.is_empty() {
        cuts.push(0.0);
    }
    let mut total = 0.0;
    for i in 0..cuts.len() {
        let a = cuts[i];
        let b = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + 2.0 };
        let f = |ts: &[f64]| {
            let q1 = z_to_q_at(&z.z1, ts).unwrap();
            let q2 = z_to_q_at(&z.z2, ts).unwrap();
            q1.iter().zip(&q2).map(|(a, b)| g(*a, *b)).collect()
        };
        total += sidi(&f, a, b, m);
    }
    total / 2.0
}
