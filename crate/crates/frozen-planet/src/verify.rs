//! Independent checks that a pair is a (generalized) frozen planet orbit:
//! physical-time ODE residuals, energy laws, rescaling, symmetry, the
//! sign-branch correspondence, Hamilton equations and gradient consistency.

use crate::error::{Error, Result};
use crate::functionals::{
    closed_form, eval_a, eval_b, eval_i, eval_q, grad_a, grad_b, grad_i, grad_q, hamilton_residual, legendre, legendre_pair, Momentum,
    ModelParams,
};
use crate::grid::{derivative, inner, SymmetryClass, ZLoop, ZPair};
use crate::levi_civita::{energies, kepler_energy, loop_zeros, mean_q, time_change, z_to_q, QOrbit};
use crate::solvers::{Basis, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Physical equations of motion a q-orbit is checked against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Equations {
    /// `q1'' = -N/q1^2 + r/(q1-q2)^2 + (1-r)/dbar^2`, mirrored for `q2`,
    /// with `dbar = qbar1 - qbar2`.
    Interpolated(f64),
    /// `q1'' = -N/q1^2 + 1/dbar^2`, `q2'' = -N/q2^2 - r/dbar^2`.
    Decoupled(f64),
}

impl Equations {
    pub fn for_model(model: Model) -> Equations {
        match model {
            Model::Decoupled(r) => Equations::Decoupled(r),
            Model::Interp(r) => Equations::Interpolated(r),
            Model::Kepler => Equations::Decoupled(0.0),
        }
    }

    /// Forces on both electrons.
    fn forces(&self, q1: f64, q2: f64, charge: f64, dbar: f64) -> (f64, f64) {
        let mean = 1.0 / (dbar * dbar);
        match *self {
            Equations::Interpolated(r) => {
                let inst = r / (q1 - q2).powi(2) + (1.0 - r) * mean;
                (-charge / (q1 * q1) + inst, -charge / (q2 * q2) - inst)
            }
            Equations::Decoupled(r) => (-charge / (q1 * q1) + mean, -charge / (q2 * q2) - r * mean),
        }
    }
}

/// Points closer than this many grid steps to a collision are masked.
pub const MASK_STEPS: f64 = 5.0;

fn qbar_gap(q: &QOrbit) -> f64 {
    mean_q(&q.pair.z1) - mean_q(&q.pair.z2)
}

/// `q q''` at the physical times of the grid, from the chain rule in the
/// regularized time: `q q'' = 2 |z|^4 (z z'' - z'^2) / (T^2 z^2)`.
fn q_qddot(z: &ZLoop, period: f64) -> Result<Vec<f64>> {
    let tc = time_change(z)?;
    let s = z.series();
    let n2 = z.norm2();
    Ok(tc
        .tau_of_t
        .iter()
        .map(|&tau| {
            let [v, d1, d2] = s.eval_derivs::<3>(tau);
            2.0 * n2 * n2 * (v * d2 - d1 * d1) / (period * period * v * v)
        })
        .collect())
}

fn masked(q: &QOrbit, t: f64) -> bool {
    let h = 2.0 * q.period / q.grid.n() as f64;
    let span = 2.0 * q.period;
    q.zeros2.iter().any(|&z| {
        let d = (t - z).rem_euclid(span);
        d.min(span - d) <= MASK_STEPS * h + 1e-12 * span
    })
}

/// `sup |q_i q_i'' - q_i F_i|` over the grid points at least five steps away
/// from collisions.
pub fn ode_residual(q: &QOrbit, eq: Equations) -> Result<f64> {
    let a1 = q_qddot(&q.pair.z1, q.period)?;
    let a2 = q_qddot(&q.pair.z2, q.period)?;
    let dbar = qbar_gap(q);
    let mut worst = 0.0f64;
    for j in 0..q.t.len() {
        if masked(q, q.t[j]) {
            continue;
        }
        let (q1, q2) = (q.q1[j], q.q2[j]);
        let (f1, f2) = eq.forces(q1, q2, q.charge, dbar);
        worst = worst.max((a1[j] - q1 * f1).abs()).max((a2[j] - q2 * f2).abs());
    }
    Ok(worst)
}

/// Outcome of the energy checks.
#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    /// Sup-variation of the conserved quantity.
    pub variation: f64,
    /// Mean value of the conserved quantity (the total energy at `r = 1`).
    pub energy: f64,
    /// Sup-variation of `E1 + E2` alone.
    pub sum_variation: f64,
    /// Largest jump of `E2` across a collision, from one-sided quadratic
    /// extrapolation in the regularized time.
    pub collision_jump: f64,
}

fn spread(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Conserved quantity:
/// `E1 + E2 + r/(q1 - q2) - (1 - r)(q1 - q2)/dbar^2` for the interpolated
/// equations; the decoupled ones conserve `E1 - q1/dbar^2` and
/// `E2 + r q2/dbar^2` separately (the variation reported is the larger one,
/// the energy their sum).
pub fn energy_checks(q: &QOrbit, eq: Equations) -> Result<EnergyReport> {
    let dbar = qbar_gap(q);
    let m = 1.0 / (dbar * dbar);
    let n = q.t.len();
    let (variation, values) = match eq {
        Equations::Interpolated(r) => {
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    let d = q.q1[j] - q.q2[j];
                    q.e1[j] + q.e2[j] + r / d - (1.0 - r) * d * m
                })
                .collect();
            (spread(&c), c)
        }
        Equations::Decoupled(r) => {
            let c1: Vec<f64> = (0..n).map(|j| q.e1[j] - q.q1[j] * m).collect();
            let c2: Vec<f64> = (0..n).map(|j| q.e2[j] + r * q.q2[j] * m).collect();
            (spread(&c1).max(spread(&c2)), c1.iter().zip(&c2).map(|(a, b)| a + b).collect())
        }
    };
    let sum: Vec<f64> = q.e1.iter().zip(&q.e2).map(|(a, b)| a + b).collect();
    Ok(EnergyReport {
        variation,
        energy: values.iter().sum::<f64>() / n as f64,
        sum_variation: spread(&sum),
        collision_jump: collision_jump(&q.pair.z2, q.charge, q.period)?,
    })
}

fn collision_jump(z: &ZLoop, charge: f64, period: f64) -> Result<f64> {
    let h = z.grid.h();
    let mut worst = 0.0f64;
    for tau0 in loop_zeros(z) {
        let side = |s: f64| -> Result<f64> {
            let taus: Vec<f64> = (1..=3).map(|k| tau0 + s * k as f64 * h).collect();
            let e = energies(z, charge, &taus, period)?;
            // quadratic through the three samples, evaluated at the zero
            Ok(3.0 * e[0] - 3.0 * e[1] + e[2])
        };
        worst = worst.max((side(1.0)? - side(-1.0)?).abs());
    }
    Ok(worst)
}

/// Outcome of a rescaling check.
#[derive(Clone, Debug, Serialize)]
pub struct RescaleReport {
    pub residual: f64,
    /// `|E(q_c) - E(q)/c^2| / |E(q)/c^2|`.
    pub energy_error: f64,
    pub period_ratio: f64,
}

/// Rescale `q_c(t) = c^2 q(t/c^3)` (loops `z -> c z`, period `T -> c^3 T`)
/// and re-check the equations and the energy law.
pub fn rescale_check(q: &QOrbit, c: f64, eq: Equations) -> Result<RescaleReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("rescaling factor must be positive, got {c}")));
    }
    let scaled = q.pair.map(|z| z.scale(c));
    let qc = QOrbit::with_period(&scaled, q.r, q.charge, q.period * c.powi(3))?;
    let e0 = energy_checks(q, eq)?.energy;
    let ec = energy_checks(&qc, eq)?.energy;
    let expect = e0 / (c * c);
    Ok(RescaleReport {
        residual: ode_residual(&qc, eq)?,
        energy_error: ((ec - expect) / expect).abs(),
        period_ratio: qc.period / q.period,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub dz1_at_0: f64,
    pub z2_at_0: f64,
    pub dz1_at_half: f64,
    pub dz2_at_half: f64,
    /// `sup |q_i(t) - q_i(1 - t)|`.
    pub q_reflection: f64,
}

impl SymmetryReport {
    pub fn max(&self) -> f64 {
        [self.dz1_at_0, self.z2_at_0, self.dz1_at_half, self.dz2_at_half, self.q_reflection].into_iter().fold(0.0, f64::max)
    }
}

fn reflection_defect(q: &[f64]) -> f64 {
    let n = q.len();
    (0..n).fold(0.0f64, |m, j| m.max((q[j] - q[(n + n / 2 - j) % n]).abs()))
}

pub fn symmetry_check(z: &ZPair) -> Result<SymmetryReport> {
    let n = z.grid().n();
    let d1 = derivative(&z.z1);
    let d2 = derivative(&z.z2);
    let q1 = z_to_q(&z.z1)?;
    let q2 = z_to_q(&z.z2)?;
    Ok(SymmetryReport {
        dz1_at_0: d1.values[0].abs(),
        z2_at_0: z.z2.values[0].abs(),
        dz1_at_half: d1.values[n / 4].abs(),
        dz2_at_half: d2.values[n / 4].abs(),
        q_reflection: reflection_defect(&q1).max(reflection_defect(&q2)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceReport {
    pub z1_zero_free: bool,
    /// Zeros of `z2` per unit of regularized time.
    pub z2_zeros_per_period: f64,
    pub zero_at_origin: bool,
    pub transverse: bool,
    /// Number of the four sign branches `(+-z1, +-z2)` that are critical.
    pub critical_branches: usize,
    pub worst_branch_gradient: f64,
}

impl CorrespondenceReport {
    /// Right topological class: `z1` without zeros, one transverse
    /// collision of the inner electron per period at the origin.
    pub fn class_ok(&self) -> bool {
        self.z1_zero_free && self.z2_zeros_per_period == 1.0 && self.zero_at_origin && self.transverse
    }

    pub fn passed(&self) -> bool {
        self.class_ok() && self.critical_branches == 4
    }
}

/// Thresholds for a collision: `|z2| < 1e-9` at the zero and
/// `|z2'| > 1e-3` there.
pub const ZERO_VALUE_TOL: f64 = 1e-9;
pub const TRANSVERSE_TOL: f64 = 1e-3;

pub fn correspondence_check(z: &ZPair, grad_fn: &dyn Fn(&ZPair) -> Result<(ZLoop, ZLoop)>, tol: f64) -> Result<CorrespondenceReport> {
    let z1_zero_free = z.z1.values.iter().all(|&v| v > 0.0) || z.z1.values.iter().all(|&v| v < 0.0);
    let zeros = loop_zeros(&z.z2);
    let s2 = z.z2.series();
    let transverse = !zeros.is_empty()
        && zeros.iter().all(|&t| {
            let [v, d] = s2.eval_derivs::<2>(t);
            v.abs() < ZERO_VALUE_TOL && d.abs() > TRANSVERSE_TOL
        });
    let zero_at_origin = z.z2.values[0].abs() < ZERO_VALUE_TOL;
    let mut worst = 0.0f64;
    let mut critical = 0;
    for (s1, s2) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        let b = ZPair { z1: z.z1.scale(s1), z2: z.z2.scale(s2) };
        let g = grad_fn(&b).map(|(g1, g2)| g1.sup_norm().max(g2.sup_norm())).unwrap_or(f64::INFINITY);
        worst = worst.max(g);
        if g <= tol {
            critical += 1;
        }
    }
    Ok(CorrespondenceReport {
        z1_zero_free,
        z2_zeros_per_period: zeros.len() as f64 / 2.0,
        zero_at_origin,
        transverse,
        critical_branches: critical,
        worst_branch_gradient: worst,
    })
}

/// Sup-norm of the Hamilton-equation residuals at `eta = 4|z|^2 z'`.
pub fn legendre_check(z: &ZPair, p: &ModelParams) -> Result<f64> {
    let eta = legendre_pair(z);
    Ok(hamilton_residual(z, &eta, p)?.iter().map(|l| l.sup_norm()).fold(0.0, f64::max))
}

/// Hamilton residual for a single Kepler loop.
pub fn legendre_check_loop(z: &ZLoop, charge: f64) -> Result<f64> {
    let eta = legendre(z);
    let e2 = eta.norm2();
    let n = z.norm2();
    let q_res = derivative(z).axpy(-1.0 / (4.0 * n), &eta);
    let p_res = derivative(&eta).axpy(-e2 / (4.0 * n * n) + 2.0 * charge / (n * n), z);
    Ok(q_res.sup_norm().max(p_res.sup_norm()))
}

/// Functionals covered by [`gradcheck`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// `Q(z1) + Q(z2)`.
    Q,
    A,
    I,
    B(f64),
}

fn functional_value(f: Functional, z: &ZPair, charge: f64) -> Result<f64> {
    match f {
        Functional::Q => Ok(eval_q(&z.z1, charge)? + eval_q(&z.z2, charge)?),
        Functional::A => eval_a(z),
        Functional::I => eval_i(z),
        Functional::B(r) => eval_b(z, &ModelParams { charge, r }),
    }
}

fn functional_gradient(f: Functional, z: &ZPair, charge: f64) -> Result<(ZLoop, ZLoop)> {
    match f {
        Functional::Q => Ok((grad_q(&z.z1, charge)?, grad_q(&z.z2, charge)?)),
        Functional::A => grad_a(z),
        Functional::I => grad_i(z),
        Functional::B(r) => grad_b(z, &ModelParams { charge, r }),
    }
}

/// A random smooth loop in `class`: coefficients of the class basis with
/// amplitudes decaying like `1/(1 + m)^2`, unit norm.
pub fn random_direction(z: &ZLoop, rng: &mut impl Rng, modes: usize) -> ZLoop {
    let basis = Basis::new(z.grid, z.class);
    let k = basis.len().min(modes);
    let x: Vec<f64> = (0..basis.len())
        .map(|i| if i < k { rng.random_range(-1.0..1.0) / (1.0 + i as f64).powi(2) } else { 0.0 })
        .collect();
    let v = basis.synth(&x);
    let nrm = v.norm2().sqrt();
    v.scale(1.0 / nrm)
}

/// Max relative error between central differences and `<grad, v>` over
/// `n_dirs` random smooth directions.
pub fn gradcheck(f: Functional, z: &ZPair, charge: f64, n_dirs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (g1, g2) = functional_gradient(f, z, charge)?;
    let gnorm = (g1.norm2() + g2.norm2()).sqrt();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..n_dirs {
        let v1 = random_direction(&z.z1, &mut rng, 12).scale(std::f64::consts::FRAC_1_SQRT_2);
        let v2 = random_direction(&z.z2, &mut rng, 12).scale(std::f64::consts::FRAC_1_SQRT_2);
        let an = inner(&g1, &v1)? + inner(&g2, &v2)?;
        let plus = ZPair { z1: z.z1.axpy(eps, &v1), z2: z.z2.axpy(eps, &v2) };
        let minus = ZPair { z1: z.z1.axpy(-eps, &v1), z2: z.z2.axpy(-eps, &v2) };
        let fd = (functional_value(f, &plus, charge)? - functional_value(f, &minus, charge)?) / (2.0 * eps);
        let scale = an.abs().max(fd.abs()).max(1e-3 * gnorm);
        worst = worst.max((an - fd).abs() / scale);
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    /// `value < tolerance` rather than `value <= tolerance`
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitSummary {
    pub qbar1: f64,
    pub qbar2: f64,
    pub energy: f64,
    pub period: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub summary: OrbitSummary,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: &str, value: f64, tolerance: f64) {
        self.checks.push(Check { name: name.into(), passed: value <= tolerance, value, tolerance, strict: false });
    }

    fn push_strict(&mut self, name: &str, value: f64, bound: f64) {
        self.checks.push(Check { name: name.into(), passed: value < bound, value, tolerance: bound, strict: true });
    }

    /// Aligned human-readable table.
    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut s = String::new();
        for c in &self.checks {
            s += &format!(
                "{:<width$}  {}  {:>12.3e}  ({})\n",
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                c.value,
                if c.strict { format!("< {}", c.tolerance) } else { format!("tol {:.1e}", c.tolerance) }
            );
        }
        let qbar1 = if self.summary.qbar1.is_nan() { "none".to_string() } else { format!("{:.12}", self.summary.qbar1) };
        s += &format!(
            "qbar1={} qbar2={:.12} E={:.12} period={}\n",
            qbar1, self.summary.qbar2, self.summary.energy, self.summary.period
        );
        s
    }
}

/// Tolerances used by [`verify_pair`].
pub mod tol {
    pub const ODE: f64 = 1e-5;
    pub const ENERGY: f64 = 1e-6;
    pub const SYMMETRY: f64 = 1e-7;
    pub const LEGENDRE: f64 = 1e-7;
    pub const BRANCH: f64 = 1e-8;
    pub const CONTINUITY: f64 = 1e-6;
}

/// The full battery of checks for a converged pair.
pub fn verify_pair(z: &ZPair, model: Model, charge: f64) -> Result<VerificationReport> {
    let eq = Equations::for_model(model);
    let q = QOrbit::from_pair(z, model.r(), charge)?;
    let energy = energy_checks(&q, eq)?;
    let mut rep = VerificationReport {
        checks: Vec::new(),
        summary: OrbitSummary { qbar1: mean_q(&z.z1), qbar2: mean_q(&z.z2), energy: energy.energy, period: 1.0 },
    };
    let grad = |p: &ZPair| model.gradient(p, charge);
    let g = grad(z)?;
    rep.push("gradient sup-norm", g.0.sup_norm().max(g.1.sup_norm()), tol::BRANCH);
    rep.push("ode residual", ode_residual(&q, eq)?, tol::ODE);
    rep.push("conserved quantity variation", energy.variation, tol::ENERGY);
    rep.push_strict("total energy", energy.energy, 0.0);
    rep.push("energy jump at collision", energy.collision_jump, tol::CONTINUITY);
    let pos = q.q1.iter().zip(&q.q2).map(|(a, b)| b - a).fold(f64::NEG_INFINITY, f64::max);
    rep.push_strict("max(q2 - q1)", pos, 0.0);
    if z.z1.class.is_symmetric() && z.z2.class.is_symmetric() {
        rep.push("symmetry defect", symmetry_check(z)?.max(), tol::SYMMETRY);
    }
    let corr = correspondence_check(z, &grad, tol::BRANCH)?;
    rep.push("topological class (0 = ok)", if corr.class_ok() { 0.0 } else { 1.0 }, 0.0);
    rep.push("sign branches not critical", (4 - corr.critical_branches) as f64, 0.0);
    if let Model::Interp(r) = model {
        rep.push("hamilton residual", legendre_check(z, &ModelParams { charge, r })?, tol::LEGENDRE);
    }
    Ok(rep)
}

/// Checks for a single Kepler loop.
pub fn verify_kepler(z: &ZLoop, charge: f64) -> Result<VerificationReport> {
    let e = kepler_energy(z, charge)?;
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let mut rep = VerificationReport {
        checks: Vec::new(),
        summary: OrbitSummary { qbar1: f64::NAN, qbar2: mean_q(z), energy: mean, period: 1.0 },
    };
    rep.push("gradient sup-norm", grad_q(z, charge)?.sup_norm(), tol::BRANCH);
    rep.push("energy variation", spread(&e), 1e-8);
    rep.push("energy closed form", (mean - closed_form::kepler_energy(charge)).abs(), 1e-8);
    let d = derivative(z);
    let n = z.n();
    rep.push("symmetry defect", z.values[0].abs().max(d.values[n / 4].abs()).max(reflection_defect(&z_to_q(z)?)), tol::SYMMETRY);
    let flipped = grad_q(&z.neg(), charge)?.sup_norm();
    rep.push("sign branch gradient", flipped, tol::BRANCH);
    let zeros = loop_zeros(z);
    let ok = zeros.len() == 2 && z.class.parity() == Some(1);
    rep.push("topological class (0 = ok)", if ok { 0.0 } else { 1.0 }, 0.0);
    rep.push("hamilton residual", legendre_check_loop(z, charge)?, 1e-8);
    Ok(rep)
}

/// `(z1, z2)` loops of the given classes must be admissible to be checked.
pub fn class_pair_ok(z: &ZPair) -> bool {
    matches!(z.z1.class, SymmetryClass::Periodic1 | SymmetryClass::SymmetricPeriodic1 | SymmetryClass::Plain)
        && matches!(z.z2.class, SymmetryClass::Antiperiodic | SymmetryClass::SymmetricAntiperiodic | SymmetryClass::Plain)
}

/// Momentum pair at Legendre-consistent points.
pub fn momenta(z: &ZPair) -> Momentum {
    legendre_pair(z)
}
