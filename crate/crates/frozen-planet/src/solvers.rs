//! Zeros of discretized gradients: closed-form seeds, a Levenberg-damped
//! Newton iteration on class-adapted coordinates, and the two-stage
//! homotopy from the decoupled problem to the instantaneous interaction.

use crate::error::{Error, Result};
use crate::functionals::{closed_form, decoupled_f, grad_b, grad_q, mean_gap, min_gap, ModelParams};
use crate::grid::{inner, LoopGrid, SymmetryClass, ZLoop, ZPair};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Sup-norm tolerance on the gradient.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Initial Levenberg parameter.
    pub damping: f64,
    /// Central-difference step for Jacobian columns.
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { grad_tol: 1e-9, max_iter: 100, damping: 1e-3, fd_step: 1e-6 }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.grad_tol > 0.0 && self.grad_tol < 1e-4 && self.max_iter > 0 && self.damping > 0.0 && self.fd_step > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("bad solver options {self:?}")))
        }
    }
}

/// The equations whose zeros are sought.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// `grad Q` of a single loop.
    Kepler,
    /// The decoupled family `F^r`.
    Decoupled(f64),
    /// `grad B_r`; `r = 0` is the mean and `r = 1` the instantaneous
    /// interaction.
    Interp(f64),
}

impl Model {
    pub fn r(&self) -> f64 {
        match *self {
            Model::Kepler => 0.0,
            Model::Decoupled(r) | Model::Interp(r) => r,
        }
    }

    pub fn with_r(&self, r: f64) -> Model {
        match self {
            Model::Kepler => Model::Kepler,
            Model::Decoupled(_) => Model::Decoupled(r),
            Model::Interp(_) => Model::Interp(r),
        }
    }

    /// Gradient (or force) field of a pair model.
    pub fn gradient(&self, z: &ZPair, charge: f64) -> Result<(ZLoop, ZLoop)> {
        match *self {
            Model::Kepler => Ok((ZLoop::constant(z.grid(), z.z1.class, 0.0), grad_q(&z.z2, charge)?)),
            Model::Decoupled(r) => decoupled_f(z, r, charge),
            Model::Interp(r) => grad_b(z, &ModelParams { charge, r }),
        }
    }

    /// Admissible set: `z1 > 0`, `z2 > 0` on `(0, 1)`, `qbar1 > qbar2`
    /// and, whenever the instantaneous interaction is switched on,
    /// `q1 > q2` pointwise.
    pub fn admissible(&self, z: &ZPair) -> bool {
        if !z.z1.values.iter().all(|&v| v > 0.0) || !inner_positive(&z.z2) {
            return false;
        }
        if !matches!(mean_gap(z), Ok(g) if g > 0.0) {
            return false;
        }
        match *self {
            Model::Interp(r) if r > 0.0 => matches!(min_gap(z), Ok(g) if g > 0.0),
            _ => true,
        }
    }
}

/// `z > 0` at the grid points of `(0, 1)`.
fn inner_positive(z: &ZLoop) -> bool {
    let half = z.n() / 2;
    (1..half).all(|j| z.values[j] > 0.0)
}

/// The orthonormal real Fourier basis of a class:
/// `cos(pi m (tau - 1/2))` and, for unsymmetric classes, `sin(pi m (tau - 1/2))`
/// for the modes `0 <= m < n/2` of the class parity.
#[derive(Clone, Debug)]
pub struct Basis {
    vectors: Vec<Vec<f64>>,
    modes: Vec<usize>,
    grid: LoopGrid,
    class: SymmetryClass,
}

impl Basis {
    pub fn new(grid: LoopGrid, class: SymmetryClass) -> Basis {
        let n = grid.n();
        let mut vectors = Vec::new();
        let mut modes = Vec::new();
        for m in 0..(n / 2) as i64 {
            if let Some(p) = class.parity() {
                if m.rem_euclid(2) as u8 != p {
                    continue;
                }
            }
            let mf = m as f64;
            let c = if m == 0 { 1.0 } else { 2f64.sqrt() };
            vectors.push(grid.points().iter().map(|t| c * (PI * mf * (t - 0.5)).cos()).collect());
            modes.push(m as usize);
            if m > 0 && !class.is_symmetric() {
                vectors.push(grid.points().iter().map(|t| c * (PI * mf * (t - 0.5)).sin()).collect());
                modes.push(m as usize);
            }
        }
        Basis { vectors, modes, grid, class }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn coords(&self, z: &ZLoop) -> Vec<f64> {
        let n = self.grid.n() as f64;
        self.vectors.iter().map(|e| e.iter().zip(&z.values).map(|(a, b)| a * b).sum::<f64>() / n).collect()
    }

    pub fn synth(&self, x: &[f64]) -> ZLoop {
        let mut v = vec![0.0; self.grid.n()];
        for (c, e) in x.iter().zip(&self.vectors) {
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi += c * ei;
            }
        }
        ZLoop::new(self.grid, v, self.class)
    }

    /// Fourier mode of each basis vector; the basis of a coarser grid is a
    /// prefix of the basis of a finer one.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn vector(&self, k: usize) -> ZLoop {
        ZLoop::new(self.grid, self.vectors[k].clone(), self.class)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport<T = ZPair> {
    pub converged: bool,
    pub iterations: usize,
    pub final_grad_norm: f64,
    #[serde(skip)]
    pub z: Option<T>,
    pub min_singular_value: f64,
    /// Gradient sup-norm after each accepted iterate, starting with `z0`.
    pub history: Vec<f64>,
    /// Number of Jacobians assembled.
    pub jacobians: usize,
}

impl<T> SolveReport<T> {
    pub fn solution(&self) -> &T {
        self.z.as_ref().expect("report carries its iterate")
    }
}

/// A problem in coordinates: components, residual and admissibility.
struct Coords<'a> {
    bases: Vec<Basis>,
    residual: &'a dyn Fn(&[ZLoop]) -> Result<Vec<ZLoop>>,
    admissible: &'a dyn Fn(&[ZLoop]) -> bool,
}

impl Coords<'_> {
    fn split(&self, x: &[f64]) -> Vec<ZLoop> {
        let mut out = Vec::new();
        let mut off = 0;
        for b in &self.bases {
            out.push(b.synth(&x[off..off + b.len()]));
            off += b.len();
        }
        out
    }

    fn join(&self, zs: &[ZLoop]) -> Vec<f64> {
        self.bases.iter().zip(zs).flat_map(|(b, z)| b.coords(z)).collect()
    }

    /// Residual coordinates and the gradient sup-norm.
    fn eval(&self, x: &[f64]) -> Result<(DVector<f64>, f64)> {
        let g = (self.residual)(&self.split(x))?;
        let sup = g.iter().map(|l| l.sup_norm()).fold(0.0, f64::max);
        Ok((DVector::from_vec(self.join(&g)), sup))
    }

    fn jacobian(&self, x: &[f64], step: f64) -> Result<DMatrix<f64>> {
        let dim = x.len();
        let mut jac = DMatrix::zeros(dim, dim);
        let mut xp = x.to_vec();
        for k in 0..dim {
            xp[k] = x[k] + step;
            let (fp, _) = self.eval(&xp)?;
            xp[k] = x[k] - step;
            let (fm, _) = self.eval(&xp)?;
            xp[k] = x[k];
            jac.set_column(k, &((fp - fm) / (2.0 * step)));
        }
        Ok(jac)
    }
}

fn min_singular(j: &DMatrix<f64>) -> f64 {
    j.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Contraction ratio of `|F|` above which a reused Jacobian is recomputed.
const REFRESH_RATIO: f64 = 0.5;
/// Below this sup-norm a step from a reused Jacobian of this solve must
/// gain a factor of ten, or it is redone with a fresh one (keeps the Newton
/// tail fast).  A supplied Jacobian is exempt: on fine grids a chord step
/// is much cheaper than a new Jacobian.
const TAIL: f64 = 1e-4;
const TAIL_RATIO: f64 = 0.1;
/// Extra iterations taken after the tolerance is met, while they still
/// reduce the residual.
const POLISH_STEPS: usize = 4;
/// Contraction ratio after a fresh Jacobian that counts as stagnation.
const STAGNATION_RATIO: f64 = 0.9;

/// Damped Newton iteration; returns the report and the last Jacobian.
fn lm_solve(p: &Coords, z0: &[ZLoop], opts: &SolveOptions, jac0: Option<DMatrix<f64>>) -> Result<(SolveReport<Vec<ZLoop>>, Option<DMatrix<f64>>)> {
    opts.validate()?;
    let mut x = p.join(z0);
    if !(p.admissible)(&p.split(&x)) {
        return Err(Error::DomainExit { iterations: 0, grad_norm: f64::NAN });
    }
    let (mut f, mut sup) = p.eval(&x)?;
    let mut history = vec![sup];
    let mut supplied_jac = jac0.is_some();
    let mut jac = jac0;
    let mut fresh = false;
    let mut jacobians = 0;
    let mut mu = opts.damping;
    let mut iterations = 0;
    // a supplied Jacobian is trusted until it stops contracting
    let mut last_ratio = 0.0;
    let mut stagnant = 0;
    // once below tolerance, a few more steps with the current Jacobian
    // shrink the error of the smooth modes down to round-off; a start that
    // is already converged is returned as is
    let mut polish = if sup <= opts.grad_tol { 0 } else { POLISH_STEPS };
    while (sup > opts.grad_tol || polish > 0) && iterations < opts.max_iter {
        if sup <= opts.grad_tol {
            polish -= 1;
        }
        let polishing = sup <= opts.grad_tol;
        if jac.is_none() || (!fresh && !polishing && last_ratio > REFRESH_RATIO) {
            jac = Some(p.jacobian(&x, opts.fd_step)?);
            jacobians += 1;
            fresh = true;
            supplied_jac = false;
        }
        let svd = jac.as_ref().unwrap().clone().svd(true, true);
        let (u, vt) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
        let proj = u.transpose() * &f;
        let smax = svd.singular_values.max();
        let mut accepted = false;
        let mut inadmissible = false;
        let mut stale = false;
        for _ in 0..40 {
            let mut dx = DVector::zeros(x.len());
            for (i, s) in svd.singular_values.iter().enumerate() {
                if *s > 1e-14 * smax {
                    dx -= vt.row(i).transpose() * (s / (s * s + mu) * proj[i]);
                }
            }
            let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, b)| a + b).collect();
            if !(p.admissible)(&p.split(&xn)) {
                inadmissible = true;
                mu = (mu * 10.0).max(1e-12);
                continue;
            }
            match p.eval(&xn) {
                // at the rounding floor the residual norm is noise and says
                // nothing about the smooth modes; keep any step that stays converged
                Ok((fnew, supn)) if fnew.norm() < f.norm() || (polishing && supn <= opts.grad_tol) => {
                    if !fresh && !polishing && !supplied_jac && sup < TAIL && fnew.norm() > TAIL_RATIO * f.norm() {
                        stale = true;
                        break;
                    }
                    last_ratio = fnew.norm() / f.norm();
                    x = xn;
                    f = fnew;
                    sup = supn;
                    mu = (mu * 0.1).max(1e-15);
                    accepted = true;
                    break;
                }
                Ok(_) => mu = (mu * 10.0).max(1e-12),
                Err(Error::OutsideInstantaneous(..)) | Err(Error::OutsideMean(_)) => {
                    inadmissible = true;
                    mu = (mu * 10.0).max(1e-12);
                }
                Err(e) => return Err(e),
            }
        }
        if stale {
            jac = None;
            continue;
        }
        if !accepted {
            if polishing {
                break;
            }
            if !fresh {
                // a stale Jacobian may be the problem; retry with a new one
                jac = None;
                mu = opts.damping;
                continue;
            }
            let smin = min_singular(jac.as_ref().unwrap());
            if inadmissible {
                return Err(Error::DomainExit { iterations, grad_norm: sup });
            }
            if smin < 1e-12 * smax {
                return Err(Error::RankDeficient(smin));
            }
            break;
        }
        // even an exact Jacobian barely helps: the residual is at the
        // rounding floor of the discretization
        stagnant = if fresh && last_ratio > STAGNATION_RATIO { stagnant + 1 } else { 0 };
        fresh = false;
        iterations += 1;
        history.push(sup);
        if stagnant >= 3 {
            break;
        }
    }
    let jac = match jac {
        Some(j) => j,
        None => {
            jacobians += 1;
            p.jacobian(&x, opts.fd_step)?
        }
    };
    let report = SolveReport {
        converged: sup <= opts.grad_tol,
        iterations,
        final_grad_norm: sup,
        z: Some(p.split(&x)),
        min_singular_value: min_singular(&jac),
        history,
        jacobians,
    };
    Ok((report, Some(jac)))
}

/// Newton solve for a pair model.  `jac0` may carry the Jacobian of a
/// nearby problem (continuation); it is refreshed as soon as the iteration
/// stops contracting.
pub fn newton_solve_with(
    grad_fn: &dyn Fn(&ZPair) -> Result<(ZLoop, ZLoop)>,
    admissible: &dyn Fn(&ZPair) -> bool,
    z0: &ZPair,
    opts: &SolveOptions,
    jac0: Option<DMatrix<f64>>,
) -> Result<(SolveReport, Option<DMatrix<f64>>)> {
    let grid = z0.grid();
    let residual = |zs: &[ZLoop]| -> Result<Vec<ZLoop>> {
        let (g1, g2) = grad_fn(&ZPair { z1: zs[0].clone(), z2: zs[1].clone() })?;
        Ok(vec![g1, g2])
    };
    let adm = |zs: &[ZLoop]| admissible(&ZPair { z1: zs[0].clone(), z2: zs[1].clone() });
    let coords = Coords {
        bases: vec![Basis::new(grid, z0.z1.class), Basis::new(grid, z0.z2.class)],
        residual: &residual,
        admissible: &adm,
    };
    let (r, jac) = lm_solve(&coords, &[z0.z1.clone(), z0.z2.clone()], opts, jac0)?;
    let zs = r.z.unwrap();
    let report = SolveReport {
        converged: r.converged,
        iterations: r.iterations,
        final_grad_norm: r.final_grad_norm,
        z: Some(ZPair { z1: zs[0].clone(), z2: zs[1].clone() }),
        min_singular_value: r.min_singular_value,
        history: r.history,
        jacobians: r.jacobians,
    };
    Ok((report, jac))
}

/// Newton solve of `model` from `z0`.
pub fn newton_solve(model: Model, charge: f64, z0: &ZPair, opts: &SolveOptions) -> Result<SolveReport> {
    let g = |z: &ZPair| model.gradient(z, charge);
    let a = |z: &ZPair| model.admissible(z);
    Ok(newton_solve_with(&g, &a, z0, opts, None)?.0)
}

/// Newton solve for a single loop, e.g. `grad Q`.
pub fn newton_solve_loop(grad_fn: &dyn Fn(&ZLoop) -> Result<ZLoop>, z0: &ZLoop, opts: &SolveOptions) -> Result<SolveReport<ZLoop>> {
    let residual = |zs: &[ZLoop]| -> Result<Vec<ZLoop>> { Ok(vec![grad_fn(&zs[0])?]) };
    let adm = |zs: &[ZLoop]| match zs[0].class.parity() {
        Some(1) => inner_positive(&zs[0]),
        _ => zs[0].values.iter().all(|&v| v > 0.0),
    };
    let coords = Coords { bases: vec![Basis::new(z0.grid, z0.class)], residual: &residual, admissible: &adm };
    let (r, _) = lm_solve(&coords, std::slice::from_ref(z0), opts, None)?;
    Ok(SolveReport {
        converged: r.converged,
        iterations: r.iterations,
        final_grad_norm: r.final_grad_norm,
        z: r.z.map(|mut v| v.remove(0)),
        min_singular_value: r.min_singular_value,
        history: r.history,
        jacobians: r.jacobians,
    })
}

/// The symmetric Kepler collision loop `zeta sin(pi tau)`,
/// `zeta = (2N/pi^2)^{1/6}`, the critical point of `Q` with `a(z) = -pi^2`.
pub fn kepler_seed(grid: LoopGrid, charge: f64) -> ZLoop {
    let zeta = closed_form::zeta(charge);
    ZLoop::from_fn(grid, SymmetryClass::SymmetricAntiperiodic, |t| zeta * (PI * t).sin())
}

/// The zero of the decoupled family at `r = 0`: the Kepler loop and the
/// constant outer loop balancing the mean repulsion.
pub fn decoupled_seed(grid: LoopGrid, charge: f64) -> ZPair {
    let z1 = ZLoop::constant(grid, SymmetryClass::SymmetricPeriodic1, closed_form::zbar1(charge));
    ZPair { z1, z2: kepler_seed(grid, charge) }
}

/// Step policy of the natural-parameter continuation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub stage_a_steps: usize,
    pub stage_b_steps: usize,
    /// Smallest parameter step before giving up.
    pub min_step: f64,
    /// Largest accepted sup-norm change between consecutive solutions.
    pub max_jump: f64,
}

impl Schedule {
    pub fn new(stage_a_steps: usize, stage_b_steps: usize) -> Self {
        Schedule { stage_a_steps, stage_b_steps, min_step: 1e-4, max_jump: 0.25 }
    }
}

#[derive(Clone, Debug)]
pub struct Stage {
    pub label: String,
    pub r: f64,
    pub model: Model,
    pub report: SolveReport,
    /// Last Jacobian of the solve, in class-adapted coordinates.
    pub jacobian: Option<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub struct ContinuationTrace {
    pub stages: Vec<Stage>,
    pub schedule: Schedule,
}

impl ContinuationTrace {
    pub fn last(&self) -> &Stage {
        self.stages.last().expect("trace starts with the seed")
    }
}

/// A continuation that ran out of step size, with everything accepted so
/// far.
#[derive(Clone, Debug)]
pub struct Stall {
    pub error: Error,
    pub trace: ContinuationTrace,
}

fn seed_report(z: ZPair, grad_norm: f64) -> SolveReport {
    SolveReport {
        converged: true,
        iterations: 0,
        final_grad_norm: grad_norm,
        z: Some(z),
        min_singular_value: f64::NAN,
        history: vec![grad_norm],
        jacobians: 0,
    }
}

fn sup_grad(g: &(ZLoop, ZLoop)) -> f64 {
    g.0.sup_norm().max(g.1.sup_norm())
}

/// Follow `model` from `r = 0` to `r_end` in steps of nominal size
/// `1/steps`, halving on failure.
#[allow(clippy::too_many_arguments)]
fn run_stage(
    trace: &mut ContinuationTrace,
    label: &str,
    model: Model,
    charge: f64,
    steps: usize,
    r_end: f64,
    opts: &SolveOptions,
    jac: &mut Option<DMatrix<f64>>,
) -> std::result::Result<(), Error> {
    let nominal = 1.0 / steps.max(1) as f64;
    let mut r = 0.0;
    let mut dr = nominal;
    let schedule = trace.schedule;
    // converge at r = 0 first (the previous stage ends at a zero of a
    // different map)
    let start = trace.last().report.solution().clone();
    let solve = |m: Model, z: &ZPair, j: Option<DMatrix<f64>>| {
        let g = |z: &ZPair| m.gradient(z, charge);
        let a = |z: &ZPair| m.admissible(z);
        newton_solve_with(&g, &a, z, opts, j)
    };
    let m0 = model.with_r(0.0);
    match solve(m0, &start, None) {
        Ok((rep, j)) if rep.converged => {
            *jac = j;
            trace.stages.push(Stage { label: label.to_string(), r: 0.0, model: m0, report: rep, jacobian: jac.clone() });
        }
        Ok(_) => return Err(Error::Stalled(0.0)),
        Err(e) => return Err(e),
    }
    while r < r_end - 1e-12 {
        let target = (r + dr).min(r_end);
        let m = model.with_r(target);
        let prev = trace.last().report.solution().clone();
        let ok = match solve(m, &prev, jac.clone()) {
            Ok((rep, j)) if rep.converged && rep.solution().sup_distance(&prev) <= schedule.max_jump => {
                *jac = j;
                trace.stages.push(Stage { label: label.to_string(), r: target, model: m, report: rep, jacobian: jac.clone() });
                true
            }
            _ => false,
        };
        if ok {
            r = target;
            dr = (2.0 * dr).min(nominal);
        } else {
            dr *= 0.5;
            *jac = None;
            if dr < schedule.min_step {
                return Err(Error::Stalled(r));
            }
        }
    }
    Ok(())
}

/// Two-stage homotopy.  Stage A deforms the decoupled family `F^r` from its
/// closed-form zero to a critical point of `B_av`; stage B deforms
/// `grad B_r` from the mean (`r = 0`) to the instantaneous (`r = 1`)
/// interaction.  A stage with zero steps is skipped.
pub fn continue_homotopy(grid: LoopGrid, charge: f64, schedule: Schedule, opts: &SolveOptions) -> std::result::Result<ContinuationTrace, Stall> {
    continue_to(grid, charge, schedule, opts, 1.0, 1.0)
}

/// Continuations on grids finer than this run on this grid first; every
/// accepted step is then interpolated to the requested grid and polished.
pub const COARSE_N: usize = 256;

/// Like [`continue_homotopy`], but stage A stops at `r_a` and stage B at
/// `r_b` (`r_b = 0` only converges the mean-interaction problem).
pub fn continue_to(
    grid: LoopGrid,
    charge: f64,
    schedule: Schedule,
    opts: &SolveOptions,
    r_a: f64,
    r_b: f64,
) -> std::result::Result<ContinuationTrace, Stall> {
    if grid.n() <= COARSE_N {
        return continue_on(grid, charge, schedule, opts, r_a, r_b);
    }
    let coarse = LoopGrid::new(COARSE_N).expect("valid coarse grid");
    let (coarse_trace, stall) = match continue_on(coarse, charge, schedule, opts, r_a, r_b) {
        Ok(t) => (t, None),
        Err(s) => (s.trace, Some(s.error)),
    };
    let mut trace = ContinuationTrace { stages: Vec::new(), schedule };
    for st in coarse_trace.stages {
        let stage = if st.label == "seed" {
            let seed = decoupled_seed(grid, charge);
            let g = st.model.gradient(&seed, charge).map(|g| sup_grad(&g)).unwrap_or(f64::NAN);
            Stage { report: seed_report(seed, g), jacobian: None, ..st }
        } else {
            match refine(st.model, charge, st.report.solution(), grid, opts, st.jacobian.as_ref()) {
                Ok((report, jacobian)) if report.converged => Stage { report, jacobian, ..st },
                Ok(_) => return Err(Stall { error: Error::Stalled(st.r), trace }),
                Err(error) => return Err(Stall { error, trace }),
            }
        };
        trace.stages.push(stage);
    }
    match stall {
        None => Ok(trace),
        Some(error) => Err(Stall { error, trace }),
    }
}

/// Interpolate a converged pair to `grid` and polish it, starting from the
/// coarse Jacobian extended by [`prolong_jacobian`].
pub fn refine(
    model: Model,
    charge: f64,
    z: &ZPair,
    grid: LoopGrid,
    opts: &SolveOptions,
    coarse_jacobian: Option<&DMatrix<f64>>,
) -> Result<(SolveReport, Option<DMatrix<f64>>)> {
    let z0 = z.map(|l| l.resample(grid));
    let jac0 = coarse_jacobian.map(|j| prolong_jacobian(j, z.grid(), &z0));
    let g = |p: &ZPair| model.gradient(p, charge);
    let a = |p: &ZPair| model.admissible(p);
    newton_solve_with(&g, &a, &z0, opts, jac0)
}

/// Embed a Jacobian from a coarser grid: the coarse blocks keep their
/// entries, the new high modes get a diagonal growing like `m^2` from the
/// last coarse diagonal entry (the `-z''` term dominates there).
pub fn prolong_jacobian(coarse: &DMatrix<f64>, coarse_grid: LoopGrid, z: &ZPair) -> DMatrix<f64> {
    let fine = [Basis::new(z.grid(), z.z1.class), Basis::new(z.grid(), z.z2.class)];
    let dims_c = [Basis::new(coarse_grid, z.z1.class).len(), Basis::new(coarse_grid, z.z2.class).len()];
    let dims_f = [fine[0].len(), fine[1].len()];
    let off_c = [0, dims_c[0]];
    let off_f = [0, dims_f[0]];
    let mut out = DMatrix::zeros(dims_f[0] + dims_f[1], dims_f[0] + dims_f[1]);
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..dims_c[a] {
                for k in 0..dims_c[b] {
                    out[(off_f[a] + i, off_f[b] + k)] = coarse[(off_c[a] + i, off_c[b] + k)];
                }
            }
        }
        let last = dims_c[a] - 1;
        let m_last = fine[a].modes()[last].max(1) as f64;
        let d_last = coarse[(off_c[a] + last, off_c[a] + last)];
        for i in dims_c[a]..dims_f[a] {
            let m = fine[a].modes()[i] as f64;
            out[(off_f[a] + i, off_f[a] + i)] = d_last * (m / m_last).powi(2);
        }
    }
    out
}

fn continue_on(
    grid: LoopGrid,
    charge: f64,
    schedule: Schedule,
    opts: &SolveOptions,
    r_a: f64,
    r_b: f64,
) -> std::result::Result<ContinuationTrace, Stall> {
    let seed = decoupled_seed(grid, charge);
    let g0 = Model::Decoupled(0.0).gradient(&seed, charge).map(|g| sup_grad(&g)).unwrap_or(f64::NAN);
    let mut trace = ContinuationTrace {
        stages: vec![Stage { label: "seed".into(), r: 0.0, model: Model::Decoupled(0.0), report: seed_report(seed, g0), jacobian: None }],
        schedule,
    };
    let mut jac = None;
    if schedule.stage_a_steps > 0 {
        if let Err(error) = run_stage(&mut trace, "A", Model::Decoupled(0.0), charge, schedule.stage_a_steps, r_a, opts, &mut jac) {
            return Err(Stall { error, trace });
        }
    }
    jac = None;
    if schedule.stage_b_steps > 0 {
        if let Err(error) = run_stage(&mut trace, "B", Model::Interp(0.0), charge, schedule.stage_b_steps, r_b, opts, &mut jac) {
            return Err(Stall { error, trace });
        }
    }
    Ok(trace)
}

/// The `k` smallest singular values of the central-difference Jacobian of
/// `grad_fn` in the class-adapted coordinates of `z`.
pub fn hessian_spectrum(grad_fn: &dyn Fn(&ZPair) -> Result<(ZLoop, ZLoop)>, z: &ZPair, k: usize, fd_step: f64) -> Result<Vec<f64>> {
    let j = jacobian(grad_fn, z, fd_step)?;
    let mut s: Vec<f64> = j.singular_values().iter().cloned().collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    s.truncate(k);
    Ok(s)
}

/// Central-difference Jacobian in the coordinates of [`Basis`] (first the
/// `z1` block, then `z2`).
pub fn jacobian(grad_fn: &dyn Fn(&ZPair) -> Result<(ZLoop, ZLoop)>, z: &ZPair, fd_step: f64) -> Result<DMatrix<f64>> {
    let residual = |zs: &[ZLoop]| -> Result<Vec<ZLoop>> {
        let (g1, g2) = grad_fn(&ZPair { z1: zs[0].clone(), z2: zs[1].clone() })?;
        Ok(vec![g1, g2])
    };
    let adm = |_: &[ZLoop]| true;
    let grid = z.grid();
    let coords = Coords {
        bases: vec![Basis::new(grid, z.z1.class), Basis::new(grid, z.z2.class)],
        residual: &residual,
        admissible: &adm,
    };
    coords.jacobian(&coords.join(&[z.z1.clone(), z.z2.clone()]), fd_step)
}

/// `<g, e_0>` for the constant basis vector, used to read off diagonal
/// blocks of Jacobians.
pub fn constant_component(g: &ZLoop) -> f64 {
    inner(g, &ZLoop::constant(g.grid, g.class, 1.0)).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_is_orthonormal_and_complete() {
        let g = LoopGrid::new(32).unwrap();
        for class in [SymmetryClass::SymmetricPeriodic1, SymmetryClass::SymmetricAntiperiodic, SymmetryClass::Periodic1, SymmetryClass::Plain] {
            let b = Basis::new(g, class);
            for i in 0..b.len() {
                for k in 0..b.len() {
                    let ip = inner(&b.vector(i), &b.vector(k)).unwrap();
                    assert!((ip - if i == k { 1.0 } else { 0.0 }).abs() < 1e-13);
                }
            }
        }
        assert_eq!(Basis::new(g, SymmetryClass::SymmetricPeriodic1).len(), 8);
        assert_eq!(Basis::new(g, SymmetryClass::SymmetricAntiperiodic).len(), 8);
        assert_eq!(Basis::new(g, SymmetryClass::Plain).len(), 31);
    }

    #[test]
    fn seed_is_symmetric_and_critical() {
        let g = LoopGrid::new(128).unwrap();
        let z = kepler_seed(g, 2.0);
        for j in 0..g.n() {
            assert!((z.values[j] - z.values[g.reflect(j)]).abs() < 1e-15);
        }
        assert!(grad_q(&z, 2.0).unwrap().sup_norm() < 1e-11);
    }

    #[test]
    fn converged_start_returns_immediately() {
        let g = LoopGrid::new(64).unwrap();
        let z = kepler_seed(g, 2.0);
        let rep = newton_solve_loop(&|z| grad_q(z, 2.0), &z, &SolveOptions::default()).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
    }
}
