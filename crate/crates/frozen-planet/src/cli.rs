//! Command-line front end and the on-disk orbit format.
//!
//! ```text
//! frozen-planet solve    --model kepler|av|in|interp|decoupled [--r R] [--n N] [--tol T] --out FILE [--seed FILE]
//! frozen-planet continue [--stages A,B] [--steps 8,8] [--n N] --out-dir DIR
//! frozen-planet verify   FILE [--json]
//! frozen-planet export   FILE --out CSV [--samples K] [--plot SCRIPT] [--rescale-energy E]
//! ```
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.

use crate::error::Error;
use crate::functionals::grad_q;
use crate::grid::{LoopGrid, SymmetryClass, ZLoop, ZPair};
use crate::levi_civita::{energies, kepler_energy, mean_q, time_change, z_to_q};
use crate::solvers::{continue_to, kepler_seed, newton_solve, newton_solve_loop, ContinuationTrace, Model, Schedule, SolveOptions, Stage};
use crate::verify::{energy_checks, verify_kepler, verify_pair, Equations, VerificationReport};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    #[serde(default)]
    pub solver: Option<SolveOptions>,
    #[serde(default)]
    pub schedule: Option<Schedule>,
    /// Gradient sup-norm of the stored loops.
    pub grad_norm: f64,
    #[serde(default)]
    pub stage: Option<String>,
}

/// A converged loop or pair, period normalized to 1.
///
/// Kepler files carry only the collision loop (`z1` is `null`) and one
/// class name; pair files carry two.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OrbitFile {
    pub schema_version: u32,
    pub n: usize,
    pub model: String,
    pub r: f64,
    #[serde(rename = "N")]
    pub charge: f64,
    pub z1: Option<Vec<f64>>,
    pub z2: Vec<f64>,
    pub classes: Vec<String>,
    pub provenance: Provenance,
}

/// What an orbit file holds once loaded.
#[derive(Clone, Debug)]
pub enum Orbit {
    Kepler(ZLoop),
    Pair(Model, ZPair),
}

/// Parse a model label; `r` is ignored for the labels that fix it.
pub fn parse_model(label: &str, r: f64) -> Option<Model> {
    match label {
        "kepler" => Some(Model::Kepler),
        "av" => Some(Model::Interp(0.0)),
        "in" => Some(Model::Interp(1.0)),
        "interp" => Some(Model::Interp(r)),
        "decoupled" => Some(Model::Decoupled(r)),
        _ => None,
    }
}

fn model_label(m: Model) -> &'static str {
    match m {
        Model::Kepler => "kepler",
        Model::Decoupled(_) => "decoupled",
        Model::Interp(r) if r == 0.0 => "av",
        Model::Interp(r) if r == 1.0 => "in",
        Model::Interp(_) => "interp",
    }
}

fn sup_pair(g: &(ZLoop, ZLoop)) -> f64 {
    g.0.sup_norm().max(g.1.sup_norm())
}

impl OrbitFile {
    pub fn from_kepler(z: &ZLoop, charge: f64, solver: Option<SolveOptions>) -> crate::Result<OrbitFile> {
        Ok(OrbitFile {
            schema_version: SCHEMA_VERSION,
            n: z.n(),
            model: "kepler".into(),
            r: 0.0,
            charge,
            z1: None,
            z2: z.values.clone(),
            classes: vec![z.class.name().into()],
            provenance: Provenance { solver, schedule: None, grad_norm: grad_q(z, charge)?.sup_norm(), stage: None },
        })
    }

    pub fn from_pair(z: &ZPair, model: Model, charge: f64, provenance: Provenance) -> crate::Result<OrbitFile> {
        let grad_norm = sup_pair(&model.gradient(z, charge)?);
        Ok(OrbitFile {
            schema_version: SCHEMA_VERSION,
            n: z.grid().n(),
            model: model_label(model).into(),
            r: model.r(),
            charge,
            z1: Some(z.z1.values.clone()),
            z2: z.z2.values.clone(),
            classes: vec![z.z1.class.name().into(), z.z2.class.name().into()],
            provenance: Provenance { grad_norm, ..provenance },
        })
    }

    /// Structural validation and conversion to loops.
    pub fn orbit(&self) -> Result<Orbit, String> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(format!("unsupported schema version {}", self.schema_version));
        }
        let grid = LoopGrid::new(self.n).map_err(|e| e.to_string())?;
        if !(self.charge.is_finite() && self.charge > 1.0) {
            return Err(format!("nuclear charge must exceed 1, got {}", self.charge));
        }
        if !(0.0..=1.0).contains(&self.r) {
            return Err(format!("r must lie in [0, 1], got {}", self.r));
        }
        let model = parse_model(&self.model, self.r).ok_or_else(|| format!("unknown model {:?}", self.model))?;
        let to_loop = |v: &Vec<f64>, class: &str| -> Result<ZLoop, String> {
            if v.len() != self.n {
                return Err(format!("expected {} samples, found {}", self.n, v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err("non-finite sample".into());
            }
            let class = SymmetryClass::from_name(class).ok_or_else(|| format!("unknown class {class:?}"))?;
            Ok(ZLoop::new(grid, v.clone(), class))
        };
        match (model, &self.z1, self.classes.as_slice()) {
            (Model::Kepler, None, [c2]) => Ok(Orbit::Kepler(to_loop(&self.z2, c2)?)),
            (Model::Kepler, _, _) => Err("kepler files hold z2 and one class only".into()),
            (m, Some(z1), [c1, c2]) => {
                let pair = ZPair::new(to_loop(z1, c1)?, to_loop(&self.z2, c2)?).map_err(|e| e.to_string())?;
                Ok(Orbit::Pair(m, pair))
            }
            _ => Err("pair files need z1, z2 and two classes".into()),
        }
    }

    pub fn load(path: &Path) -> Result<(OrbitFile, Orbit), String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let file: OrbitFile = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let orbit = file.orbit().map_err(|e| format!("{}: {e}", path.display()))?;
        Ok((file, orbit))
    }

    pub fn save(&self, path: &Path) -> Result<(), String> {
        let text = serde_json::to_string_pretty(self).map_err(|e| e.to_string())?;
        std::fs::write(path, text + "\n").map_err(|e| format!("{}: {e}", path.display()))
    }
}

/// Gradient sup-norm of a loaded orbit.
pub fn grad_norm(orbit: &Orbit, charge: f64) -> crate::Result<f64> {
    match orbit {
        Orbit::Kepler(z) => Ok(grad_q(z, charge)?.sup_norm()),
        Orbit::Pair(m, z) => Ok(sup_pair(&m.gradient(z, charge)?)),
    }
}

/// The one-line summary printed after solves.
pub fn summary_line(orbit: &Orbit, charge: f64) -> crate::Result<String> {
    let g = grad_norm(orbit, charge)?;
    Ok(match orbit {
        Orbit::Kepler(z) => {
            let e = kepler_energy(z, charge)?;
            let e = e.iter().sum::<f64>() / e.len() as f64;
            format!("model=kepler r=0 grad={g:.3e} E={e:.12} qbar1=none qbar2={:.12}", mean_q(z))
        }
        Orbit::Pair(m, z) => {
            let q = crate::levi_civita::QOrbit::from_pair(z, m.r(), charge)?;
            let e = energy_checks(&q, Equations::for_model(*m))?.energy;
            format!(
                "model={} r={} grad={g:.3e} E={e:.12} qbar1={:.12} qbar2={:.12}",
                model_label(*m),
                m.r(),
                mean_q(&z.z1),
                mean_q(&z.z2)
            )
        }
    })
}

#[derive(Parser, Debug)]
#[command(name = "frozen-planet", version, about = "Symmetric frozen planet orbits of classical helium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Numerics {
    /// Grid size (multiple of 4, at least 16).
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Nuclear charge N > 1.
    #[arg(long = "charge", default_value_t = 2.0)]
    pub charge: f64,
    /// Gradient sup-norm tolerance [default: 1e-9 for kepler, 1e-8 for
    /// pair models].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
}

/// Default tolerance for pair models: the rounding floor of `-4|z|^2 z''`
/// in sup-norm reaches ~1e-9 at n = 512.
pub const PAIR_TOL: f64 = 1e-8;

impl Numerics {
    fn options(&self, pair: bool) -> SolveOptions {
        let default = if pair { PAIR_TOL } else { SolveOptions::default().grad_tol };
        SolveOptions { grad_tol: self.tol.unwrap_or(default), max_iter: self.max_iter, ..SolveOptions::default() }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Find a critical point and write it as an orbit file.
    Solve {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[command(flatten)]
        numerics: Numerics,
        #[arg(long)]
        out: PathBuf,
        /// Start from this orbit file instead of the continuation.
        #[arg(long)]
        seed: Option<PathBuf>,
        /// Continuation steps for stages A and B when no seed is given.
        #[arg(long, default_value = "4,4")]
        steps: String,
    },
    /// Run the two-stage homotopy, writing every accepted step.
    Continue {
        #[arg(long, default_value = "A,B")]
        stages: String,
        #[arg(long, default_value = "4,4")]
        steps: String,
        #[command(flatten)]
        numerics: Numerics,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run all checks on an orbit file.
    Verify {
        path: PathBuf,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Write the physical trajectories as CSV.
    Export {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Uniform samples over one period (default n/2, the grid itself).
        #[arg(long)]
        samples: Option<usize>,
        /// Also write a gnuplot script drawing q1 and q2.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Rescale to this (negative) total energy.
        #[arg(long, allow_hyphen_values = true)]
        rescale_energy: Option<f64>,
    },
}

/// Process outcome: exit code plus what goes to stdout/stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl Into<String>) -> Outcome {
        Outcome { code: 1, stderr: msg.into(), ..Default::default() }
    }

    fn numerical(msg: impl Into<String>) -> Outcome {
        Outcome { code: 2, stderr: msg.into(), ..Default::default() }
    }
}

/// Map library errors to exit codes: malformed input is a usage error,
/// everything else a numerical failure.
fn from_error(e: Error) -> Outcome {
    match e {
        Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::IncompatibleGrids | Error::IncompatibleClasses(_) => Outcome::usage(e.to_string()),
        _ => Outcome::numerical(e.to_string()),
    }
}

fn parse_steps(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|_| format!("bad step count {x:?}")))
        .collect()
}

fn validate_numerics(n: &Numerics, pair: bool) -> Result<(LoopGrid, SolveOptions), Outcome> {
    let grid = LoopGrid::new(n.n).map_err(from_error)?;
    if !(n.charge.is_finite() && n.charge > 1.0) {
        return Err(Outcome::usage(format!("--charge must exceed 1, got {}", n.charge)));
    }
    let opts = n.options(pair);
    opts.validate().map_err(from_error)?;
    Ok((grid, opts))
}

/// Parse `argv` (including the program name) and run the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli.command),
        Err(e) => {
            let text = e.render().to_string();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: 0, stdout: text, ..Default::default() }
                }
                _ => Outcome::usage(text),
            }
        }
    }
}

/// Entry point of the binary.
pub fn run() -> i32 {
    let out = run_args(std::env::args_os());
    print!("{}", out.stdout);
    let _ = std::io::stdout().flush();
    eprint!("{}", out.stderr);
    out.code
}

pub fn execute(cmd: Command) -> Outcome {
    let res = match cmd {
        Command::Solve { model, r, numerics, out, seed, steps } => cmd_solve(&model, r, &numerics, &out, seed.as_deref(), &steps),
        Command::Continue { stages, steps, numerics, out_dir } => cmd_continue(&stages, &steps, &numerics, &out_dir),
        Command::Verify { path, json } => cmd_verify(&path, json),
        Command::Export { path, out, samples, plot, rescale_energy } => cmd_export(&path, &out, samples, plot.as_deref(), rescale_energy),
    };
    res.unwrap_or_else(|o| o)
}

fn cmd_solve(label: &str, r: f64, num: &Numerics, out: &Path, seed: Option<&Path>, steps: &str) -> Result<Outcome, Outcome> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Outcome::usage(format!("--r must lie in [0, 1], got {r}")));
    }
    let model = parse_model(label, r).ok_or_else(|| Outcome::usage(format!("unknown model {label:?}; expected kepler, av, in, interp or decoupled")))?;
    let (grid, opts) = validate_numerics(num, model != Model::Kepler)?;
    let steps = parse_steps(steps).map_err(Outcome::usage)?;
    if steps.len() != 2 || steps.contains(&0) {
        return Err(Outcome::usage("--steps expects two positive counts, e.g. 4,4"));
    }
    let seeded = match seed {
        Some(p) => {
            let (file, orbit) = OrbitFile::load(p).map_err(Outcome::usage)?;
            if file.n != grid.n() {
                return Err(Outcome::usage(format!("seed has n = {}, requested {}", file.n, grid.n())));
            }
            Some(orbit)
        }
        None => None,
    };
    let file = match model {
        Model::Kepler => {
            let z0 = match seeded {
                Some(Orbit::Kepler(z)) => z,
                Some(Orbit::Pair(_, p)) => p.z2,
                None => kepler_seed(grid, num.charge),
            };
            let charge = num.charge;
            let rep = newton_solve_loop(&|z: &ZLoop| grad_q(z, charge), &z0, &opts).map_err(from_error)?;
            if !rep.converged {
                return Err(Outcome::numerical(format!("no convergence: grad = {:.3e}", rep.final_grad_norm)));
            }
            OrbitFile::from_kepler(rep.solution(), charge, Some(opts)).map_err(from_error)?
        }
        m => {
            let (z, stage) = match seeded {
                Some(Orbit::Pair(_, z0)) => {
                    let rep = newton_solve(m, num.charge, &z0, &opts).map_err(from_error)?;
                    if !rep.converged {
                        return Err(Outcome::numerical(format!("no convergence: grad = {:.3e}", rep.final_grad_norm)));
                    }
                    (rep.solution().clone(), None)
                }
                Some(Orbit::Kepler(_)) => return Err(Outcome::usage("a pair model needs a pair seed")),
                None => {
                    let schedule = Schedule::new(steps[0], steps[1]);
                    let (r_a, r_b, schedule) = match m {
                        Model::Decoupled(r) => (r, 0.0, Schedule { stage_b_steps: 0, ..schedule }),
                        _ => (1.0, m.r(), schedule),
                    };
                    let trace = continue_to(grid, num.charge, schedule, &opts, r_a, r_b)
                        .map_err(|s| Outcome::numerical(format!("continuation stalled: {}", s.error)))?;
                    let last = trace.last();
                    (last.report.solution().clone(), Some((schedule, last.label.clone())))
                }
            };
            let prov = Provenance {
                solver: Some(opts),
                schedule: stage.as_ref().map(|s| s.0),
                grad_norm: 0.0,
                stage: stage.map(|s| s.1),
            };
            OrbitFile::from_pair(&z, m, num.charge, prov).map_err(from_error)?
        }
    };
    file.save(out).map_err(Outcome::usage)?;
    let orbit = file.orbit().map_err(Outcome::usage)?;
    let line = summary_line(&orbit, num.charge).map_err(from_error)?;
    Ok(Outcome { code: 0, stdout: line + "\n", ..Default::default() })
}

/// One entry of the continuation manifest.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEntry {
    pub file: String,
    pub stage: String,
    pub model: String,
    pub r: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceManifest {
    pub schedule: Schedule,
    pub completed: bool,
    /// Parameter value at which the continuation stalled.
    pub stalled_at: Option<f64>,
    pub steps: Vec<TraceEntry>,
}

fn write_trace(dir: &Path, trace: &ContinuationTrace, charge: f64, opts: SolveOptions, stall: Option<f64>) -> Result<TraceManifest, Outcome> {
    let mut steps = Vec::new();
    for (k, Stage { label, r, model, report, .. }) in trace.stages.iter().enumerate() {
        let name = format!("step_{k:03}_{label}.json");
        let prov = Provenance { solver: Some(opts), schedule: Some(trace.schedule), grad_norm: 0.0, stage: Some(label.clone()) };
        let file = OrbitFile::from_pair(report.solution(), *model, charge, prov).map_err(from_error)?;
        file.save(&dir.join(&name)).map_err(Outcome::usage)?;
        steps.push(TraceEntry {
            file: name,
            stage: label.clone(),
            model: model_label(*model).into(),
            r: *r,
            grad_norm: file.provenance.grad_norm,
            iterations: report.iterations,
        });
    }
    let manifest = TraceManifest { schedule: trace.schedule, completed: stall.is_none(), stalled_at: stall, steps };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Outcome::usage(e.to_string()))?;
    std::fs::write(dir.join("trace.json"), text + "\n").map_err(|e| Outcome::usage(e.to_string()))?;
    Ok(manifest)
}

fn cmd_continue(stages: &str, steps: &str, num: &Numerics, dir: &Path) -> Result<Outcome, Outcome> {
    let names: Vec<&str> = stages.split(',').map(str::trim).collect();
    let mut counts = parse_steps(steps).map_err(Outcome::usage)?;
    if names.iter().any(|s| !matches!(*s, "A" | "B")) || names.is_empty() {
        return Err(Outcome::usage(format!("invalid stage list {stages:?}; expected A, B or A,B")));
    }
    if counts.len() == 1 && names.len() == 2 {
        counts.push(counts[0]);
    }
    if counts.len() != names.len() || counts.contains(&0) {
        return Err(Outcome::usage("--steps needs one positive count per stage"));
    }
    let (grid, opts) = validate_numerics(num, true)?;
    let count = |s: &str| names.iter().position(|x| *x == s).map_or(0, |i| counts[i]);
    let schedule = Schedule::new(count("A"), count("B"));
    std::fs::create_dir_all(dir).map_err(|e| Outcome::usage(format!("{}: {e}", dir.display())))?;
    match continue_to(grid, num.charge, schedule, &opts, 1.0, 1.0) {
        Ok(trace) => {
            let m = write_trace(dir, &trace, num.charge, opts, None)?;
            let mut out = String::new();
            for e in &m.steps {
                let _ = writeln!(out, "{:<5} r={:<8.5} grad={:.3e} {}", e.stage, e.r, e.grad_norm, e.file);
            }
            Ok(Outcome { code: 0, stdout: out, ..Default::default() })
        }
        Err(stall) => {
            let r = match stall.error {
                Error::Stalled(r) => r,
                _ => stall.trace.last().r,
            };
            write_trace(dir, &stall.trace, num.charge, opts, Some(r))?;
            Err(Outcome::numerical(format!("continuation stalled: {}\n", stall.error)))
        }
    }
}

/// Full report for a loaded orbit, including reproduction of the stored
/// gradient norm.
pub fn verify_orbit(file: &OrbitFile, orbit: &Orbit) -> crate::Result<VerificationReport> {
    let mut rep = match orbit {
        Orbit::Kepler(z) => verify_kepler(z, file.charge)?,
        Orbit::Pair(m, z) => verify_pair(z, *m, file.charge)?,
    };
    let g = grad_norm(orbit, file.charge)?;
    let d = (g - file.provenance.grad_norm).abs();
    rep.checks.push(crate::verify::Check { name: "stored gradient norm reproduced".into(), passed: d <= 1e-10, value: d, tolerance: 1e-10, strict: false });
    Ok(rep)
}

fn cmd_verify(path: &Path, json: bool) -> Result<Outcome, Outcome> {
    let (file, orbit) = OrbitFile::load(path).map_err(Outcome::usage)?;
    let rep = match verify_orbit(&file, &orbit) {
        Ok(r) => r,
        // an orbit the checks cannot even evaluate fails them all
        Err(e) => return Err(Outcome::numerical(format!("verification aborted: {e}\n"))),
    };
    let stdout = if json {
        serde_json::to_string_pretty(&rep).map_err(|e| Outcome::usage(e.to_string()))? + "\n"
    } else {
        let mut s = rep.to_text();
        let _ = writeln!(s, "{}", serde_json::to_string(&rep.summary).unwrap_or_default());
        let _ = writeln!(s, "overall: {}", if rep.passed() { "PASS" } else { "FAIL" });
        s
    };
    Ok(Outcome { code: if rep.passed() { 0 } else { 2 }, stdout, ..Default::default() })
}

/// Columns of the CSV export.
#[derive(Clone, Debug, Default)]
pub struct Trajectories {
    pub t: Vec<f64>,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

/// `q` and `E` of a loop at `samples` uniform times in `[0, 1)`; with
/// `samples = n/2` these are exactly the grid values of `z_to_q`.
fn loop_columns(z: &ZLoop, charge: f64, samples: usize) -> crate::Result<(Vec<f64>, Vec<f64>)> {
    let tc = time_change(z)?;
    let taus: Vec<f64> = if samples * 2 == z.n() {
        tc.tau_of_t[..samples].to_vec()
    } else {
        (0..samples).map(|k| tc.tau_at(k as f64 / samples as f64)).collect()
    };
    let q = if samples * 2 == z.n() {
        z_to_q(z)?[..samples].to_vec()
    } else {
        let s = z.series();
        taus.iter().map(|&t| s.eval(t).powi(2)).collect()
    };
    Ok((q, energies(z, charge, &taus, 1.0)?))
}

pub fn trajectories(orbit: &Orbit, charge: f64, samples: usize) -> crate::Result<Trajectories> {
    let t = (0..samples).map(|k| k as f64 / samples as f64).collect();
    let nan = vec![f64::NAN; samples];
    Ok(match orbit {
        Orbit::Kepler(z) => {
            let (q2, e2) = loop_columns(z, charge, samples)?;
            Trajectories { t, q1: nan.clone(), q2, e1: nan, e2 }
        }
        Orbit::Pair(_, z) => {
            let (q1, e1) = loop_columns(&z.z1, charge, samples)?;
            let (q2, e2) = loop_columns(&z.z2, charge, samples)?;
            Trajectories { t, q1, q2, e1, e2 }
        }
    })
}

/// Apply `t -> c^3 t`, `q -> c^2 q`, `E -> E/c^2`.
pub fn rescale(tr: &mut Trajectories, c: f64) {
    tr.t.iter_mut().for_each(|x| *x *= c.powi(3));
    tr.q1.iter_mut().chain(tr.q2.iter_mut()).for_each(|x| *x *= c * c);
    tr.e1.iter_mut().chain(tr.e2.iter_mut()).for_each(|x| *x /= c * c);
}

fn total_energy(orbit: &Orbit, charge: f64) -> crate::Result<f64> {
    match orbit {
        Orbit::Kepler(z) => {
            let e = kepler_energy(z, charge)?;
            Ok(e.iter().sum::<f64>() / e.len() as f64)
        }
        Orbit::Pair(m, z) => {
            let q = crate::levi_civita::QOrbit::from_pair(z, m.r(), charge)?;
            Ok(energy_checks(&q, Equations::for_model(*m))?.energy)
        }
    }
}

fn plot_script(csv: &Path, period: f64) -> String {
    let name = csv.display();
    format!(
        "# q1 (outer) and q2 (inner) electron distance from the nucleus over two periods\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set ylabel 'q'\n\
         set xrange [0:{:.17}]\n\
         set yrange [0:*]\n\
         set arrow from graph 0, first 0 to graph 1, first 0 nohead\n\
         plot '{name}' using 1:2 with lines lw 2 title 'q1', \\\n     \
         '{name}' using 1:3 with lines lw 2 title 'q2', \\\n     \
         '{name}' using ($1+{period:.17}):2 with lines lw 2 notitle, \\\n     \
         '{name}' using ($1+{period:.17}):3 with lines lw 2 notitle\n",
        2.0 * period
    )
}

fn cmd_export(path: &Path, out: &Path, samples: Option<usize>, plot: Option<&Path>, energy: Option<f64>) -> Result<Outcome, Outcome> {
    let (file, orbit) = OrbitFile::load(path).map_err(Outcome::usage)?;
    let samples = samples.unwrap_or(file.n / 2);
    if samples == 0 {
        return Err(Outcome::usage("--samples must be positive"));
    }
    let mut tr = trajectories(&orbit, file.charge, samples).map_err(from_error)?;
    let mut period = 1.0;
    if let Some(target) = energy {
        let e = total_energy(&orbit, file.charge).map_err(from_error)?;
        if !(target < 0.0 && e < 0.0) {
            return Err(Outcome::usage(format!("rescaling needs negative energies (orbit {e}, target {target})")));
        }
        // E scales like c^-2
        let c = (e / target).sqrt();
        rescale(&mut tr, c);
        period = c.powi(3);
    }
    let mut csv = String::from("t,q1,q2,E1,E2\n");
    for k in 0..samples {
        let _ = writeln!(csv, "{:?},{:?},{:?},{:?},{:?}", tr.t[k], tr.q1[k], tr.q2[k], tr.e1[k], tr.e2[k]);
    }
    std::fs::write(out, csv).map_err(|e| Outcome::usage(format!("{}: {e}", out.display())))?;
    if let Some(p) = plot {
        std::fs::write(p, plot_script(out, period)).map_err(|e| Outcome::usage(format!("{}: {e}", p.display())))?;
    }
    Ok(Outcome { code: 0, stdout: format!("wrote {samples} rows to {}\n", out.display()), ..Default::default() })
}
