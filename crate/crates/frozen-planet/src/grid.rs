//! Periodic loops on the period-2 grid: inner products, spectral
//! derivatives and symmetry-class projections.

use crate::error::{Error, Result};
use crate::spectral::{Parity, Series};
use serde::{Deserialize, Serialize};

/// Uniform grid of `n` points covering the period-2 domain, `h = 2/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopGrid {
    n: usize,
}

impl LoopGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_multiple_of(4) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(LoopGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        2.0 / self.n as f64
    }

    pub fn tau(&self, j: usize) -> f64 {
        self.h() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.tau(j)).collect()
    }

    /// Grid index of `tau + 1`.
    pub fn shift_one(&self, j: usize) -> usize {
        (j + self.n / 2) % self.n
    }

    /// Grid index of `1 - tau`.
    pub fn reflect(&self, j: usize) -> usize {
        (self.n + self.n / 2 - j) % self.n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    Plain,
    Periodic1,
    Antiperiodic,
    SymmetricPeriodic1,
    SymmetricAntiperiodic,
}

impl SymmetryClass {
    /// Fourier parity on the period-2 domain.
    pub fn parity(self) -> Parity {
        match self {
            SymmetryClass::Plain => None,
            SymmetryClass::Periodic1 | SymmetryClass::SymmetricPeriodic1 => Some(0),
            SymmetryClass::Antiperiodic | SymmetryClass::SymmetricAntiperiodic => Some(1),
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, SymmetryClass::SymmetricPeriodic1 | SymmetryClass::SymmetricAntiperiodic)
    }

    /// Class without the reflection constraint.
    pub fn unsymmetric(self) -> SymmetryClass {
        match self {
            SymmetryClass::SymmetricPeriodic1 => SymmetryClass::Periodic1,
            SymmetryClass::SymmetricAntiperiodic => SymmetryClass::Antiperiodic,
            c => c,
        }
    }

    pub fn symmetric(self) -> SymmetryClass {
        match self {
            SymmetryClass::Periodic1 => SymmetryClass::SymmetricPeriodic1,
            SymmetryClass::Antiperiodic => SymmetryClass::SymmetricAntiperiodic,
            c => c,
        }
    }

    /// Length of the shortest interval over which `z^2` repeats.
    pub fn square_period(self) -> u8 {
        if self == SymmetryClass::Plain {
            2
        } else {
            1
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SymmetryClass::Plain => "plain",
            SymmetryClass::Periodic1 => "periodic1",
            SymmetryClass::Antiperiodic => "antiperiodic",
            SymmetryClass::SymmetricPeriodic1 => "symmetric-periodic1",
            SymmetryClass::SymmetricAntiperiodic => "symmetric-antiperiodic",
        }
    }

    pub fn from_name(s: &str) -> Option<SymmetryClass> {
        [
            SymmetryClass::Plain,
            SymmetryClass::Periodic1,
            SymmetryClass::Antiperiodic,
            SymmetryClass::SymmetricPeriodic1,
            SymmetryClass::SymmetricAntiperiodic,
        ]
        .into_iter()
        .find(|c| c.name() == s)
    }
}

/// A sampled real loop `z(tau_j)`, `tau_j = j h`, in a declared class.
#[derive(Clone, Debug, PartialEq)]
pub struct ZLoop {
    pub grid: LoopGrid,
    pub values: Vec<f64>,
    pub class: SymmetryClass,
}

impl ZLoop {
    pub fn new(grid: LoopGrid, values: Vec<f64>, class: SymmetryClass) -> Self {
        assert_eq!(values.len(), grid.n(), "sample count must match the grid");
        ZLoop { grid, values, class }
    }

    pub fn from_fn(grid: LoopGrid, class: SymmetryClass, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        ZLoop { grid, values, class }
    }

    pub fn constant(grid: LoopGrid, class: SymmetryClass, c: f64) -> Self {
        ZLoop::new(grid, vec![c; grid.n()], class)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn series(&self) -> Series {
        Series::from_values(&self.values, self.class.parity())
    }

    pub fn from_series(grid: LoopGrid, s: &Series, class: SymmetryClass) -> Self {
        ZLoop::new(grid, s.values(), class)
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.n() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ZLoop {
        ZLoop::new(self.grid, self.values.iter().map(|&v| f(v)).collect(), self.class)
    }

    pub fn scale(&self, c: f64) -> ZLoop {
        self.map(|v| c * v)
    }

    /// `self + c * other`, keeping the class of `self`.
    pub fn axpy(&self, c: f64, other: &ZLoop) -> ZLoop {
        ZLoop::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
            self.class,
        )
    }

    /// Trigonometric interpolation (or truncation) onto another grid.
    pub fn resample(&self, grid: LoopGrid) -> ZLoop {
        ZLoop::from_series(grid, &self.series().with_size(grid.n()), self.class)
    }

    /// Value at an arbitrary `tau` of the trigonometric interpolant.
    pub fn eval(&self, tau: f64) -> f64 {
        self.series().eval(tau)
    }

    /// Sign-flipped loop (`S z = -z`).
    pub fn neg(&self) -> ZLoop {
        self.scale(-1.0)
    }

    /// Time shift by `k` grid steps: `(T z)(tau) = z(tau + k h)`.
    pub fn shift(&self, k: usize) -> ZLoop {
        let n = self.n();
        ZLoop::new(self.grid, (0..n).map(|j| self.values[(j + k) % n]).collect(), self.class)
    }

    /// Time reversal `(R z)(tau) = z(-tau)`.
    pub fn reverse(&self) -> ZLoop {
        let n = self.n();
        ZLoop::new(self.grid, (0..n).map(|j| self.values[(n - j) % n]).collect(), self.class)
    }
}

/// The pair `(z1, z2)` of regularized electron loops.
#[derive(Clone, Debug, PartialEq)]
pub struct ZPair {
    pub z1: ZLoop,
    pub z2: ZLoop,
}

impl ZPair {
    pub fn new(z1: ZLoop, z2: ZLoop) -> Result<Self> {
        if z1.grid != z2.grid {
            return Err(Error::IncompatibleGrids);
        }
        Ok(ZPair { z1, z2 })
    }

    pub fn grid(&self) -> LoopGrid {
        self.z1.grid
    }

    /// Common period of `q1` and `q2` in physical time.
    pub fn q_period(&self) -> u8 {
        self.z1.class.square_period().max(self.z2.class.square_period())
    }

    pub fn sup_norm(&self) -> f64 {
        self.z1.sup_norm().max(self.z2.sup_norm())
    }

    pub fn sup_distance(&self, other: &ZPair) -> f64 {
        let d = |a: &ZLoop, b: &ZLoop| a.values.iter().zip(&b.values).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        d(&self.z1, &other.z1).max(d(&self.z2, &other.z2))
    }

    pub fn map(&self, f: impl Fn(&ZLoop) -> ZLoop) -> ZPair {
        ZPair { z1: f(&self.z1), z2: f(&self.z2) }
    }
}

/// `<u, v> = (h/2) sum_j u_j v_j`, the integral over one unit of time.
pub fn inner(u: &ZLoop, v: &ZLoop) -> Result<f64> {
    if u.grid != v.grid {
        return Err(Error::IncompatibleGrids);
    }
    Ok(u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum::<f64>() / u.n() as f64)
}

/// Spectral derivative; the reflection constraint is dropped since `z'` is
/// odd about `tau = 1/2` when `z` is even.
pub fn derivative(z: &ZLoop) -> ZLoop {
    ZLoop::from_series(z.grid, &z.series().derivative(), z.class.unsymmetric())
}

/// Spectral second derivative (the derivative applied twice).
pub fn second_derivative(z: &ZLoop) -> ZLoop {
    ZLoop::from_series(z.grid, &z.series().derivative().derivative(), z.class)
}

/// Orthogonal projection onto the target class.
pub fn project_symmetry(z: &ZLoop, class: SymmetryClass) -> ZLoop {
    let g = z.grid;
    let n = g.n();
    let v = &z.values;
    let twisted: Vec<f64> = match class.unsymmetric() {
        SymmetryClass::Periodic1 => (0..n).map(|j| 0.5 * (v[j] + v[g.shift_one(j)])).collect(),
        SymmetryClass::Antiperiodic => (0..n).map(|j| 0.5 * (v[j] - v[g.shift_one(j)])).collect(),
        _ => v.clone(),
    };
    let values = if class.is_symmetric() {
        (0..n).map(|j| 0.5 * (twisted[j] + twisted[g.reflect(j)])).collect()
    } else {
        twisted
    };
    ZLoop::new(g, values, class)
}

/// Remove every Fourier mode outside the class (and the Nyquist mode).
pub fn band_limit(z: &ZLoop) -> ZLoop {
    project_symmetry(&ZLoop::from_series(z.grid, &z.series(), z.class), z.class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_grids() {
        assert!(LoopGrid::new(8).is_err());
        assert!(LoopGrid::new(18).is_err());
        assert!(LoopGrid::new(16).is_ok());
    }

    #[test]
    fn inner_closed_forms() {
        let g = LoopGrid::new(64).unwrap();
        let one = ZLoop::constant(g, SymmetryClass::Periodic1, 1.0);
        assert!((inner(&one, &one).unwrap() - 1.0).abs() < 1e-15);
        let s = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).sin());
        let c = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).cos());
        assert!((inner(&s, &s).unwrap() - 0.5).abs() < 1e-15);
        assert!(inner(&s, &c).unwrap().abs() < 1e-15);
        let other = ZLoop::constant(LoopGrid::new(32).unwrap(), SymmetryClass::Plain, 1.0);
        assert_eq!(inner(&one, &other), Err(Error::IncompatibleGrids));
    }

    #[test]
    fn derivative_closed_forms() {
        let g = LoopGrid::new(128).unwrap();
        let s = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (PI * t).sin());
        let d = derivative(&s);
        let err = g.points().iter().zip(&d.values).fold(0.0f64, |m, (t, v)| m.max((v - PI * (PI * t).cos()).abs()));
        assert!(err < 1e-10, "{err}");
        let s3 = ZLoop::from_fn(g, SymmetryClass::Antiperiodic, |t| (3.0 * PI * t).sin());
        let d3 = derivative(&s3);
        let err = g.points().iter().zip(&d3.values).fold(0.0f64, |m, (t, v)| m.max((v - 3.0 * PI * (3.0 * PI * t).cos()).abs()));
        assert!(err < 1e-10);
        let c = ZLoop::constant(g, SymmetryClass::Periodic1, 2.5);
        assert!(derivative(&c).sup_norm() < 1e-14);
        assert_eq!(derivative(&s.clone().map(|v| v)).class, SymmetryClass::Antiperiodic);
        let sym = project_symmetry(&s, SymmetryClass::SymmetricAntiperiodic);
        assert_eq!(derivative(&sym).class, SymmetryClass::Antiperiodic);
    }

    #[test]
    fn projection_examples() {
        let g = LoopGrid::new(64).unwrap();
        let s2 = ZLoop::from_fn(g, SymmetryClass::Periodic1, |t| (2.0 * PI * t).sin());
        assert!(project_symmetry(&s2, SymmetryClass::SymmetricPeriodic1).sup_norm() < 1e-15);
        let c2 = ZLoop::from_fn(g, SymmetryClass::Periodic1, |t| (2.0 * PI * t).cos());
        let p = project_symmetry(&c2, SymmetryClass::SymmetricPeriodic1);
        let diff = p.values.iter().zip(&c2.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-15);
        let z = ZLoop::from_fn(g, SymmetryClass::Plain, |t| (PI * t).sin() + 0.3 * (2.0 * PI * t).cos() + 0.1 * t.powi(2));
        for class in [SymmetryClass::SymmetricAntiperiodic, SymmetryClass::SymmetricPeriodic1, SymmetryClass::Antiperiodic] {
            let once = project_symmetry(&z, class);
            let twice = project_symmetry(&once, class);
            assert_eq!(once.values, twice.values);
        }
    }
}
