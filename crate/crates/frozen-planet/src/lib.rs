//! Symmetric frozen planet orbits of the classical helium atom.
//!
//! Both electrons move on a half-line through the nucleus.  After the
//! Levi-Civita substitution `q = z^2` with the time change
//! `dt/dtau = z^2/|z|^2`, collisions of the inner electron become smooth
//! zero crossings of a loop `z`, and periodic orbits become critical points
//! of action functionals on pairs of loops `(z1, z2)`:
//!
//! * [`functionals`] evaluates the Kepler action `Q`, the mean interaction
//!   `A`, the instantaneous interaction `I`, their combinations `B_r` and
//!   exact `L^2`-gradients;
//! * [`solvers`] finds zeros of those gradients by damped Newton iteration
//!   and a two-stage homotopy that starts from a closed-form decoupled
//!   solution;
//! * [`verify`] back-transforms a pair to physical time and checks the ODE,
//!   energy, symmetry, rescaling and Legendre identities.

pub mod cli;
pub mod error;
pub mod functionals;
pub mod grid;
pub mod levi_civita;
pub mod solvers;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{LoopGrid, SymmetryClass, ZLoop, ZPair};
