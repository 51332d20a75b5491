//! Finite element solver for a 1D elastic bar hitting a rigid obstacle.
//!
//! The bar occupies `(0, L)`, is clamped at `x = L` and may touch an obstacle at
//! `x = 0` (Signorini condition). The crate provides:
//!
//! * [`banded`]: symmetric tridiagonal storage with an `LDLᵀ` solver,
//! * [`assembly`]: uniform P1 mesh, weighted (redistributed) mass matrices,
//!   stiffness, loads and the reduced system obtained by eliminating the
//!   contact node,
//! * [`oracle`]: the closed-form periodic benchmark solution,
//! * [`contact`]: states, energies and the single-constraint complementarity solve,
//! * [`integrators`]: Newmark, backward Euler, Paoli–Schatzman, the hybrid
//!   energy-dissipative scheme and Crank–Nicolson on the first-order system,
//! * [`experiments`]: error norms, scenario runner and convergence studies.

pub mod assembly;
pub mod banded;
pub mod contact;
pub mod error;
pub mod experiments;
pub mod integrators;
pub mod oracle;

pub use error::{Error, Result};
