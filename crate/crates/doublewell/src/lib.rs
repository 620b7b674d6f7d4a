//! Quantum mechanics of one and two ultracold particles in symmetric 1D
//! double-well potentials, up to an adiabatic two-qubit exchange gate.
//!
//! Everything works in internal units ħ = m = 1 on a uniform Dirichlet grid.
//! The crate is organized bottom-up:
//!
//! - [`grid`] / [`potential`]: spatial mesh and the parametric well families
//!   (infinite box, double box with a finite barrier, biquartic).
//! - [`linalg`]: symmetric tridiagonal eigensolver (bisection + inverse
//!   iteration), Lanczos for the product-grid operator, tridiagonal solves
//!   for the implicit time steppers.
//! - [`eigensolver`]: single-particle spectra, parity classification, the
//!   even/odd orbital pair and the localized left/right states, tunneling
//!   rates.
//! - [`twobody`]: contact-interaction integrals (direct J, exchange K,
//!   on-site U), degenerate perturbation theory, and exact diagonalization
//!   on the (x1, x2) product grid with exchange-symmetry labels.
//! - [`dynamics`]: norm-preserving implicit (trapezoidal) time evolution for
//!   single- and two-particle states under static or ramped potentials.
//! - [`spinstat`]: spin ⊗ space bases for identical fermions and bosons and
//!   the computational-basis encoding used by the gate.
//! - [`gatesim`]: barrier-ramp simulation, accumulated-phase quadrature,
//!   SWAP / √SWAP algebra, fidelity and leakage diagnostics.

pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod gatesim;
pub mod grid;
pub mod linalg;
pub mod potential;
pub mod spinstat;
pub mod twobody;

pub use error::{Error, Result};
pub use grid::{build_grid, Grid, UnitSystem};
pub use potential::{check_reflection_symmetry, sample_potential, PotentialSamples, PotentialSpec};
