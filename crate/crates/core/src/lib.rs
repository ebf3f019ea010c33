//! Pauli-Villars regulated Dirac vacuum in static electromagnetic fields.
//!
//! * [`pv`]: regulator masses, coefficients and the averaged cutoff.
//! * [`kernel`]: the response kernel M(k), the Uehling kernel and F₂.
//! * [`field`]: periodic Coulomb-gauge fields with spectral calculus.
//! * [`lattice`]: dense lattice Dirac operators, PV vacuum energies and densities.
//! * [`solver`]: screened linear response and the self-consistent saddle point.
//! * [`verify`]: the property suite shared by the tests and the command line.

pub mod error;
pub mod exec;
pub mod field;
pub mod kernel;
pub mod lattice;
pub mod pv;
pub mod quadrature;
pub mod solver;
pub mod verify;

pub use error::{Result, VacuumError};
pub use exec::Execution;
pub use pv::{derive_scheme, MassSpectrum, PVScheme};
