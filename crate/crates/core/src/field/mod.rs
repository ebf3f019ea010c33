//! Periodic-grid fields in Coulomb gauge with spectral calculus.

pub mod calculus;
mod fields;
mod grid;
pub mod io;
mod potential;
pub mod spectral;

pub use calculus::{
    coulomb_solve, coulomb_solve_vector, curl, divergence, electric_field, gradient, leray_project,
    neg_laplacian, neg_laplacian_vector, FieldWarning,
};
pub use fields::{ScalarField, VectorField};
pub use grid::Grid3;
pub(crate) use potential::random_scalar_modes;
pub use potential::{field_norms, FieldNorms, FieldStrength, FourPotential, SourceDensities};
