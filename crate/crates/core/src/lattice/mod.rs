//! Dense lattice realization of the Dirac operator and its PV-regulated vacuum.

pub mod checks;
pub mod matrices;
pub mod operator;
pub mod spectrum;
pub mod vacuum;

pub use checks::{
    charge_conjugation_check, hessian_oracle, quadratic_response, remainder_scaling, ConjugationReport,
    QuadraticResponse, RemainderReport,
};
pub use matrices::{dirac_matrices, DiracMatrices};
pub use operator::{build_operator, build_operator_with_capacity, Block, LatticeDiracOperator, DEFAULT_CAPACITY};
pub use spectrum::{eigenvalues, spectrum, OperatorSpectrum, SpectralData};
pub use vacuum::{pv_energy, vacuum_state, VacuumState, DEGENERACY_THRESHOLD};
