//! Statevector simulation and variational ground-state search for the open
//! SSH and Kitaev chains, with exact diagonalization as the reference.

pub mod ansatz;
pub mod entanglement;
pub mod error;
pub mod hamiltonians;
pub mod qstate;
pub mod vqe;

pub use ansatz::{AnsatzFamily, AnsatzSpec};
pub use entanglement::{concurrence, fidelity, purity, reduced_density_matrix, DensityMatrix2Q};
pub use error::{Error, Result};
pub use hamiltonians::{KitaevParams, PauliSum, SpectrumResult, SshParams};
pub use qstate::{Circuit, Gate, GateKind, StateVector};
pub use vqe::{
    CostSpec, ModelSpec, OptimizerSettings, PointRecord, Strategy, SweepPlan, VqeOutcome,
    VqeProblem,
};
