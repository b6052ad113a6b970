//! Brute-force state-vector oracle for small chains.
//!
//! Operators are weighted Pauli strings and every commutator is computed by
//! Pauli algebra, independently of the fermion representation.

pub mod pauli;
pub mod state;

pub use pauli::{
    majorana_string, pauli_mixer, pauli_target, project_parity, reconstruct, PauliGenerators,
    PauliString, PauliSum,
};
pub use state::{
    dense_apply_mixer, dense_apply_target, dense_evolve, dense_expm_apply, dense_initial,
    dense_run_circuit, dense_spectrum, dense_target_energy, DenseOperator, StateVector,
};
