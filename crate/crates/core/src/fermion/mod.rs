//! Free-fermion simulation of the circuits.
//!
//! The Jordan–Wigner map turns every circuit generator into a quadratic form,
//! so the state stays Gaussian and is carried by its two-point correlations.
//! Three evaluation paths share the same conventions:
//!
//! * [`state`]: the reference path over the Nambu basis, one Hermitian
//!   eigendecomposition per unitary.
//! * [`evaluator`]: the real Majorana path used by the optimizer.
//! * [`momentum`]: 2×2 pseudo-spin blocks for uniform rings.

pub mod evaluator;
pub mod generator;
pub mod majorana;
pub mod momentum;
pub mod state;

pub use evaluator::CircuitEvaluator;
pub use generator::{generator_2cd, generator_cd, generator_mixer, generator_target, QuadraticGenerator};
pub use momentum::{momentum_blocks, MomentumBlock, MomentumCircuit};
pub use state::{apply_unitary, expect_target, initial_state, run_circuit, GaussianState};
