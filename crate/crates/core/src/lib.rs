//! Finite-dimensional quantum operator workbench.
//!
//! Hermitian operators with a spectral calculus, projective measurements,
//! classical observable expressions and their quantization, multi-copy
//! experiment planning, time evolution, and the truncated kinematic and
//! angular-momentum representations used to check the operator identities.

pub mod angular;
pub mod demo;
pub mod error;
pub mod eigen;
pub mod evolution;
pub mod experiment;
pub mod expr;
pub mod kinematics;
pub mod operator;
pub mod poisson;
pub mod random;
pub mod scenario;
pub mod state;
pub mod surd;
pub mod verify;

pub use error::{Error, Result};
pub use operator::{ComplexMatrix, HermitianOperator, C64};
pub use state::QuantumState;
