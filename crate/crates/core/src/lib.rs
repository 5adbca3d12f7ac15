//! Verification of two-qubit gates through their characteristic observable
//! operations: classical fidelities from measurement statistics, bounds on
//! process fidelity and entanglement capability, and exact oracles to check
//! those bounds against.

pub mod bounds;
pub mod channel;
pub mod charops;
pub mod cli;
pub mod error;
pub mod json;
pub mod sampling;
pub mod states;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, C64};
