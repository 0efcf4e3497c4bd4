//! Dense state-vector and density-matrix simulator for a handful of qubits.

pub mod circuit;
pub mod density;
pub mod gates;
pub mod kernel;
pub mod state;

pub use circuit::{circuit_expectation, evolve, parameter_shift_gradient, Circuit, GateOp, Param, Register};
pub use density::{DensityMatrix, NoiseSpec};
pub use gates::{gate_matrix, pauli, unitarity_defect, Gate, GateKind};
pub use kernel::{quantum_kernel, KernelBackend};
pub use state::{amplitude_encode, qubits_for, QuantumState};
