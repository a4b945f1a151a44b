//! Statevector simulation, circuits, Trotterization, noise and the Hadamard test.

pub mod circuit;
pub mod hadamard;
pub mod noise;
pub mod statevector;
pub mod trotter;

pub use circuit::{Circuit, Gate, GateCounts};
pub use hadamard::{
    exact_evolution_expectation, hadamard_test_circuit, hadamard_test_shot, Evolution, HadamardTest, Part,
    PreparedTest, SpectralExpectation,
};
pub use noise::{logical_error_rate, ErrorSite, NoiseChannel, NoiseModel};
pub use statevector::Statevector;
pub use trotter::{trotter_evolution_circuit, trotter_evolve, trotter_expectation, trotter_ir, trotter_state_fidelity};
