//! Statevector simulation of NEQR-encoded grayscale images and Grover search
//! for pixels of a given intensity.

pub mod error;
pub mod grover;
pub mod neqr;
pub mod sim;

pub use error::{ImageError, SearchError, SimError};
pub use grover::{
    amplify, build_diffuser, build_phase_oracle, find_darkest, plan_iterations,
    position_superposition, run_search, IterationPlan, OracleSpec, SearchReport,
    DEFAULT_MAX_RETRIES,
};
pub use neqr::{
    analytic_neqr_state, build_neqr_circuit, decode_from_counts, validate_image, GrayImage,
    NeqrLayout, PixelPosition,
};
pub use sim::{
    marginal_probabilities, Control, Gate, GateKind, MeasurementCounts, QuantumCircuit,
    Statevector, MAX_QUBITS,
};
