//! Fixed-step propagation of the classical and mean-field dynamics under a
//! ramp protocol, and the map between the two descriptions.

mod classical;
mod mapping;
mod protocol;
mod quantum;
pub mod rk4;

pub use classical::{
    default_sample_stride, hamilton_field, integrate_classical, Sample, Trajectory, DEFAULT_DT,
    HOLD_ENERGY_BOUND, MAX_DEFAULT_SAMPLES,
};
pub use mapping::{classical_to_quantum, quantum_to_classical, QuantumState, PHASE_AMPLITUDE_EPS};
pub use protocol::{RampProtocol, Segment, Span};
pub use quantum::{
    integrate_quantum, QuantumSample, QuantumTrajectory, INITIAL_NORM_TOL, NORM_DRIFT_BOUND,
    QUANTUM_TIME_PER_CLASSICAL_TIME,
};
