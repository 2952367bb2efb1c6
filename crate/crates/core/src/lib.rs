//! Adiabatic following of a stable fixed point through a pitchfork
//! bifurcation in the two-mode Hamiltonian
//! `H = -(c/2) q^2 - R sqrt(1-q^2) cos p + delta sqrt(1-q^2) sin p`.
//!
//! The crate covers the model and its fixed points ([`model`]), the
//! first-order theory of the fluctuation that rides on top of adiabatic
//! following ([`idf`]), classical and mean-field propagation under slow ramps
//! of `R` ([`propagator`]), and the numerical experiments built from them
//! ([`experiments`]).

pub mod error;
pub mod experiments;
pub mod idf;
pub mod model;
pub mod numfmt;
pub mod propagator;

pub use error::{Error, Result};
pub use experiments::{
    berry_connection_quadrature, berry_phase_analytic, berry_phase_numeric,
    ensemble_average_oracle, idf_tracking_experiment, run_hysteresis, run_sweep, BerryPhaseReport,
    Branch, HysteresisResult, InitialMode, SweepResult,
};
pub use idf::{
    closed_form_mean_dq, gamma_matrix, idf_prediction, idf_prediction_on, linearized_solution,
    linearized_solution_consistent, GammaMatrix, IdfPrediction, LinearizedParams,
};
pub use model::{
    bifurcation_points, branch_phase, classify_stability, fixed_points, gradient, hamiltonian,
    hessian, BifurcationLoci, BranchId, FixedPoint, ModelParams, PhaseState, Stability,
};
pub use numfmt::format_f64;
pub use propagator::{
    classical_to_quantum, integrate_classical, integrate_quantum, quantum_to_classical,
    QuantumState, RampProtocol, Segment, Trajectory,
};
