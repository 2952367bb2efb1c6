//! Sweeps through the bifurcation, hysteresis loops, Berry phases, the
//! deviation-tracking comparison and the ensemble check of the mean
//! deviation formula.

pub mod berry;
pub mod ensemble;
pub mod equivalence;
pub mod hysteresis;
pub mod robustness;
pub mod sweep;
pub mod tracking;

pub use berry::{
    berry_connection_quadrature, berry_phase_analytic, berry_phase_experiment, berry_phase_numeric,
    berry_scan, berry_sweep_extent, loop_states_dense, loop_states_on_grid, ray_distance,
    BerryPhaseReport, BERRY_GRID_STEP, LOOP_CLOSURE_TOL,
};
pub use ensemble::{
    circle_offsets, ensemble_average_oracle, time_averaged_deviation, EnsembleConfig,
    EnsembleResult, DEFAULT_ENSEMBLE_PERIODS,
};
pub use equivalence::{quantum_classical_equivalence, EquivalenceReport};
pub use hysteresis::{
    loop_area, mirror_error, q_at, run_hysteresis, run_hysteresis_with, HysteresisResult,
};
pub use robustness::{branch_selection_scan, SelectionOutcome};
pub use sweep::{
    deviation_series, followed_fixed_point, initial_state, min_saddle_distance, q_threshold,
    run_sweep, run_sweep_with, Branch, Deviation, InitialMode, SweepConfig, SweepResult,
    SweepStart,
};
pub use tracking::{idf_tracking_experiment, local_frequency, TrackingPoint, TrackingResult};
