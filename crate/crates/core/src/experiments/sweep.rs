use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idf::idf_prediction;
use crate::model::{
    bifurcation_points, fixed_points, wrap_angle, BranchId, ModelParams, PhaseState, Stability,
};
use crate::propagator::{default_sample_stride, integrate_classical, RampProtocol, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialMode {
    /// Start exactly on the instantaneous fixed point.
    OnFixedPoint,
    /// Start on the fixed point displaced by the predicted mean deviation.
    IdfShifted,
}

/// Where a sweep starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepStart {
    Mode(InitialMode),
    /// Explicit state at time `t` (a resumed run).
    State {
        t: f64,
        state: PhaseState,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Left,
    Right,
    Undecided,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Left => "Left",
            Branch::Right => "Right",
            Branch::Undecided => "Undecided",
        }
    }
}

/// Offset of the actual state from the followed stable fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deviation {
    pub t: f64,
    pub r: f64,
    pub dq: f64,
    pub dp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub r_from: f64,
    pub r_to: f64,
    pub speed: f64,
    pub dt: f64,
    /// `None` picks [`default_sample_stride`].
    pub sample_stride: Option<usize>,
    pub start: SweepStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub trajectory: Trajectory,
    pub branch: Branch,
    /// `q` at the first sample within `dt |V|` of `R = 0`, if there is one.
    pub q_at_r0: Option<f64>,
    pub deviation_series: Vec<Deviation>,
    pub protocol: RampProtocol,
}

/// Branch threshold: half the branch separation at `R = 0`.
pub fn q_threshold(params: &ModelParams) -> f64 {
    0.5 * bifurcation_points(params).eta(0.0).unwrap_or(0.0)
}

/// Stable fixed point nearest in `q` to `state` at `r`.
pub fn followed_fixed_point(state: &PhaseState, r: f64, params: &ModelParams) -> PhaseState {
    fixed_points(r, params)
        .into_iter()
        .filter(|fp| fp.stability == Stability::StableCenter)
        .min_by(|a, b| {
            (a.q_bar - state.q)
                .abs()
                .total_cmp(&(b.q_bar - state.q).abs())
        })
        .map(|fp| fp.state())
        .expect("at least one stable center exists at every R")
}

pub fn deviation_series(traj: &Trajectory, params: &ModelParams) -> Vec<Deviation> {
    traj.samples
        .iter()
        .map(|s| {
            let fp = followed_fixed_point(&s.state, s.r, params);
            Deviation {
                t: s.t,
                r: s.r,
                dq: s.state.q - fp.q,
                dp: wrap_angle(s.state.p - fp.p),
            }
        })
        .collect()
}

/// Start state for a run beginning at `r` on the central branch.
pub fn initial_state(
    mode: InitialMode,
    r: f64,
    speed: f64,
    params: &ModelParams,
) -> Result<PhaseState> {
    let fps = fixed_points(r, params);
    if fps.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "start R = {r} must lie outside the bifurcated interval"
        )));
    }
    let fp = fps[0].state();
    Ok(match mode {
        InitialMode::OnFixedPoint => fp,
        InitialMode::IdfShifted => {
            let pred = idf_prediction(r, speed, params)?;
            PhaseState::new(fp.q + pred.mean_dq, fp.p + pred.mean_dp)
        }
    })
}

fn validate_direction(r_from: f64, r_to: f64, speed: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )));
    }
    if speed == 0.0 || !speed.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sweep speed must be nonzero (got {speed})"
        )));
    }
    if r_from == r_to || (r_to - r_from).signum() != speed.signum() {
        return Err(Error::InvalidArgument(format!(
            "speed {speed} does not move R from {r_from} to {r_to}"
        )));
    }
    Ok(())
}

fn covers(lo: f64, hi: f64, x: f64) -> bool {
    lo <= x && x <= hi
}

/// Runs a sweep without requiring a decided branch.
pub(crate) fn sweep_unchecked(params: &ModelParams, cfg: &SweepConfig) -> Result<SweepResult> {
    validate_direction(cfg.r_from, cfg.r_to, cfg.speed, cfg.dt)?;
    let (lo, hi) = (cfg.r_from.min(cfg.r_to), cfg.r_from.max(cfg.r_to));
    let waypoints: Vec<f64> = if lo < 0.0 && 0.0 < hi {
        vec![cfg.r_from, 0.0, cfg.r_to]
    } else {
        vec![cfg.r_from, cfg.r_to]
    };
    let (t0, initial) = match cfg.start {
        SweepStart::Mode(mode) => (0.0, initial_state(mode, cfg.r_from, cfg.speed, params)?),
        SweepStart::State { t, state } => (t, state),
    };
    let protocol = RampProtocol::through_from(t0, &waypoints, cfg.speed)?;
    let stride = cfg
        .sample_stride
        .unwrap_or_else(|| default_sample_stride(&protocol, cfg.dt));
    let trajectory = integrate_classical(initial, &protocol, params, cfg.dt, stride)?;

    let window = cfg.dt * cfg.speed.abs();
    let q_at_r0 = trajectory
        .samples
        .iter()
        .find(|s| s.r.abs() <= window)
        .map(|s| s.state.q);
    let threshold = q_threshold(params);
    let branch = match q_at_r0 {
        Some(q) if q < -threshold => Branch::Left,
        Some(q) if q > threshold => Branch::Right,
        _ => Branch::Undecided,
    };
    let deviation_series = deviation_series(&trajectory, params);
    Ok(SweepResult {
        trajectory,
        branch,
        q_at_r0,
        deviation_series,
        protocol,
    })
}

/// Sweeps `R` from `r_from` to `r_to` at signed speed `speed` and reports
/// which symmetry-breaking branch was followed.
///
/// The range must cover `R = 0` and at least one bifurcation point. The
/// branch is read off at `R = 0`.
pub fn run_sweep(
    params: &ModelParams,
    r_from: f64,
    r_to: f64,
    speed: f64,
    dt: f64,
    initial_mode: InitialMode,
) -> Result<SweepResult> {
    run_sweep_with(
        params,
        &SweepConfig {
            r_from,
            r_to,
            speed,
            dt,
            sample_stride: None,
            start: SweepStart::Mode(initial_mode),
        },
    )
}

pub fn run_sweep_with(params: &ModelParams, cfg: &SweepConfig) -> Result<SweepResult> {
    let loci = bifurcation_points(params);
    let (lo, hi) = (cfg.r_from.min(cfg.r_to), cfg.r_from.max(cfg.r_to));
    if !covers(lo, hi, 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sweep {lo}..{hi} does not reach R = 0"
        )));
    }
    if !(lo < loci.r1 || hi > loci.r2) {
        return Err(Error::InvalidArgument(format!(
            "sweep {lo}..{hi} crosses neither bifurcation point ({}, {})",
            loci.r1, loci.r2
        )));
    }
    let res = sweep_unchecked(params, cfg)?;
    if res.branch == Branch::Undecided {
        return Err(Error::Undecided {
            q_at_r0: res.q_at_r0.unwrap_or(f64::NAN).abs(),
            threshold: q_threshold(params),
        });
    }
    Ok(res)
}

/// Smallest distance from the actual state to the saddle while it exists.
pub fn min_saddle_distance(traj: &Trajectory, params: &ModelParams) -> Option<f64> {
    traj.samples
        .iter()
        .filter_map(|s| {
            let saddle = crate::model::branch_location(BranchId::Center, s.r, params)?;
            let split = bifurcation_points(params).eta(s.r).is_some_and(|e| e > 0.0);
            split.then(|| s.state.distance(&saddle))
        })
        .reduce(f64::min)
}
