use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idf::{idf_prediction, LinearizedParams};
use crate::model::{branch_phase, fixed_points, wrap_angle, ModelParams, PhaseState};
use crate::propagator::{integrate_classical, RampProtocol, Trajectory};

/// Linearized periods per ensemble member's averaging window.
pub const DEFAULT_ENSEMBLE_PERIODS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub r: f64,
    pub speed: f64,
    pub n_samples: usize,
    /// Radius of the initial circle in `(dq, dp / sqrt(A/B))`.
    pub radius: f64,
    /// Seeds the common angular offset of the circle.
    pub seed: u64,
    pub periods: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub mean_dq: f64,
    pub mean_dp: f64,
    /// Prediction at the start of the window.
    pub predicted_dq: f64,
    pub predicted_dp: f64,
    /// Time averages of each member, in launch order.
    pub members: Vec<[f64; 2]>,
    pub window: f64,
}

/// Offsets `(dq, dp)` of the ensemble's initial circle.
pub fn circle_offsets(n: usize, radius: f64, aspect: f64, seed: u64) -> Vec<[f64; 2]> {
    let offset = ChaCha8Rng::seed_from_u64(seed).random_range(0.0..TAU);
    (0..n)
        .map(|k| {
            let theta = offset + TAU * k as f64 / n as f64;
            [radius * theta.cos(), radius * aspect * theta.sin()]
        })
        .collect()
}

/// Trapezoidal time average of the deviation from the central fixed point.
pub fn time_averaged_deviation(traj: &Trajectory, params: &ModelParams) -> [f64; 2] {
    let dev = |k: usize| {
        let s = &traj.samples[k];
        [s.state.q, wrap_angle(s.state.p - branch_phase(s.r, params))]
    };
    let mut acc = [0.0; 2];
    for k in 1..traj.samples.len() {
        let h = traj.samples[k].t - traj.samples[k - 1].t;
        let (a, b) = (dev(k - 1), dev(k));
        acc[0] += 0.5 * h * (a[0] + b[0]);
        acc[1] += 0.5 * h * (a[1] + b[1]);
    }
    let span = traj.last().t - traj.first().t;
    [acc[0] / span, acc[1] / span]
}

/// Launches `n_samples` runs from the central fixed point at `r`, displaced
/// on a circle scaled to the linearized ellipse, ramps each for an integer
/// number of linearized periods and averages the time-averaged deviations.
pub fn ensemble_average_oracle(
    params: &ModelParams,
    cfg: &EnsembleConfig,
) -> Result<EnsembleResult> {
    if cfg.n_samples == 0 || cfg.periods == 0 {
        return Err(Error::InvalidArgument(
            "ensemble needs n_samples > 0 and periods > 0".into(),
        ));
    }
    if !(cfg.radius >= 0.0 && cfg.radius < 0.1) {
        return Err(Error::InvalidArgument(format!(
            "ensemble radius {} must lie in [0, 0.1)",
            cfg.radius
        )));
    }
    if cfg.speed == 0.0 || !cfg.speed.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "ensemble speed must be nonzero (got {})",
            cfg.speed
        )));
    }
    let fps = fixed_points(cfg.r, params);
    if fps.len() != 1 {
        return Err(Error::InvalidArgument(format!(
            "R = {} is not on the single stable branch",
            cfg.r
        )));
    }
    let centre = fps[0].state();
    let lp = LinearizedParams::at(cfg.r, cfg.speed, params, 0.0)?;
    let period = lp.period().ok_or(Error::NotStable { r: cfg.r })?;
    let aspect = (lp.a_coef / lp.b_coef).sqrt();
    let window = cfg.periods as f64 * period;
    let protocol = RampProtocol::linear(cfg.r, cfg.r + cfg.speed * window, cfg.speed)?;
    let offsets = circle_offsets(cfg.n_samples, cfg.radius, aspect, cfg.seed);

    let members = offsets
        .par_iter()
        .map(|off| {
            let start = PhaseState::new(centre.q + off[0], centre.p + off[1]);
            let traj = integrate_classical(start, &protocol, params, cfg.dt, 1)?;
            Ok(time_averaged_deviation(&traj, params))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = members.len() as f64;
    let mean_dq = members.iter().map(|m| m[0]).sum::<f64>() / n;
    let mean_dp = members.iter().map(|m| m[1]).sum::<f64>() / n;
    let pred = idf_prediction(cfg.r, cfg.speed, params)?;
    Ok(EnsembleResult {
        mean_dq,
        mean_dp,
        predicted_dq: pred.mean_dq,
        predicted_dp: pred.mean_dp,
        members,
        window,
    })
}
