use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::idf::{closed_form_mean_dq, LinearizedParams};
use crate::model::{bifurcation_points, ModelParams};
use crate::propagator::{default_sample_stride, integrate_classical, RampProtocol, Trajectory};

use super::sweep::{initial_state, InitialMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingPoint {
    pub t: f64,
    pub r: f64,
    /// `q(t) - q_bar(R(t))`.
    pub dq_actual: f64,
    /// Closed-form mean deviation at `R(t)`.
    pub dq_theory: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingResult {
    pub points: Vec<TrackingPoint>,
    pub trajectory: Trajectory,
}

impl TrackingResult {
    /// `max |dq_actual - dq_theory| / |dq_theory|` over the run.
    pub fn max_relative_error(&self) -> f64 {
        self.points
            .iter()
            .map(|p| ((p.dq_actual - p.dq_theory) / p.dq_theory).abs())
            .fold(0.0, f64::max)
    }
}

/// Ramps `R` from `r_from` to `r_stop < R1` at speed `speed > 0` and
/// records the actual deviation from the central fixed point next to the
/// predicted mean.
pub fn idf_tracking_experiment(
    params: &ModelParams,
    r_from: f64,
    r_stop: f64,
    speed: f64,
    dt: f64,
    initial_mode: InitialMode,
    sample_stride: Option<usize>,
) -> Result<TrackingResult> {
    let r1 = bifurcation_points(params).r1;
    if !(r_from < r_stop && r_stop < r1) {
        return Err(Error::InvalidArgument(format!(
            "tracking run needs r_from < r_stop < R1 = {r1} (got {r_from}, {r_stop})"
        )));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "tracking speed must be positive (got {speed})"
        )));
    }
    let protocol = RampProtocol::linear(r_from, r_stop, speed)?;
    let stride = sample_stride.unwrap_or_else(|| default_sample_stride(&protocol, dt));
    let start = initial_state(initial_mode, r_from, speed, params)?;
    let trajectory = integrate_classical(start, &protocol, params, dt, stride)?;
    let points = trajectory
        .samples
        .iter()
        .map(|s| {
            Ok(TrackingPoint {
                t: s.t,
                r: s.r,
                dq_actual: s.state.q,
                dq_theory: closed_form_mean_dq(s.r, speed, params)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(TrackingResult { points, trajectory })
}

/// Angular frequency of `dq_actual - dq_theory` from its zero crossings
/// within `periods` linearized periods centred on `r_centre`, and the
/// linearized `sqrt(AB)` at `r_centre`.
pub fn local_frequency(
    res: &TrackingResult,
    params: &ModelParams,
    r_centre: f64,
    periods: f64,
) -> Result<(f64, f64)> {
    let lp = LinearizedParams::at(r_centre, 0.0, params, 0.0)?;
    let (w_theory, period) = match (lp.frequency(), lp.period()) {
        (Some(w), Some(t)) => (w, t),
        _ => return Err(Error::NotStable { r: r_centre }),
    };
    let t_centre = res
        .points
        .iter()
        .min_by(|a, b| (a.r - r_centre).abs().total_cmp(&(b.r - r_centre).abs()))
        .map(|p| p.t)
        .ok_or_else(|| Error::InvalidArgument("empty tracking series".into()))?;
    let half = 0.5 * periods * period;
    let window: Vec<&TrackingPoint> = res
        .points
        .iter()
        .filter(|p| (p.t - t_centre).abs() <= half)
        .collect();
    let mut crossings = Vec::new();
    for w in window.windows(2) {
        let (y0, y1) = (
            w[0].dq_actual - w[0].dq_theory,
            w[1].dq_actual - w[1].dq_theory,
        );
        if y0 == 0.0 || y0.signum() != y1.signum() {
            crossings.push(w[0].t + (w[1].t - w[0].t) * y0 / (y0 - y1));
        }
    }
    if crossings.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "only {} zero crossings in the window; sampling too coarse or window too short",
            crossings.len()
        )));
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    let w_measured = std::f64::consts::PI * (crossings.len() - 1) as f64 / span;
    Ok((w_measured, w_theory))
}
