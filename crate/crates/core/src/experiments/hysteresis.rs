use crate::error::{Error, Result};
use crate::idf::LinearizedParams;
use crate::model::{bifurcation_points, branch_phase, wrap_angle, ModelParams, PhaseState};
use crate::propagator::{Sample, Trajectory};

use super::sweep::{
    q_threshold, sweep_unchecked, Branch, InitialMode, SweepConfig, SweepResult, SweepStart,
};

#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisResult {
    pub forward: SweepResult,
    pub backward: SweepResult,
    /// `(1/2) |loop integral of (q dp - p dq)|` over the closed sampled loop.
    pub loop_area: f64,
    /// Phase-space distance between the first and last loop states.
    pub closure_gap: f64,
    /// Distance between the starting fixed point and the end state averaged
    /// over the last linearized period; `None` if the loop ends inside the
    /// bifurcated interval.
    pub guiding_center_gap: Option<f64>,
}

impl HysteresisResult {
    /// Forward samples followed by backward samples, junction not repeated.
    pub fn loop_samples(&self) -> impl Iterator<Item = &Sample> {
        self.forward
            .trajectory
            .samples
            .iter()
            .chain(self.backward.trajectory.samples.iter().skip(1))
    }
}

/// Shoelace area of the closed `(q, p)` polygon, `p` unwrapped.
pub fn loop_area<'a>(states: impl IntoIterator<Item = &'a PhaseState>) -> f64 {
    let pts: Vec<&PhaseState> = states.into_iter().collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let (q0, p0) = (pts[0].q, pts[0].p);
    let mut twice = 0.0;
    for k in 0..pts.len() {
        let a = pts[k];
        let b = pts[(k + 1) % pts.len()];
        // shift by the first point to keep the products small
        twice += (a.q - q0) * (b.p - p0) - (a.p - p0) * (b.q - q0);
    }
    0.5 * twice.abs()
}

/// Mean `(dq, dp)` from the central fixed point over the last whole
/// linearized period of `traj`.
pub(crate) fn tail_mean_deviation(traj: &Trajectory, params: &ModelParams) -> Option<PhaseState> {
    let end = traj.last();
    let r_end = end.r;
    let period = LinearizedParams::at(r_end, 0.0, params, 0.0)
        .ok()?
        .period()?;
    if end.t - traj.first().t < period {
        return None;
    }
    let t_cut = end.t - period;
    let tail: Vec<&Sample> = traj.samples.iter().filter(|s| s.t >= t_cut).collect();
    if tail.len() < 2 {
        return None;
    }
    let mut acc = (0.0, 0.0);
    let mut span = 0.0;
    for w in tail.windows(2) {
        let h = w[1].t - w[0].t;
        let dev = |s: &Sample| (s.state.q, wrap_angle(s.state.p - branch_phase(s.r, params)));
        let (a, b) = (dev(w[0]), dev(w[1]));
        acc.0 += 0.5 * h * (a.0 + b.0);
        acc.1 += 0.5 * h * (a.1 + b.1);
        span += h;
    }
    Some(PhaseState::new(acc.0 / span, acc.1 / span))
}

/// Up sweep `r_min -> r_max` from the fixed point, then down sweep back to
/// `r_min` starting from the up sweep's end state.
pub fn run_hysteresis(
    params: &ModelParams,
    r_min: f64,
    r_max: f64,
    speed: f64,
    dt: f64,
) -> Result<HysteresisResult> {
    run_hysteresis_with(params, r_min, r_max, speed, dt, None)
}

pub fn run_hysteresis_with(
    params: &ModelParams,
    r_min: f64,
    r_max: f64,
    speed: f64,
    dt: f64,
    sample_stride: Option<usize>,
) -> Result<HysteresisResult> {
    if r_min >= r_max {
        return Err(Error::InvalidArgument(format!(
            "need r_min < r_max (got {r_min}, {r_max})"
        )));
    }
    let v = speed.abs();
    let forward = sweep_unchecked(
        params,
        &SweepConfig {
            r_from: r_min,
            r_to: r_max,
            speed: v,
            dt,
            sample_stride,
            start: SweepStart::Mode(InitialMode::OnFixedPoint),
        },
    )?;
    let end = *forward.trajectory.last();
    let backward = sweep_unchecked(
        params,
        &SweepConfig {
            r_from: r_max,
            r_to: r_min,
            speed: -v,
            dt,
            sample_stride,
            start: SweepStart::State {
                t: end.t,
                state: end.state,
            },
        },
    )?;

    let loci = bifurcation_points(params);
    let crosses = r_min < loci.r1 && r_max > loci.r2;
    if crosses {
        for leg in [&forward, &backward] {
            if leg.branch == Branch::Undecided {
                return Err(Error::Undecided {
                    q_at_r0: leg.q_at_r0.unwrap_or(f64::NAN).abs(),
                    threshold: q_threshold(params),
                });
            }
        }
    }

    let first = forward.trajectory.first().state;
    let last = backward.trajectory.last().state;
    let closure_gap = first.distance(&last);
    let guiding_center_gap =
        tail_mean_deviation(&backward.trajectory, params).map(|m| m.q.hypot(m.p));

    let mut res = HysteresisResult {
        forward,
        backward,
        loop_area: 0.0,
        closure_gap,
        guiding_center_gap,
    };
    res.loop_area = loop_area(res.loop_samples().map(|s| &s.state));
    Ok(res)
}

/// Linear interpolation of `q` at `r` along a leg with monotone `R`.
pub fn q_at(samples: &[Sample], r: f64) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let (a, b) = (w[0].r, w[1].r);
        if a != b && (a - r) * (b - r) <= 0.0 {
            let f = (r - a) / (b - a);
            Some(w[0].state.q + f * (w[1].state.q - w[0].state.q))
        } else {
            None
        }
    })
}

/// `max |q_fwd(R) + q_bwd(R)|` over `n` interior points of `(R1, R2)`.
pub fn mirror_error(res: &HysteresisResult, params: &ModelParams, n: usize) -> f64 {
    let loci = bifurcation_points(params);
    (1..n)
        .filter_map(|i| {
            let r = loci.r1 + (loci.r2 - loci.r1) * i as f64 / n as f64;
            let f = q_at(&res.forward.trajectory.samples, r)?;
            let b = q_at(&res.backward.trajectory.samples, r)?;
            Some((f + b).abs())
        })
        .fold(0.0, f64::max)
}
