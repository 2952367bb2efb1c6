use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{bifurcation_points, branch_location, BranchId, ModelParams};
use crate::propagator::{classical_to_quantum, QuantumState, Sample};

use super::hysteresis::{run_hysteresis, HysteresisResult};

/// Smallest allowed `|<psi_k|psi_k+1>|` in the discrete loop sum.
pub const MIN_OVERLAP: f64 = 0.99;

/// Default closure tolerance, as a ray distance between the first and last
/// loop states. Large enough to admit the ringing left by the exit from the
/// bifurcated interval.
pub const LOOP_CLOSURE_TOL: f64 = 5e-2;

/// Spacing in `R` of the loop states fed to the discrete sum.
pub const BERRY_GRID_STEP: f64 = 2.5e-3;

/// Absolute tolerance of the adaptive connection quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Half-width of the sweep used for a Berry run: at least 0.25 and a
/// quarter beyond the upper bifurcation point.
pub fn berry_sweep_extent(params: &ModelParams) -> f64 {
    0.25f64.max(1.25 * bifurcation_points(params).r2)
}

/// `pi (1 - delta/c)`.
pub fn berry_phase_analytic(params: &ModelParams) -> f64 {
    PI * (1.0 - params.delta() / params.c())
}

/// `sqrt(1 - |<a|b>|^2)` for normalized states: zero iff the rays agree.
pub fn ray_distance(a: &QuantumState, b: &QuantumState) -> f64 {
    let overlap = a.inner(b).norm_sqr() / (a.norm_sqr() * b.norm_sqr());
    (1.0 - overlap).max(0.0).sqrt()
}

/// Maps an angle into `[-pi/2, 3pi/2)`.
fn berry_window(x: f64) -> f64 {
    (x + FRAC_PI_2).rem_euclid(TAU) - FRAC_PI_2
}

/// `-sum_k arg <psi_k|psi_k+1>` around the closed cycle, the last state
/// linked back to the first, mapped into `[-pi/2, 3pi/2)`.
///
/// Only the overlap magnitude is checked: the per-link argument depends on
/// the gauge of the samples while the sum does not. In a smooth gauge the
/// loop should be dense enough that each link argument stays below `pi/4`.
pub fn berry_phase_numeric(states: &[QuantumState], closure_tol: f64) -> Result<f64> {
    let n = states.len();
    if n < 2 {
        return Ok(0.0);
    }
    let gap = ray_distance(&states[0], &states[n - 1]);
    if gap > closure_tol {
        return Err(Error::Closure {
            gap,
            tolerance: closure_tol,
        });
    }
    let mut sum = 0.0;
    for k in 0..n {
        let z = states[k].inner(&states[(k + 1) % n]);
        let (magnitude, phase) = z.to_polar();
        if magnitude < MIN_OVERLAP {
            return Err(Error::Sampling {
                index: k,
                magnitude,
                phase,
            });
        }
        sum -= phase;
    }
    Ok(berry_window(sum))
}

/// Picks the first sample of a leg in each `R` cell of width `step`, plus
/// the leg's final sample.
fn grid_pick<'a>(samples: &'a [Sample], r_origin: f64, step: f64, out: &mut Vec<&'a Sample>) {
    let mut cell = None;
    for s in samples {
        let k = ((s.r - r_origin).abs() / step).floor() as i64;
        if cell != Some(k) {
            out.push(s);
            cell = Some(k);
        }
    }
    if let (Some(last), Some(tail)) = (samples.last(), out.last()) {
        if !std::ptr::eq(last, *tail) {
            out.push(last);
        }
    }
}

/// Loop states of a hysteresis run on an `R` grid of spacing `step`,
/// mapped into the quantum representation at gauge 0.
pub fn loop_states_on_grid(res: &HysteresisResult, step: f64) -> Vec<QuantumState> {
    let fwd = &res.forward.trajectory.samples;
    let bwd = &res.backward.trajectory.samples;
    let mut picked = Vec::new();
    grid_pick(fwd, fwd[0].r, step, &mut picked);
    grid_pick(&bwd[1..], bwd[0].r, step, &mut picked);
    picked
        .into_iter()
        .map(|s| classical_to_quantum(s.state, 0.0))
        .collect()
}

/// Every stored loop sample, mapped at gauge 0.
pub fn loop_states_dense(res: &HysteresisResult) -> Vec<QuantumState> {
    res.loop_samples()
        .map(|s| classical_to_quantum(s.state, 0.0))
        .collect()
}

/// `Im <psi(x)| d/dx |psi(x)>` by a central overlap difference.
fn connection(f: impl Fn(f64) -> Option<QuantumState>, x: f64, h: f64) -> Option<f64> {
    let centre = f(x)?;
    let up = centre.inner(&f(x + h)?);
    let down = centre.inner(&f(x - h)?);
    Some((up.im - down.im) / (2.0 * h))
}

/// `i int_{R1}^{R2} (<L|dL/dR> - <R|dR/dR>) dR` over the mapped fixed-point
/// states of the two stable branches, with `R = R2 sin(theta)` absorbing
/// the square-root endpoints.
pub fn berry_connection_quadrature(params: &ModelParams) -> f64 {
    let r2 = bifurcation_points(params).r2;
    let state = |branch: BranchId, theta: f64| {
        branch_location(branch, r2 * theta.sin(), params).map(|s| classical_to_quantum(s, 0.0))
    };
    let integrand = |theta: f64| {
        let edge = FRAC_PI_2 - theta.abs();
        if edge <= 0.0 {
            return 0.0;
        }
        let h = (0.5 * edge).min(1e-5);
        let left = connection(|x| state(BranchId::Left, x), theta, h);
        let right = connection(|x| state(BranchId::Right, x), theta, h);
        match (left, right) {
            // i * (i Im L - i Im R) = Im R - Im L
            (Some(l), Some(r)) => r - l,
            _ => 0.0,
        }
    };
    adaptive_simpson(&integrand, -FRAC_PI_2, FRAC_PI_2, QUADRATURE_TOL, 40)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryPhaseReport {
    pub c: f64,
    pub delta: f64,
    pub analytic: f64,
    /// Discrete loop sum on the `R` grid.
    pub numeric: f64,
    /// Discrete loop sum over every stored sample.
    pub dense: f64,
    pub quadrature: f64,
    pub loop_closure_gap: f64,
    pub guiding_center_gap: Option<f64>,
}

impl BerryPhaseReport {
    pub fn relative_error(&self) -> f64 {
        ((self.numeric - self.analytic) / self.analytic).abs()
    }
}

/// Runs a hysteresis loop over `[-w, w]` with `w` from
/// [`berry_sweep_extent`] and evaluates all Berry phase estimates on it.
pub fn berry_phase_experiment(
    params: &ModelParams,
    speed: f64,
    dt: f64,
) -> Result<(BerryPhaseReport, HysteresisResult)> {
    let w = berry_sweep_extent(params);
    let res = run_hysteresis(params, -w, w, speed, dt)?;
    let numeric = berry_phase_numeric(
        &loop_states_on_grid(&res, BERRY_GRID_STEP),
        LOOP_CLOSURE_TOL,
    )?;
    let dense = berry_phase_numeric(&loop_states_dense(&res), LOOP_CLOSURE_TOL)?;
    let report = BerryPhaseReport {
        c: params.c(),
        delta: params.delta(),
        analytic: berry_phase_analytic(params),
        numeric,
        dense,
        quadrature: berry_connection_quadrature(params),
        loop_closure_gap: res.closure_gap,
        guiding_center_gap: res.guiding_center_gap,
    };
    Ok((report, res))
}

/// [`berry_phase_experiment`] for each `c`, in parallel, results in input
/// order.
pub fn berry_scan(cs: &[f64], delta: f64, speed: f64, dt: f64) -> Result<Vec<BerryPhaseReport>> {
    cs.par_iter()
        .map(|&c| {
            let params = ModelParams::new(c, delta)?;
            berry_phase_experiment(&params, speed, dt).map(|(report, _)| report)
        })
        .collect()
}
