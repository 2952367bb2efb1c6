use serde::{Deserialize, Serialize};

use super::protocol::{RampProtocol, Segment};
use super::rk4::{drive, SampleKind};
use crate::error::{Error, Result};
use crate::model::{
    gradient_unchecked, hamiltonian_unchecked, ModelParams, PhaseState, DOMAIN_EPS,
};

/// Default integration step.
pub const DEFAULT_DT: f64 = 0.05;

/// Upper bound on stored samples when the stride is defaulted.
pub const MAX_DEFAULT_SAMPLES: usize = 100_000;

/// Allowed energy wander on a constant-R segment, per 10^3 time units.
pub const HOLD_ENERGY_BOUND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub r: f64,
    pub state: PhaseState,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub sample_stride: usize,
    /// Sample index at the end of each protocol span.
    pub span_ends: Vec<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    pub fn first(&self) -> &Sample {
        &self.samples[0]
    }
}

/// Smallest stride keeping the stored sample count at or below
/// [`MAX_DEFAULT_SAMPLES`].
pub fn default_sample_stride(protocol: &RampProtocol, dt: f64) -> usize {
    protocol.step_count(dt).div_ceil(MAX_DEFAULT_SAMPLES).max(1)
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "step dt must be positive (got {dt})"
        )))
    }
}

/// Hamilton's equations `dq/dt = dH/dp`, `dp/dt = -dH/dq`.
#[inline]
pub fn hamilton_field(r: f64, y: &[f64; 2], params: &ModelParams) -> [f64; 2] {
    let g = gradient_unchecked(PhaseState::new(y[0], y[1]), r, params);
    [g.dp, -g.dq]
}

pub fn integrate_classical(
    initial: PhaseState,
    protocol: &RampProtocol,
    params: &ModelParams,
    dt: f64,
    sample_stride: usize,
) -> Result<Trajectory> {
    check_dt(dt)?;
    if initial.q.abs() >= 1.0 - DOMAIN_EPS {
        return Err(Error::Domain { q: initial.q });
    }
    let mut samples = Vec::new();
    let mut span_ends = Vec::with_capacity(protocol.spans().len());
    let mut span_idx = 0usize;
    let mut span_energy = 0.0;
    let spans = protocol.spans();

    drive(
        protocol,
        dt,
        sample_stride,
        [initial.q, initial.p],
        |r, y| hamilton_field(r, y, params),
        |t, r, y, kind| {
            let state = PhaseState::new(y[0], y[1]);
            let energy = hamiltonian_unchecked(state, r, params);
            if kind == SampleKind::Start {
                span_energy = energy;
            } else if let Segment::Hold { duration, .. } = spans[span_idx].segment {
                let drift = (energy - span_energy).abs();
                let bound = HOLD_ENERGY_BOUND * (1.0 + duration / 1e3);
                if drift > bound {
                    return Err(Error::Instability { drift, bound });
                }
            }
            if let SampleKind::SpanEnd(i) = kind {
                span_idx = i + 1;
                span_energy = energy;
            }
            samples.push(Sample {
                t,
                r,
                state,
                energy,
            });
            if let SampleKind::SpanEnd(_) = kind {
                span_ends.push(samples.len() - 1);
            }
            Ok(())
        },
        |y| {
            if y[0].abs() < 1.0 - DOMAIN_EPS && y[1].is_finite() {
                Ok(())
            } else {
                Err(Error::Domain { q: y[0] })
            }
        },
    )?;
    Ok(Trajectory {
        samples,
        sample_stride: sample_stride.max(1),
        span_ends,
    })
}
