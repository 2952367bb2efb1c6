//! Fixed-step classical Runge-Kutta shared by both propagators.

use super::protocol::{steps_in_span, RampProtocol};
use crate::error::Result;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += h * k[i];
    }
    out
}

/// One step of `dy/dt = f(t, y)`.
#[inline]
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let half = 0.5 * h;
    let k1 = f(t, y);
    let k2 = f(t + half, &axpy(y, half, &k1));
    let k3 = f(t + half, &axpy(y, half, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Where a sample sits in the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SampleKind {
    Start,
    Interior,
    /// End of span `i`.
    SpanEnd(usize),
}

/// Integrates `dy/dt = field(R(t), y)` across every span of `protocol`.
///
/// `R` is evaluated at each substage time. Steps restart on every span
/// boundary so each span ends exactly on its end time; samples are taken
/// at the start, every `stride` steps within a span and at every span end.
/// `check` runs after every step.
pub(crate) fn drive<const N: usize, F, S, C>(
    protocol: &RampProtocol,
    dt: f64,
    stride: usize,
    y0: [f64; N],
    field: F,
    mut sample: S,
    check: C,
) -> Result<[f64; N]>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(f64, f64, &[f64; N], SampleKind) -> Result<()>,
    C: Fn(&[f64; N]) -> Result<()>,
{
    let stride = stride.max(1);
    let mut y = y0;
    let t_start = protocol.start_time();
    sample(t_start, protocol.r_at(t_start), &y, SampleKind::Start)?;
    for (index, span) in protocol.spans().iter().enumerate() {
        let f = |t: f64, y: &[f64; N]| field(span.r_at(t), y);
        let n = steps_in_span(span, dt);
        for k in 0..n {
            let t = span.t0 + k as f64 * dt;
            let h = if k + 1 == n { span.t1 - t } else { dt };
            y = rk4_step(&f, t, &y, h);
            check(&y)?;
            let done = k + 1;
            if done == n {
                sample(
                    span.t1,
                    protocol.r_at(span.t1),
                    &y,
                    SampleKind::SpanEnd(index),
                )?;
            } else if done % stride == 0 {
                let ts = span.t0 + done as f64 * dt;
                sample(ts, protocol.r_at(ts), &y, SampleKind::Interior)?;
            }
        }
    }
    Ok(y)
}
