use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// Linear ramp at constant signed speed.
    Ramp {
        r_start: f64,
        r_end: f64,
        speed: f64,
    },
    /// Constant coupling for a fixed duration.
    Hold { r: f64, duration: f64 },
}

impl Segment {
    pub fn ramp(r_start: f64, r_end: f64, speed: f64) -> Self {
        Segment::Ramp {
            r_start,
            r_end,
            speed,
        }
    }

    pub fn duration(&self) -> f64 {
        match *self {
            Segment::Ramp {
                r_start,
                r_end,
                speed,
            } => (r_end - r_start) / speed,
            Segment::Hold { duration, .. } => duration,
        }
    }

    pub fn r_start(&self) -> f64 {
        match *self {
            Segment::Ramp { r_start, .. } => r_start,
            Segment::Hold { r, .. } => r,
        }
    }

    pub fn r_end(&self) -> f64 {
        match *self {
            Segment::Ramp { r_end, .. } => r_end,
            Segment::Hold { r, .. } => r,
        }
    }

    pub fn speed(&self) -> f64 {
        match *self {
            Segment::Ramp { speed, .. } => speed,
            Segment::Hold { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Segment::Ramp {
                r_start,
                r_end,
                speed,
            } => {
                if !(r_start.is_finite() && r_end.is_finite() && speed.is_finite()) {
                    return Err(Error::Protocol("non-finite ramp".into()));
                }
                if speed == 0.0 {
                    return Err(Error::Protocol("ramp speed must be nonzero".into()));
                }
                let d = self.duration();
                if !(d > 0.0 && d.is_finite()) {
                    return Err(Error::Protocol(format!(
                        "ramp {r_start} -> {r_end} at speed {speed} has duration {d}"
                    )));
                }
            }
            Segment::Hold { r, duration } => {
                if !r.is_finite() || !(duration > 0.0 && duration.is_finite()) {
                    return Err(Error::Protocol(format!("hold at {r} for {duration}")));
                }
            }
        }
        Ok(())
    }
}

/// A segment placed on the time axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Span {
    pub t0: f64,
    pub t1: f64,
    pub segment: Segment,
}

impl Span {
    /// `R(t)` on this span; `t >= t1` gives the exact end value.
    #[inline]
    pub fn r_at(&self, t: f64) -> f64 {
        match self.segment {
            Segment::Ramp {
                r_start,
                r_end,
                speed,
            } => {
                if t >= self.t1 {
                    r_end
                } else {
                    r_start + speed * (t - self.t0)
                }
            }
            Segment::Hold { r, .. } => r,
        }
    }
}

/// Continuous piecewise-linear schedule `R(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProtocol", into = "RawProtocol")]
pub struct RampProtocol {
    start_time: f64,
    spans: Vec<Span>,
}

#[derive(Serialize, Deserialize)]
struct RawProtocol {
    start_time: f64,
    segments: Vec<Segment>,
}

impl TryFrom<RawProtocol> for RampProtocol {
    type Error = Error;
    fn try_from(raw: RawProtocol) -> Result<Self> {
        RampProtocol::new(raw.start_time, raw.segments)
    }
}

impl From<RampProtocol> for RawProtocol {
    fn from(p: RampProtocol) -> Self {
        RawProtocol {
            start_time: p.start_time,
            segments: p.segments().collect(),
        }
    }
}

impl RampProtocol {
    pub fn new(start_time: f64, segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Protocol("no segments".into()));
        }
        if !start_time.is_finite() {
            return Err(Error::Protocol("non-finite start time".into()));
        }
        let mut spans = Vec::with_capacity(segments.len());
        let mut t = start_time;
        for (i, seg) in segments.iter().enumerate() {
            seg.validate()?;
            if i > 0 && segments[i - 1].r_end() != seg.r_start() {
                return Err(Error::Protocol(format!(
                    "segment {i} starts at R = {} but previous ends at R = {}",
                    seg.r_start(),
                    segments[i - 1].r_end()
                )));
            }
            let t1 = t + seg.duration();
            spans.push(Span {
                t0: t,
                t1,
                segment: *seg,
            });
            t = t1;
        }
        Ok(RampProtocol { start_time, spans })
    }

    /// Single ramp from `r_from` to `r_to` at `|speed|`.
    pub fn linear(r_from: f64, r_to: f64, speed: f64) -> Result<Self> {
        Self::through(&[r_from, r_to], speed)
    }

    /// Ramps through each waypoint in turn at `|speed|`, skipping
    /// zero-length legs.
    pub fn through(waypoints: &[f64], speed: f64) -> Result<Self> {
        Self::through_from(0.0, waypoints, speed)
    }

    pub fn through_from(start_time: f64, waypoints: &[f64], speed: f64) -> Result<Self> {
        if speed == 0.0 || !speed.is_finite() {
            return Err(Error::Protocol(format!(
                "sweep speed must be nonzero (got {speed})"
            )));
        }
        let v = speed.abs();
        let segments: Vec<_> = waypoints
            .windows(2)
            .filter(|w| w[0] != w[1])
            .map(|w| Segment::ramp(w[0], w[1], if w[1] > w[0] { v } else { -v }))
            .collect();
        Self::new(start_time, segments)
    }

    pub fn hold(r: f64, duration: f64) -> Result<Self> {
        Self::new(0.0, vec![Segment::Hold { r, duration }])
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn end_time(&self) -> f64 {
        self.spans.last().map_or(self.start_time, |s| s.t1)
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.spans.iter().map(|s| s.segment)
    }

    pub fn r_start(&self) -> f64 {
        self.spans[0].segment.r_start()
    }

    pub fn r_end(&self) -> f64 {
        self.spans[self.spans.len() - 1].segment.r_end()
    }

    pub fn max_speed(&self) -> f64 {
        self.spans
            .iter()
            .map(|s| s.segment.speed().abs())
            .fold(0.0, f64::max)
    }

    /// `R(t)`: span boundaries belong to the earlier span, times outside the
    /// protocol clamp to the end values.
    pub fn r_at(&self, t: f64) -> f64 {
        let span = self
            .spans
            .iter()
            .find(|s| t <= s.t1)
            .unwrap_or(&self.spans[self.spans.len() - 1]);
        if t < span.t0 {
            return span.segment.r_start();
        }
        span.r_at(t)
    }

    /// Same schedule on a time axis stretched by `factor` (new time =
    /// `factor` * old time).
    pub fn time_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time scale factor {factor}"
            )));
        }
        let segments = self
            .segments()
            .map(|s| match s {
                Segment::Ramp {
                    r_start,
                    r_end,
                    speed,
                } => Segment::ramp(r_start, r_end, speed / factor),
                Segment::Hold { r, duration } => Segment::Hold {
                    r,
                    duration: duration * factor,
                },
            })
            .collect();
        Self::new(self.start_time * factor, segments)
    }

    /// Number of steps of size `dt` the integrators take (last partial
    /// step per span included).
    pub fn step_count(&self, dt: f64) -> usize {
        self.spans.iter().map(|s| steps_in_span(s, dt)).sum()
    }
}

pub(crate) fn steps_in_span(span: &Span, dt: f64) -> usize {
    let n = ((span.t1 - span.t0) / dt).ceil();
    let n = n.max(1.0) as usize;
    // drop a trailing step that would be zero length
    if n > 1 && span.t0 + (n - 1) as f64 * dt >= span.t1 {
        n - 1
    } else {
        n
    }
}
