use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{wrap_angle, ModelParams, PhaseState};
use crate::propagator::{
    classical_to_quantum, integrate_classical, integrate_quantum, QuantumTrajectory, RampProtocol,
    Trajectory, QUANTUM_TIME_PER_CLASSICAL_TIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `max |q_classical - q_quantum|` over matched samples.
    pub max_dq: f64,
    /// `max |p_classical - p_quantum|` (wrapped) over matched samples.
    pub max_dp: f64,
    pub max_norm_drift: f64,
    pub samples: usize,
}

impl EquivalenceReport {
    pub fn sup_norm(&self) -> f64 {
        self.max_dq.max(self.max_dp)
    }
}

/// Integrates the classical equations under `protocol` and the mean-field
/// amplitudes under the same schedule on the quantum time axis, then
/// compares `(q, p)` sample by sample.
pub fn quantum_classical_equivalence(
    initial: PhaseState,
    protocol: &RampProtocol,
    params: &ModelParams,
    dt: f64,
    sample_stride: usize,
    gauge_phase: f64,
) -> Result<(EquivalenceReport, Trajectory, QuantumTrajectory)> {
    let classical = integrate_classical(initial, protocol, params, dt, sample_stride)?;
    let k = QUANTUM_TIME_PER_CLASSICAL_TIME;
    let quantum = integrate_quantum(
        classical_to_quantum(initial, gauge_phase),
        &protocol.time_scaled(k)?,
        params,
        k * dt,
        sample_stride,
    )?;
    if quantum.samples.len() != classical.samples.len() {
        return Err(Error::InvalidArgument(format!(
            "sample grids differ ({} classical, {} quantum)",
            classical.samples.len(),
            quantum.samples.len()
        )));
    }
    let track = quantum.classical_track()?;
    let mut report = EquivalenceReport {
        max_dq: 0.0,
        max_dp: 0.0,
        max_norm_drift: quantum.max_norm_drift(),
        samples: track.len(),
    };
    for (c, q) in classical.samples.iter().zip(&track) {
        report.max_dq = report.max_dq.max((c.state.q - q.q).abs());
        report.max_dp = report.max_dp.max(wrap_angle(c.state.p - q.p).abs());
    }
    Ok((report, classical, quantum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixed_points;

    #[test]
    fn short_ramp_agrees() {
        let p = ModelParams::new(0.2, 0.1).unwrap();
        let start = fixed_points(-0.25, &p)[0].state();
        let proto = RampProtocol::through(&[-0.25, -0.15, -0.2], 1e-3).unwrap();
        let (rep, c, q) = quantum_classical_equivalence(start, &proto, &p, 0.05, 10, 0.7).unwrap();
        assert!(rep.sup_norm() < 1e-8, "{rep:?}");
        assert!(rep.max_norm_drift < 1e-10);
        for (a, b) in c.samples.iter().zip(&q.samples) {
            assert_eq!(a.r, b.r);
        }
    }
}
