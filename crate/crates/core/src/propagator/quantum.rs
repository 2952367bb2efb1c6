use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::mapping::{quantum_to_classical, QuantumState};
use super::protocol::RampProtocol;
use super::rk4::{drive, SampleKind};
use crate::error::{Error, Result};
use crate::model::{ModelParams, PhaseState};

/// Allowed `| |a|^2 + |b|^2 - 1 |` at any sample.
pub const NORM_DRIFT_BOUND: f64 = 1e-8;

/// Tolerance on the normalization of the initial state.
pub const INITIAL_NORM_TOL: f64 = 1e-10;

/// Time under the mean-field Hamiltonian advances `(q, p)` at twice the
/// rate of Hamilton's equations for `H`, so one classical time unit is
/// half a quantum time unit.
pub const QUANTUM_TIME_PER_CLASSICAL_TIME: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumSample {
    pub t: f64,
    pub r: f64,
    pub state: QuantumState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumTrajectory {
    pub samples: Vec<QuantumSample>,
    pub sample_stride: usize,
}

impl QuantumTrajectory {
    /// `(q, p)` along the run, with `p` unwrapped to stay continuous.
    pub fn classical_track(&self) -> Result<Vec<PhaseState>> {
        let mut out: Vec<PhaseState> = Vec::with_capacity(self.samples.len());
        for s in &self.samples {
            let mut c = quantum_to_classical(&s.state)?;
            if let Some(prev) = out.last() {
                c.p = prev.p + crate::model::wrap_angle(c.p - prev.p);
            }
            out.push(c);
        }
        Ok(out)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.state.norm_sqr() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// `i d(a, b)/dt = H_m (a, b)` with
/// `H_m = [[c z, -R - i delta], [-R + i delta, -c z]]`, `z = |b|^2 - |a|^2`.
#[inline]
fn mean_field_rhs(r: f64, y: &[f64; 4], params: &ModelParams) -> [f64; 4] {
    let a = Complex64::new(y[0], y[1]);
    let b = Complex64::new(y[2], y[3]);
    let cz = params.c() * (b.norm_sqr() - a.norm_sqr());
    let coupling = Complex64::new(-r, -params.delta());
    let ha = a * cz + coupling * b;
    let hb = coupling.conj() * a - b * cz;
    // -i * h
    [ha.im, -ha.re, hb.im, -hb.re]
}

/// The nonlinear coefficient is recomputed at every substage and the state
/// is never renormalized.
pub fn integrate_quantum(
    initial: QuantumState,
    protocol: &RampProtocol,
    params: &ModelParams,
    dt: f64,
    sample_stride: usize,
) -> Result<QuantumTrajectory> {
    super::classical::check_dt(dt)?;
    let n0 = initial.norm_sqr();
    if (n0 - 1.0).abs() > INITIAL_NORM_TOL {
        return Err(Error::InvalidArgument(format!(
            "initial state has norm^2 {n0}"
        )));
    }
    let mut samples = Vec::new();
    drive(
        protocol,
        dt,
        sample_stride,
        initial.to_array(),
        |r, y| mean_field_rhs(r, y, params),
        |t, r, y, _kind: SampleKind| {
            let state = QuantumState::from_array(y);
            let drift = (state.norm_sqr() - 1.0).abs();
            if drift > NORM_DRIFT_BOUND {
                return Err(Error::NormDrift {
                    drift,
                    bound: NORM_DRIFT_BOUND,
                });
            }
            samples.push(QuantumSample { t, r, state });
            Ok(())
        },
        |y| {
            if y.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::NormDrift {
                    drift: f64::INFINITY,
                    bound: NORM_DRIFT_BOUND,
                })
            }
        },
    )?;
    Ok(QuantumTrajectory {
        samples,
        sample_stride: sample_stride.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{fixed_points, gradient};
    use crate::propagator::mapping::classical_to_quantum;

    fn params() -> ModelParams {
        ModelParams::new(0.2, 0.1).unwrap()
    }

    #[test]
    fn mean_field_flow_is_twice_hamilton() {
        // d/dt of (q, p) under H_m, by chain rule on the amplitude field
        let p = params();
        let (r, s) = (-0.13, PhaseState::new(0.37, 1.1));
        let psi = classical_to_quantum(s, 0.2);
        let y = psi.to_array();
        let f = mean_field_rhs(r, &y, &p);
        let h = 1e-6;
        let mut y_fwd = y;
        let mut y_bwd = y;
        for i in 0..4 {
            y_fwd[i] += h * f[i];
            y_bwd[i] -= h * f[i];
        }
        let fwd = quantum_to_classical(&QuantumState::from_array(&y_fwd)).unwrap();
        let bwd = quantum_to_classical(&QuantumState::from_array(&y_bwd)).unwrap();
        let qdot = (fwd.q - bwd.q) / (2.0 * h);
        let pdot = (fwd.p - bwd.p) / (2.0 * h);
        let g = gradient(s, r, &p).unwrap();
        assert!((qdot - 2.0 * g.dp).abs() < 1e-8);
        assert!((pdot + 2.0 * g.dq).abs() < 1e-8);
    }

    #[test]
    fn stationary_state_keeps_populations() {
        let p = params();
        for fp in fixed_points(-0.1, &p)
            .into_iter()
            .filter(|f| f.q_bar != 0.0)
        {
            let psi = classical_to_quantum(fp.state(), 0.0);
            let proto = RampProtocol::hold(-0.1, 2e3).unwrap();
            let traj = integrate_quantum(psi, &proto, &p, 0.025, 100).unwrap();
            for s in &traj.samples {
                assert!((s.state.amp_a.norm_sqr() - psi.amp_a.norm_sqr()).abs() < 1e-10);
                assert!((s.state.amp_b.norm_sqr() - psi.amp_b.norm_sqr()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn norm_after_a_million_steps() {
        let p = params();
        let psi = classical_to_quantum(PhaseState::new(0.2, -2.0), 0.0);
        let proto = RampProtocol::linear(-0.25, 0.25, 0.5 / 2.5e4).unwrap();
        let traj = integrate_quantum(psi, &proto, &p, 0.025, 10_000).unwrap();
        assert!(proto.step_count(0.025) >= 1_000_000);
        assert!(traj.max_norm_drift() < 1e-8);
    }

    #[test]
    fn rejects_unnormalized_start() {
        let p = params();
        let psi = QuantumState::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        let proto = RampProtocol::hold(0.0, 1.0).unwrap();
        assert!(integrate_quantum(psi, &proto, &p, 0.05, 1).is_err());
    }
}
