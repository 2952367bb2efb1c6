use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{wrap_angle, PhaseState};

/// Mode amplitudes below this leave the relative phase undefined.
pub const PHASE_AMPLITUDE_EPS: f64 = 1e-12;

/// Two complex mode amplitudes `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumState {
    pub amp_a: Complex64,
    pub amp_b: Complex64,
}

impl QuantumState {
    pub fn new(amp_a: Complex64, amp_b: Complex64) -> Self {
        QuantumState { amp_a, amp_b }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp_a.norm_sqr() + self.amp_b.norm_sqr()
    }

    /// `<self | other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amp_a.conj() * other.amp_a + self.amp_b.conj() * other.amp_b
    }

    /// Multiplies both amplitudes by `exp(i theta)`.
    pub fn rephased(&self, theta: f64) -> QuantumState {
        let g = Complex64::from_polar(1.0, theta);
        QuantumState::new(self.amp_a * g, self.amp_b * g)
    }

    pub(crate) fn to_array(self) -> [f64; 4] {
        [self.amp_a.re, self.amp_a.im, self.amp_b.re, self.amp_b.im]
    }

    pub(crate) fn from_array(y: &[f64; 4]) -> Self {
        QuantumState::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
    }
}

/// `|a| = sqrt((1-q)/2)`, `|b| = sqrt((1+q)/2)`, `arg a = gauge_phase`,
/// `arg b - arg a = p`.
pub fn classical_to_quantum(state: PhaseState, gauge_phase: f64) -> QuantumState {
    let mod_a = (0.5 * (1.0 - state.q)).max(0.0).sqrt();
    let mod_b = (0.5 * (1.0 + state.q)).max(0.0).sqrt();
    QuantumState::new(
        Complex64::from_polar(mod_a, gauge_phase),
        Complex64::from_polar(mod_b, gauge_phase + state.p),
    )
}

/// `q = |b|^2 - |a|^2`, `p = arg b - arg a` wrapped to `(-pi, pi]`.
pub fn quantum_to_classical(state: &QuantumState) -> Result<PhaseState> {
    let (mod_a, mod_b) = (state.amp_a.norm(), state.amp_b.norm());
    let smaller = mod_a.min(mod_b);
    if smaller < PHASE_AMPLITUDE_EPS {
        return Err(Error::PhaseUndefined { amplitude: smaller });
    }
    let q = state.amp_b.norm_sqr() - state.amp_a.norm_sqr();
    let p = wrap_angle((state.amp_b * state.amp_a.conj()).arg());
    Ok(PhaseState::new(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn balanced_state() {
        let s = classical_to_quantum(PhaseState::new(0.0, 0.0), 0.0);
        assert!((s.amp_a - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        assert!((s.amp_b - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-16);
        let back = quantum_to_classical(&s).unwrap();
        assert_eq!(back, PhaseState::new(0.0, 0.0));
    }

    #[test]
    fn pole_state() {
        let s = classical_to_quantum(PhaseState::new(1.0, 2.3), 0.0);
        assert_eq!(s.amp_a.norm(), 0.0);
        assert!((s.amp_b.norm() - 1.0).abs() < 1e-16);
        assert!(matches!(
            quantum_to_classical(&s),
            Err(Error::PhaseUndefined { .. })
        ));
    }

    #[test]
    fn inner_product_of_rephased_state() {
        let s = classical_to_quantum(PhaseState::new(0.3, -1.0), 0.4);
        let z = s.inner(&s.rephased(0.7));
        assert!((z.arg() - 0.7).abs() < 1e-15);
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }
}
