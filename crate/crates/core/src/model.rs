//! The model Hamiltonian
//!
//! ```text
//! H(q, p; R) = -(c/2) q^2 - R sqrt(1 - q^2) cos p + delta sqrt(1 - q^2) sin p
//! ```
//!
//! with its exact derivatives, the closed-form fixed-point loci and their
//! stability. It helps to write `K(p) = R cos p - delta sin p`, so that
//! `H = -(c/2) q^2 - sqrt(1 - q^2) K(p)`. Every fixed point off the poles
//! lies on one of the two phase lines where `dK/dp = 0`. This module only
//! tracks the line with `K = +sqrt(R^2 + delta^2)`. The pitchfork pair
//! lives there, and its phase is `atan2(-delta, R)`, which is continuous
//! through `R = 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gradients reject `|q| >= 1 - DOMAIN_EPS`.
pub const DOMAIN_EPS: f64 = 1e-12;

/// `|det Gamma|` below this is reported as marginal by [`classify_stability`].
pub const MARGINAL_EPS: f64 = 1e-10;

/// The `(c, delta)` pair defining the Hamiltonian family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ModelParams {
    c: f64,
    delta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    c: f64,
    delta: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.c, raw.delta)
    }
}

impl From<ModelParams> for RawParams {
    fn from(p: ModelParams) -> Self {
        RawParams {
            c: p.c,
            delta: p.delta,
        }
    }
}

impl ModelParams {
    pub fn new(c: f64, delta: f64) -> Result<Self> {
        if !(c.is_finite() && delta.is_finite() && delta > 0.0 && c > delta) {
            return Err(Error::InvalidParams { c, delta });
        }
        Ok(ModelParams { c, delta })
    }

    /// Self-interaction strength.
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Imaginary part of the inter-mode coupling.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `sqrt(R^2 + delta^2)`, the magnitude of the complex coupling.
    pub fn coupling_norm(&self, r: f64) -> f64 {
        r.hypot(self.delta)
    }
}

/// Canonical pair: population imbalance `q` and relative phase `p`.
///
/// `p` is kept continuous (unwrapped); use [`PhaseState::wrapped`] for
/// presentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: f64,
    pub p: f64,
}

impl PhaseState {
    pub fn new(q: f64, p: f64) -> Self {
        PhaseState { q, p }
    }

    pub fn wrapped(&self) -> PhaseState {
        PhaseState {
            q: self.q,
            p: wrap_angle(self.p),
        }
    }

    /// Euclidean distance with the phase difference taken modulo 2 pi.
    pub fn distance(&self, other: &PhaseState) -> f64 {
        (self.q - other.q).hypot(wrap_angle(self.p - other.p))
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stability {
    StableCenter,
    UnstableSaddle,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::StableCenter => "StableCenter",
            Stability::UnstableSaddle => "UnstableSaddle",
        }
    }
}

/// Which member of the fixed-point family on the tracked phase line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BranchId {
    /// `q = -eta`, exists for `R1 < R < R2`.
    Left,
    /// `q = 0`, exists for every `R`.
    Center,
    /// `q = +eta`, exists for `R1 < R < R2`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub q_bar: f64,
    pub p_bar: f64,
    pub stability: Stability,
}

impl FixedPoint {
    pub fn state(&self) -> PhaseState {
        PhaseState::new(self.q_bar, self.p_bar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gradient {
    pub dq: f64,
    pub dp: f64,
}

impl Gradient {
    pub fn norm(&self) -> f64 {
        self.dq.hypot(self.dp)
    }
}

/// Symmetric matrix of second derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub qq: f64,
    pub qp: f64,
    pub pp: f64,
}

impl Hessian {
    pub fn det(&self) -> f64 {
        self.qq * self.pp - self.qp * self.qp
    }
}

/// Bifurcation points and the branch functions `eta(R)`, `mu(R)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifurcationLoci {
    pub r1: f64,
    pub r2: f64,
    params: ModelParams,
}

impl BifurcationLoci {
    /// Half-separation of the symmetry-breaking pair; `None` outside `[r1, r2]`.
    pub fn eta(&self, r: f64) -> Option<f64> {
        let c = self.params.c;
        let arg = 1.0 - (r * r + self.params.delta * self.params.delta) / (c * c);
        if arg >= 0.0 {
            Some(arg.sqrt())
        } else {
            None
        }
    }

    /// `arctan(-delta / R)`; undefined at `R = 0`.
    pub fn mu(&self, r: f64) -> Option<f64> {
        if r == 0.0 {
            None
        } else {
            Some((-self.params.delta / r).atan())
        }
    }
}

pub fn bifurcation_points(params: &ModelParams) -> BifurcationLoci {
    let r2 = (params.c * params.c - params.delta * params.delta).sqrt();
    BifurcationLoci {
        r1: -r2,
        r2,
        params: *params,
    }
}

/// Phase of the tracked fixed-point line: `mu - pi` for `R < 0`, `mu` for
/// `R > 0` and `-pi/2` at `R = 0`.
pub fn branch_phase(r: f64, params: &ModelParams) -> f64 {
    (-params.delta).atan2(r)
}

/// `d p_bar / dR`.
pub fn branch_phase_rate(r: f64, params: &ModelParams) -> f64 {
    params.delta / (r * r + params.delta * params.delta)
}

fn check_closed(q: f64) -> Result<()> {
    if q.abs() <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { q })
    }
}

fn check_open(q: f64) -> Result<()> {
    if q.abs() < 1.0 - DOMAIN_EPS {
        Ok(())
    } else {
        Err(Error::Domain { q })
    }
}

pub fn hamiltonian(state: PhaseState, r: f64, params: &ModelParams) -> Result<f64> {
    check_closed(state.q)?;
    Ok(hamiltonian_unchecked(state, r, params))
}

/// `dH/dR = -sqrt(1-q^2) cos p`, the power fed in by a ramp per unit `dR/dt`.
pub fn dh_dr(state: PhaseState) -> Result<f64> {
    check_closed(state.q)?;
    Ok(-(1.0 - state.q * state.q).sqrt() * state.p.cos())
}

#[inline]
pub(crate) fn hamiltonian_unchecked(state: PhaseState, r: f64, params: &ModelParams) -> f64 {
    let PhaseState { q, p } = state;
    let s = (1.0 - q * q).sqrt();
    let (sin_p, cos_p) = p.sin_cos();
    -0.5 * params.c * q * q - r * s * cos_p + params.delta * s * sin_p
}

pub fn gradient(state: PhaseState, r: f64, params: &ModelParams) -> Result<Gradient> {
    check_open(state.q)?;
    Ok(gradient_unchecked(state, r, params))
}

#[inline]
pub(crate) fn gradient_unchecked(state: PhaseState, r: f64, params: &ModelParams) -> Gradient {
    let PhaseState { q, p } = state;
    let s = (1.0 - q * q).sqrt();
    let (sin_p, cos_p) = p.sin_cos();
    let k = r * cos_p - params.delta * sin_p;
    let dk = -r * sin_p - params.delta * cos_p;
    Gradient {
        dq: -params.c * q + q / s * k,
        dp: -s * dk,
    }
}

pub fn hessian(state: PhaseState, r: f64, params: &ModelParams) -> Result<Hessian> {
    check_open(state.q)?;
    let PhaseState { q, p } = state;
    let w = 1.0 - q * q;
    let s = w.sqrt();
    let (sin_p, cos_p) = p.sin_cos();
    let k = r * cos_p - params.delta * sin_p;
    let dk = -r * sin_p - params.delta * cos_p;
    Ok(Hessian {
        qq: -params.c + k / (w * s),
        qp: q / s * dk,
        pp: s * k,
    })
}

/// Closed-form location of one branch at `R`, without stability.
pub fn branch_location(branch: BranchId, r: f64, params: &ModelParams) -> Option<PhaseState> {
    let p_bar = branch_phase(r, params);
    match branch {
        BranchId::Center => Some(PhaseState::new(0.0, p_bar)),
        BranchId::Left | BranchId::Right => {
            let eta = bifurcation_points(params).eta(r).filter(|&e| e > 0.0)?;
            let q = if branch == BranchId::Left { -eta } else { eta };
            Some(PhaseState::new(q, p_bar))
        }
    }
}

fn newton_polish(state: PhaseState, r: f64, params: &ModelParams) -> PhaseState {
    let (Ok(g), Ok(h)) = (gradient(state, r, params), hessian(state, r, params)) else {
        return state;
    };
    let det = h.det();
    if det.abs() < MARGINAL_EPS {
        return state;
    }
    let step_q = (h.pp * g.dq - h.qp * g.dp) / det;
    let step_p = (h.qq * g.dp - h.qp * g.dq) / det;
    PhaseState::new(state.q - step_q, state.p - step_p)
}

/// Fixed points on the tracked phase line, sorted by `q_bar`.
///
/// One stable center outside `(R1, R2)`; inside, two stable centers at
/// `q = -eta, +eta` around a saddle at `q = 0`. Exactly at a bifurcation
/// point the single degenerate center is reported as stable.
pub fn fixed_points(r: f64, params: &ModelParams) -> Vec<FixedPoint> {
    let split = bifurcation_points(params).eta(r).is_some_and(|e| e > 0.0);
    let mut out = Vec::with_capacity(3);
    let branches: &[BranchId] = if split {
        &[BranchId::Left, BranchId::Center, BranchId::Right]
    } else {
        &[BranchId::Center]
    };
    for &b in branches {
        let Some(loc) = branch_location(b, r, params) else {
            continue;
        };
        let s = newton_polish(loc, r, params);
        let stability = if b == BranchId::Center && split {
            Stability::UnstableSaddle
        } else {
            Stability::StableCenter
        };
        out.push(FixedPoint {
            q_bar: s.q,
            p_bar: s.p,
            stability,
        });
    }
    out
}

/// Classifies by the sign of `det Gamma`, i.e. whether the linearized
/// flow has an imaginary (center) or real (saddle) eigenvalue pair.
pub fn classify_stability(fp: &FixedPoint, r: f64, params: &ModelParams) -> Result<Stability> {
    let h = hessian(fp.state(), r, params)?;
    let det = h.det();
    if det.abs() < MARGINAL_EPS {
        Err(Error::Marginal { det })
    } else if det > 0.0 {
        Ok(Stability::StableCenter)
    } else {
        Ok(Stability::UnstableSaddle)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams {
        ModelParams::new(0.2, 0.1).unwrap()
    }

    fn fd_gradient(s: PhaseState, r: f64, p: &ModelParams, h: f64) -> (f64, f64) {
        let f = |q: f64, ph: f64| hamiltonian(PhaseState::new(q, ph), r, p).unwrap();
        (
            (f(s.q + h, s.p) - f(s.q - h, s.p)) / (2.0 * h),
            (f(s.q, s.p + h) - f(s.q, s.p - h)) / (2.0 * h),
        )
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ModelParams::new(0.1, 0.1).is_err());
        assert!(ModelParams::new(0.1, 0.2).is_err());
        assert!(ModelParams::new(0.2, 0.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let p = params();
        assert_eq!(
            hamiltonian(PhaseState::new(0.0, 0.0), 0.0, &p).unwrap(),
            0.0
        );

        let r = -0.25;
        let mu = (-0.1f64 / r).atan();
        let h = hamiltonian(PhaseState::new(0.0, mu - PI), r, &p).unwrap();
        assert!((h - (-0.269_258_240_356_725_2)).abs() < 1e-15);
        assert!((h + r.hypot(0.1)).abs() < 1e-15);

        let r = -0.1;
        let eta = bifurcation_points(&p).eta(r).unwrap();
        let mu = (-0.1f64 / r).atan();
        let h = hamiltonian(PhaseState::new(-eta, mu - PI), r, &p).unwrap();
        assert!((h + 0.15).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_domain() {
        let p = params();
        assert!(hamiltonian(PhaseState::new(1.0, 0.3), 0.1, &p).is_ok());
        assert_eq!(
            hamiltonian(PhaseState::new(1.0 + 1e-9, 0.3), 0.1, &p),
            Err(Error::Domain { q: 1.0 + 1e-9 })
        );
        assert!(gradient(PhaseState::new(1.0 - 1e-13, 0.0), 0.0, &p).is_err());
        assert!(hessian(PhaseState::new(-1.0, 0.0), 0.0, &p).is_err());
    }

    #[test]
    fn gradient_examples() {
        let p = params();
        let g = gradient(PhaseState::new(0.0, -PI / 2.0), 0.0, &p).unwrap();
        assert!(g.norm() < 1e-16);

        // mpmath, 40 digits
        let g = gradient(PhaseState::new(0.1, 0.3), -0.2, &p).unwrap();
        assert!((g.dq - -0.042_173_075_786_042_74).abs() < 1e-15);
        assert!((g.dp - 0.036_247_001_881_115_32).abs() < 1e-15);
        let (fq, fp) = fd_gradient(PhaseState::new(0.1, 0.3), -0.2, &p, 1e-5);
        assert!((g.dq - fq).abs() < 1e-8 * g.dq.abs());
        assert!((g.dp - fp).abs() < 1e-8 * g.dp.abs());
    }

    #[test]
    fn hessian_examples() {
        let p = params();
        let r: f64 = -0.25;
        let s = r.hypot(0.1);
        let h = hessian(PhaseState::new(0.0, branch_phase(r, &p)), r, &p).unwrap();
        assert!((h.qq - (s - 0.2)).abs() < 1e-15);
        assert!((h.pp - s).abs() < 1e-15);
        assert!(h.qp.abs() < 1e-16);

        let h = hessian(PhaseState::new(0.0, 0.0), 0.1, &p).unwrap();
        assert!((h.qq + 0.1).abs() < 1e-16);
        assert!((h.pp - 0.1).abs() < 1e-16);
        assert_eq!(h.qp, 0.0);

        // mpmath, 40 digits
        let h = hessian(PhaseState::new(0.1, 0.3), -0.2, &p).unwrap();
        assert!((h.qq - -0.423_970_462_485_280_2).abs() < 1e-14);
        assert!((h.qp - -0.003_661_313_321_324_779).abs() < 1e-15);
        assert!((h.pp - -0.219_513_450_281_823_1).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_examples() {
        let p = params();
        let fps = fixed_points(-0.25, &p);
        assert_eq!(fps.len(), 1);
        assert_eq!(fps[0].q_bar, 0.0);
        assert!((fps[0].p_bar - -2.761_086_276_477_428).abs() < 1e-14);
        assert_eq!(fps[0].stability, Stability::StableCenter);

        let fps = fixed_points(0.0, &p);
        assert_eq!(fps.len(), 3);
        let expect = [
            (-0.866_025_403_784_438_6, Stability::StableCenter),
            (0.0, Stability::UnstableSaddle),
            (0.866_025_403_784_438_6, Stability::StableCenter),
        ];
        for (fp, (q, st)) in fps.iter().zip(expect) {
            assert!((fp.q_bar - q).abs() < 1e-14);
            assert!((fp.p_bar + PI / 2.0).abs() < 1e-15);
            assert_eq!(fp.stability, st);
        }

        let fps = fixed_points(0.25, &p);
        assert_eq!(fps.len(), 1);
        assert!((fps[0].p_bar - -0.380_506_377_112_364_9).abs() < 1e-15);
    }

    #[test]
    fn phase_line_matches_mu() {
        let p = params();
        let loci = bifurcation_points(&p);
        for r in [-0.3, -0.1, -1e-9, 1e-9, 0.05, 0.3] {
            let mu = loci.mu(r).unwrap();
            let expect = if r < 0.0 { mu - PI } else { mu };
            assert!((branch_phase(r, &p) - expect).abs() < 1e-14, "r = {r}");
        }
        assert!(loci.mu(0.0).is_none());
    }

    #[test]
    fn loci_examples() {
        let p = params();
        let loci = bifurcation_points(&p);
        assert!((loci.r1 + 0.03f64.sqrt()).abs() < 1e-12);
        assert!((loci.r2 - 0.03f64.sqrt()).abs() < 1e-12);
        assert_eq!(loci.r1, -loci.r2);
        assert!((loci.r1 - -0.173).abs() < 5e-4);
        assert!((loci.eta(0.0).unwrap() - 0.866_025_403_784_438_6).abs() < 1e-15);
        assert!(loci.eta(loci.r2).unwrap() < 1e-7);
        assert!(loci.eta(0.18).is_none());

        let near = bifurcation_points(&ModelParams::new(0.1 + 1e-12, 0.1).unwrap());
        assert!(near.r2 < 1e-5);
    }

    #[test]
    fn stability_examples() {
        let p = params();
        let r = -0.25;
        let fp = FixedPoint {
            q_bar: 0.0,
            p_bar: branch_phase(r, &p),
            stability: Stability::StableCenter,
        };
        assert_eq!(
            classify_stability(&fp, r, &p).unwrap(),
            Stability::StableCenter
        );

        let r = -0.1;
        let fp = FixedPoint {
            q_bar: 0.0,
            p_bar: branch_phase(r, &p),
            stability: Stability::StableCenter,
        };
        assert_eq!(
            classify_stability(&fp, r, &p).unwrap(),
            Stability::UnstableSaddle
        );
        for fp in fixed_points(r, &p) {
            assert_eq!(classify_stability(&fp, r, &p).unwrap(), fp.stability);
        }

        let r1 = bifurcation_points(&p).r1;
        let fp = FixedPoint {
            q_bar: 0.0,
            p_bar: branch_phase(r1, &p),
            stability: Stability::StableCenter,
        };
        assert!(matches!(
            classify_stability(&fp, r1, &p),
            Err(Error::Marginal { .. })
        ));
    }

    #[test]
    fn stability_flip_localized_by_bisection() {
        let p = params();
        let loci = bifurcation_points(&p);
        let det_center = |r: f64| {
            hessian(PhaseState::new(0.0, branch_phase(r, &p)), r, &p)
                .unwrap()
                .det()
        };
        for (mut lo, mut hi, target) in [(-0.25, -0.1, loci.r1), (0.1, 0.25, loci.r2)] {
            let sign_lo = det_center(lo) > 0.0;
            assert_ne!(sign_lo, det_center(hi) > 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if (det_center(mid) > 0.0) == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            assert!((0.5 * (lo + hi) - target).abs() < 1e-10);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn dh_dr_matches_finite_difference() {
        let p = ModelParams::new(0.2, 0.1).unwrap();
        let s = PhaseState::new(0.3, 0.7);
        let h = 1e-6;
        let fd = (hamiltonian(s, 0.1 + h, &p).unwrap() - hamiltonian(s, 0.1 - h, &p).unwrap())
            / (2.0 * h);
        assert!((dh_dr(s).unwrap() - fd).abs() < 1e-9);
    }
}
