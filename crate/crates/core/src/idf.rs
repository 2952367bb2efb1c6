//! Intrinsic dynamical fluctuations around a moving stable fixed point.
//!
//! During adiabatic following the actual state sits at an `O(dR/dt)`
//! offset from the instantaneous fixed point. On average that offset is
//!
//! ```text
//! (<dp>, <dq>)^T = Gamma^{-1} (dp_bar/dR, dq_bar/dR)^T * dR/dt
//! ```
//!
//! where `Gamma` is the linearized flow matrix acting on `(dp, dq)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    self, bifurcation_points, branch_location, branch_phase_rate, BranchId, FixedPoint,
    ModelParams, PhaseState,
};

/// `|det Gamma|` at or below this makes the prediction a [`Error::Singular`].
pub const SINGULAR_EPS: f64 = 1e-8;

/// Step in R for the five-point branch derivative.
pub const BRANCH_DIFF_STEP: f64 = 1e-6;

/// Linearized flow matrix, rows and columns ordered `(dp, dq)`:
///
/// ```text
/// [ -H_qp  -H_qq ]
/// [  H_pp   H_pq ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaMatrix {
    pub m: [[f64; 2]; 2],
}

impl GammaMatrix {
    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `A = -Gamma_12 = H_qq`.
    pub fn a(&self) -> f64 {
        -self.m[0][1]
    }

    /// `B = Gamma_21 = H_pp`.
    pub fn b(&self) -> f64 {
        self.m[1][0]
    }

    /// Angular frequency of small oscillations, when the point is a center.
    pub fn frequency(&self) -> Option<f64> {
        let det = self.det();
        (det > 0.0).then(|| det.sqrt())
    }

    pub fn solve(&self, rhs: [f64; 2]) -> Result<[f64; 2]> {
        let det = self.det();
        if det.abs() <= SINGULAR_EPS {
            return Err(Error::Singular { det });
        }
        let [[a, b], [c, d]] = self.m;
        Ok([
            (d * rhs[0] - b * rhs[1]) / det,
            (a * rhs[1] - c * rhs[0]) / det,
        ])
    }
}

pub fn gamma_matrix(fp: &FixedPoint, r: f64, params: &ModelParams) -> Result<GammaMatrix> {
    gamma_at(fp.state(), r, params)
}

pub(crate) fn gamma_at(state: PhaseState, r: f64, params: &ModelParams) -> Result<GammaMatrix> {
    let h = model::hessian(state, r, params)?;
    Ok(GammaMatrix {
        m: [[-h.qp, -h.qq], [h.pp, h.qp]],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdfPrediction {
    pub mean_dp: f64,
    pub mean_dq: f64,
    pub speed: f64,
}

/// Prediction on the central branch `q_bar = 0`, which must be a stable
/// center at `r` (that is, `|r| > R2`).
pub fn idf_prediction(r: f64, speed: f64, params: &ModelParams) -> Result<IdfPrediction> {
    idf_prediction_on(BranchId::Center, r, speed, params)
}

pub fn idf_prediction_on(
    branch: BranchId,
    r: f64,
    speed: f64,
    params: &ModelParams,
) -> Result<IdfPrediction> {
    let loc = branch_location(branch, r, params).ok_or(Error::NoBranch { r })?;
    let gamma = gamma_at(loc, r, params)?;
    let det = gamma.det();
    if det.abs() <= SINGULAR_EPS {
        return Err(Error::Singular { det });
    }
    if det < 0.0 {
        return Err(Error::NotStable { r });
    }
    let dp_dr = branch_phase_rate(r, params);
    let dq_dr = match branch {
        BranchId::Center => 0.0,
        _ => branch_q_derivative(branch, r, params)?,
    };
    let [mean_dp, mean_dq] = gamma.solve([dp_dr * speed, dq_dr * speed])?;
    Ok(IdfPrediction {
        mean_dp,
        mean_dq,
        speed,
    })
}

fn branch_q_derivative(branch: BranchId, r: f64, params: &ModelParams) -> Result<f64> {
    let h = BRANCH_DIFF_STEP;
    let q = |x: f64| {
        branch_location(branch, x, params)
            .map(|s| s.q)
            .ok_or(Error::NoBranch { r: x })
    };
    Ok((q(r - 2.0 * h)? - 8.0 * q(r - h)? + 8.0 * q(r + h)? - q(r + 2.0 * h)?) / (12.0 * h))
}

/// `<dq> = -delta / sqrt(R^2 + delta^2) / (R^2 + delta^2 - c sqrt(R^2 + delta^2)) * V`,
/// valid before the lower bifurcation.
pub fn closed_form_mean_dq(r: f64, speed: f64, params: &ModelParams) -> Result<f64> {
    let r1 = bifurcation_points(params).r1;
    if r >= r1 {
        return Err(Error::InvalidArgument(format!(
            "closed-form <dq> needs R < R1 = {r1} (got {r})"
        )));
    }
    let s = params.coupling_norm(r);
    Ok(-params.delta() / s / (s * s - params.c() * s) * speed)
}

/// Constant-coefficient model of a short time segment: `dp/dt = -A dq`,
/// `dq/dt = B (dp - M t)`, with `D` the oscillation amplitude about the
/// drift solution `-M/A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedParams {
    pub a_coef: f64,
    pub b_coef: f64,
    pub drift_rate: f64,
    pub amp: f64,
}

impl LinearizedParams {
    /// Coefficients frozen at `r` on the central branch.
    pub fn at(r: f64, speed: f64, params: &ModelParams, amp: f64) -> Result<Self> {
        let loc = branch_location(BranchId::Center, r, params).ok_or(Error::NoBranch { r })?;
        let gamma = gamma_at(loc, r, params)?;
        Ok(LinearizedParams {
            a_coef: gamma.a(),
            b_coef: gamma.b(),
            drift_rate: branch_phase_rate(r, params) * speed,
            amp,
        })
    }

    pub fn frequency(&self) -> Option<f64> {
        let ab = self.a_coef * self.b_coef;
        (ab > 0.0).then(|| ab.sqrt())
    }

    pub fn period(&self) -> Option<f64> {
        self.frequency().map(|w| std::f64::consts::TAU / w)
    }
}

fn require_frequency(lp: &LinearizedParams) -> Result<f64> {
    lp.frequency().ok_or_else(|| {
        Error::InvalidArgument(format!(
            "A*B must be positive (A = {}, B = {})",
            lp.a_coef, lp.b_coef
        ))
    })
}

/// Returns `(dq, dp)` at time `t` of the segment in the printed form
/// `dq = D cos(wt) - M/A`, `dp = -A D sin(wt)` with `w = sqrt(AB)`.
///
/// The `dp` amplitude solves the linearized equations only when `w = 1`;
/// see [`linearized_solution_consistent`].
pub fn linearized_solution(lp: &LinearizedParams, t: f64) -> Result<(f64, f64)> {
    let w = require_frequency(lp)?;
    let (sin_wt, cos_wt) = (w * t).sin_cos();
    let dq = lp.amp * cos_wt - lp.drift_rate / lp.a_coef;
    let dp = -lp.a_coef * lp.amp * sin_wt;
    Ok((dq, dp))
}

/// Same `dq` as [`linearized_solution`], with `dp = -(A D / w) sin(wt)`,
/// which satisfies `d(dq)/dt = B dp` exactly.
pub fn linearized_solution_consistent(lp: &LinearizedParams, t: f64) -> Result<(f64, f64)> {
    let w = require_frequency(lp)?;
    let (sin_wt, cos_wt) = (w * t).sin_cos();
    let dq = lp.amp * cos_wt - lp.drift_rate / lp.a_coef;
    let dp = -lp.a_coef * lp.amp / w * sin_wt;
    Ok((dq, dp))
}
