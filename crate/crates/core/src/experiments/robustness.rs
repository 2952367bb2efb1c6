use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::ModelParams;

use super::sweep::{sweep_unchecked, Branch, InitialMode, SweepConfig, SweepStart};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub speed: f64,
    pub dt: f64,
    pub forward: Branch,
    pub backward: Branch,
    pub q_forward: Option<f64>,
    pub q_backward: Option<f64>,
}

/// Independent forward (`-w -> w`) and backward (`w -> -w`) sweeps from the
/// fixed point for every `(speed, dt)` pair, in parallel, results in
/// row-major input order.
pub fn branch_selection_scan(
    params: &ModelParams,
    half_width: f64,
    speeds: &[f64],
    dts: &[f64],
) -> Result<Vec<SelectionOutcome>> {
    let pairs: Vec<(f64, f64)> = speeds
        .iter()
        .flat_map(|&v| dts.iter().map(move |&dt| (v.abs(), dt)))
        .collect();
    pairs
        .par_iter()
        .map(|&(v, dt)| {
            let run = |from: f64, to: f64, speed: f64| {
                sweep_unchecked(
                    params,
                    &SweepConfig {
                        r_from: from,
                        r_to: to,
                        speed,
                        dt,
                        sample_stride: None,
                        start: SweepStart::Mode(InitialMode::OnFixedPoint),
                    },
                )
            };
            let fwd = run(-half_width, half_width, v)?;
            let bwd = run(half_width, -half_width, -v)?;
            Ok(SelectionOutcome {
                speed: v,
                dt,
                forward: fwd.branch,
                backward: bwd.branch,
                q_forward: fwd.q_at_r0,
                q_backward: bwd.q_at_r0,
            })
        })
        .collect()
}
