use std::path::PathBuf;

use idfsim::experiments::{
    berry_scan, ensemble_average_oracle, idf_tracking_experiment, local_frequency, mirror_error,
    run_hysteresis_with, run_sweep_with, EnsembleConfig, SweepConfig, SweepStart,
};
use idfsim::model::dh_dr;
use idfsim::propagator::Sample;
use idfsim::{bifurcation_points, fixed_points, idf_prediction, IdfPrediction, ModelParams};
use serde::Serialize;

use crate::config::{field, Checkpoint, Command, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_csv, write_json, Cell};

pub const SUMMARY_FILE: &str = "summary.json";
pub const FIXED_POINTS_FILE: &str = "fixed_points.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const LOOP_FILE: &str = "loop.csv";
pub const BERRY_FILE: &str = "berry.json";
pub const IDF_CHECK_FILE: &str = "idf_check.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    result: T,
}

/// Resolves `config`, runs its command and writes the artifacts into the
/// output directory. Returns the written paths.
pub fn run(config: &RunConfig) -> CliResult<Vec<PathBuf>> {
    let cfg = config.resolve()?;
    let dir = cfg.out_dir().to_path_buf();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let files = match cfg.command {
        Command::FixedPoints => cmd_fixed_points(&cfg)?,
        Command::Sweep => cmd_sweep(&cfg)?,
        Command::Hysteresis => cmd_hysteresis(&cfg)?,
        Command::Berry => cmd_berry(&cfg)?,
        Command::IdfCheck => cmd_idf_check(&cfg)?,
        Command::Ensemble => cmd_ensemble(&cfg)?,
    };
    Ok(files.into_iter().map(|f| dir.join(f)).collect())
}

fn summary<T: Serialize>(cfg: &RunConfig, result: T) -> CliResult<()> {
    write_json(
        &cfg.out_dir().join(SUMMARY_FILE),
        &Summary {
            config: cfg,
            result,
        },
    )
}

fn prediction_at(r: f64, speed: f64, params: &ModelParams) -> Option<IdfPrediction> {
    idf_prediction(r, speed, params).ok()
}

pub fn cmd_fixed_points(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let params = cfg.params()?;
    let (a, b) = (field(&cfg.r_from, "r_from"), field(&cfg.r_to, "r_to"));
    let n = field(&cfg.grid_points, "grid_points");
    let grid: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 == n {
                b
            } else {
                a + (b - a) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    if !grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(CliError::Config("grid is not strictly increasing".into()));
    }
    let mut rows = Vec::new();
    for &r in &grid {
        for fp in fixed_points(r, &params) {
            rows.push(vec![
                Cell::F(r),
                Cell::F(fp.q_bar),
                Cell::F(fp.p_bar),
                Cell::S(fp.stability.as_str()),
            ]);
        }
    }
    let count = rows.len();
    write_csv(
        &cfg.out_dir().join(FIXED_POINTS_FILE),
        &["r", "q_bar", "p_bar", "stability"],
        rows,
    )?;
    let loci = bifurcation_points(&params);

    #[derive(Serialize)]
    struct Out {
        rows: usize,
        r1: f64,
        r2: f64,
    }
    summary(
        cfg,
        Out {
            rows: count,
            r1: loci.r1,
            r2: loci.r2,
        },
    )?;
    Ok(vec![FIXED_POINTS_FILE, SUMMARY_FILE])
}

/// `E_end - E_start` minus the trapezoid integral of `dH/dR dR` over the
/// samples.
fn energy_balance_residual(samples: &[Sample]) -> CliResult<f64> {
    let mut work = 0.0;
    for w in samples.windows(2) {
        let (a, b) = (dh_dr(w[0].state)?, dh_dr(w[1].state)?);
        work += 0.5 * (a + b) * (w[1].r - w[0].r);
    }
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    Ok(last.energy - first.energy - work)
}

pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let params = cfg.params()?;
    let start = match &cfg.resume_from {
        Some(path) => {
            let ck = Checkpoint::load(path)?;
            SweepStart::State {
                t: ck.t,
                state: ck.state,
            }
        }
        None => SweepStart::Mode(field(&cfg.initial_mode, "initial_mode")),
    };
    let speed = field(&cfg.speed, "speed");
    let res = run_sweep_with(
        &params,
        &SweepConfig {
            r_from: field(&cfg.r_from, "r_from"),
            r_to: field(&cfg.r_to, "r_to"),
            speed,
            dt: field(&cfg.dt, "dt"),
            sample_stride: cfg.sample_stride,
            start,
        },
    )?;
    let samples = &res.trajectory.samples;
    let rows = samples.iter().zip(&res.deviation_series).map(|(s, d)| {
        vec![
            Cell::F(s.t),
            Cell::F(s.r),
            Cell::F(s.state.q),
            Cell::F(s.state.p),
            Cell::F(s.energy),
            Cell::F(d.dq),
            Cell::F(d.dp),
        ]
    });
    let dir = cfg.out_dir();
    write_csv(
        &dir.join(TRAJECTORY_FILE),
        &["t", "r", "q", "p", "energy", "dq", "dp"],
        rows,
    )?;

    let (first, last) = (*res.trajectory.first(), *res.trajectory.last());
    write_json(
        &dir.join(CHECKPOINT_FILE),
        &Checkpoint {
            config: cfg.clone(),
            t: last.t,
            r: last.r,
            state: last.state,
        },
    )?;

    #[derive(Serialize)]
    struct Out {
        branch: &'static str,
        q_at_r0: Option<f64>,
        energy_drift: f64,
        energy_balance_residual: f64,
        idf_prediction_at_start: Option<IdfPrediction>,
        samples: usize,
    }
    summary(
        cfg,
        Out {
            branch: res.branch.as_str(),
            q_at_r0: res.q_at_r0,
            energy_drift: last.energy - first.energy,
            energy_balance_residual: energy_balance_residual(samples)?,
            idf_prediction_at_start: prediction_at(first.r, speed, &params),
            samples: samples.len(),
        },
    )?;
    Ok(vec![TRAJECTORY_FILE, CHECKPOINT_FILE, SUMMARY_FILE])
}

pub fn cmd_hysteresis(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let params = cfg.params()?;
    let res = run_hysteresis_with(
        &params,
        field(&cfg.r_from, "r_from"),
        field(&cfg.r_to, "r_to"),
        field(&cfg.speed, "speed"),
        field(&cfg.dt, "dt"),
        cfg.sample_stride,
    )?;
    let leg = |name: &'static str| {
        move |s: &Sample| {
            vec![
                Cell::S(name),
                Cell::F(s.t),
                Cell::F(s.r),
                Cell::F(s.state.q),
                Cell::F(s.state.p),
                Cell::F(s.energy),
            ]
        }
    };
    let rows = res
        .forward
        .trajectory
        .samples
        .iter()
        .map(leg("forward"))
        .chain(
            res.backward
                .trajectory
                .samples
                .iter()
                .skip(1)
                .map(leg("backward")),
        );
    write_csv(
        &cfg.out_dir().join(LOOP_FILE),
        &["leg", "t", "r", "q", "p", "energy"],
        rows,
    )?;

    #[derive(Serialize)]
    struct Out {
        forward_branch: &'static str,
        backward_branch: &'static str,
        forward_q_at_r0: Option<f64>,
        backward_q_at_r0: Option<f64>,
        loop_area: f64,
        closure_gap: f64,
        guiding_center_gap: Option<f64>,
        mirror_error: f64,
    }
    summary(
        cfg,
        Out {
            forward_branch: res.forward.branch.as_str(),
            backward_branch: res.backward.branch.as_str(),
            forward_q_at_r0: res.forward.q_at_r0,
            backward_q_at_r0: res.backward.q_at_r0,
            loop_area: res.loop_area,
            closure_gap: res.closure_gap,
            guiding_center_gap: res.guiding_center_gap,
            mirror_error: mirror_error(&res, &params, 400),
        },
    )?;
    Ok(vec![LOOP_FILE, SUMMARY_FILE])
}

pub fn cmd_berry(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let reports = berry_scan(
        &field(&cfg.c_values, "c_values"),
        field(&cfg.delta, "delta"),
        field(&cfg.speed, "speed"),
        field(&cfg.dt, "dt"),
    )?;
    write_json(&cfg.out_dir().join(BERRY_FILE), &reports)?;

    #[derive(Serialize)]
    struct Out {
        max_relative_error: f64,
    }
    let worst = reports
        .iter()
        .map(|r| r.relative_error())
        .fold(0.0, f64::max);
    summary(
        cfg,
        Out {
            max_relative_error: worst,
        },
    )?;
    Ok(vec![BERRY_FILE, SUMMARY_FILE])
}

pub fn cmd_idf_check(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let params = cfg.params()?;
    let (r_from, speed) = (field(&cfg.r_from, "r_from"), field(&cfg.speed, "speed"));
    let res = idf_tracking_experiment(
        &params,
        r_from,
        field(&cfg.r_to, "r_to"),
        speed,
        field(&cfg.dt, "dt"),
        field(&cfg.initial_mode, "initial_mode"),
        cfg.sample_stride,
    )?;
    let rows = res.points.iter().map(|p| {
        vec![
            Cell::F(p.t),
            Cell::F(p.r),
            Cell::F(p.dq_actual),
            Cell::F(p.dq_theory),
        ]
    });
    write_csv(
        &cfg.out_dir().join(IDF_CHECK_FILE),
        &["t", "R", "dq_actual", "dq_theory"],
        rows,
    )?;

    #[derive(Serialize)]
    struct Out {
        max_relative_error: f64,
        r1: f64,
        idf_prediction_at_start: Option<IdfPrediction>,
        /// Measured and linearized oscillation frequency at the range midpoint.
        local_frequency: Option<[f64; 2]>,
    }
    let r_mid = 0.5 * (r_from + field(&cfg.r_to, "r_to"));
    let local = local_frequency(&res, &params, r_mid, 10.0)
        .ok()
        .map(|(w, w0)| [w, w0]);
    summary(
        cfg,
        Out {
            max_relative_error: res.max_relative_error(),
            r1: bifurcation_points(&params).r1,
            idf_prediction_at_start: prediction_at(r_from, speed, &params),
            local_frequency: local,
        },
    )?;
    Ok(vec![IDF_CHECK_FILE, SUMMARY_FILE])
}

pub fn cmd_ensemble(cfg: &RunConfig) -> CliResult<Vec<&'static str>> {
    let params = cfg.params()?;
    let res = ensemble_average_oracle(
        &params,
        &EnsembleConfig {
            r: field(&cfg.r_from, "r_from"),
            speed: field(&cfg.speed, "speed"),
            n_samples: field(&cfg.n_samples, "n_samples"),
            radius: field(&cfg.radius, "radius"),
            seed: field(&cfg.seed, "seed"),
            periods: field(&cfg.periods, "periods"),
            dt: field(&cfg.dt, "dt"),
        },
    )?;
    let rows = res
        .members
        .iter()
        .enumerate()
        .map(|(k, m)| vec![Cell::U(k), Cell::F(m[0]), Cell::F(m[1])]);
    write_csv(
        &cfg.out_dir().join(ENSEMBLE_FILE),
        &["member", "mean_dq", "mean_dp"],
        rows,
    )?;

    #[derive(Serialize)]
    struct Out {
        mean_dq: f64,
        mean_dp: f64,
        predicted_dq: f64,
        predicted_dp: f64,
        window: f64,
    }
    summary(
        cfg,
        Out {
            mean_dq: res.mean_dq,
            mean_dp: res.mean_dp,
            predicted_dq: res.predicted_dq,
            predicted_dp: res.predicted_dp,
            window: res.window,
        },
    )?;
    Ok(vec![ENSEMBLE_FILE, SUMMARY_FILE])
}
