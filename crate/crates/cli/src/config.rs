//! Run configuration: flags merged with an optional JSON document, then
//! resolved so that every field the command reads is explicit.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use idfsim::experiments::{InitialMode, DEFAULT_ENSEMBLE_PERIODS};
use idfsim::propagator::{default_sample_stride, RampProtocol};
use idfsim::{ModelParams, PhaseState};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const DEFAULT_C: f64 = 0.2;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_DT: f64 = 0.05;
pub const DEFAULT_OUT_DIR: &str = "idfsim-out";
pub const DEFAULT_GRID_POINTS: usize = 501;
pub const DEFAULT_BERRY_C_VALUES: [f64; 4] = [0.15, 0.2, 0.25, 0.3];
pub const DEFAULT_ENSEMBLE_SIZE: usize = 64;
pub const DEFAULT_ENSEMBLE_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    FixedPoints,
    Sweep,
    Hysteresis,
    Berry,
    IdfCheck,
    Ensemble,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FixedPoints => "fixed-points",
            Command::Sweep => "sweep",
            Command::Hysteresis => "hysteresis",
            Command::Berry => "berry",
            Command::IdfCheck => "idf-check",
            Command::Ensemble => "ensemble",
        }
    }

    /// Fields the command reads; anything else set is rejected.
    fn fields(&self) -> &'static [&'static str] {
        match self {
            Command::FixedPoints => &["c", "delta", "r_from", "r_to", "grid_points"],
            Command::Sweep => &[
                "c",
                "delta",
                "r_from",
                "r_to",
                "speed",
                "dt",
                "sample_stride",
                "initial_mode",
                "resume_from",
            ],
            Command::Hysteresis => &[
                "c",
                "delta",
                "r_from",
                "r_to",
                "speed",
                "dt",
                "sample_stride",
            ],
            Command::Berry => &["delta", "c_values", "speed", "dt"],
            Command::IdfCheck => &[
                "c",
                "delta",
                "r_from",
                "r_to",
                "speed",
                "dt",
                "sample_stride",
                "initial_mode",
            ],
            Command::Ensemble => &[
                "c",
                "delta",
                "r_from",
                "speed",
                "dt",
                "seed",
                "n_samples",
                "radius",
                "periods",
            ],
        }
    }
}

/// Every knob of a run. After [`RunConfig::resolve`] all fields the
/// command reads are `Some` and the rest are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_from: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_to: Option<f64>,
    /// Signed for `sweep`, positive elsewhere.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_mode: Option<InitialMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// Checkpoint a `sweep` continues from; `null` starts fresh.
    #[serde(default)]
    pub resume_from: Option<PathBuf>,
}

/// Final state of a sweep, enough to continue it bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub t: f64,
    pub r: f64,
    pub state: PhaseState,
}

impl Checkpoint {
    pub fn load(path: &Path) -> CliResult<Checkpoint> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.into(),
            source,
        })
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Overlays the keys of `document` on `flags` and parses the result.
/// `command` is authoritative; a document naming another command is an
/// error.
pub fn merge(
    command: Command,
    flags: Map<String, Value>,
    document: Option<Value>,
) -> CliResult<RunConfig> {
    let mut merged = flags;
    if let Some(doc) = document {
        let Value::Object(doc) = doc else {
            return Err(config_err("config document must be a JSON object"));
        };
        merged.extend(doc);
    }
    let name = Value::String(command.name().to_string());
    match merged.get("command") {
        Some(v) if *v != name => {
            return Err(config_err(format!("config is for command {v}, not {name}")));
        }
        _ => {
            merged.insert("command".into(), name);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| config_err(e.to_string()))
}

pub fn read_document(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })
}

fn same_bits(name: &str, given: Option<f64>, stored: f64) -> CliResult<f64> {
    match given {
        Some(x) if x.to_bits() != stored.to_bits() => Err(config_err(format!(
            "{name} = {x} differs from the checkpoint value {stored}"
        ))),
        _ => Ok(stored),
    }
}

fn sweep_protocol(t0: f64, r_from: f64, r_to: f64, speed: f64) -> CliResult<RampProtocol> {
    let waypoints = if r_from.min(r_to) < 0.0 && 0.0 < r_from.max(r_to) {
        vec![r_from, 0.0, r_to]
    } else {
        vec![r_from, r_to]
    };
    Ok(RampProtocol::through_from(t0, &waypoints, speed)?)
}

impl RunConfig {
    fn set_fields(&self) -> Vec<&'static str> {
        let flags = [
            ("c", self.c.is_some()),
            ("delta", self.delta.is_some()),
            ("r_from", self.r_from.is_some()),
            ("r_to", self.r_to.is_some()),
            ("speed", self.speed.is_some()),
            ("dt", self.dt.is_some()),
            ("sample_stride", self.sample_stride.is_some()),
            ("initial_mode", self.initial_mode.is_some()),
            ("seed", self.seed.is_some()),
            ("grid_points", self.grid_points.is_some()),
            ("c_values", self.c_values.is_some()),
            ("n_samples", self.n_samples.is_some()),
            ("radius", self.radius.is_some()),
            ("periods", self.periods.is_some()),
            ("resume_from", self.resume_from.is_some()),
        ];
        flags.into_iter().filter(|f| f.1).map(|f| f.0).collect()
    }

    /// Fills every default the command reads and validates the run before
    /// any integration starts.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let cmd = self.command;
        let allowed = cmd.fields();
        if let Some(extra) = self.set_fields().into_iter().find(|f| !allowed.contains(f)) {
            return Err(config_err(format!("{extra} is not used by {}", cmd.name())));
        }
        let mut out = self.clone();
        out.out_dir
            .get_or_insert_with(|| PathBuf::from(DEFAULT_OUT_DIR));

        if let Some(path) = &self.resume_from {
            let ck = Checkpoint::load(path)?;
            if ck.config.command != Command::Sweep {
                return Err(config_err("checkpoint does not come from a sweep"));
            }
            let stored = |v: Option<f64>, name: &str| {
                v.ok_or_else(|| config_err(format!("checkpoint config lacks {name}")))
            };
            out.c = Some(same_bits("c", self.c, stored(ck.config.c, "c")?)?);
            out.delta = Some(same_bits(
                "delta",
                self.delta,
                stored(ck.config.delta, "delta")?,
            )?);
            out.dt = Some(same_bits("dt", self.dt, stored(ck.config.dt, "dt")?)?);
            out.r_from = Some(same_bits("r_from", self.r_from, ck.r)?);
            out.speed = self.speed.or(ck.config.speed);
            out.sample_stride = self.sample_stride.or(ck.config.sample_stride);
            out.initial_mode = self.initial_mode.or(ck.config.initial_mode);
        }

        if cmd != Command::Berry {
            out.c.get_or_insert(DEFAULT_C);
        }
        out.delta.get_or_insert(DEFAULT_DELTA);
        if cmd != Command::Berry {
            ModelParams::new(out.c.unwrap(), out.delta.unwrap())?;
        }
        if cmd != Command::FixedPoints {
            out.dt.get_or_insert(DEFAULT_DT);
        }

        match cmd {
            Command::FixedPoints => {
                let (a, b) = (
                    *out.r_from.get_or_insert(-0.25),
                    *out.r_to.get_or_insert(0.25),
                );
                let n = *out.grid_points.get_or_insert(DEFAULT_GRID_POINTS);
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return Err(config_err(format!(
                        "grid needs r_from < r_to (got {a}, {b})"
                    )));
                }
                if n < 2 {
                    return Err(config_err(format!(
                        "grid_points must be at least 2 (got {n})"
                    )));
                }
            }
            Command::Sweep => {
                let a = *out.r_from.get_or_insert(-0.25);
                let b = *out.r_to.get_or_insert(if a < 0.25 { 0.25 } else { -0.25 });
                let v = *out.speed.get_or_insert(1e-5 * (b - a).signum());
                out.initial_mode.get_or_insert(InitialMode::OnFixedPoint);
                let t0 = match &self.resume_from {
                    Some(path) => Checkpoint::load(path)?.t,
                    None => 0.0,
                };
                let proto = sweep_protocol(t0, a, b, v)?;
                let dt = out.dt.unwrap();
                out.sample_stride
                    .get_or_insert(default_sample_stride(&proto, dt));
            }
            Command::Hysteresis => {
                let a = *out.r_from.get_or_insert(-0.25);
                let b = *out.r_to.get_or_insert(0.25);
                let v = *out.speed.get_or_insert(1e-5);
                if v.is_nan() || v <= 0.0 {
                    return Err(config_err(format!(
                        "hysteresis speed must be positive (got {v})"
                    )));
                }
                let proto = sweep_protocol(0.0, a, b, v)?;
                let dt = out.dt.unwrap();
                out.sample_stride
                    .get_or_insert(default_sample_stride(&proto, dt));
            }
            Command::Berry => {
                let cs = out
                    .c_values
                    .get_or_insert_with(|| DEFAULT_BERRY_C_VALUES.to_vec());
                if cs.is_empty() {
                    return Err(config_err("c_values is empty"));
                }
                for &c in cs.iter() {
                    ModelParams::new(c, out.delta.unwrap())?;
                }
                out.speed.get_or_insert(1e-5);
            }
            Command::IdfCheck => {
                let a = *out.r_from.get_or_insert(-0.25);
                let b = *out.r_to.get_or_insert(-0.19);
                let v = *out.speed.get_or_insert(1e-6);
                out.initial_mode.get_or_insert(InitialMode::OnFixedPoint);
                let proto = RampProtocol::linear(a, b, v)?;
                let dt = out.dt.unwrap();
                out.sample_stride
                    .get_or_insert(default_sample_stride(&proto, dt));
            }
            Command::Ensemble => {
                out.r_from.get_or_insert(-0.25);
                out.speed.get_or_insert(1e-6);
                out.seed.get_or_insert(0);
                out.n_samples.get_or_insert(DEFAULT_ENSEMBLE_SIZE);
                out.radius.get_or_insert(DEFAULT_ENSEMBLE_RADIUS);
                out.periods.get_or_insert(DEFAULT_ENSEMBLE_PERIODS);
            }
        }
        if out.sample_stride == Some(0) {
            return Err(config_err("sample_stride must be positive"));
        }
        Ok(out)
    }

    /// Model parameters of a resolved non-berry config.
    pub fn params(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(
            self.c.ok_or_else(|| config_err("c is not set"))?,
            self.delta.ok_or_else(|| config_err("delta is not set"))?,
        )?)
    }

    pub fn out_dir(&self) -> &Path {
        self.out_dir
            .as_deref()
            .unwrap_or(Path::new(DEFAULT_OUT_DIR))
    }
}

/// Field of a resolved config; resolution guarantees presence.
pub(crate) fn field<T: Clone>(v: &Option<T>, name: &str) -> T {
    v.clone().unwrap_or_else(|| panic!("{name} unresolved"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bare(command: Command) -> RunConfig {
        merge(command, Map::new(), None).unwrap()
    }

    #[test]
    fn document_overrides_flags() {
        let mut flags = Map::new();
        flags.insert("c".into(), Value::from(0.3));
        let cfg = merge(
            Command::Sweep,
            flags,
            Some(serde_json::json!({ "c": 0.25 })),
        )
        .unwrap();
        assert_eq!(cfg.c, Some(0.25));
    }

    #[test]
    fn unknown_keys_and_wrong_command_rejected() {
        assert!(merge(
            Command::Sweep,
            Map::new(),
            Some(serde_json::json!({ "cc": 1.0 }))
        )
        .is_err());
        let doc = serde_json::json!({ "command": "berry" });
        assert!(merge(Command::Sweep, Map::new(), Some(doc)).is_err());
    }

    #[test]
    fn defaults_are_explicit() {
        let cfg = bare(Command::Sweep).resolve().unwrap();
        assert_eq!(cfg.speed, Some(1e-5));
        assert_eq!(cfg.initial_mode, Some(InitialMode::OnFixedPoint));
        assert!(cfg.sample_stride.is_some());
        let echo = serde_json::to_value(&cfg).unwrap();
        for key in [
            "c",
            "delta",
            "r_from",
            "r_to",
            "speed",
            "dt",
            "sample_stride",
            "initial_mode",
            "out_dir",
        ] {
            assert!(echo.get(key).is_some(), "{key}");
        }
        let again: RunConfig = serde_json::from_value(echo).unwrap();
        assert_eq!(again.resolve().unwrap(), cfg);
    }

    #[test]
    fn backward_sweep_default_speed_is_negative() {
        let mut cfg = bare(Command::Sweep);
        cfg.r_from = Some(0.25);
        assert_eq!(cfg.resolve().unwrap().speed, Some(-1e-5));
    }

    #[test]
    fn irrelevant_fields_rejected() {
        let mut cfg = bare(Command::FixedPoints);
        cfg.speed = Some(1e-5);
        assert!(matches!(cfg.resolve(), Err(CliError::Config(_))));
    }

    #[test]
    fn bad_params_are_validation_errors() {
        let mut cfg = bare(Command::FixedPoints);
        cfg.c = Some(0.1);
        let err = cfg.resolve().unwrap_err();
        assert_eq!(err.exit_code(), crate::error::EXIT_VALIDATION);
        assert!(err.to_string().contains("no bifurcation regime"));
    }
}
