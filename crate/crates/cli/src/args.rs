use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{merge, read_document, Command, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "idfsim",
    version,
    about = "Branch selection, hysteresis and Berry phase through a pitchfork bifurcation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Fixed points and their stability over an R grid.
    FixedPoints(RunArgs),
    /// One slow sweep through the bifurcation; resumable from a checkpoint.
    Sweep(RunArgs),
    /// Forward then backward sweep forming the hysteresis loop.
    Hysteresis(RunArgs),
    /// Berry phase of the loop for each c in c_values.
    Berry(RunArgs),
    /// Actual versus predicted deviation from the fixed point before R1.
    IdfCheck(RunArgs),
    /// Ensemble average of the deviation around a fixed point.
    Ensemble(RunArgs),
}

/// Flags mirror the fields of [`RunConfig`].
#[derive(Debug, Default, Args, Serialize)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_from: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_to: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    /// OnFixedPoint or IdfShifted.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_values: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resume_from: Option<PathBuf>,
    /// JSON object whose keys override the flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Sub {
    pub fn parts(&self) -> (Command, &RunArgs) {
        match self {
            Sub::FixedPoints(a) => (Command::FixedPoints, a),
            Sub::Sweep(a) => (Command::Sweep, a),
            Sub::Hysteresis(a) => (Command::Hysteresis, a),
            Sub::Berry(a) => (Command::Berry, a),
            Sub::IdfCheck(a) => (Command::IdfCheck, a),
            Sub::Ensemble(a) => (Command::Ensemble, a),
        }
    }
}

impl Cli {
    /// Flags overlaid with the `--config` document.
    pub fn run_config(&self) -> CliResult<RunConfig> {
        let (command, args) = self.command.parts();
        let flags = match serde_json::to_value(args).map_err(|e| CliError::Config(e.to_string()))? {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        let document = args.config.as_deref().map(read_document).transpose()?;
        merge(command, flags, document)
    }
}
