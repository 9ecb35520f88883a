//! Simulate a circuit, then estimate its apparent order over growing windows.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fractance::network::count_states;
use fractance::timesim::{simulate_discharge, simulate_step};
use fractance::varorder::{default_window_schedule, estimate_variable_order, VarOrderOptions};
use fractance::{LadderSpec64, TimeSeries64, VarOrderProfile64};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{self, spec_json};
use crate::presets::Preset;
use crate::{CliError, Result};

/// Where the circuit comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpecSource {
    Preset { preset: Preset },
    Inline(LadderSpec64),
    File(PathBuf),
}

impl SpecSource {
    pub fn resolve(&self) -> Result<LadderSpec64> {
        match self {
            SpecSource::Preset { preset } => Ok(preset.spec()),
            SpecSource::Inline(spec) => io::load_spec(&spec_json(spec)),
            SpecSource::File(path) => {
                if !path.is_file() {
                    return Err(CliError::Config(format!("spec file {} does not exist", path.display())));
                }
                io::load_spec(&path.to_string_lossy())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Pre-charged ladder discharging through the source resistor.
    Discharge,
    /// Op-amp integrator with the ladder as feedback, driven by a step.
    Step,
}

fn default_u0() -> f64 {
    1.0
}
fn default_r_source() -> f64 {
    1e6
}
fn default_dt() -> f64 {
    0.01
}
fn default_t_end() -> f64 {
    100.0
}
fn default_gain() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub spec: SpecSource,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// Charge level (discharge) or step amplitude (step).
    #[serde(default = "default_u0")]
    pub u0: f64,
    #[serde(default = "default_r_source")]
    pub r_source: f64,
    /// Integrator gain in step mode.
    #[serde(default = "default_gain")]
    pub gain: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    /// Window ends; the default schedule when absent.
    #[serde(default)]
    pub schedule: Option<Vec<f64>>,
    #[serde(default = "default_true")]
    pub warm_start: bool,
    #[serde(default)]
    pub subtract_final_value: bool,
}

fn default_mode() -> Mode {
    Mode::Discharge
}

impl PipelineConfig {
    pub fn preset(preset: Preset) -> Self {
        Self {
            spec: SpecSource::Preset { preset },
            mode: Mode::Discharge,
            u0: default_u0(),
            r_source: default_r_source(),
            gain: default_gain(),
            dt: default_dt(),
            t_end: default_t_end(),
            schedule: None,
            warm_start: true,
            subtract_final_value: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad pipeline config: {e}")))
    }

    pub fn schedule(&self) -> Vec<f64> {
        self.schedule.clone().unwrap_or_else(default_window_schedule)
    }

    /// Checks every field and resolves the circuit; nothing is computed yet.
    pub fn check(&self) -> Result<LadderSpec64> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        if self.t_end < self.dt {
            return Err(CliError::Config(format!("t_end {} is shorter than dt {}", self.t_end, self.dt)));
        }
        if self.u0 == 0.0 || !self.u0.is_finite() {
            return Err(CliError::Config(format!("u0 must be non-zero, got {}", self.u0)));
        }
        if !(self.r_source >= 0.0 && self.r_source.is_finite()) {
            return Err(CliError::Config(format!("r_source must be non-negative, got {}", self.r_source)));
        }
        if !self.gain.is_finite() || self.gain == 0.0 {
            return Err(CliError::Config(format!("gain must be non-zero, got {}", self.gain)));
        }
        let schedule = self.schedule();
        if schedule.is_empty() || schedule[0] <= 0.0 || schedule.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(CliError::Config("schedule must be positive and strictly increasing".into()));
        }
        let last = schedule[schedule.len() - 1];
        if last > self.t_end * (1.0 + 1e-12) {
            return Err(CliError::Config(format!("schedule ends at {last} s, after t_end {} s", self.t_end)));
        }
        self.spec.resolve()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub spec_sha256: String,
    pub n_states: usize,
    pub config: PipelineConfig,
    pub alpha_1: Option<f64>,
    pub alpha_100: Option<f64>,
    pub all_converged: bool,
    pub simulation_seconds: f64,
    pub estimation_seconds: f64,
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub series: TimeSeries64,
    pub profile: VarOrderProfile64,
    pub summary: Summary,
}

pub fn spec_hash(spec: &LadderSpec64) -> String {
    format!("{:x}", Sha256::digest(spec_json(spec).as_bytes()))
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput> {
    let start = Instant::now();
    let spec = config.check()?;
    let mut series = match config.mode {
        Mode::Discharge => simulate_discharge(&spec, config.r_source, config.u0, config.t_end, config.dt),
        Mode::Step => simulate_step(&spec, config.gain, config.u0, config.t_end, config.dt),
    }
    .map_err(CliError::simulation)?;
    let simulated = start.elapsed();
    if config.subtract_final_value {
        io::subtract_final_value(&mut series);
    }
    let opts = VarOrderOptions {
        warm_start: config.warm_start,
        ..Default::default()
    };
    let profile = estimate_variable_order(&series, &config.schedule(), &opts).map_err(CliError::fit)?;
    let total = start.elapsed();
    let summary = Summary {
        spec_sha256: spec_hash(&spec),
        n_states: count_states(&spec),
        config: config.clone(),
        alpha_1: profile.alpha_at(1.0),
        alpha_100: profile.alpha_at(100.0),
        all_converged: profile.converged_flags.iter().all(|&c| c),
        simulation_seconds: simulated.as_secs_f64(),
        estimation_seconds: (total - simulated).as_secs_f64(),
        runtime_seconds: total.as_secs_f64(),
    };
    Ok(PipelineOutput {
        series,
        profile,
        summary,
    })
}

/// Writes `discharge.csv`, `varorder.csv` and `summary.json` into `dir`.
pub fn write_outputs(dir: &Path, out: &PipelineOutput) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::output)?;
    let create = |name: &str| fs::File::create(dir.join(name)).map_err(CliError::output);
    io::write_series(create("discharge.csv")?, &out.series)?;
    io::write_profile(create("varorder.csv")?, &out.profile)?;
    let json = serde_json::to_string_pretty(&out.summary).map_err(CliError::output)?;
    fs::write(dir.join("summary.json"), json + "\n").map_err(CliError::output)
}
