//! Scenario configuration and the command implementations behind the CLI.
//!
//! A scenario is a JSON document (every field optional) resolved against
//! defaults; command-line flags are applied on top. Commands write CSV with
//! a fixed header and floats in 17-significant-digit scientific notation.

mod commands;
mod validate;

use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{StopRule, VelocityInit, WavePacketSpec};
use crate::error::Error;
use crate::graph::{JunctionFamily, LatticeSpec, StarGraphSpec};

pub use commands::{
    cmd_converge, cmd_simulate, cmd_smatrix, cmd_twomode, SimulateOutput, SimulateSummary,
};
pub use validate::{cmd_validate, CheckResult, ValidationReport};

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments (exit code 2).
    Usage(String),
    /// The experiment cannot produce a valid measurement (exit code 3).
    ExperimentInvalid(String),
    /// Numerical failure or failed validation (exit code 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::ExperimentInvalid(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::ExperimentInvalid(m) => write!(f, "experiment invalid: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ExperimentInvalid(m) => CliError::ExperimentInvalid(m),
            Error::BlowUp { .. } | Error::NonFinite(_) | Error::InconsistentFamily { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("csv: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Round-trip exact float text: 17 significant digits, scientific notation.
/// Negative zero prints as positive zero.
pub fn fmt_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// Wavenumber grid: an explicit list or `count` points from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KGrid {
    Range {
        start: f64,
        stop: f64,
        count: usize,
        #[serde(default)]
        spacing: Spacing,
    },
    List(Vec<f64>),
}

impl KGrid {
    /// Expands the grid, requiring strictly increasing positive values.
    pub fn values(&self) -> CliResult<Vec<f64>> {
        let v = match self {
            KGrid::List(v) => v.clone(),
            KGrid::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                let (start, stop, count) = (*start, *stop, *count);
                if count == 0 {
                    return Err(CliError::Usage("k grid needs count >= 1".into()));
                }
                if count == 1 {
                    vec![start]
                } else {
                    let last = (count - 1) as f64;
                    match spacing {
                        Spacing::Linear => (0..count)
                            .map(|i| start + (stop - start) * i as f64 / last)
                            .collect(),
                        Spacing::Log => {
                            if !(start > 0.0 && stop > 0.0) {
                                return Err(CliError::Usage(
                                    "log-spaced k grid needs positive bounds".into(),
                                ));
                            }
                            let (a, b) = (start.ln(), stop.ln());
                            (0..count)
                                .map(|i| (a + (b - a) * i as f64 / last).exp())
                                .collect()
                        }
                    }
                }
            }
        };
        if v.is_empty() {
            return Err(CliError::Usage("k grid is empty".into()));
        }
        if v.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(CliError::Usage(
                "k grid values must be finite and > 0".into(),
            ));
        }
        if v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Usage("k grid must be strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmatrixModel {
    /// Closed-form amplitudes of the configured junction family.
    #[default]
    Continuum,
    /// Lattice amplitudes at the configured lattice constant.
    Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmatrixParams {
    pub model: SmatrixModel,
    pub k_grid: KGrid,
}

impl Default for SmatrixParams {
    fn default() -> Self {
        Self {
            model: SmatrixModel::Continuum,
            k_grid: KGrid::Range {
                start: 0.01,
                stop: 10.0,
                count: 1000,
                spacing: Spacing::Linear,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub packet: WavePacketSpec,
    /// `None` means clearance with the packet-derived defaults.
    pub stop: Option<StopRule>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            packet: WavePacketSpec {
                carrier_k: 2.0,
                center: 40.0,
                width: 2.5,
                amplitude: Complex64::new(1.0, 0.0),
                velocity_init: VelocityInit::EnvelopeCorrected,
            },
            stop: None,
        }
    }
}

impl SimulateParams {
    pub fn stop_rule(&self) -> StopRule {
        self.stop
            .unwrap_or_else(|| StopRule::clearance_for(&self.packet))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeParams {
    pub k: f64,
    pub deltas: Vec<f64>,
}

impl Default for ConvergeParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            deltas: vec![0.2, 0.1, 0.05, 0.025],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwomodeParams {
    pub k_grid: KGrid,
}

impl Default for TwomodeParams {
    fn default() -> Self {
        Self {
            k_grid: KGrid::Range {
                start: 0.25,
                stop: 5.0,
                count: 20,
                spacing: Spacing::Linear,
            },
        }
    }
}

/// Fully resolved scenario; serialised verbatim into every summary record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub graph: StarGraphSpec,
    pub lattice: LatticeSpec,
    pub family: JunctionFamily,
    pub smatrix: SmatrixParams,
    pub simulate: SimulateParams,
    pub converge: ConvergeParams,
    pub twomode: TwomodeParams,
    /// Steps between time-series rows.
    pub cadence: u64,
    pub output: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            graph: StarGraphSpec {
                ray_count: 3,
                mass: 1.0,
            },
            lattice: LatticeSpec {
                delta: 0.05,
                sites_per_ray: 4000,
                dt: 0.0125,
            },
            family: JunctionFamily::Kirchhoff,
            smatrix: SmatrixParams::default(),
            simulate: SimulateParams::default(),
            converge: ConvergeParams::default(),
            twomode: TwomodeParams::default(),
            cadence: 10,
            output: None,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is always serialisable")
    }

    /// Checks the graph and basic lattice invariants shared by every command.
    pub fn validate_specs(&self) -> CliResult<()> {
        self.graph.validate()?;
        self.lattice.validate()?;
        Ok(())
    }
}
