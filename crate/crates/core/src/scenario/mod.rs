//! Run configuration, presets, experiment reports.
//!
//! A run is described by a TOML file:
//!
//! ```toml
//! seed = 0
//!
//! [system]
//! speeds = ["1", "1/2"]          # exact, non-increasing
//! tensor = "coupling.tensor"     # tensor file (relative to this file), or
//! entries = ["1 1 1 0 0 0 1"]    # inline entries in the same line format
//!
//! [grid]
//! n = 64
//! dx = 0.25
//!
//! [solver]
//! cfl = 0.4
//! amplitude = 0.01               # t_end defaults to the no-reflection time
//!
//! [data]
//! family = "gaussian_bump"
//! components = [{ width = 2.0 }, { width = 2.0 }]
//!
//! [probes]
//! count = 21
//! order = 3
//!
//! [outputs]
//! directory = "out"
//! snapshots = "final"
//! ```
//!
//! Every table and key is optional; missing ones take the values of
//! [`RunConfig::default`]. With neither `tensor` nor `entries` the system is
//! linear.

mod convergence;
mod presets;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::GridSpec;
use crate::solver::{InitialData, ProbeSchedule, SolverConfig, WaveSystem};
use crate::tensor::{check_symmetry, format_entry, parse_rational, parse_tensor_file, CoeffTensor, SpeedVector, TensorError};

pub use convergence::{convergence_study, ConvergenceReport, ConvergenceRow};
pub use presets::{ExperimentPreset, Preset};
pub use report::{
    compare, execute, run_experiment, Check, CompareError, Comparison, DiffEntry, ExperimentOutput, Report, ScenarioError,
    E1_DRIFT_LIMIT, E2_GROWTH_LIMIT, E3_EXPONENT_LIMIT, REPORT_SCHEMA, TREND_LIMIT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Exact speeds `c_1 ≥ … ≥ c_m`, e.g. `"1/2"`.
    pub speeds: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tensor: Option<PathBuf>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<String>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { speeds: vec!["1".into()], tensor: None, entries: Vec::new() }
    }
}

impl SystemConfig {
    /// Inline form of an exact system.
    pub fn inline(speeds: &SpeedVector, tensor: &CoeffTensor) -> Self {
        Self {
            speeds: speeds.exact().iter().map(crate::tensor::format_rational).collect(),
            tensor: None,
            entries: tensor.nonzero().map(|(idx, v)| format_entry(idx, v)).collect(),
        }
    }
}

/// Centred cube of `n³` points with spacing `dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub dx: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 64, dx: 0.25 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotPolicy {
    #[default]
    None,
    /// Dump the last finite state.
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub snapshots: SnapshotPolicy,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("nullwave-out"), snapshots: SnapshotPolicy::None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// Preset the file was expanded from, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub system: SystemConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub data: InitialData,
    pub probes: ProbeSchedule,
    pub outputs: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            preset: None,
            system: SystemConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            data: InitialData::bump(1, 2.0, 1.0),
            probes: ProbeSchedule::default(),
            outputs: OutputConfig::default(),
        }
    }
}

/// One validation failure, addressed by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl Issue {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self { path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{} validation error(s):\n  {}", .0.len(), .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<Issue>),
}

/// A validated configuration resolved into solver objects.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub system: WaveSystem,
    pub grid: GridSpec,
    pub t_end: f64,
}

fn symmetry_message(c: &CoeffTensor) -> Option<String> {
    let (i, j, k, a, b, g) = check_symmetry(c).violation?;
    let v = |idx| crate::tensor::format_rational(c.get(idx));
    Some(format!(
        "check_symmetry failed: C^{{{}{}{}}}_{{{a}{b}{g}}} = {} but C^{{{}{}{}}}_{{{a}{b}{g}}} = {} and C^{{{}{}{}}}_{{{a}{g}{b}}} = {}",
        i + 1,
        j + 1,
        k + 1,
        v((i, j, k, a, b, g)),
        i + 1,
        k + 1,
        j + 1,
        v((i, k, j, a, b, g)),
        i + 1,
        j + 1,
        k + 1,
        v((i, j, k, a, g, b)),
    ))
}

impl RunConfig {
    fn speeds(&self, issues: &mut Vec<Issue>) -> Option<SpeedVector> {
        let mut exact = Vec::new();
        for (n, s) in self.system.speeds.iter().enumerate() {
            match parse_rational(s) {
                Some(r) => exact.push(r),
                None => issues.push(Issue::new(format!("system.speeds[{n}]"), format!("{s:?} is not a rational"))),
            }
        }
        if exact.len() != self.system.speeds.len() {
            return None;
        }
        SpeedVector::with_repeats(exact).map_err(|e| issues.push(Issue::new("system.speeds", e.to_string()))).ok()
    }

    fn tensor(&self, speeds: &SpeedVector, base: &Path, issues: &mut Vec<Issue>) -> Option<CoeffTensor> {
        let m = speeds.len();
        match (&self.system.tensor, self.system.entries.is_empty()) {
            (Some(_), false) => {
                issues.push(Issue::new("system.tensor", "give either a tensor file or inline entries, not both"));
                None
            }
            (Some(path), true) => {
                let full = if path.is_relative() { base.join(path) } else { path.clone() };
                let text = match std::fs::read_to_string(&full) {
                    Ok(t) => t,
                    Err(e) => {
                        issues.push(Issue::new("system.tensor", format!("{}: {e}", full.display())));
                        return None;
                    }
                };
                match parse_tensor_file(&text) {
                    Ok(f) if &f.speeds != speeds => {
                        issues.push(Issue::new(
                            "system.speeds",
                            format!("tensor file {} declares different speeds", full.display()),
                        ));
                        None
                    }
                    Ok(f) => Some(f.tensor),
                    Err(e) => {
                        issues.push(Issue::new("system.tensor", format!("{}: {e}", full.display())));
                        None
                    }
                }
            }
            (None, _) => {
                let speed_line: Vec<String> = speeds.exact().iter().map(crate::tensor::format_rational).collect();
                let text = format!("{m}\n{}\n{}\n", speed_line.join(" "), self.system.entries.join("\n"));
                match parse_tensor_file(&text) {
                    Ok(f) => Some(f.tensor),
                    Err(TensorError::Parse { line, msg }) if line >= 3 => {
                        issues.push(Issue::new(format!("system.entries[{}]", line - 3), msg));
                        None
                    }
                    Err(e) => {
                        issues.push(Issue::new("system.entries", e.to_string()));
                        None
                    }
                }
            }
        }
    }

    /// Checks everything and resolves the system; collects all problems.
    /// Relative tensor paths are taken relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<Experiment, Vec<Issue>> {
        let mut issues = Vec::new();
        if i64::try_from(self.seed).is_err() {
            issues.push(Issue::new("seed", format!("{} exceeds {}", self.seed, i64::MAX)));
        }
        let speeds = self.speeds(&mut issues);
        let tensor = speeds.as_ref().and_then(|s| self.tensor(s, base, &mut issues));
        let mut system = None;
        if let (Some(s), Some(t)) = (&speeds, tensor) {
            if let Some(msg) = symmetry_message(&t) {
                issues.push(Issue::new("system.tensor", msg));
            } else {
                match WaveSystem::new(s.clone(), t) {
                    Ok(sys) => system = Some(sys),
                    Err(e) => issues.push(Issue::new("system", e.to_string())),
                }
            }
        }
        let grid = GridSpec::centered(self.grid.n, self.grid.dx);
        if let Err(e) = &grid {
            issues.push(Issue::new(if self.grid.dx > 0.0 { "grid.n" } else { "grid.dx" }, e.to_string()));
        }
        issues.extend(self.solver.problems().into_iter().map(|(f, m)| Issue::new(format!("solver.{f}"), m)));
        if let Some(s) = &speeds {
            issues.extend(self.data.problems(s.len()).into_iter().map(|(f, m)| Issue::new(format!("data.{f}"), m)));
        }
        if self.outputs.directory.as_os_str().is_empty() {
            issues.push(Issue::new("outputs.directory", "must not be empty"));
        }
        let mut t_end = 0.0;
        if let (Some(s), Ok(g)) = (&speeds, &grid) {
            let c1 = s.max();
            let support = self.data.support_radius();
            t_end = self.solver.resolve_t_end(g, c1, support);
            if self.solver.t_end.is_none() && t_end <= 0.0 {
                issues.push(Issue::new(
                    "solver.t_end",
                    format!("data radius {support:.4} leaves no time before the boundary (clear radius {:.4})", g.clear_radius()),
                ));
            } else if let Err(e) = self.solver.check_domain(g, c1, support, t_end) {
                issues.push(Issue::new("solver.domain_policy", e.to_string()));
            }
        }
        issues.extend(self.probes.problems(Some(t_end)).into_iter().map(|(f, m)| Issue::new(format!("probes.{f}"), m)));
        match (issues.is_empty(), system, grid) {
            (true, Some(system), Ok(grid)) => Ok(Experiment { config: self.clone(), system, grid, t_end }),
            _ => Err(issues),
        }
    }
}

/// Parses TOML text without validating it.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Reads and validates a config file. Relative tensor paths are rewritten
/// relative to the file's directory.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    let mut config = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let Some(t) = &config.system.tensor {
        if t.is_relative() && !base.as_os_str().is_empty() {
            config.system.tensor = Some(base.join(t));
        }
    }
    config.resolve(base).map_err(ConfigError::Invalid)?;
    Ok(config)
}

pub fn config_to_string(config: &RunConfig) -> Result<String, ConfigError> {
    toml::to_string(config).map_err(|e| ConfigError::Parse(e.to_string()))
}

pub fn write_config(config: &RunConfig, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, config_to_string(config)?).map_err(|source| ConfigError::Io { path: path.into(), source })
}

#[cfg(test)]
mod tests;
