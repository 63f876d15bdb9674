//! Named experiments expanding to complete run configurations.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{parse_config, ConfigError, RunConfig, SystemConfig};
use crate::solver::{InitialData, ProbeSchedule, SolverConfig};
use crate::tensor::testing::{mixed_null, time_cubic, two_speed_coupled};
use crate::tensor::{CoeffTensor, Rational, SpeedVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    /// Null self-interaction `C = mixed_null(1, ½)` at `ε = 0.01`.
    NullGlobal,
    /// Non-null `C_{000} = 1` at `ε = 0.3`.
    NonnullBlowup,
    /// Two families with speeds `1` and `½`, null self terms and null
    /// cross coupling, `ε = 0.01`.
    MultispeedNonresonant,
    /// Free waves, fine time step.
    LinearBaseline,
}

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

impl Preset {
    pub const ALL: [Preset; 4] =
        [Preset::NullGlobal, Preset::NonnullBlowup, Preset::MultispeedNonresonant, Preset::LinearBaseline];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NullGlobal => "null_global",
            Preset::NonnullBlowup => "nonnull_blowup",
            Preset::MultispeedNonresonant => "multispeed_nonresonant",
            Preset::LinearBaseline => "linear_baseline",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Preset::NullGlobal => "null self-interaction, small data: completes with bounded low energy",
            Preset::NonnullBlowup => "u_t²-type self-interaction, large data: blows up in finite time",
            Preset::MultispeedNonresonant => "two speeds with null self and cross terms, small data",
            Preset::LinearBaseline => "free waves: energy conservation and flat growth",
        }
    }

    /// Exact system of the preset.
    pub fn system(self) -> (SpeedVector, CoeffTensor) {
        let one = r(1, 1);
        match self {
            Preset::NullGlobal => (SpeedVector::new(vec![one.clone()]).unwrap(), mixed_null(&one, r(1, 2))),
            Preset::NonnullBlowup => (SpeedVector::new(vec![one]).unwrap(), time_cubic(r(1, 1))),
            Preset::MultispeedNonresonant => {
                let half = r(1, 2);
                let speeds = SpeedVector::new(vec![one.clone(), half.clone()]).unwrap();
                (speeds, two_speed_coupled(&one, &half, r(1, 2)))
            }
            Preset::LinearBaseline => (SpeedVector::new(vec![one]).unwrap(), CoeffTensor::zeros(1).unwrap()),
        }
    }

    pub fn config(self) -> RunConfig {
        let (speeds, tensor) = self.system();
        let m = speeds.len();
        let (width, cfl, amplitude) = match self {
            Preset::NullGlobal | Preset::MultispeedNonresonant => (2.0, 0.4, 0.01),
            Preset::NonnullBlowup => (2.0, 0.4, 0.3),
            Preset::LinearBaseline => (2.0, 0.05, 1.0),
        };
        RunConfig {
            preset: Some(self.name().into()),
            system: SystemConfig::inline(&speeds, &tensor),
            solver: SolverConfig { cfl, amplitude, ..Default::default() },
            data: InitialData::bump(m, width, 1.0),
            probes: ProbeSchedule::default(),
            outputs: super::OutputConfig { directory: format!("nullwave-out/{}", self.name()).into(), ..Default::default() },
            ..Default::default()
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            format!("unknown preset {s:?} (expected one of {})", names.join(", "))
        })
    }
}

/// A preset plus `path=value` overrides such as `solver.amplitude=0.02`.
/// Values are TOML literals; anything that does not parse as one is taken
/// as a string.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub preset: Preset,
    pub overrides: Vec<String>,
}

fn literal(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.into()))
}

fn set_path(root: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), String> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("bad override path {path:?}"));
    }
    let (last, parents) = keys.split_last().unwrap();
    let mut table = root;
    for k in parents {
        let entry = table.entry(k.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
        table = entry.as_table_mut().ok_or_else(|| format!("{path}: {k} is not a table"))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentPreset {
    pub fn new(preset: Preset) -> Self {
        Self { preset, overrides: Vec::new() }
    }

    pub fn with(mut self, assignment: impl Into<String>) -> Self {
        self.overrides.push(assignment.into());
        self
    }

    /// The preset's config with the overrides applied. Unknown keys and
    /// ill-typed values are errors; semantic validation is left to
    /// [`RunConfig::resolve`].
    pub fn expand(&self) -> Result<RunConfig, ConfigError> {
        let mut root = toml::Table::try_from(self.preset.config()).map_err(|e| ConfigError::Parse(e.to_string()))?;
        for o in &self.overrides {
            let (path, value) =
                o.split_once('=').ok_or_else(|| ConfigError::Parse(format!("override {o:?} is not path=value")))?;
            set_path(&mut root, path.trim(), literal(value.trim())).map_err(ConfigError::Parse)?;
        }
        parse_config(&toml::to_string(&root).map_err(|e| ConfigError::Parse(e.to_string()))?)
    }
}
