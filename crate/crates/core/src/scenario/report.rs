//! Running experiments, summary reports and report comparison.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{config_to_string, ConfigError, Experiment, GridConfig, Preset, RunConfig, SnapshotPolicy};
use crate::diagnostics::{float, float_opt, ratio, trend_slope, DiagnosticsRecord, GrowthFit, RecordFlags, SeriesError};
use crate::grid::write_snapshot;
use crate::solver::{run, RunOutcome, SolverError, Terminal};

pub const REPORT_SCHEMA: u32 = 1;

/// Largest allowed `(E₂(t)/E₂(0))^{1/2}` for small-data presets.
pub const E2_GROWTH_LIMIT: f64 = 2.0;
pub const E3_EXPONENT_LIMIT: f64 = 0.1;
pub const TREND_LIMIT: f64 = 0.05;
pub const E1_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(with = "float")]
    pub value: f64,
    /// Human-readable pass condition, e.g. `"<= 0.1"`.
    pub condition: String,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value, condition: format!("<= {limit}") }
    }

    fn zero(name: &str, count: usize) -> Self {
        Self { name: name.into(), passed: count == 0, value: count as f64, condition: "== 0".into() }
    }

    fn flag(name: &str, holds: bool, condition: &str) -> Self {
        Self { name: name.into(), passed: holds, value: if holds { 1.0 } else { 0.0 }, condition: condition.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub preset: Option<String>,
    pub grid: GridConfig,
    pub speeds: Vec<String>,
    pub null: bool,
    pub linear: bool,
    pub seed: u64,
    pub amplitude: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub terminal: Terminal,
    pub records: usize,
    pub e3_fit: Option<GrowthFit>,
    /// Why the E₃ fit was not possible, when it was not.
    pub e3_fit_error: Option<String>,
    /// `max |E₁(t)/E₁(0) − 1|` over the probes.
    #[serde(with = "float")]
    pub e1_drift: f64,
    /// `max (E₂(t)/E₂(0))^{1/2}`.
    #[serde(with = "float_opt")]
    pub e2_growth: Option<f64>,
    #[serde(with = "float_opt")]
    pub decay2_slope: Option<f64>,
    #[serde(with = "float")]
    pub nullform_slope: f64,
    /// Trend slopes of the four weighted Sobolev monitors.
    pub monitor_slopes: Option<[f64; 4]>,
    /// Small-data records violating `½E_ν ≤ Ẽ_ν ≤ 2E_ν`.
    pub enequiv_violations: usize,
    pub final_record: Option<DiagnosticsRecord>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn nesting_violations(records: &[DiagnosticsRecord]) -> usize {
    let le = |a: f64, b: f64| a <= b * (1.0 + 1e-12);
    records
        .iter()
        .filter(|r| !(r.e2.map_or(true, |e2| le(r.e1, e2)) && r.e2.zip(r.e3).map_or(true, |(e2, e3)| le(e2, e3))))
        .count()
}

fn enequiv_violations(records: &[DiagnosticsRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.flags.contains(RecordFlags::SMALL_DATA))
        .filter(|r| {
            [2, 3].iter().any(|&nu| match (r.energy(nu), r.modified_energy(nu)) {
                (Some(e), Some(m)) => !(0.5 * e <= m && m <= 2.0 * e),
                _ => false,
            })
        })
        .count()
}

impl Report {
    fn new(config: &RunConfig, exp: &Experiment, outcome: &RunOutcome) -> Self {
        let s = &outcome.series;
        let recs = &s.records;
        let first = recs.first();
        let e1_drift = match first {
            Some(f) if f.e1 > 0.0 => recs.iter().map(|r| (r.e1 / f.e1 - 1.0).abs()).fold(0.0, f64::max),
            _ => 0.0,
        };
        let e2_growth = first.and_then(|f| f.e2).map(|e20| {
            recs.iter().filter_map(|r| r.e2).map(|e2| ratio(e2.max(0.0), e20).sqrt()).fold(0.0, f64::max)
        });
        let (e3_fit, e3_fit_error) = match s.fit_energy(3) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let slope = |f: &dyn Fn(&DiagnosticsRecord) -> Option<f64>| {
            let (t, v) = s.column(f);
            (!t.is_empty()).then(|| trend_slope(&t, &v))
        };
        let monitor_slopes = (0..4)
            .map(|i| slope(&|r| r.sup_monitors.map(|m| m[i])))
            .collect::<Option<Vec<f64>>>()
            .map(|v| [v[0], v[1], v[2], v[3]]);
        let mut report = Report {
            schema: REPORT_SCHEMA,
            preset: config.preset.clone(),
            grid: config.grid,
            speeds: config.system.speeds.clone(),
            null: exp.system.is_null(),
            linear: exp.system.is_linear(),
            seed: config.seed,
            amplitude: config.solver.amplitude,
            dt: outcome.dt,
            steps: outcome.steps,
            t_end: outcome.t_end,
            terminal: outcome.terminal.clone(),
            records: recs.len(),
            e3_fit,
            e3_fit_error,
            e1_drift,
            e2_growth,
            decay2_slope: slope(&|r| r.decay2),
            nullform_slope: slope(&|r| Some(r.nullform_ratio)).unwrap_or(0.0),
            monitor_slopes,
            enequiv_violations: enequiv_violations(recs),
            final_record: recs.last().cloned(),
            checks: Vec::new(),
            passed: false,
        };
        report.checks = report.preset_checks(recs);
        report.passed = report.checks.iter().all(|c| c.passed);
        report
    }

    fn preset_checks(&self, recs: &[DiagnosticsRecord]) -> Vec<Check> {
        let completed = Check::flag("completed", self.terminal == Terminal::Completed, "terminal == completed");
        let exponent = || match &self.e3_fit {
            Some(f) => Check::at_most("e3_exponent", f.exponent, E3_EXPONENT_LIMIT),
            None => Check::flag("e3_exponent", false, "fit available"),
        };
        let e2 = || Check::at_most("e2_growth", self.e2_growth.unwrap_or(f64::NAN), E2_GROWTH_LIMIT);
        let mut checks = vec![Check::zero("norm_nesting", nesting_violations(recs))];
        match self.preset.as_deref().and_then(|p| p.parse::<Preset>().ok()) {
            Some(Preset::LinearBaseline) => {
                checks.push(completed);
                checks.push(Check::at_most("e1_drift", self.e1_drift, E1_DRIFT_LIMIT));
                let p = self.e3_fit.as_ref().map_or(f64::NAN, |f| f.exponent.abs());
                checks.push(Check::at_most("e3_exponent_abs", p, E3_EXPONENT_LIMIT));
                if let Some(s) = self.monitor_slopes {
                    let worst = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    checks.push(Check::at_most("monitor_slope", worst, TREND_LIMIT));
                }
            }
            Some(Preset::NullGlobal) => {
                checks.push(completed);
                checks.push(e2());
                checks.push(exponent());
                checks.push(Check::at_most("decay2_slope", self.decay2_slope.unwrap_or(f64::NAN), TREND_LIMIT));
                checks.push(Check::zero("enequiv", self.enequiv_violations));
            }
            Some(Preset::MultispeedNonresonant) => {
                checks.push(completed);
                checks.push(e2());
                checks.push(exponent());
                checks.push(Check::zero("enequiv", self.enequiv_violations));
            }
            Some(Preset::NonnullBlowup) => {
                checks.push(Check::flag("blow_up", self.terminal.is_blowup(), "terminal == blow-up"));
            }
            None => checks.push(Check::zero("enequiv", self.enequiv_violations)),
        }
        checks
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self.terminal {
            Terminal::BlowUp { t, .. } => Some(t),
            Terminal::Completed => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = self.preset.as_deref().unwrap_or("custom");
        writeln!(f, "{name}: n = {}, dx = {}, dt = {:.5}, steps = {}, t_end = {:.4}", self.grid.n, self.grid.dx, self.dt, self.steps, self.t_end)?;
        match &self.terminal {
            Terminal::Completed => writeln!(f, "terminal: completed")?,
            Terminal::BlowUp { t, reason } => writeln!(f, "terminal: blow-up at t = {t:.4} ({reason})")?,
        }
        match (&self.e3_fit, &self.e3_fit_error) {
            (Some(fit), _) => writeln!(f, "E3 growth exponent: {:.4} (residual {:.2e}, {} samples)", fit.exponent, fit.residual, fit.samples)?,
            (None, Some(e)) => writeln!(f, "E3 growth exponent: n/a ({e})")?,
            _ => {}
        }
        writeln!(f, "E1 drift: {:.3e}", self.e1_drift)?;
        if let Some(g) = self.e2_growth {
            writeln!(f, "max (E2/E2(0))^1/2: {g:.4}")?;
        }
        if let Some(s) = self.decay2_slope {
            writeln!(f, "decay2 slope: {s:.4}")?;
        }
        writeln!(f, "null-form ratio slope: {:.4}", self.nullform_slope)?;
        for c in &self.checks {
            writeln!(f, "  [{}] {} = {:.4e} ({})", if c.passed { "pass" } else { "FAIL" }, c.name, c.value, c.condition)?;
        }
        write!(f, "{}", if self.passed { "all checks passed" } else { "some checks failed" })
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} already holds a report; pass overwrite to replace it")]
    Exists(PathBuf),
}

/// Runs a resolved experiment without touching the filesystem.
pub fn execute(exp: &Experiment) -> Result<(Report, RunOutcome), SolverError> {
    let c = &exp.config;
    let outcome = run(&exp.system, &exp.grid, &c.solver, &c.data, c.seed, &c.probes)?;
    Ok((Report::new(c, exp, &outcome), outcome))
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub report: Report,
    pub outcome: RunOutcome,
    pub files: Vec<PathBuf>,
}

fn write(path: PathBuf, contents: &[u8], files: &mut Vec<PathBuf>) -> Result<(), ScenarioError> {
    std::fs::write(&path, contents).map_err(|source| ScenarioError::Io { path: path.clone(), source })?;
    files.push(path);
    Ok(())
}

/// Validates, runs and writes `config.toml`, `series.csv`, `series.ndjson`,
/// `report.json` and, if requested, `final.snap` into the output
/// directory. An existing report is only replaced with `overwrite`.
pub fn run_experiment(config: &RunConfig, overwrite: bool) -> Result<ExperimentOutput, ScenarioError> {
    let exp = config.resolve(Path::new(".")).map_err(ConfigError::Invalid)?;
    let dir = &config.outputs.directory;
    let report_path = dir.join("report.json");
    if report_path.exists() && !overwrite {
        return Err(ScenarioError::Exists(dir.clone()));
    }
    std::fs::create_dir_all(dir).map_err(|source| ScenarioError::Io { path: dir.clone(), source })?;
    let (report, outcome) = execute(&exp)?;
    let mut files = Vec::new();
    write(dir.join("config.toml"), config_to_string(config)?.as_bytes(), &mut files)?;
    write(dir.join("series.csv"), outcome.series.to_csv().as_bytes(), &mut files)?;
    let mut nd = Vec::new();
    outcome.series.write_ndjson(&mut nd)?;
    write(dir.join("series.ndjson"), &nd, &mut files)?;
    if config.outputs.snapshots == SnapshotPolicy::Final {
        let path = dir.join("final.snap");
        write_snapshot(&outcome.final_state, &path).map_err(SolverError::from)?;
        files.push(path);
    }
    write(report_path, report.to_json().as_bytes(), &mut files)?;
    Ok(ExperimentOutput { report, outcome, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub metric: String,
    pub a: String,
    pub b: String,
    /// `b − a` for numeric metrics.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub comparable: bool,
    pub note: Option<String>,
    /// Differing metrics, or every grid-independent metric when the
    /// reports are not directly comparable.
    pub entries: Vec<DiffEntry>,
}

impl Comparison {
    pub fn is_empty(&self) -> bool {
        self.comparable && self.entries.is_empty()
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(n) = &self.note {
            writeln!(f, "{n}")?;
        }
        if self.is_empty() {
            return write!(f, "no differences");
        }
        writeln!(f, "{:<22} {:>16} {:>16} {:>12}", "metric", "a", "b", "b - a")?;
        for e in &self.entries {
            let gap = e.gap.map(|g| format!("{g:.4e}")).unwrap_or_default();
            writeln!(f, "{:<22} {:>16} {:>16} {:>12}", e.metric, e.a, e.b, gap)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("report schemas differ ({0} vs {1})")]
    Schema(u32, u32),
}

/// Grid-independent metrics.
fn normalized(r: &Report) -> Vec<(&'static str, Option<f64>)> {
    vec![
        ("e3_exponent", r.e3_fit.as_ref().map(|f| f.exponent)),
        ("e1_drift", Some(r.e1_drift)),
        ("e2_growth", r.e2_growth),
        ("decay2_slope", r.decay2_slope),
        ("nullform_slope", Some(r.nullform_slope)),
        ("blowup_t", r.blowup_time()),
    ]
}

fn grid_metrics(r: &Report) -> Vec<(&'static str, Option<f64>)> {
    let last = r.final_record.as_ref();
    vec![
        ("e3_fit_residual", r.e3_fit.as_ref().map(|f| f.residual)),
        ("final_e1", last.map(|l| l.e1)),
        ("final_e3", last.and_then(|l| l.e3)),
        ("final_nullform", last.map(|l| l.nullform_ratio)),
        ("final_decay2", last.and_then(|l| l.decay2)),
        ("steps", Some(r.steps as f64)),
    ]
}

fn show(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a.to_bits() == b.to_bits() || a == b,
        (None, None) => true,
        _ => false,
    }
}

fn entry(metric: &str, a: Option<f64>, b: Option<f64>) -> DiffEntry {
    DiffEntry { metric: metric.into(), a: show(a), b: show(b), gap: a.zip(b).map(|(a, b)| b - a) }
}

/// Side-by-side difference of two reports.
pub fn compare(a: &Report, b: &Report) -> Result<Comparison, CompareError> {
    if a.schema != b.schema {
        return Err(CompareError::Schema(a.schema, b.schema));
    }
    let mut entries = Vec::new();
    for (label, x, y) in [
        ("preset", a.preset.clone().unwrap_or_default(), b.preset.clone().unwrap_or_default()),
        ("terminal", a.terminal.label().to_string(), b.terminal.label().to_string()),
        ("null", a.null.to_string(), b.null.to_string()),
        ("passed", a.passed.to_string(), b.passed.to_string()),
    ] {
        if x != y {
            entries.push(DiffEntry { metric: label.into(), a: x, b: y, gap: None });
        }
    }
    if a.grid != b.grid {
        entries.extend(normalized(a).into_iter().zip(normalized(b)).map(|((m, x), (_, y))| entry(m, x, y)));
        return Ok(Comparison {
            comparable: false,
            note: Some(format!(
                "not directly comparable: grids differ (n = {}, dx = {} vs n = {}, dx = {}); showing normalized metrics",
                a.grid.n, a.grid.dx, b.grid.n, b.grid.dx
            )),
            entries,
        });
    }
    let (ma, mb) = ([normalized(a), grid_metrics(a)].concat(), [normalized(b), grid_metrics(b)].concat());
    entries.extend(ma.into_iter().zip(mb).filter(|((_, x), (_, y))| !same(*x, *y)).map(|((m, x), (_, y))| entry(m, x, y)));
    if a != b && entries.is_empty() {
        entries.push(DiffEntry { metric: "other fields".into(), a: "…".into(), b: "…".into(), gap: None });
    }
    Ok(Comparison { comparable: true, note: None, entries })
}
