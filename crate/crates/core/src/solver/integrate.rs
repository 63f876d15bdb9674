//! RK4 stepping of the first-order system `(u, u_t)` and the run loop.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{acceleration, InitialData, SolverConfig, SolverError, WaveSystem};
use crate::diagnostics::{measure, DiagnosticsSeries};
use crate::grid::{d1, Field, GridError, GridSpec, GridState};

/// Blow-up once `sup|∂u|` exceeds this multiple of its initial value.
pub const BLOWUP_GROWTH: f64 = 1e3;

fn axpy(x: &[Field], a: f64, y: &[Field]) -> Vec<Field> {
    x.iter()
        .zip(y)
        .map(|(x, y)| x.par_iter().zip(y.par_iter()).map(|(x, y)| x + a * y).collect())
        .collect()
}

/// One classical Runge–Kutta step of size `dt`.
pub fn step(system: &WaveSystem, state: &GridState, dt: f64) -> Result<GridState, SolverError> {
    let stage = |u: Vec<Field>, ut: Vec<Field>, t: f64| GridState { grid: state.grid, t, u, ut };
    let t = state.t;
    let k1u = state.ut.clone();
    let k1v = acceleration(system, state)?;
    let s2 = stage(axpy(&state.u, dt / 2.0, &k1u), axpy(&state.ut, dt / 2.0, &k1v), t + dt / 2.0);
    let k2v = acceleration(system, &s2)?;
    let k2u = s2.ut;
    let s3 = stage(axpy(&state.u, dt / 2.0, &k2u), axpy(&state.ut, dt / 2.0, &k2v), t + dt / 2.0);
    let k3v = acceleration(system, &s3)?;
    let k3u = s3.ut;
    let s4 = stage(axpy(&state.u, dt, &k3u), axpy(&state.ut, dt, &k3v), t + dt);
    let k4v = acceleration(system, &s4)?;
    let k4u = s4.ut;
    let combine = |base: &[Field], k: [&[Field]; 4]| -> Vec<Field> {
        (0..base.len())
            .map(|c| {
                (0..base[c].len())
                    .into_par_iter()
                    .map(|i| base[c][i] + dt / 6.0 * (k[0][c][i] + 2.0 * k[1][c][i] + 2.0 * k[2][c][i] + k[3][c][i]))
                    .collect()
            })
            .collect()
    };
    let next = stage(
        combine(&state.u, [&k1u, &k2u, &k3u, &k4u]),
        combine(&state.ut, [&k1v, &k2v, &k3v, &k4v]),
        t + dt,
    );
    next.check_finite()?;
    Ok(next)
}

/// When to record diagnostics. Step 0 and the final step are always probed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSchedule {
    /// Explicit probe times, snapped to the nearest step.
    pub times: Vec<f64>,
    /// Probe every `stride` steps (used when `times` is empty).
    pub stride: usize,
    /// Evenly spaced probes (used when `times` is empty and `stride` is 0).
    pub count: usize,
    /// Highest energy order measured (1..=3).
    pub order: usize,
}

impl Default for ProbeSchedule {
    fn default() -> Self {
        Self { times: Vec::new(), stride: 0, count: 21, order: 3 }
    }
}

impl ProbeSchedule {
    pub fn every(stride: usize, order: usize) -> Self {
        Self { stride, order, ..Default::default() }
    }

    pub fn problems(&self, t_end: Option<f64>) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(1..=3).contains(&self.order) {
            out.push(("order", format!("{} not in 1..=3", self.order)));
        }
        for &t in &self.times {
            let late = t_end.is_some_and(|e| t > e * (1.0 + 1e-12));
            if !(t >= 0.0 && t.is_finite()) || late {
                out.push(("times", format!("probe time {t} outside [0, t_end]")));
            }
        }
        out
    }

    fn steps(&self, dt: f64, steps: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([0, steps]);
        if !self.times.is_empty() {
            out.extend(self.times.iter().map(|t| ((t / dt).round() as usize).min(steps)));
        } else if self.stride > 0 {
            out.extend((0..=steps).step_by(self.stride));
        } else if self.count > 1 {
            out.extend((0..self.count).map(|i| (i as f64 * steps as f64 / (self.count - 1) as f64).round() as usize));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Terminal {
    Completed,
    BlowUp { t: f64, reason: String },
}

impl Terminal {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Terminal::BlowUp { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Terminal::Completed => "completed",
            Terminal::BlowUp { .. } => "blow-up",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub series: DiagnosticsSeries,
    /// Last finite state (the one before a blow-up step).
    pub final_state: GridState,
    pub terminal: Terminal,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
}

fn sup_gradient(state: &GridState) -> f64 {
    let g = state.grid;
    let mut sup: f64 = 0.0;
    for (u, ut) in state.u.iter().zip(&state.ut) {
        sup = sup.max(g.reduce_max(|i| ut[i].abs()));
        for axis in 0..3 {
            let d = d1(&g, u, axis);
            sup = sup.max(g.reduce_max(|i| d[i].abs()));
        }
    }
    sup
}

/// Blow-up time and reason for the errors that end a run as an outcome.
fn blowup_reason(e: &SolverError) -> Option<(f64, String)> {
    match e {
        SolverError::Quasilinear { t, .. } | SolverError::Grid(GridError::NonFinite { t, .. }) => Some((*t, e.to_string())),
        _ => None,
    }
}

/// Integrates from the data to `t_end` (or blow-up), probing diagnostics.
pub fn run(
    system: &WaveSystem,
    grid: &GridSpec,
    config: &SolverConfig,
    data: &InitialData,
    seed: u64,
    probes: &ProbeSchedule,
) -> Result<RunOutcome, SolverError> {
    if let Some((field, msg)) = config.problems().into_iter().next() {
        return Err(SolverError::Config(format!("{field}: {msg}")));
    }
    grid.validate()?;
    let c1 = system.speeds().max();
    let support = data.support_radius();
    let t_end = config.resolve_t_end(grid, c1, support);
    config.check_domain(grid, c1, support, t_end)?;
    if let Some((field, msg)) = probes.problems(Some(t_end)).into_iter().next() {
        return Err(SolverError::Config(format!("probes.{field}: {msg}")));
    }
    let mut state = data.build(grid, system.speeds(), config.amplitude, seed)?;
    let (dt, steps) = config.time_grid(grid, c1, t_end);
    let probe_steps = probes.steps(dt, steps);
    let sup0 = sup_gradient(&state);
    let mut series = DiagnosticsSeries::default();
    let mut terminal = Terminal::Completed;

    for n in 0..=steps {
        if probe_steps.contains(&n) {
            match measure(system, &state, probes.order) {
                Ok(r) => series.records.push(r),
                Err(e) => match blowup_reason(&e) {
                    Some((t, reason)) => {
                        terminal = Terminal::BlowUp { t, reason };
                        break;
                    }
                    None => return Err(e),
                },
            }
        }
        if n == steps {
            break;
        }
        let next = match step(system, &state, dt) {
            Ok(mut s) => {
                s.t = (n + 1) as f64 * dt;
                s
            }
            Err(e) => match blowup_reason(&e) {
                Some((t, reason)) => {
                    terminal = Terminal::BlowUp { t, reason };
                    break;
                }
                None => return Err(e),
            },
        };
        if !system.is_linear() && sup0 > 0.0 {
            let sup = sup_gradient(&next);
            if sup > BLOWUP_GROWTH * sup0 {
                terminal = Terminal::BlowUp {
                    t: next.t,
                    reason: format!("sup|∂u| = {sup:.3e} exceeds {BLOWUP_GROWTH:e} × initial {sup0:.3e}"),
                };
                state = next;
                break;
            }
        }
        state = next;
    }
    Ok(RunOutcome { series, final_state: state, terminal, dt, steps, t_end })
}
