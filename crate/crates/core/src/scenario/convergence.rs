//! Refinement study on the periodic standing wave
//! `u^k = cos(√3 c_k t) sin x sin y sin z` on the 2π-torus.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diagnostics::energy;
use crate::grid::{GridSpec, GridState};
use crate::solver::{step, SolverError, WaveSystem};
use crate::tensor::SpeedVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    /// Max-norm error of `u` at `t_end`.
    pub error: f64,
    /// `log₂(error_prev / error)`, absent on the coarsest level.
    pub order: Option<f64>,
    /// `|E₁(t_end)/E₁(0) − 1|`.
    pub e1_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cfl: f64,
    pub t_end: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// Order observed between the two finest levels.
    pub fn observed_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.order)
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "standing wave on the 2π-torus, cfl = {}, t_end = {}", self.cfl, self.t_end)?;
        writeln!(f, "{:>5} {:>10} {:>10} {:>6} {:>12} {:>7} {:>10}", "n", "dx", "dt", "steps", "error", "order", "E1 drift")?;
        for r in &self.rows {
            let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
            writeln!(f, "{:>5} {:>10.5} {:>10.5} {:>6} {:>12.4e} {:>7} {:>10.2e}", r.n, r.dx, r.dt, r.steps, r.error, order, r.e1_drift)?;
        }
        Ok(())
    }
}

fn level(system: &WaveSystem, n: usize, cfl: f64, t_end: f64) -> Result<ConvergenceRow, SolverError> {
    let g = GridSpec::periodic(n, 2.0 * PI)?;
    let speeds = system.speeds();
    let mode = |x: [f64; 3]| x[0].sin() * x[1].sin() * x[2].sin();
    let m = speeds.len();
    let mut s = GridState::new(g, 0.0, vec![g.sample(mode); m], vec![g.zeros(); m])?;
    let e0 = energy(system, &s, 1)?;
    let steps = (t_end / (cfl * g.dx / speeds.max()) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    for _ in 0..steps {
        s = step(system, &s, dt)?;
    }
    let mut error: f64 = 0.0;
    for k in 0..m {
        let exact = g.sample(|x| (3f64.sqrt() * speeds.get(k) * t_end).cos() * mode(x));
        error = s.u[k].iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(error, f64::max);
    }
    let e1 = energy(system, &s, 1)?;
    Ok(ConvergenceRow { n, dx: g.dx, dt, steps, error, order: None, e1_drift: (e1 / e0 - 1.0).abs() })
}

/// Free evolution at `levels` resolutions `n₀, 2n₀, …` with `dt ∝ dx`.
pub fn convergence_study(
    speeds: &SpeedVector,
    n0: usize,
    levels: usize,
    cfl: f64,
    t_end: f64,
) -> Result<ConvergenceReport, SolverError> {
    if levels < 2 {
        return Err(SolverError::Config("a convergence study needs at least 2 levels".into()));
    }
    let system = WaveSystem::linear(speeds.clone())?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for l in 0..levels {
        let mut row = level(&system, n0 << l, cfl, t_end)?;
        row.order = rows.last().map(|p| (p.error / row.error).log2());
        rows.push(row);
    }
    Ok(ConvergenceReport { cfl, t_end, rows })
}
