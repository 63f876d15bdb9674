//! Explicit time integration of `□_k u^k = N^k(u, u)` on a uniform grid.
//!
//! Second time derivatives appear on the right-hand side, so every stage
//! solves the pointwise `m × m` system `(I − M(∂u)) ∂_t²u = c²Δu + Ñ`.

mod accel;
mod data;
mod integrate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridSpec};
use crate::tensor::{check_null_extended, check_symmetry, CoeffTensor, DenseTensor, SpeedVector, TensorError};

pub use accel::{acceleration, time_jet, QUASILINEAR_LIMIT};
pub use data::{ComponentData, DataFamily, InitialData};
pub use integrate::{run, step, ProbeSchedule, RunOutcome, Terminal, BLOWUP_GROWTH};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("tensor is not symmetric: C{0:?} differs from its transposes")]
    Asymmetric((usize, usize, usize, usize, usize, usize)),
    #[error("{speeds} speeds but the tensor couples {tensor} families")]
    FamilyMismatch { speeds: usize, tensor: usize },
    #[error("quasilinearity too strong: ‖M‖∞ = {norm:.4} at point {index} (t = {t})")]
    Quasilinear { index: usize, t: f64, norm: f64 },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("invalid initial data: {0}")]
    Data(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Speeds, coefficients and the derived structure used on the grid.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    speeds: SpeedVector,
    tensor: CoeffTensor,
    dense: DenseTensor,
    null: bool,
    /// `needs[j][β][γ]`: some coupling reads `∂_β∂_γ u^j` with `(β, γ) ≠ (0, 0)`.
    needs: Vec<[[bool; 4]; 4]>,
}

impl WaveSystem {
    /// Fails on asymmetric tensors; non-null tensors are accepted.
    pub fn new(speeds: SpeedVector, tensor: CoeffTensor) -> Result<Self, SolverError> {
        if speeds.len() != tensor.m() {
            return Err(SolverError::FamilyMismatch { speeds: speeds.len(), tensor: tensor.m() });
        }
        let sym = check_symmetry(&tensor);
        if let Some(v) = sym.violation {
            return Err(SolverError::Asymmetric(v));
        }
        let groups = speed_groups(&speeds);
        let null = check_null_extended(&tensor, &speeds, &groups)?.null;
        let dense = DenseTensor::from(&tensor);
        let mut needs = vec![[[false; 4]; 4]; tensor.m()];
        for k in 0..tensor.m() {
            for e in dense.entries_for(k) {
                if (e.beta, e.gamma) != (0, 0) {
                    needs[e.j][e.beta][e.gamma] = true;
                    needs[e.j][e.gamma][e.beta] = true;
                }
            }
        }
        Ok(Self { speeds, tensor, dense, null, needs })
    }

    /// Free waves with the given speeds.
    pub fn linear(speeds: SpeedVector) -> Result<Self, SolverError> {
        let m = speeds.len();
        Self::new(speeds, CoeffTensor::zeros(m)?)
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn speeds(&self) -> &SpeedVector {
        &self.speeds
    }

    pub fn tensor(&self) -> &CoeffTensor {
        &self.tensor
    }

    pub fn dense(&self) -> &DenseTensor {
        &self.dense
    }

    /// Null condition (with equal-speed groups) holds.
    pub fn is_null(&self) -> bool {
        self.null
    }

    pub fn is_linear(&self) -> bool {
        self.dense.is_zero()
    }

    pub(crate) fn needs(&self) -> &[[[bool; 4]; 4]] {
        &self.needs
    }
}

/// Families grouped by equal speed, in order.
pub fn speed_groups(speeds: &SpeedVector) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, c) in speeds.exact().iter().enumerate() {
        match groups.last_mut() {
            Some(g) if &speeds.exact()[g[0]] == c => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// Boundary handling by domain size: either require that no signal reaches
/// the one-sided stencils before `t_end`, or skip the check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainPolicy {
    #[default]
    Enforce,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// `dt ≤ cfl·dx/c₁`.
    pub cfl: f64,
    /// Final time; `None` picks the largest no-reflection time.
    pub t_end: Option<f64>,
    pub domain_policy: DomainPolicy,
    /// Data scale `ε` multiplying every component amplitude.
    pub amplitude: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { cfl: 0.4, t_end: None, domain_policy: DomainPolicy::Enforce, amplitude: 1.0 }
    }
}

/// Upper bound on the Courant number (RK4 with the 4th-order Laplacian is
/// stable up to about `2√2 / 4 ≈ 0.707`).
pub const MAX_CFL: f64 = 0.7;

impl SolverConfig {
    /// Every problem with the configuration, as `(field, message)` pairs.
    pub fn problems(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.cfl > 0.0 && self.cfl <= MAX_CFL) {
            out.push(("cfl", format!("{} must lie in (0, {MAX_CFL}]", self.cfl)));
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                out.push(("t_end", format!("{t} must be a finite non-negative time")));
            }
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            out.push(("amplitude", format!("{} must be finite and non-negative", self.amplitude)));
        }
        out
    }

    /// `(dt, steps)` with `steps·dt = t_end` and `dt ≤ cfl·dx/c₁`.
    pub fn time_grid(&self, grid: &GridSpec, c1: f64, t_end: f64) -> (f64, usize) {
        let dt_max = self.cfl * grid.dx / c1;
        if t_end <= 0.0 {
            return (dt_max, 0);
        }
        let steps = (t_end / dt_max - 1e-9).ceil().max(1.0) as usize;
        (t_end / steps as f64, steps)
    }

    /// `t_end` itself, or `(R − R₀)/c₁` with `R` the clear radius of the grid.
    pub fn resolve_t_end(&self, grid: &GridSpec, c1: f64, support: f64) -> f64 {
        self.t_end.unwrap_or_else(|| ((grid.clear_radius() - support) / c1).max(0.0))
    }

    /// Domain policy check: `R ≥ R₀ + c₁·t_end`.
    pub fn check_domain(&self, grid: &GridSpec, c1: f64, support: f64, t_end: f64) -> Result<(), SolverError> {
        if self.domain_policy == DomainPolicy::Ignore || grid.periodic {
            return Ok(());
        }
        let need = support + c1 * t_end;
        let have = grid.clear_radius();
        if need > have * (1.0 + 1e-12) {
            return Err(SolverError::Config(format!(
                "domain too small: need radius {need:.4} = R₀ {support:.4} + c₁·t_end, grid clears {have:.4}"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::testing::{mixed_null, time_cubic};
    use crate::tensor::Rational;
    use num_bigint::BigInt;

    fn r(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    #[test]
    fn system_records_null_status() {
        let speeds = SpeedVector::new(vec![r(1)]).unwrap();
        let s = WaveSystem::new(speeds.clone(), time_cubic(r(1))).unwrap();
        assert!(!s.is_null());
        let s = WaveSystem::new(speeds.clone(), mixed_null(&r(1), r(1))).unwrap();
        assert!(s.is_null());
        assert!(s.needs()[0][1][0] && s.needs()[0][0][1] && s.needs()[0][2][2]);
        assert!(!s.needs()[0][0][0]);
        assert!(WaveSystem::linear(speeds).unwrap().is_linear());
    }

    #[test]
    fn asymmetric_tensor_refused() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 1), r(1));
        let err = WaveSystem::new(SpeedVector::new(vec![r(1)]).unwrap(), c).unwrap_err();
        assert_eq!(err, SolverError::Asymmetric((0, 0, 0, 0, 0, 1)));
    }

    #[test]
    fn time_grid_lands_on_t_end() {
        let g = GridSpec::centered(32, 0.1).unwrap();
        let cfg = SolverConfig::default();
        let (dt, steps) = cfg.time_grid(&g, 2.0, 1.0);
        assert!(dt <= 0.4 * 0.1 / 2.0 + 1e-15);
        assert!((dt * steps as f64 - 1.0).abs() < 1e-12);
        assert_eq!(cfg.time_grid(&g, 1.0, 0.0).1, 0);
    }

    #[test]
    fn config_problems_named() {
        let cfg = SolverConfig { cfl: 2.0, amplitude: -1.0, ..Default::default() };
        let names: Vec<_> = cfg.problems().into_iter().map(|p| p.0).collect();
        assert_eq!(names, vec!["cfl", "amplitude"]);
        assert!(SolverConfig::default().problems().is_empty());
    }

    #[test]
    fn domain_policy() {
        let g = GridSpec::centered(49, 0.1).unwrap(); // clear radius 1.8
        let cfg = SolverConfig::default();
        assert!(cfg.check_domain(&g, 1.0, 0.8, 1.0).is_ok());
        assert!(cfg.check_domain(&g, 1.0, 0.8, 1.1).is_err());
        let lax = SolverConfig { domain_policy: DomainPolicy::Ignore, ..cfg };
        assert!(lax.check_domain(&g, 1.0, 0.8, 5.0).is_ok());
        assert!((cfg.resolve_t_end(&g, 2.0, 0.8) - 0.5).abs() < 1e-12);
    }
}
