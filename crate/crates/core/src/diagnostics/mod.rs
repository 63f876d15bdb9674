//! Norms and monitored inequalities on grid states.
//!
//! Every measurement starts from the exact time jet `(u, u_t, u_tt, u_ttt)`
//! and the eight first-level fields `Γ_i u`; second-level fields are formed
//! on the fly and dropped.

mod monitors;
mod norms;
mod series;

use bitflags::bitflags;
use serde::{Deserialize, Serialize};

use crate::grid::{d1, GridState, Jet};
use crate::solver::{time_jet, SolverError, WaveSystem};
use crate::tensor::{CoeffTensor, DenseTensor};

pub use monitors::{ratio, BRACKET_FLOOR};
pub use norms::japanese;
pub(crate) use series::{float, float_opt};
pub use series::{fit_growth, trend_slope, DiagnosticsSeries, GrowthFit, SeriesError, CSV_COLUMNS, SCHEMA_VERSION};

/// `sup|∇u|` below which the modified energy is expected to be equivalent
/// to the energy.
pub const SMALLNESS: f64 = 0.05;

bitflags! {
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
    pub struct RecordFlags: u32 {
        /// Orders above the probe order were not measured.
        const PARTIAL = 1;
        /// Some ratio was `0/0` and reported as 0.
        const ZERO_OVER_ZERO = 1 << 1;
        /// Some ratio had a zero denominator and a nonzero numerator.
        const INFINITE_RATIO = 1 << 2;
        /// `sup|∇u| < SMALLNESS`.
        const SMALL_DATA = 1 << 3;
        /// The null-form region held no usable point.
        const EMPTY_REGION = 1 << 4;
    }
}

/// Diagnostics of one state. Entries above the probe order are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e1: f64,
    pub e2: Option<f64>,
    pub e3: Option<f64>,
    pub x2: Option<f64>,
    pub x3: Option<f64>,
    pub etilde2: Option<f64>,
    pub etilde3: Option<f64>,
    /// Empirical constants of the four weighted Sobolev bounds.
    #[serde(with = "series::float_array_opt")]
    pub sup_monitors: Option<[f64; 4]>,
    #[serde(with = "series::float_opt")]
    pub decay2: Option<f64>,
    #[serde(with = "series::float_opt")]
    pub decay3: Option<f64>,
    #[serde(with = "series::float")]
    pub nullform_ratio: f64,
    #[serde(with = "series::float")]
    pub trilinear_ratio: f64,
    /// `sup|∇u|` over the grid.
    pub sup_grad: f64,
    pub flags: RecordFlags,
}

impl DiagnosticsRecord {
    pub fn energy(&self, kappa: usize) -> Option<f64> {
        match kappa {
            1 => Some(self.e1),
            2 => self.e2,
            3 => self.e3,
            _ => None,
        }
    }

    pub fn modified_energy(&self, nu: usize) -> Option<f64> {
        match nu {
            2 => self.etilde2,
            3 => self.etilde3,
            _ => None,
        }
    }
}

/// Jet and first-level vector fields of a state.
struct Frame {
    jet: Jet,
    first: Vec<Jet>,
}

impl Frame {
    fn new(system: &WaveSystem, state: &GridState) -> Result<Self, SolverError> {
        state.check_finite()?;
        let jet = time_jet(system, state)?;
        let first = norms::first_jets(&jet)?;
        Ok(Self { jet, first })
    }
}

fn check_order(what: &str, value: usize, range: std::ops::RangeInclusive<usize>) -> Result<(), SolverError> {
    if range.contains(&value) {
        Ok(())
    } else {
        Err(SolverError::Config(format!("{what} = {value} not in {}..={}", range.start(), range.end())))
    }
}

/// `E_κ = Σ_{|a| ≤ κ−1} E₁(Γ^a u)`, `κ ∈ 1..=3`.
pub fn energy(system: &WaveSystem, state: &GridState, kappa: usize) -> Result<f64, SolverError> {
    check_order("kappa", kappa, 1..=3)?;
    let f = Frame::new(system, state)?;
    Ok(norms::energy_bundle(system, &f.jet, &f.first, kappa)?.e[kappa - 1])
}

/// `X_κ`, `κ ∈ 2..=3`.
pub fn weighted_norm(system: &WaveSystem, state: &GridState, kappa: usize) -> Result<f64, SolverError> {
    check_order("kappa", kappa, 2..=3)?;
    let f = Frame::new(system, state)?;
    let mut x = norms::weighted_second(system, &f.jet);
    if kappa == 3 {
        x += f.first.iter().map(|w| norms::weighted_second(system, w)).sum::<f64>();
    }
    Ok(x)
}

/// `Ẽ_ν`, `ν ∈ 2..=3`.
pub fn modified_energy(system: &WaveSystem, state: &GridState, nu: usize) -> Result<f64, SolverError> {
    check_order("nu", nu, 2..=3)?;
    let f = Frame::new(system, state)?;
    Ok(norms::energy_bundle(system, &f.jet, &f.first, nu)?.etilde[nu - 2])
}

/// The four Klainerman–Sobolev ratios against `E₃^{1/2}`, `E₃^{1/2}`,
/// `E₃^{1/2} + X₃` and `X₃`.
pub fn klainerman_monitors(system: &WaveSystem, state: &GridState) -> Result<[f64; 4], SolverError> {
    let f = Frame::new(system, state)?;
    let b = norms::energy_bundle(system, &f.jet, &f.first, 3)?;
    let lhs = monitors::klainerman_lhs(system, &f.jet, &f.first);
    Ok(klainerman_ratios(lhs, b.e[2], b.x[1]))
}

fn klainerman_ratios(lhs: [f64; 4], e3: f64, x3: f64) -> [f64; 4] {
    let s = e3.max(0.0).sqrt();
    [ratio(lhs[0], s), ratio(lhs[1], s), ratio(lhs[2], s + x3), ratio(lhs[3], x3)]
}

/// `[X₂ / E₂^{1/2}, X₃ / E₃^{1/2}]`.
pub fn decay_monitor(system: &WaveSystem, state: &GridState) -> Result<[f64; 2], SolverError> {
    let f = Frame::new(system, state)?;
    let b = norms::energy_bundle(system, &f.jet, &f.first, 3)?;
    Ok([ratio(b.x[0], b.e[1].max(0.0).sqrt()), ratio(b.x[1], b.e[2].max(0.0).sqrt())])
}

/// Null-form ratio of the system's own tensor.
pub fn nullform_ratio(system: &WaveSystem, state: &GridState) -> Result<f64, SolverError> {
    nullform_ratio_for(system, state, system.tensor())
}

/// Null-form ratio of `tensor` evaluated on the solution of `system`
/// (a passive measurement when the two differ).
pub fn nullform_ratio_for(system: &WaveSystem, state: &GridState, tensor: &CoeffTensor) -> Result<f64, SolverError> {
    let f = Frame::new(system, state)?;
    Ok(monitors::nullform(system, &DenseTensor::from(tensor), &f.jet, &f.first).0)
}

pub fn trilinear_nullform_ratio(system: &WaveSystem, state: &GridState) -> Result<f64, SolverError> {
    trilinear_nullform_ratio_for(system, state, system.tensor())
}

pub fn trilinear_nullform_ratio_for(system: &WaveSystem, state: &GridState, tensor: &CoeffTensor) -> Result<f64, SolverError> {
    let f = Frame::new(system, state)?;
    Ok(monitors::trilinear(system, &DenseTensor::from(tensor), &f.jet, &f.first).0)
}

fn sup_spatial_gradient(state: &GridState) -> f64 {
    let g = state.grid;
    let mut sup: f64 = 0.0;
    for u in &state.u {
        let d = [d1(&g, u, 0), d1(&g, u, 1), d1(&g, u, 2)];
        sup = sup.max(g.reduce_max(|i| (d[0][i] * d[0][i] + d[1][i] * d[1][i] + d[2][i] * d[2][i]).sqrt()));
    }
    sup
}

/// Full record at probe order `order ∈ 1..=3`.
pub fn measure(system: &WaveSystem, state: &GridState, order: usize) -> Result<DiagnosticsRecord, SolverError> {
    check_order("order", order, 1..=3)?;
    let f = Frame::new(system, state)?;
    let b = norms::energy_bundle(system, &f.jet, &f.first, order)?;
    let mut flags = RecordFlags::empty();
    // (ratio, numerator) pairs checked for the 0/0 and x/0 conventions
    let mut checks = Vec::new();
    let (nullform_ratio, empty) = monitors::nullform(system, system.dense(), &f.jet, &f.first);
    let (trilinear_ratio, empty3) = monitors::trilinear(system, system.dense(), &f.jet, &f.first);
    if empty {
        checks.push((nullform_ratio, nullform_ratio));
    }
    if empty3 {
        checks.push((trilinear_ratio, trilinear_ratio));
    }
    let sup_monitors = if order == 3 {
        let lhs = monitors::klainerman_lhs(system, &f.jet, &f.first);
        let r = klainerman_ratios(lhs, b.e[2], b.x[1]);
        checks.extend(r.iter().copied().zip(lhs));
        Some(r)
    } else {
        None
    };
    let decay = |kappa: usize| ratio(b.x[kappa - 2], b.e[kappa - 1].max(0.0).sqrt());
    let decay2 = (order >= 2).then(|| decay(2));
    let decay3 = (order >= 3).then(|| decay(3));
    for (kappa, d) in [(2, decay2), (3, decay3)] {
        if let Some(d) = d {
            checks.push((d, b.x[kappa - 2]));
        }
    }
    for (v, num) in checks {
        if v.is_infinite() {
            flags |= RecordFlags::INFINITE_RATIO;
        } else if v == 0.0 && num == 0.0 {
            flags |= RecordFlags::ZERO_OVER_ZERO;
        }
    }
    let sup_grad = sup_spatial_gradient(state);
    if order < 3 {
        flags |= RecordFlags::PARTIAL;
    }
    if empty || empty3 {
        flags |= RecordFlags::EMPTY_REGION;
    }
    if sup_grad < SMALLNESS {
        flags |= RecordFlags::SMALL_DATA;
    }
    Ok(DiagnosticsRecord {
        t: state.t,
        e1: b.e[0],
        e2: (order >= 2).then_some(b.e[1]),
        e3: (order >= 3).then_some(b.e[2]),
        x2: (order >= 2).then_some(b.x[0]),
        x3: (order >= 3).then_some(b.x[1]),
        etilde2: (order >= 2).then_some(b.etilde[0]),
        etilde3: (order >= 3).then_some(b.etilde[1]),
        sup_monitors,
        decay2,
        decay3,
        nullform_ratio,
        trilinear_ratio,
        sup_grad,
        flags,
    })
}
