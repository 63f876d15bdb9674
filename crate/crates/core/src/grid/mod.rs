//! Uniform 3D grids, finite-difference stencils and the vector fields
//! `Γ = (∂, Ω, S)` acting on grid functions.
//!
//! Storage is row-major with `x₁` fastest: `idx = i + n·(j + n·k)`.

mod decompose;
mod snapshot;
mod stencil;
mod vector_fields;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decompose::{decompose, DerivativeSplit};
pub use snapshot::{read_snapshot, write_snapshot, SnapshotHeader};
pub use stencil::{d1, d2, d2_mixed, gradient, laplacian};
pub use vector_fields::{apply_field, apply_sequence, partial, GammaSequence, Jet, MAX_GRID_SEQUENCE};

pub type Field = Vec<f64>;

/// Radius of the excluded ball around `r = 0`, in grid spacings.
pub const R_MIN_CELLS: f64 = 2.0;

/// Stencil radii kept between the clear radius and the boundary.
pub const MEASURE_REACH: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    BadSpec(String),
    #[error("non-finite value in {which}[{component}] at point {index} (t = {t})")]
    NonFinite { which: &'static str, component: usize, index: usize, t: f64 },
    #[error("component {component} out of range (m = {m})")]
    ComponentOutOfRange { component: usize, m: usize },
    #[error("derivative index {0} not in 0..=3")]
    BadDerivative(usize),
    #[error("vector-field sequence {0:?} invalid: {1}")]
    BadSequence(Vec<usize>, String),
    #[error("time derivative of order {needed} requested but only {available} available")]
    MissingTimeLevel { needed: usize, available: usize },
    #[error("field shape mismatch: expected {expected} points, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("snapshot i/o: {0}")]
    Io(String),
}

/// Uniform cube `[origin, origin + (n−1)·dx]³`, or the periodic torus
/// `[origin, origin + n·dx)³` when `periodic` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub dx: f64,
    pub origin: [f64; 3],
    pub halo: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl GridSpec {
    /// Cube centred on the spatial origin.
    pub fn centered(n: usize, dx: f64) -> Result<Self, GridError> {
        let o = -((n as f64) - 1.0) * dx / 2.0;
        let g = Self { n, dx, origin: [o; 3], halo: 2, periodic: false };
        g.validate()?;
        Ok(g)
    }

    /// Periodic torus `[0, length)³` with `n` points per axis.
    pub fn periodic(n: usize, length: f64) -> Result<Self, GridError> {
        let g = Self { n, dx: length / n as f64, origin: [0.0; 3], halo: 2, periodic: true };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.dx > 0.0 && self.dx.is_finite()) {
            return Err(GridError::BadSpec(format!("dx = {} must be positive", self.dx)));
        }
        if self.halo < 2 {
            return Err(GridError::BadSpec(format!("halo = {} must be at least 2", self.halo)));
        }
        if self.n < 2 * self.halo + 3 {
            return Err(GridError::BadSpec(format!(
                "n = {} must be at least 2·halo + 3 = {}",
                self.n,
                2 * self.halo + 3
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(GridError::BadSpec("origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn unindex(&self, idx: usize) -> [usize; 3] {
        [idx % self.n, (idx / self.n) % self.n, idx / (self.n * self.n)]
    }

    #[inline]
    pub fn coord(&self, axis: usize, p: usize) -> f64 {
        self.origin[axis] + p as f64 * self.dx
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.unindex(idx);
        [self.coord(0, i), self.coord(1, j), self.coord(2, k)]
    }

    /// Half the side length of the (non-periodic) cube.
    pub fn half_width(&self) -> f64 {
        (self.n as f64 - 1.0) * self.dx / 2.0
    }

    /// Largest radius around the origin whose ball stays `MEASURE_REACH`
    /// stencil radii away from the one-sided boundary stencils: second-level
    /// vector fields and their energies chain three derivatives.
    pub fn clear_radius(&self) -> f64 {
        let lo = self.origin.iter().map(|o| -o).fold(f64::INFINITY, f64::min);
        let hi = self
            .origin
            .iter()
            .map(|o| o + (self.n as f64 - 1.0) * self.dx)
            .fold(f64::INFINITY, f64::min);
        lo.min(hi) - (MEASURE_REACH * self.halo) as f64 * self.dx
    }

    pub fn r_min(&self) -> f64 {
        R_MIN_CELLS * self.dx
    }

    /// Trapezoidal quadrature weight of point `idx` (`dx³` in the interior).
    #[inline]
    pub fn weight(&self, idx: usize) -> f64 {
        let base = self.dx * self.dx * self.dx;
        if self.periodic {
            return base;
        }
        let last = self.n - 1;
        self.unindex(idx)
            .iter()
            .fold(base, |w, &p| if p == 0 || p == last { w * 0.5 } else { w })
    }

    pub fn zeros(&self) -> Field {
        vec![0.0; self.len()]
    }

    /// Samples `f(x)` at every grid point.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64 + Sync) -> Field {
        (0..self.len()).into_par_iter().map(|idx| f(self.position(idx))).collect()
    }

    /// Deterministic reduction `Σ_idx f(idx)` in a fixed order: per-plane
    /// partial sums in index order, then the planes in order.
    pub fn reduce_sum(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        let plane = self.n * self.n;
        let partial: Vec<f64> = (0..self.n)
            .into_par_iter()
            .map(|k| (k * plane..(k + 1) * plane).map(&f).sum::<f64>())
            .collect();
        partial.iter().sum()
    }

    /// Deterministic `max_idx f(idx)` (NaN-propagating), `0` for empty masks.
    pub fn reduce_max(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        let plane = self.n * self.n;
        let partial: Vec<f64> = (0..self.n)
            .into_par_iter()
            .map(|k| (k * plane..(k + 1) * plane).map(&f).fold(0.0, nan_max))
            .collect();
        partial.into_iter().fold(0.0, nan_max)
    }

    /// Trapezoidal `∫ f dx`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        self.reduce_sum(|idx| self.weight(idx) * f(idx))
    }
}

#[inline]
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Discrete `u` and `∂_t u` for `m` families at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub grid: GridSpec,
    pub t: f64,
    pub u: Vec<Field>,
    pub ut: Vec<Field>,
}

impl GridState {
    pub fn zeros(grid: GridSpec, m: usize, t: f64) -> Self {
        Self { grid, t, u: vec![grid.zeros(); m], ut: vec![grid.zeros(); m] }
    }

    pub fn new(grid: GridSpec, t: f64, u: Vec<Field>, ut: Vec<Field>) -> Result<Self, GridError> {
        for f in u.iter().chain(&ut) {
            if f.len() != grid.len() {
                return Err(GridError::Shape { expected: grid.len(), got: f.len() });
            }
        }
        if u.len() != ut.len() {
            return Err(GridError::BadSpec(format!(
                "{} u components but {} ut components",
                u.len(),
                ut.len()
            )));
        }
        Ok(Self { grid, t, u, ut })
    }

    pub fn m(&self) -> usize {
        self.u.len()
    }

    /// First non-finite value, if any.
    pub fn check_finite(&self) -> Result<(), GridError> {
        for (which, fields) in [("u", &self.u), ("ut", &self.ut)] {
            for (component, f) in fields.iter().enumerate() {
                if let Some(index) = f.iter().position(|v| !v.is_finite()) {
                    return Err(GridError::NonFinite { which, component, index, t: self.t });
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_component(&self, component: usize) -> Result<(), GridError> {
        if component >= self.m() {
            return Err(GridError::ComponentOutOfRange { component, m: self.m() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(GridSpec::centered(7, 0.1).is_ok());
        assert!(GridSpec::centered(6, 0.1).is_err());
        assert!(GridSpec::centered(16, 0.0).is_err());
        let mut g = GridSpec::centered(16, 0.1).unwrap();
        g.halo = 1;
        assert!(g.validate().is_err());
    }

    #[test]
    fn centered_grid_is_symmetric() {
        let g = GridSpec::centered(17, 0.5).unwrap();
        assert_eq!(g.coord(0, 0), -4.0);
        assert_eq!(g.coord(0, 16), 4.0);
        assert_eq!(g.position(g.index(8, 8, 8)), [0.0, 0.0, 0.0]);
        assert_eq!(g.half_width(), 4.0);
        assert_eq!(g.clear_radius(), 1.0);
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = GridSpec::centered(11, 0.2).unwrap();
        let f = g.sample(|x| 1.0 + x[0] + 2.0 * x[1] * x[2]);
        let vol = g.integrate(|i| f[i]);
        assert!((vol - 8.0).abs() < 1e-12, "{vol}");
    }

    #[test]
    fn finiteness_scan() {
        let g = GridSpec::centered(7, 1.0).unwrap();
        let mut s = GridState::zeros(g, 2, 0.5);
        assert!(s.check_finite().is_ok());
        s.ut[1][17] = f64::NAN;
        assert_eq!(
            s.check_finite(),
            Err(GridError::NonFinite { which: "ut", component: 1, index: 17, t: 0.5 })
        );
    }

    #[test]
    fn reductions_are_order_fixed() {
        let g = GridSpec::centered(9, 0.3).unwrap();
        let f = g.sample(|x| (x[0] * 3.1).sin() * 1e-3 + x[1] * x[2]);
        let a = g.reduce_sum(|i| f[i]);
        let b = g.reduce_sum(|i| f[i]);
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(g.reduce_max(|_| f64::NAN).is_nan(), true);
    }
}
