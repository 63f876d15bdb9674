//! The vector fields `Γ = (∂₀, ∂₁, ∂₂, ∂₃, Ω₁, Ω₂, Ω₃, S)` on grid functions.
//!
//! A field is carried together with its time derivatives as a [`Jet`]:
//! `levels[k][j] = ∂_t^j w^k`. Spatial operators act level by level;
//! `∂₀` shifts the levels and `S` uses
//!
//! ```text
//! ∂_t^j (S w) = t ∂_t^{j+1} w + j ∂_t^j w + x·∇ ∂_t^j w
//! ```
//!
//! so both consume one time level.

use rayon::prelude::*;

use super::stencil::d1;
use super::{Field, GridError, GridSpec, GridState};
use crate::tensor::VectorField;

/// Longest `Γ^a` applied on grids; repeated differencing amplifies noise.
pub const MAX_GRID_SEQUENCE: usize = 2;

/// `a = (a_1, …, a_κ)` encoding `Γ^a = Γ_{a_κ} ⋯ Γ_{a_1}`: `a_1` acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GammaSequence(Vec<usize>);

impl GammaSequence {
    pub fn new(a: Vec<usize>) -> Result<Self, GridError> {
        if a.len() > MAX_GRID_SEQUENCE {
            return Err(GridError::BadSequence(a, format!("length exceeds {MAX_GRID_SEQUENCE}")));
        }
        if a.iter().any(|&i| i > 7) {
            return Err(GridError::BadSequence(a, "indices must lie in 0..=7".into()));
        }
        Ok(Self(a))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fields(&self) -> impl Iterator<Item = VectorField> + '_ {
        self.0.iter().map(|&i| VectorField::ALL[i])
    }

    /// Every sequence of length exactly `len`, in lexicographic order.
    pub fn all_of_length(len: usize) -> Vec<GammaSequence> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s: Vec<usize>| {
                    (0..8).map(move |i| {
                        let mut t = s.clone();
                        t.push(i);
                        t
                    })
                })
                .collect();
        }
        out.into_iter().map(GammaSequence).collect()
    }
}

/// A vector-valued grid function with time derivatives up to some order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub grid: GridSpec,
    pub t: f64,
    /// `levels[k][j] = ∂_t^j w^k`; every component has the same depth.
    pub levels: Vec<Vec<Field>>,
}

impl Jet {
    /// `(u, u_t)` from a state.
    pub fn from_state(state: &GridState) -> Self {
        let levels = state.u.iter().zip(&state.ut).map(|(u, ut)| vec![u.clone(), ut.clone()]).collect();
        Self { grid: state.grid, t: state.t, levels }
    }

    pub fn m(&self) -> usize {
        self.levels.len()
    }

    /// Number of available time levels (value counts as level 0).
    pub fn depth(&self) -> usize {
        self.levels.first().map_or(0, Vec::len)
    }

    pub fn value(&self, k: usize) -> &Field {
        &self.levels[k][0]
    }

    pub fn time_derivative(&self, k: usize, order: usize) -> Result<&Field, GridError> {
        self.levels[k]
            .get(order)
            .ok_or(GridError::MissingTimeLevel { needed: order, available: self.depth().saturating_sub(1) })
    }

    /// `∂_μ` of level `j` of component `k`.
    pub fn partial_at(&self, k: usize, j: usize, mu: usize) -> Result<Field, GridError> {
        match mu {
            0 => self.time_derivative(k, j + 1).cloned(),
            1..=3 => Ok(d1(&self.grid, self.time_derivative(k, j)?, mu - 1)),
            _ => Err(GridError::BadDerivative(mu)),
        }
    }

    /// `Γ w` for one field, as a new jet.
    pub fn apply(&self, field: VectorField) -> Result<Jet, GridError> {
        let g = self.grid;
        let needs_time = matches!(field, VectorField::Partial(0) | VectorField::Scaling);
        if needs_time && self.depth() < 2 {
            return Err(GridError::MissingTimeLevel { needed: self.depth(), available: self.depth().saturating_sub(1) });
        }
        let levels = self
            .levels
            .iter()
            .map(|lv| match field {
                VectorField::Partial(0) => lv[1..].to_vec(),
                VectorField::Partial(mu) => lv.iter().map(|w| d1(&g, w, mu - 1)).collect(),
                VectorField::Rotation(l) => lv.iter().map(|w| rotation(&g, w, l)).collect(),
                VectorField::Scaling => (0..lv.len() - 1)
                    .map(|j| {
                        let radial = radial_derivative(&g, &lv[j]);
                        let t = self.t;
                        let jf = j as f64;
                        let next = &lv[j + 1];
                        let cur = &lv[j];
                        radial
                            .into_par_iter()
                            .zip(next.par_iter().zip(cur.par_iter()))
                            .map(|(rd, (n, c))| t * n + jf * c + rd)
                            .collect()
                    })
                    .collect(),
            })
            .collect();
        Ok(Jet { grid: g, t: self.t, levels })
    }

    /// `Γ^a w` applied right to left (`a_1` first).
    pub fn apply_sequence(&self, a: &GammaSequence) -> Result<Jet, GridError> {
        let mut jet = self.clone();
        for f in a.fields() {
            jet = jet.apply(f)?;
        }
        Ok(jet)
    }
}

/// `Ω_λ w = ε_{λμν} x_μ ∂_ν w`:
/// `Ω₁ = x₂∂₃ − x₃∂₂`, `Ω₂ = x₃∂₁ − x₁∂₃`, `Ω₃ = x₁∂₂ − x₂∂₁`.
pub(crate) fn rotation(g: &GridSpec, w: &[f64], lambda: usize) -> Field {
    let (p, q) = match lambda {
        1 => (1, 2),
        2 => (2, 0),
        3 => (0, 1),
        _ => panic!("rotation index {lambda} not in 1..=3"),
    };
    let dq = d1(g, w, q);
    let dp = d1(g, w, p);
    (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let x = g.position(idx);
            x[p] * dq[idx] - x[q] * dp[idx]
        })
        .collect()
}

/// `r∂_r w = x·∇w`.
pub(crate) fn radial_derivative(g: &GridSpec, w: &[f64]) -> Field {
    let d = [d1(g, w, 0), d1(g, w, 1), d1(g, w, 2)];
    (0..g.len())
        .into_par_iter()
        .map(|idx| {
            let x = g.position(idx);
            x[0] * d[0][idx] + x[1] * d[1][idx] + x[2] * d[2][idx]
        })
        .collect()
}

/// Discrete `∂_μ u^k`; `μ = 0` returns the stored `u_t`.
pub fn partial(state: &GridState, mu: usize, component: usize) -> Result<Field, GridError> {
    state.check_component(component)?;
    state.check_finite()?;
    match mu {
        0 => Ok(state.ut[component].clone()),
        1..=3 => Ok(d1(&state.grid, &state.u[component], mu - 1)),
        _ => Err(GridError::BadDerivative(mu)),
    }
}

/// `Γ_idx u^k` for a single field.
pub fn apply_field(state: &GridState, idx: usize, component: usize) -> Result<Field, GridError> {
    let f = VectorField::from_index(idx).map_err(|_| GridError::BadSequence(vec![idx], "index not in 0..=7".into()))?;
    state.check_component(component)?;
    state.check_finite()?;
    let jet = single_component_jet(state, component);
    Ok(jet.apply(f)?.levels.swap_remove(0).swap_remove(0))
}

/// `Γ^a u^k` with the right-to-left convention. Sequences that need
/// `∂_t²u` (e.g. `(∂₀, ∂₀)`) require a jet from the solver instead.
pub fn apply_sequence(state: &GridState, a: &GammaSequence, component: usize) -> Result<Field, GridError> {
    state.check_component(component)?;
    state.check_finite()?;
    let jet = single_component_jet(state, component);
    Ok(jet.apply_sequence(a)?.levels.swap_remove(0).swap_remove(0))
}

fn single_component_jet(state: &GridState, k: usize) -> Jet {
    Jet {
        grid: state.grid,
        t: state.t,
        levels: vec![vec![state.u[k].clone(), state.ut[k].clone()]],
    }
}
