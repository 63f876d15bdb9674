//! Good/bad derivative split `∂ = Y_k⁻ D_k⁻ + R` with
//! `D_k⁻ = ½(∂_t − c_k ∂_r)` and `Y_k⁻ = (1, −x/(c_k r))`.

use rayon::prelude::*;

use super::vector_fields::{radial_derivative, Jet};
use super::{Field, GridError, GridState};
use crate::tensor::{SpeedVector, VectorField};

#[derive(Debug, Clone)]
pub struct DerivativeSplit {
    /// `∂_μ u^k` as computed by the stencils.
    pub du: [Field; 4],
    /// `D_k⁻ u^k` (zero outside the mask).
    pub bad: Field,
    pub yminus: [Field; 4],
    /// `R u = ∂u − Y⁻ D⁻u`.
    pub good: [Field; 4],
    /// Points with `r ≥ max(dx, r_min)`.
    pub mask: Vec<bool>,
    /// `max |Ru| / (⟨X⟩⁻¹ [|Γu| + ⟨c_k t − r⟩ |∂u|])` over the mask; 0/0 counts as 0.
    pub remainder_ratio: f64,
}

impl DerivativeSplit {
    /// `max |∂u − Y⁻D⁻u − Ru|` over the mask.
    pub fn reconstruction_residual(&self) -> f64 {
        (0..self.bad.len())
            .into_par_iter()
            .filter(|&i| self.mask[i])
            .map(|i| {
                (0..4)
                    .map(|mu| (self.du[mu][i] - self.yminus[mu][i] * self.bad[i] - self.good[mu][i]).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }
}

#[inline]
pub(crate) fn japanese(x: f64) -> f64 {
    (1.0 + x * x).sqrt()
}

pub fn decompose(state: &GridState, component: usize, speeds: &SpeedVector) -> Result<DerivativeSplit, GridError> {
    state.check_component(component)?;
    state.check_finite()?;
    if speeds.len() != state.m() {
        return Err(GridError::BadSpec(format!("{} speeds for {} components", speeds.len(), state.m())));
    }
    let g = state.grid;
    let c = speeds.get(component);
    let t = state.t;
    let cutoff = g.dx.max(g.r_min());

    let jet = Jet {
        grid: g,
        t,
        levels: vec![vec![state.u[component].clone(), state.ut[component].clone()]],
    };
    let du = [
        state.ut[component].clone(),
        jet.partial_at(0, 0, 1)?,
        jet.partial_at(0, 0, 2)?,
        jet.partial_at(0, 0, 3)?,
    ];
    let rdr = radial_derivative(&g, &state.u[component]);
    let gammas: Vec<Field> = VectorField::ALL
        .iter()
        .map(|&f| jet.apply(f).map(|j| j.levels[0][0].clone()))
        .collect::<Result<_, _>>()?;

    let n = g.len();
    let mut bad = vec![0.0; n];
    let mut yminus: [Field; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut good: [Field; 4] = std::array::from_fn(|_| vec![0.0; n]);
    let mut mask = vec![false; n];
    let mut ratios = vec![0.0; n];

    for idx in 0..n {
        let x = g.position(idx);
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if r < cutoff {
            continue;
        }
        mask[idx] = true;
        let dr = rdr[idx] / r;
        let dminus = 0.5 * (du[0][idx] - c * dr);
        let y = [1.0, -x[0] / (c * r), -x[1] / (c * r), -x[2] / (c * r)];
        bad[idx] = dminus;
        let mut rnorm = 0.0;
        let mut dnorm = 0.0;
        for mu in 0..4 {
            yminus[mu][idx] = y[mu];
            good[mu][idx] = du[mu][idx] - y[mu] * dminus;
            rnorm += good[mu][idx] * good[mu][idx];
            dnorm += du[mu][idx] * du[mu][idx];
        }
        let gnorm: f64 = gammas.iter().map(|f| f[idx] * f[idx]).sum::<f64>().sqrt();
        let bracket = (gnorm + japanese(c * t - r) * dnorm.sqrt()) / japanese((t * t + r * r).sqrt());
        ratios[idx] = if bracket > 0.0 { rnorm.sqrt() / bracket } else if rnorm > 0.0 { f64::INFINITY } else { 0.0 };
    }
    let remainder_ratio = ratios.into_iter().fold(0.0, f64::max);
    Ok(DerivativeSplit { du, bad, yminus, good, mask, remainder_ratio })
}
