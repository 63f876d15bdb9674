//! Energies `E_κ`, modified energies `Ẽ_ν` and weighted norms `X_κ`.
//!
//! `E₁(w) = Σ_k Σ_x ω_x [ (∂_t w^k)² − c_k² w^k (L w^k) ]` with `L` the
//! discrete Laplacian and `ω` the trapezoid weights. This summation-by-parts
//! form equals `∫ |∂_t w|² + c²|∇w|²` up to stencil error and is exactly
//! invariant under the semi-discrete linear flow.

use rayon::prelude::*;

use crate::grid::{d1, d2_mixed, laplacian, Field, GridSpec, Jet};
use crate::solver::WaveSystem;
use crate::tensor::VectorField;

/// `⟨ρ⟩ = (1 + ρ²)^{1/2}`.
#[inline]
pub fn japanese(rho: f64) -> f64 {
    (1.0 + rho * rho).sqrt()
}

#[inline]
pub(crate) fn radius(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

pub(crate) fn energy_of(system: &WaveSystem, jet: &Jet) -> f64 {
    let g = jet.grid;
    (0..jet.m())
        .map(|k| {
            let c2 = system.speeds().get(k).powi(2);
            let w = &jet.levels[k][0];
            let wt = &jet.levels[k][1];
            let lw = laplacian(&g, w);
            g.integrate(|i| wt[i] * wt[i] - c2 * w[i] * lw[i])
        })
        .sum()
}

/// `[∂_t w, ∂₁w, ∂₂w, ∂₃w]` for component `k`.
pub(crate) fn spacetime_gradient(jet: &Jet, k: usize) -> [Field; 4] {
    let g = &jet.grid;
    let w = &jet.levels[k][0];
    [jet.levels[k][1].clone(), d1(g, w, 0), d1(g, w, 1), d1(g, w, 2)]
}

/// The ten distinct `∂_μ∂_ν w^k` (`μ ≤ ν`, row-major), `∂_t²` from level 2.
pub(crate) fn second_derivatives(jet: &Jet, k: usize) -> Vec<((usize, usize), Field)> {
    let g = &jet.grid;
    let lv = &jet.levels[k];
    let mut out = Vec::with_capacity(10);
    for mu in 0..4 {
        for nu in mu..4 {
            let f = match (mu, nu) {
                (0, 0) => lv[2].clone(),
                (0, l) => d1(g, &lv[1], l - 1),
                (a, b) => d2_mixed(g, &lv[0], a - 1, b - 1),
            };
            out.push(((mu, nu), f));
        }
    }
    out
}

/// `½ Σ C^{ijk}_{αβγ} η_{γγ} ∫ ∂_α u^i ∂_β w^j ∂_γ w^k`.
pub(crate) fn energy_correction(system: &WaveSystem, g: &GridSpec, grad_u: &[[Field; 4]], w: &Jet) -> f64 {
    let dense = system.dense();
    if dense.is_zero() {
        return 0.0;
    }
    let grad_w: Vec<[Field; 4]> = (0..w.m()).map(|k| spacetime_gradient(w, k)).collect();
    let eta = [1.0, -1.0, -1.0, -1.0];
    0.5 * g.integrate(|i| {
        let mut s = 0.0;
        for k in 0..dense.m() {
            for e in dense.entries_for(k) {
                s += e.value * eta[e.gamma] * grad_u[e.i][e.alpha][i] * grad_w[e.j][e.beta][i] * grad_w[k][e.gamma][i];
            }
        }
        s
    })
}

/// `Σ_{(μ,ν) ordered} ‖⟨c_k t − r⟩ ∂_μ∂_ν w^k‖` over `r ≥ r_min`, summed over `k`.
pub(crate) fn weighted_second(system: &WaveSystem, jet: &Jet) -> f64 {
    let g = jet.grid;
    let t = jet.t;
    let rmin = g.r_min();
    let mut total = 0.0;
    for k in 0..jet.m() {
        let c = system.speeds().get(k);
        let weight: Field = (0..g.len())
            .into_par_iter()
            .map(|i| {
                let r = radius(g.position(i));
                if r < rmin { 0.0 } else { japanese(c * t - r).powi(2) }
            })
            .collect();
        for ((mu, nu), f) in second_derivatives(jet, k) {
            let n = g.integrate(|i| weight[i] * f[i] * f[i]).sqrt();
            total += if mu == nu { n } else { 2.0 * n };
        }
    }
    total
}

/// Everything computed from one walk over `Γ^a u`, `|a| ≤ order − 1`.
#[derive(Debug, Clone, Default)]
pub(crate) struct EnergyBundle {
    /// `E₁`, `E₂`, `E₃` (only the first `order` are meaningful).
    pub e: [f64; 3],
    /// `Ẽ₂`, `Ẽ₃`.
    pub etilde: [f64; 2],
    /// `X₂`, `X₃`.
    pub x: [f64; 2],
}

/// `Γ_i u` for the eight fields, truncated to the levels later needed.
pub(crate) fn first_jets(jet: &Jet) -> Result<Vec<Jet>, crate::grid::GridError> {
    VectorField::ALL.iter().map(|&f| jet.apply(f)).collect()
}

pub(crate) fn truncate(jet: &Jet, depth: usize) -> Jet {
    Jet {
        grid: jet.grid,
        t: jet.t,
        levels: jet.levels.iter().map(|lv| lv[..depth.min(lv.len())].to_vec()).collect(),
    }
}

pub(crate) fn energy_bundle(
    system: &WaveSystem,
    jet: &Jet,
    first: &[Jet],
    order: usize,
) -> Result<EnergyBundle, crate::grid::GridError> {
    let g = jet.grid;
    let mut b = EnergyBundle::default();
    b.e[0] = energy_of(system, jet);
    if order < 2 {
        return Ok(b);
    }
    let grad_u: Vec<[Field; 4]> = (0..jet.m()).map(|k| spacetime_gradient(jet, k)).collect();
    let mut level1 = 0.0;
    let mut corr1 = 0.0;
    for w in first {
        level1 += energy_of(system, w);
        corr1 += energy_correction(system, &g, &grad_u, w);
    }
    b.e[1] = b.e[0] + level1;
    b.etilde[0] = b.e[1] - corr1;
    b.x[0] = weighted_second(system, jet);
    if order < 3 {
        return Ok(b);
    }
    let mut level2 = 0.0;
    let mut corr2 = 0.0;
    for w in first {
        let w = truncate(w, 3);
        for f in VectorField::ALL {
            let ww = w.apply(f)?;
            level2 += energy_of(system, &ww);
            corr2 += energy_correction(system, &g, &grad_u, &ww);
        }
    }
    b.e[2] = b.e[1] + level2;
    b.etilde[1] = b.e[2] - corr2;
    b.x[1] = b.x[0] + first.iter().map(|w| weighted_second(system, w)).sum::<f64>();
    Ok(b)
}
