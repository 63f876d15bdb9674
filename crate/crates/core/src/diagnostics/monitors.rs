//! Pointwise sup-ratios: Klainerman–Sobolev monitors and null-form bounds.

use rayon::prelude::*;

use super::norms::{japanese, radius, second_derivatives, spacetime_gradient};
use crate::grid::{Field, Jet};
use crate::solver::WaveSystem;
use crate::tensor::DenseTensor;

/// Points whose bracket falls below this fraction of the largest bracket
/// are left out of null-form ratios.
pub const BRACKET_FLOOR: f64 = 1e-8;

/// `lhs / rhs` with `0/0 = 0` and `x/0 = ∞`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

fn masked_max(jet: &Jet, f: impl Fn(usize, f64) -> f64 + Sync) -> f64 {
    let g = jet.grid;
    let rmin = g.r_min();
    g.reduce_max(|i| {
        let r = radius(g.position(i));
        if r < rmin { 0.0 } else { f(i, r) }
    })
}

fn pointwise_norm(fields: &[Field], i: usize) -> f64 {
    fields.iter().map(|f| f[i] * f[i]).sum::<f64>().sqrt()
}

fn hessian_norms(jet: &Jet, k: usize) -> Field {
    let sec = second_derivatives(jet, k);
    (0..jet.grid.len())
        .into_par_iter()
        .map(|i| {
            sec.iter()
                .map(|((mu, nu), f)| if mu == nu { f[i] * f[i] } else { 2.0 * f[i] * f[i] })
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Suprema of the left-hand sides of the four weighted Sobolev bounds:
/// `⟨r⟩^{1/2}|Γ^a u|` (`|a| ≤ 1`), `⟨r⟩|∂u|`, `⟨r⟩⟨c_kt − r⟩^{1/2}|∂u|`
/// and `⟨r⟩⟨c_kt − r⟩|∂²u|`, over `r ≥ r_min`.
pub(crate) fn klainerman_lhs(system: &WaveSystem, jet: &Jet, first: &[Jet]) -> [f64; 4] {
    let t = jet.t;
    let mut out = [0.0f64; 4];
    for k in 0..jet.m() {
        let c = system.speeds().get(k);
        for w in std::iter::once(jet).chain(first) {
            let v = &w.levels[k][0];
            out[0] = out[0].max(masked_max(jet, |i, r| japanese(r).sqrt() * v[i].abs()));
        }
        let grad = spacetime_gradient(jet, k);
        let hess = hessian_norms(jet, k);
        out[1] = out[1].max(masked_max(jet, |i, r| japanese(r) * pointwise_norm(&grad, i)));
        out[2] = out[2].max(masked_max(jet, |i, r| japanese(r) * japanese(c * t - r).sqrt() * pointwise_norm(&grad, i)));
        out[3] = out[3].max(masked_max(jet, |i, r| japanese(r) * japanese(c * t - r) * hess[i]));
    }
    out
}

/// Per-component pointwise data shared by the two null-form ratios.
struct NullformFields {
    grad: [Field; 4],
    gamma_norm: Field,
    dgamma_norm: Field,
}

/// `|Γu|` and `|∂Γu|` run over `|a| ≤ 1`, so they include `u` and `∂u`.
fn nullform_fields(jet: &Jet, first: &[Jet], k: usize) -> NullformFields {
    let g = jet.grid;
    let grad = spacetime_gradient(jet, k);
    let gammas: Vec<Field> = std::iter::once(jet).chain(first).map(|w| w.levels[k][0].clone()).collect();
    let gamma_norm = (0..g.len()).into_par_iter().map(|i| pointwise_norm(&gammas, i)).collect();
    let mut dgamma_sq = g.zeros();
    for w in std::iter::once(jet).chain(first) {
        for f in spacetime_gradient(w, k) {
            dgamma_sq.par_iter_mut().zip(f.par_iter()).for_each(|(s, v)| *s += v * v);
        }
    }
    let dgamma_norm = dgamma_sq.into_par_iter().map(f64::sqrt).collect();
    NullformFields { grad, gamma_norm, dgamma_norm }
}

fn region_ratio(jet: &Jet, c0: f64, lhs: &[Field], bracket: &[Field]) -> (f64, bool) {
    let g = jet.grid;
    let t = jet.t;
    let rmin = g.r_min();
    let inside = |i: usize| {
        let r = radius(g.position(i));
        r >= rmin && r >= c0 * t
    };
    let bmax = bracket.iter().map(|b| g.reduce_max(|i| if inside(i) { b[i] } else { 0.0 })).fold(0.0, f64::max);
    let lmax = lhs.iter().map(|l| g.reduce_max(|i| if inside(i) { l[i] } else { 0.0 })).fold(0.0, f64::max);
    if bmax == 0.0 {
        return (ratio(lmax, 0.0), true);
    }
    let floor = BRACKET_FLOOR * bmax;
    let value = lhs
        .iter()
        .zip(bracket)
        .map(|(l, b)| {
            g.reduce_max(|i| {
                if inside(i) && b[i] >= floor {
                    let x = japanese((t * t + radius(g.position(i)).powi(2)).sqrt());
                    l[i] * x / b[i]
                } else {
                    0.0
                }
            })
        })
        .fold(0.0, f64::max);
    (value, false)
}

/// `max ⟨X⟩|C^{kkk}∂u ∂²u| / [|Γu||∂²u| + |∂u||∂Γu| + ⟨c_kt − r⟩|∂u||∂²u|]`
/// over `r ≥ max(c₀t, r_min)`; the flag reports an empty or zero bracket.
pub(crate) fn nullform(system: &WaveSystem, tensor: &DenseTensor, jet: &Jet, first: &[Jet]) -> (f64, bool) {
    let g = jet.grid;
    let t = jet.t;
    let mut lhs = Vec::new();
    let mut bracket = Vec::new();
    for k in 0..jet.m() {
        let c = system.speeds().get(k);
        let nf = nullform_fields(jet, first, k);
        let sec = second_derivatives(jet, k);
        let hnorm = hessian_norms(jet, k);
        let entries: Vec<_> = tensor.entries_for(k).iter().filter(|e| e.i == k && e.j == k).copied().collect();
        lhs.push(
            (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let h = |b: usize, c: usize| {
                        let (lo, hi) = if b <= c { (b, c) } else { (c, b) };
                        sec[lo * 4 - lo * (lo + 1) / 2 + hi].1[i]
                    };
                    entries.iter().map(|e| e.value * nf.grad[e.alpha][i] * h(e.beta, e.gamma)).sum::<f64>().abs()
                })
                .collect::<Field>(),
        );
        bracket.push(
            (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let r = radius(g.position(i));
                    let du = pointwise_norm(&nf.grad, i);
                    nf.gamma_norm[i] * hnorm[i] + du * nf.dgamma_norm[i] + japanese(c * t - r) * du * hnorm[i]
                })
                .collect::<Field>(),
        );
    }
    let c0 = system.speeds().c0();
    region_ratio(jet, c0, &lhs, &bracket)
}

/// Trilinear analogue with `u = v = w`: bracket
/// `3|Γu||∂u|² + ⟨c_kt − r⟩|∂u|³`.
pub(crate) fn trilinear(system: &WaveSystem, tensor: &DenseTensor, jet: &Jet, first: &[Jet]) -> (f64, bool) {
    let g = jet.grid;
    let t = jet.t;
    let mut lhs = Vec::new();
    let mut bracket = Vec::new();
    for k in 0..jet.m() {
        let c = system.speeds().get(k);
        let nf = nullform_fields(jet, first, k);
        let entries: Vec<_> = tensor.entries_for(k).iter().filter(|e| e.i == k && e.j == k).copied().collect();
        lhs.push(
            (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let d = |a: usize| nf.grad[a][i];
                    entries.iter().map(|e| e.value * d(e.alpha) * d(e.beta) * d(e.gamma)).sum::<f64>().abs()
                })
                .collect::<Field>(),
        );
        bracket.push(
            (0..g.len())
                .into_par_iter()
                .map(|i| {
                    let r = radius(g.position(i));
                    let du = pointwise_norm(&nf.grad, i);
                    3.0 * nf.gamma_norm[i] * du * du + japanese(c * t - r) * du * du * du
                })
                .collect::<Field>(),
        );
    }
    region_ratio(jet, system.speeds().c0(), &lhs, &bracket)
}
