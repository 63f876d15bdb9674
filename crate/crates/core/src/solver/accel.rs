//! Pointwise acceleration solve and the exact time jet `(u, u_t, u_tt, u_ttt)`.
//!
//! With `M_{kj} = Σ_i C^{ijk}_{α00} ∂_α u^i` the system reads
//!
//! ```text
//! (I − M) a   = c²Δu  + N(∂u; H)                 H₀₀ = 0
//! (I − M) a_t = c²Δu_t + N(∂u_t; H | H₀₀ = a) + N(∂u; H_t)   (H_t)₀₀ = 0
//! ```
//!
//! where `H_{0l} = ∂_l u_t`, `H_{lm} = ∂_l∂_m u` and `H_t` is the same built
//! from `(u_t, a)`. The second line is the time derivative of the first.

use rayon::prelude::*;

use super::{SolverError, WaveSystem};
use crate::grid::{d1, d2_mixed, laplacian, Field, GridSpec, GridState, Jet};
use crate::tensor::evaluate_nonlinearity;

/// The solve is refused once `‖M‖∞` reaches this value.
pub const QUASILINEAR_LIMIT: f64 = 0.5;

/// `[w_t, ∂₁w, ∂₂w, ∂₃w]` per component.
fn gradients(g: &GridSpec, w: &[Field], wt: &[Field]) -> Vec<[Field; 4]> {
    w.iter()
        .zip(wt)
        .map(|(w, wt)| [wt.clone(), d1(g, w, 0), d1(g, w, 1), d1(g, w, 2)])
        .collect()
}

/// Only the second derivatives some coupling reads; `(0, 0)` is never stored.
struct Hessian {
    store: Vec<Field>,
    slot: Vec<[[Option<usize>; 4]; 4]>,
}

impl Hessian {
    fn build(system: &WaveSystem, g: &GridSpec, w: &[Field], wt: &[Field]) -> Self {
        let mut store = Vec::new();
        let mut slot = vec![[[None; 4]; 4]; w.len()];
        for (j, needs) in system.needs().iter().enumerate() {
            for b in 0..4 {
                for c in b..4 {
                    if !needs[b][c] || (b, c) == (0, 0) {
                        continue;
                    }
                    let f = if b == 0 { d1(g, &wt[j], c - 1) } else { d2_mixed(g, &w[j], b - 1, c - 1) };
                    slot[j][b][c] = Some(store.len());
                    slot[j][c][b] = Some(store.len());
                    store.push(f);
                }
            }
        }
        Self { store, slot }
    }

    #[inline]
    fn fill(&self, idx: usize, h00: Option<&[Field]>, out: &mut [[[f64; 4]; 4]]) {
        for (j, h) in out.iter_mut().enumerate() {
            for b in 0..4 {
                for c in 0..4 {
                    h[b][c] = self.slot[j][b][c].map_or(0.0, |s| self.store[s][idx]);
                }
            }
            h[0][0] = h00.map_or(0.0, |a| a[j][idx]);
        }
    }
}

struct Term<'a> {
    grad: &'a [[Field; 4]],
    hess: &'a Hessian,
    h00: Option<&'a [Field]>,
}

/// Solves `(I − M) x = lin + Σ_terms N(grad; hess)` at every point.
fn solve(system: &WaveSystem, g: &GridSpec, t: f64, mgrad: &[[Field; 4]], lin: &[Field], terms: &[Term]) -> Result<Vec<Field>, SolverError> {
    let m = system.m();
    let n = g.len();
    let dense = system.dense();
    let plane = g.n * g.n;
    let mut packed = vec![0.0; n * m];
    let mut norms = vec![0.0; n];
    packed
        .par_chunks_mut(plane * m)
        .zip(norms.par_chunks_mut(plane))
        .enumerate()
        .for_each(|(p, (out, norm))| {
            let mut gu = vec![[0.0; 4]; m];
            let mut h = vec![[[0.0; 4]; 4]; m];
            let mut mat = vec![vec![0.0; m]; m];
            let mut rhs = vec![0.0; m];
            for q in 0..plane {
                let idx = p * plane + q;
                for k in 0..m {
                    rhs[k] = lin[k][idx];
                }
                for term in terms {
                    for (i, gi) in gu.iter_mut().enumerate() {
                        for a in 0..4 {
                            gi[a] = term.grad[i][a][idx];
                        }
                    }
                    term.hess.fill(idx, term.h00, &mut h);
                    for (r, v) in rhs.iter_mut().zip(evaluate_nonlinearity(dense, &gu, &h)) {
                        *r += v;
                    }
                }
                let mut mnorm: f64 = 0.0;
                for k in 0..m {
                    mat[k].iter_mut().for_each(|v| *v = 0.0);
                    for e in dense.entries_for(k) {
                        if e.beta == 0 && e.gamma == 0 {
                            mat[k][e.j] += e.value * mgrad[e.i][e.alpha][idx];
                        }
                    }
                    mnorm = mnorm.max(mat[k].iter().map(|v| v.abs()).sum());
                }
                norm[q] = mnorm;
                let x = &mut out[q * m..(q + 1) * m];
                x.copy_from_slice(&rhs);
                if mnorm > 0.0 {
                    solve_identity_minus(&mut mat, x);
                }
            }
        });
    if let Some(index) = norms.iter().position(|v| !(*v < QUASILINEAR_LIMIT)) {
        return Err(SolverError::Quasilinear { index, t, norm: norms[index] });
    }
    Ok((0..m).map(|k| (0..n).map(|idx| packed[idx * m + k]).collect()).collect())
}

/// In-place `(I − M) x = b`; `M` is overwritten. Requires `‖M‖∞ < 1`.
fn solve_identity_minus(mat: &mut [Vec<f64>], x: &mut [f64]) {
    let m = x.len();
    if m == 1 {
        x[0] /= 1.0 - mat[0][0];
        return;
    }
    for (r, row) in mat.iter_mut().enumerate() {
        for v in row.iter_mut() {
            *v = -*v;
        }
        row[r] += 1.0;
    }
    // diagonally dominant: elimination without pivoting is stable
    for col in 0..m {
        let piv = mat[col][col];
        for r in col + 1..m {
            let f = mat[r][col] / piv;
            if f != 0.0 {
                for c in col..m {
                    mat[r][c] -= f * mat[col][c];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..m).rev() {
        let s: f64 = (col + 1..m).map(|c| mat[col][c] * x[c]).sum();
        x[col] = (x[col] - s) / mat[col][col];
    }
}

fn scaled_laplacians(system: &WaveSystem, g: &GridSpec, w: &[Field]) -> Vec<Field> {
    w.iter()
        .enumerate()
        .map(|(k, f)| {
            let c2 = system.speeds().get(k).powi(2);
            laplacian(g, f).into_par_iter().map(|v| c2 * v).collect()
        })
        .collect()
}

/// `∂_t²u` for every component.
pub fn acceleration(system: &WaveSystem, state: &GridState) -> Result<Vec<Field>, SolverError> {
    if state.m() != system.m() {
        return Err(SolverError::FamilyMismatch { speeds: system.m(), tensor: state.m() });
    }
    let g = state.grid;
    let lin = scaled_laplacians(system, &g, &state.u);
    if system.is_linear() {
        return Ok(lin);
    }
    let grad = gradients(&g, &state.u, &state.ut);
    let hess = Hessian::build(system, &g, &state.u, &state.ut);
    solve(system, &g, state.t, &grad, &lin, &[Term { grad: &grad, hess: &hess, h00: None }])
}

/// `(u, u_t, u_tt, u_ttt)` with the higher levels taken from the equation.
pub fn time_jet(system: &WaveSystem, state: &GridState) -> Result<Jet, SolverError> {
    let g = state.grid;
    let a = acceleration(system, state)?;
    let lin = scaled_laplacians(system, &g, &state.ut);
    let at = if system.is_linear() {
        lin
    } else {
        let grad = gradients(&g, &state.u, &state.ut);
        let hess = Hessian::build(system, &g, &state.u, &state.ut);
        let grad_t = gradients(&g, &state.ut, &a);
        let hess_t = Hessian::build(system, &g, &state.ut, &a);
        solve(
            system,
            &g,
            state.t,
            &grad,
            &lin,
            &[
                Term { grad: &grad_t, hess: &hess, h00: Some(&a) },
                Term { grad: &grad, hess: &hess_t, h00: None },
            ],
        )?
    };
    let levels = state
        .u
        .iter()
        .zip(&state.ut)
        .zip(a.into_iter().zip(at))
        .map(|((u, ut), (a, at))| vec![u.clone(), ut.clone(), a, at])
        .collect();
    Ok(Jet { grid: g, t: state.t, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::testing::{mixed_null, random_symmetric_tensor, time_cubic};
    use crate::tensor::{CoeffTensor, Rational, SpeedVector};
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }

    fn unit() -> SpeedVector {
        SpeedVector::new(vec![r(1)]).unwrap()
    }

    fn smooth_state(g: GridSpec, m: usize, scale: f64, seed: u64) -> GridState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coef = || -> [f64; 4] { std::array::from_fn(|_| rng.gen_range(-1.0..1.0)) };
        let mut u = Vec::new();
        let mut ut = Vec::new();
        for _ in 0..m {
            let a = coef();
            let b = coef();
            u.push(g.sample(|x| scale * (a[0] * (x[0] + a[1] * x[1]).sin() + a[2] * x[2] * x[0] + a[3] * (x[1] * x[2]).cos())));
            ut.push(g.sample(|x| scale * (b[0] * x[0].cos() + b[1] * x[1] * x[2] + b[2] * (x[2] + b[3]).sin())));
        }
        GridState::new(g, 0.3, u, ut).unwrap()
    }

    #[test]
    fn zero_tensor_gives_scaled_laplacian() {
        let g = GridSpec::centered(12, 0.2).unwrap();
        let speeds = SpeedVector::new(vec![r(2), r(1)]).unwrap();
        let sys = WaveSystem::linear(speeds).unwrap();
        let s = smooth_state(g, 2, 1.0, 1);
        let a = acceleration(&sys, &s).unwrap();
        let lap = laplacian(&g, &s.u[0]);
        for idx in 0..g.len() {
            assert_eq!(a[0][idx], 4.0 * lap[idx]);
        }
    }

    #[test]
    fn no_time_time_entries_adds_n_directly() {
        // C^{000}_{011} = C^{000}_{101}... only (β, γ) = (1, 1): a = Δu + κ ∂_t u ∂₁²u
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 1, 1), r(3));
        let sys = WaveSystem::new(unit(), c).unwrap();
        let g = GridSpec::centered(12, 0.2).unwrap();
        let s = smooth_state(g, 1, 0.1, 2);
        let a = acceleration(&sys, &s).unwrap();
        let lap = laplacian(&g, &s.u[0]);
        let uxx = d2_mixed(&g, &s.u[0], 0, 0);
        for idx in 0..g.len() {
            let want = lap[idx] + 3.0 * s.ut[0][idx] * uxx[idx];
            assert!((a[0][idx] - want).abs() < 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn time_cubic_closed_form() {
        // u_tt − Δu = κ u_t u_tt  ⇒  a = Δu / (1 − κ u_t)
        let kappa = 0.25;
        let sys = WaveSystem::new(unit(), time_cubic(Rational::new(BigInt::from(1), BigInt::from(4)))).unwrap();
        let g = GridSpec::centered(10, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = smooth_state(g, 1, 0.8, 3);
        let a = acceleration(&sys, &s).unwrap();
        let lap = laplacian(&g, &s.u[0]);
        for _ in 0..100 {
            let idx = rng.gen_range(0..g.len());
            let want = lap[idx] / (1.0 - kappa * s.ut[0][idx]);
            assert!((a[0][idx] - want).abs() <= 1e-12 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn strong_quasilinearity_refused() {
        let sys = WaveSystem::new(unit(), time_cubic(r(1))).unwrap();
        let g = GridSpec::centered(8, 0.5).unwrap();
        let mut s = GridState::zeros(g, 1, 0.0);
        s.ut[0][100] = 0.6;
        match acceleration(&sys, &s) {
            Err(SolverError::Quasilinear { index, norm, .. }) => {
                assert_eq!(index, 100);
                assert!((norm - 0.6).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coupled_solve_satisfies_equation() {
        // residual of (I − M) a = c²Δu + Ñ recomputed independently
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_symmetric_tensor(&mut rng, 2, 0.4);
        let speeds = SpeedVector::new(vec![r(2), r(1)]).unwrap();
        let sys = WaveSystem::new(speeds, c).unwrap();
        let g = GridSpec::centered(10, 0.25).unwrap();
        let s = smooth_state(g, 2, 0.02, 4);
        let a = acceleration(&sys, &s).unwrap();
        let dense = sys.dense();
        for _ in 0..50 {
            let idx = rng.gen_range(0..g.len());
            let grad: Vec<[f64; 4]> = (0..2)
                .map(|i| {
                    [s.ut[i][idx], d1(&g, &s.u[i], 0)[idx], d1(&g, &s.u[i], 1)[idx], d1(&g, &s.u[i], 2)[idx]]
                })
                .collect();
            let hess: Vec<[[f64; 4]; 4]> = (0..2)
                .map(|j| {
                    let mut h = [[0.0; 4]; 4];
                    h[0][0] = a[j][idx];
                    for l in 1..4 {
                        h[0][l] = d1(&g, &s.ut[j], l - 1)[idx];
                        h[l][0] = h[0][l];
                        for mm in 1..4 {
                            h[l][mm] = d2_mixed(&g, &s.u[j], l - 1, mm - 1)[idx];
                        }
                    }
                    h
                })
                .collect();
            let n = evaluate_nonlinearity(dense, &grad, &hess);
            for k in 0..2 {
                let c2 = sys.speeds().get(k).powi(2);
                let box_u = a[k][idx] - c2 * laplacian(&g, &s.u[k])[idx];
                assert!((box_u - n[k]).abs() < 1e-11 * (1.0 + n[k].abs()), "{box_u} vs {}", n[k]);
            }
        }
    }

    #[test]
    fn third_derivative_matches_time_difference() {
        // a_t is the derivative of a(u, u_t) along (u_t, a): compare with a
        // centred difference over that direction.
        let sys = WaveSystem::new(unit(), mixed_null(&r(1), Rational::new(BigInt::from(1), BigInt::from(2)))).unwrap();
        let g = GridSpec::centered(12, 0.2).unwrap();
        let s = smooth_state(g, 1, 0.05, 6);
        let jet = time_jet(&sys, &s).unwrap();
        let a = &jet.levels[0][2];
        let h = 1e-4;
        let shifted = |sign: f64| {
            let u: Field = (0..g.len()).map(|i| s.u[0][i] + sign * h * s.ut[0][i] + 0.5 * h * h * a[i]).collect();
            let ut: Field = (0..g.len()).map(|i| s.ut[0][i] + sign * h * a[i] + 0.5 * h * h * jet.levels[0][3][i]).collect();
            acceleration(&sys, &GridState::new(g, s.t + sign * h, vec![u], vec![ut]).unwrap()).unwrap()
        };
        let (ap, am) = (shifted(1.0), shifted(-1.0));
        let scale = jet.levels[0][3].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for idx in 0..g.len() {
            let fd = (ap[0][idx] - am[0][idx]) / (2.0 * h);
            assert!((fd - jet.levels[0][3][idx]).abs() < 1e-6 * scale, "{fd} vs {}", jet.levels[0][3][idx]);
        }
    }
}
