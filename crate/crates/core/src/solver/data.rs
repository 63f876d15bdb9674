//! Compactly supported initial data.
//!
//! Every family is built from the bump `b(s) = (1 − s²)⁸` for `s < 1` and
//! `0` otherwise (`b(s) ≈ exp(−8s²)` near the centre), so the data vanish
//! identically outside the support radius.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::grid::{Field, GridSpec, GridState};
use crate::tensor::SpeedVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFamily {
    /// `u = A b(|x − x₀|/w)`, `u_t = 0`.
    #[default]
    GaussianBump,
    /// Bump times `cos(k·(x − x₀))`, `u_t = 0`.
    PlanePacket,
    /// Sum of `count` bumps with centres drawn in a ball of radius `spread`.
    MultiBump,
    /// `u = A r₀ b((r − r₀)/w)/r` with the outgoing `u_t = −c_k ∂_r(r u)/r`.
    OutgoingShell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComponentData {
    pub center: [f64; 3],
    /// Support radius of each bump (shell half-thickness for shells).
    pub width: f64,
    pub amplitude: f64,
    pub wavevector: [f64; 3],
    /// Shell radius `r₀`.
    pub radius: f64,
    pub count: usize,
    pub spread: f64,
    /// Explicit multi-bump centres; drawn from the run seed when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<[f64; 3]>>,
}

impl Default for ComponentData {
    fn default() -> Self {
        Self {
            center: [0.0; 3],
            width: 1.0,
            amplitude: 1.0,
            wavevector: [0.0; 3],
            radius: 0.0,
            count: 3,
            spread: 0.5,
            centers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    pub family: DataFamily,
    pub components: Vec<ComponentData>,
}

#[inline]
pub(crate) fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - s * s).powi(8)
    }
}

#[inline]
fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        -16.0 * s * (1.0 - s * s).powi(7)
    }
}

fn dist(x: [f64; 3], c: [f64; 3]) -> f64 {
    ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt()
}

fn norm(x: [f64; 3]) -> f64 {
    dist(x, [0.0; 3])
}

impl InitialData {
    /// The same bump in every one of `m` components.
    pub fn bump(m: usize, width: f64, amplitude: f64) -> Self {
        Self {
            family: DataFamily::GaussianBump,
            components: vec![ComponentData { width, amplitude, ..Default::default() }; m],
        }
    }

    /// Outgoing shells of radius `radius` and half-thickness `width`.
    pub fn shell(m: usize, radius: f64, width: f64, amplitude: f64) -> Self {
        Self {
            family: DataFamily::OutgoingShell,
            components: vec![ComponentData { radius, width, amplitude, ..Default::default() }; m],
        }
    }

    /// Problems as `(field path, message)`, paths relative to the data table.
    pub fn problems(&self, m: usize) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if self.components.len() != m {
            out.push(("components".into(), format!("{} entries for {m} families", self.components.len())));
        }
        for (k, c) in self.components.iter().enumerate() {
            let p = |f: &str| format!("components[{k}].{f}");
            if !(c.width > 0.0 && c.width.is_finite()) {
                out.push((p("width"), format!("{} must be positive", c.width)));
            }
            if !c.amplitude.is_finite() {
                out.push((p("amplitude"), "must be finite".into()));
            }
            if c.center.iter().chain(&c.wavevector).any(|v| !v.is_finite()) {
                out.push((p("center"), "coordinates must be finite".into()));
            }
            match self.family {
                DataFamily::OutgoingShell if !(c.radius > c.width) => {
                    out.push((p("radius"), format!("{} must exceed the width {}", c.radius, c.width)));
                }
                DataFamily::MultiBump => {
                    if let Some(cs) = &c.centers {
                        if cs.is_empty() {
                            out.push((p("centers"), "must not be empty".into()));
                        }
                    } else if c.count == 0 {
                        out.push((p("count"), "must be positive".into()));
                    }
                    if !(c.spread >= 0.0 && c.spread.is_finite()) {
                        out.push((p("spread"), format!("{} must be non-negative", c.spread)));
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// `R₀`: the data vanish identically for `|x| ≥ R₀`.
    pub fn support_radius(&self) -> f64 {
        self.components
            .iter()
            .map(|c| match self.family {
                DataFamily::GaussianBump | DataFamily::PlanePacket => norm(c.center) + c.width,
                DataFamily::OutgoingShell => norm(c.center) + c.radius + c.width,
                DataFamily::MultiBump => match &c.centers {
                    Some(cs) => cs.iter().map(|x| norm(*x) + c.width).fold(0.0, f64::max),
                    None => norm(c.center) + c.spread + c.width,
                },
            })
            .fold(0.0, f64::max)
    }

    fn multi_centers(&self, k: usize, seed: u64) -> Vec<[f64; 3]> {
        let c = &self.components[k];
        if let Some(cs) = &c.centers {
            return cs.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        (0..c.count)
            .map(|_| loop {
                let p: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
                if norm(p) <= 1.0 {
                    break std::array::from_fn(|i| c.center[i] + c.spread * p[i]);
                }
            })
            .collect()
    }

    /// Samples `(u, u_t)` at `t = 0`, every amplitude scaled by `epsilon`.
    pub fn build(&self, grid: &GridSpec, speeds: &SpeedVector, epsilon: f64, seed: u64) -> Result<GridState, SolverError> {
        if let Some((path, msg)) = self.problems(speeds.len()).into_iter().next() {
            return Err(SolverError::Data(format!("{path}: {msg}")));
        }
        let mut u = Vec::new();
        let mut ut = Vec::new();
        for (k, c) in self.components.iter().enumerate() {
            let a = epsilon * c.amplitude;
            let w = c.width;
            let (fu, fut): (Field, Field) = match self.family {
                DataFamily::GaussianBump => (grid.sample(|x| a * bump(dist(x, c.center) / w)), grid.zeros()),
                DataFamily::PlanePacket => (
                    grid.sample(|x| {
                        let phase: f64 = (0..3).map(|i| c.wavevector[i] * (x[i] - c.center[i])).sum();
                        a * bump(dist(x, c.center) / w) * phase.cos()
                    }),
                    grid.zeros(),
                ),
                DataFamily::MultiBump => {
                    let centers = self.multi_centers(k, seed);
                    (grid.sample(|x| centers.iter().map(|p| a * bump(dist(x, *p) / w)).sum()), grid.zeros())
                }
                DataFamily::OutgoingShell => {
                    let (r0, ck) = (c.radius, speeds.get(k));
                    let u = grid.sample(|x| {
                        let r = dist(x, c.center);
                        if r == 0.0 { 0.0 } else { a * r0 * bump((r - r0) / w) / r }
                    });
                    let ut = grid.sample(|x| {
                        let r = dist(x, c.center);
                        if r == 0.0 { 0.0 } else { -ck * a * r0 * bump_prime((r - r0) / w) / (w * r) }
                    });
                    (u, ut)
                }
            };
            u.push(fu);
            ut.push(fut);
        }
        Ok(GridState::new(*grid, 0.0, u, ut)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gradient;
    use crate::tensor::Rational;
    use num_bigint::BigInt;

    fn speeds(cs: &[i64]) -> SpeedVector {
        SpeedVector::new(cs.iter().map(|&c| Rational::from_integer(BigInt::from(c))).collect()).unwrap()
    }

    fn vanishes_outside(state: &GridState, r0: f64) {
        let g = state.grid;
        for k in 0..state.m() {
            let grad = gradient(&g, &state.u[k]);
            for idx in 0..g.len() {
                let x = g.position(idx);
                // one stencil width of slack for the discrete gradient
                if norm(x) > r0 + 2.0 * g.dx + 1e-9 {
                    assert_eq!(state.u[k][idx], 0.0);
                    assert_eq!(state.ut[k][idx], 0.0);
                    assert!(grad.iter().all(|d| d[idx] == 0.0));
                }
            }
        }
    }

    #[test]
    fn families_are_compactly_supported() {
        // wide enough that one-sided edge stencils stay clear of the support
        let g = GridSpec::centered(49, 0.1).unwrap();
        let sp = speeds(&[2, 1]);
        let mut datas = vec![InitialData::bump(2, 0.8, 1.0), InitialData::shell(2, 0.7, 0.4, 1.0)];
        datas.push(InitialData {
            family: DataFamily::PlanePacket,
            components: vec![ComponentData { width: 0.9, wavevector: [4.0, 0.0, 1.0], ..Default::default() }; 2],
        });
        datas.push(InitialData {
            family: DataFamily::MultiBump,
            components: vec![ComponentData { width: 0.4, spread: 0.6, count: 4, ..Default::default() }; 2],
        });
        for d in datas {
            let s = d.build(&g, &sp, 0.5, 7).unwrap();
            assert!(s.u[0].iter().any(|v| *v != 0.0));
            vanishes_outside(&s, d.support_radius());
        }
    }

    #[test]
    fn bump_peak_and_shape() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert!((bump(0.25) - (-8.0f64 * 0.0625).exp()).abs() < 0.01);
        let h = 1e-6;
        for s in [-0.7, -0.2, 0.1, 0.5, 0.9] {
            let fd = (bump(s + h) - bump(s - h)) / (2.0 * h);
            assert!((fd - bump_prime(s)).abs() < 1e-7);
        }
    }

    #[test]
    fn shell_velocity_is_outgoing() {
        // r u = A r₀ b((r − r₀)/w) transported at speed c: ∂_t(ru) = −c ∂_r(ru)
        let g = GridSpec::centered(41, 0.1).unwrap();
        let d = InitialData::shell(1, 1.0, 0.5, 2.0);
        let s = d.build(&g, &speeds(&[3]), 1.0, 0).unwrap();
        for idx in 0..g.len() {
            let r = norm(g.position(idx));
            if r > 0.0 {
                let want = -3.0 * 2.0 * bump_prime((r - 1.0) / 0.5) / (0.5 * r);
                assert!((s.ut[0][idx] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn multi_bump_centres_follow_seed() {
        let d = InitialData {
            family: DataFamily::MultiBump,
            components: vec![ComponentData { width: 0.3, ..Default::default() }],
        };
        let g = GridSpec::centered(17, 0.1).unwrap();
        let sp = speeds(&[1]);
        let a = d.build(&g, &sp, 1.0, 3).unwrap();
        let b = d.build(&g, &sp, 1.0, 3).unwrap();
        let c = d.build(&g, &sp, 1.0, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(d.multi_centers(0, 3).iter().all(|p| norm(*p) <= 0.5 + 1e-15));
    }

    #[test]
    fn problems_report_paths() {
        let mut d = InitialData::shell(2, 0.3, 0.5, 1.0);
        d.components[1].width = -1.0;
        let paths: Vec<_> = d.problems(3).into_iter().map(|p| p.0).collect();
        assert_eq!(paths, vec!["components", "components[0].radius", "components[1].width"]);
    }
}
