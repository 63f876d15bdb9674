//! Fourth-order finite differences.
//!
//! Interior points use the centred 5-point stencils; on non-periodic grids
//! the two outermost points on each side use one-sided 4th-order formulas.

use rayon::prelude::*;

use super::{Field, GridSpec};

const D1_CENTRAL: [f64; 5] = [1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0];
// one-sided first derivative at p = 0 (offsets 0..=4) and p = 1 (offsets -1..=3)
const D1_EDGE0: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -1.0 / 4.0];
const D1_EDGE1: [f64; 5] = [-1.0 / 4.0, -5.0 / 6.0, 3.0 / 2.0, -1.0 / 2.0, 1.0 / 12.0];

const D2_CENTRAL: [f64; 5] = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
// one-sided second derivative at p = 0 (offsets 0..=5) and p = 1 (offsets -1..=4)
const D2_EDGE0: [f64; 6] =
    [45.0 / 12.0, -154.0 / 12.0, 214.0 / 12.0, -156.0 / 12.0, 61.0 / 12.0, -10.0 / 12.0];
const D2_EDGE1: [f64; 6] =
    [10.0 / 12.0, -15.0 / 12.0, -4.0 / 12.0, 14.0 / 12.0, -6.0 / 12.0, 1.0 / 12.0];

#[derive(Clone, Copy)]
enum Order {
    First,
    Second,
}

/// Value of the 1D stencil at position `p` along a line sampled by `at`.
#[inline(always)]
fn line_stencil(n: usize, p: usize, periodic: bool, order: Order, at: impl Fn(usize) -> f64) -> f64 {
    let central = match order {
        Order::First => &D1_CENTRAL,
        Order::Second => &D2_CENTRAL,
    };
    if periodic {
        let w = |o: isize| at(((p as isize + o).rem_euclid(n as isize)) as usize);
        return central[0] * w(-2) + central[1] * w(-1) + central[2] * w(0) + central[3] * w(1)
            + central[4] * w(2);
    }
    if p >= 2 && p + 2 < n {
        return central[0] * at(p - 2) + central[1] * at(p - 1) + central[2] * at(p)
            + central[3] * at(p + 1)
            + central[4] * at(p + 2);
    }
    // Mirror the right edge onto the left one: q counts from the nearer
    // boundary, `sign` flips odd derivatives.
    let (q, mirrored) = if p < 2 { (p, false) } else { (n - 1 - p, true) };
    let pos = |off: isize| -> f64 {
        let o = if mirrored { -off } else { off };
        at((p as isize + o) as usize)
    };
    match order {
        Order::First => {
            let sign = if mirrored { -1.0 } else { 1.0 };
            let s: f64 = if q == 0 {
                D1_EDGE0.iter().enumerate().map(|(o, c)| c * pos(o as isize)).sum()
            } else {
                D1_EDGE1.iter().enumerate().map(|(o, c)| c * pos(o as isize - 1)).sum()
            };
            sign * s
        }
        Order::Second => {
            if q == 0 {
                D2_EDGE0.iter().enumerate().map(|(o, c)| c * pos(o as isize)).sum()
            } else {
                D2_EDGE1.iter().enumerate().map(|(o, c)| c * pos(o as isize - 1)).sum()
            }
        }
    }
}

fn apply(grid: &GridSpec, f: &[f64], axis: usize, order: Order) -> Field {
    debug_assert_eq!(f.len(), grid.len());
    let n = grid.n;
    let stride = [1, n, n * n][axis];
    let scale = match order {
        Order::First => 1.0 / grid.dx,
        Order::Second => 1.0 / (grid.dx * grid.dx),
    };
    let mut out = grid.zeros();
    out.par_chunks_mut(n * n).enumerate().for_each(|(k, plane)| {
        for j in 0..n {
            for i in 0..n {
                let idx = grid.index(i, j, k);
                let p = [i, j, k][axis];
                let base = idx - p * stride;
                plane[i + n * j] =
                    scale * line_stencil(n, p, grid.periodic, order, |q| f[base + q * stride]);
            }
        }
    });
    out
}

/// `∂f/∂x_axis` (axis 0..3 spatial, 0-based).
pub fn d1(grid: &GridSpec, f: &[f64], axis: usize) -> Field {
    apply(grid, f, axis, Order::First)
}

/// `∂²f/∂x_axis²`.
pub fn d2(grid: &GridSpec, f: &[f64], axis: usize) -> Field {
    apply(grid, f, axis, Order::Second)
}

/// `∂²f/∂x_a∂x_b` by composing first-derivative stencils when `a ≠ b`.
pub fn d2_mixed(grid: &GridSpec, f: &[f64], a: usize, b: usize) -> Field {
    if a == b {
        d2(grid, f, a)
    } else {
        d1(grid, &d1(grid, f, a), b)
    }
}

pub fn gradient(grid: &GridSpec, f: &[f64]) -> [Field; 3] {
    [d1(grid, f, 0), d1(grid, f, 1), d1(grid, f, 2)]
}

pub fn laplacian(grid: &GridSpec, f: &[f64]) -> Field {
    let mut out = d2(grid, f, 0);
    for axis in 1..3 {
        let d = d2(grid, f, axis);
        out.par_iter_mut().zip(d.par_iter()).for_each(|(o, v)| *o += v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(g: &GridSpec, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) + 0.0 * g.dx
    }

    #[test]
    fn stencils_exact_on_low_degree_polynomials() {
        let g = GridSpec::centered(9, 0.3).unwrap();
        // cubic in x, quadratic in y: first derivatives exact through degree 4
        let f = g.sample(|x| x[0].powi(4) - 2.0 * x[0].powi(3) + x[1] * x[1] + x[2]);
        let dx = g.sample(|x| 4.0 * x[0].powi(3) - 6.0 * x[0] * x[0]);
        let dy = g.sample(|x| 2.0 * x[1]);
        let dz = g.sample(|_| 1.0);
        assert!(max_err(&g, &d1(&g, &f, 0), &dx) < 1e-10);
        assert!(max_err(&g, &d1(&g, &f, 1), &dy) < 1e-10);
        assert!(max_err(&g, &d1(&g, &f, 2), &dz) < 1e-10);
        // second derivatives exact through degree 4 in the interior, degree 5 at the edges
        let dxx = g.sample(|x| 12.0 * x[0] * x[0] - 12.0 * x[0]);
        assert!(max_err(&g, &d2(&g, &f, 0), &dxx) < 1e-9);
        let lap = g.sample(|x| 12.0 * x[0] * x[0] - 12.0 * x[0] + 2.0);
        assert!(max_err(&g, &laplacian(&g, &f), &lap) < 1e-9);
    }

    #[test]
    fn mixed_derivative_of_product() {
        let g = GridSpec::centered(11, 0.2).unwrap();
        let f = g.sample(|x| x[0] * x[0] * x[2]);
        let want = g.sample(|x| 2.0 * x[0]);
        assert!(max_err(&g, &d2_mixed(&g, &f, 0, 2), &want) < 1e-10);
        assert!(max_err(&g, &d2_mixed(&g, &f, 2, 0), &want) < 1e-10);
    }

    #[test]
    fn constant_and_linear() {
        let g = GridSpec::centered(8, 0.5).unwrap();
        let c = g.sample(|_| 3.0);
        assert!(d1(&g, &c, 1).iter().all(|v| v.abs() < 1e-12));
        let lin = g.sample(|x| x[0]);
        assert!(d1(&g, &lin, 0).iter().all(|v| (v - 1.0).abs() < 1e-10));
    }

    #[test]
    fn periodic_sine() {
        let n = 32;
        let g = GridSpec::periodic(n, 2.0 * std::f64::consts::PI).unwrap();
        let f = g.sample(|x| x[1].sin());
        let want = g.sample(|x| x[1].cos());
        let theta = g.dx;
        // leading truncation error of the 4th-order stencil: θ⁴/30
        assert!(max_err(&g, &d1(&g, &f, 1), &want) < theta.powi(4) / 30.0 * 1.05);
        let want2 = g.sample(|x| -x[1].sin());
        assert!(max_err(&g, &d2(&g, &f, 1), &want2) < theta.powi(4) / 90.0 * 1.05);
    }

    #[test]
    fn sine_convergence_order() {
        // observed order across dx, dx/2 on a non-periodic cube (edges included)
        let err = |n: usize, dx: f64| {
            let g = GridSpec::centered(n, dx).unwrap();
            let f = g.sample(|x| x[0].sin());
            let want = g.sample(|x| x[0].cos());
            max_err(&g, &d1(&g, &f, 0), &want)
        };
        let e1 = err(21, 0.05);
        let e2 = err(41, 0.025);
        let order = (e1 / e2).log2();
        assert!(order >= 3.7, "order {order}, errors {e1:e} {e2:e}");
    }
}
