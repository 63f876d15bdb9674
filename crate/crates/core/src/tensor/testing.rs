//! Tensor generators for tests, presets and benchmarks.
//!
//! [`project_null`] is a test utility: it removes from each self-interaction
//! cubic the component outside the ideal generated by the cone quadric
//! (least squares in monomial coordinates), so random tensors can be turned
//! into nontrivial null ones.

use num_bigint::BigInt;
use rand::Rng;

use super::cubic::CubicForm;
use super::null::{cone_quadric, divisibility_matrix};
use super::{linsolve, rat, self_cubic, CoeffTensor, Rational, SpeedVector};

/// Random tensor satisfying the `j↔k`, `β↔γ` symmetry, with small rational
/// entries on roughly `density` of the independent slots.
pub fn random_symmetric_tensor<R: Rng>(rng: &mut R, m: usize, density: f64) -> CoeffTensor {
    let mut c = CoeffTensor::zeros(m).expect("m > 0");
    for i in 0..m {
        for j in 0..m {
            for k in j..m {
                for a in 0..4 {
                    for b in 0..4 {
                        for g in b..4 {
                            if rng.gen::<f64>() < density {
                                let num = rng.gen_range(-4i64..=4);
                                let den = rng.gen_range(1i64..=3);
                                let v = Rational::new(BigInt::from(num), BigInt::from(den));
                                c.set_symmetric((i, j, k, a, b, g), v);
                            }
                        }
                    }
                }
            }
        }
    }
    c
}

/// Component of `q` orthogonal (in monomial coordinates) to the ideal
/// `{L·Q_c}`.
pub fn non_divisible_part(q: &CubicForm, c: &Rational) -> CubicForm {
    let a = divisibility_matrix(c);
    let l = linsolve::solve_normal_equations(&a, q.coeffs())
        .expect("cone multiples are linearly independent");
    let fit = CubicForm::linear_times_diagonal_quadric(&[l[0].clone(), l[1].clone(), l[2].clone(), l[3].clone()], &cone_quadric(c));
    q.sub(&fit)
}

/// Makes every family's self-interaction null by subtracting the fully
/// symmetric tensor of its non-divisible part from the `(k, k, k)` block.
pub fn project_null(c: &CoeffTensor, speeds: &SpeedVector) -> CoeffTensor {
    let mut out = c.clone();
    for k in 0..c.m() {
        let q = self_cubic(c, k).expect("k < m");
        let residual = non_divisible_part(&q, &speeds.exact()[k]);
        let block = residual.symmetric_block();
        for a in 0..4 {
            for b in 0..4 {
                for g in 0..4 {
                    let v = &block[a * 16 + b * 4 + g];
                    out.add_to((k, k, k, a, b, g), &-v);
                }
            }
        }
    }
    out
}

/// `κ ∂_t u ∂_t² u`: the standard non-null self-interaction (`C_{000} = κ`).
pub fn time_cubic(kappa: Rational) -> CoeffTensor {
    let mut c = CoeffTensor::zeros(1).expect("m > 0");
    c.set((0, 0, 0, 0, 0, 0), kappa);
    c
}

/// `C_{000} = κ`, `C_{0ll} = −κc²`: cubic `κ X₀(X₀² − c²|X'|²)`.
pub fn cone_multiple(c: &Rational, kappa: Rational) -> CoeffTensor {
    let mut t = CoeffTensor::zeros(1).expect("m > 0");
    t.set((0, 0, 0, 0, 0, 0), kappa.clone());
    for l in 1..4 {
        t.set((0, 0, 0, 0, l, l), -(&kappa * c * c));
    }
    t
}

/// Null form with the same cubic as [`cone_multiple`] but mixed slots:
/// `C_{000} = κ`, `C_{0ll} = κc²/3`, `C_{ll0} = C_{l0l} = −2κc²/3`.
///
/// Frobenius norm is `κ·√(1 + 3c⁴)` when `c = 1` equals `2κ`, so
/// `mixed_null(1, κ/2)` matches `time_cubic(κ)` in norm.
pub fn mixed_null(c: &Rational, kappa: Rational) -> CoeffTensor {
    let c2 = c * c;
    let mut t = CoeffTensor::zeros(1).expect("m > 0");
    t.set((0, 0, 0, 0, 0, 0), kappa.clone());
    let third = Rational::new(BigInt::from(1), BigInt::from(3));
    for l in 1..4 {
        t.set((0, 0, 0, 0, l, l), &kappa * &c2 * &third);
        let v = -(&kappa * &c2 * &third * rat(2));
        t.set((0, 0, 0, l, l, 0), v.clone());
        t.set((0, 0, 0, l, 0, l), v);
    }
    t
}

/// Two families with speeds `c₁ > c₂`: [`mixed_null`] self-interactions of
/// size `κ/2` plus the non-resonant cross terms `κ/2 ∂_t u¹ ∂_t² u²` and
/// `κ/2 ∂_t u² Δu¹` (families 0-based in code).
pub fn two_speed_coupled(c1: &Rational, c2: &Rational, kappa: Rational) -> CoeffTensor {
    let half = &kappa / rat(2);
    let mut t = CoeffTensor::zeros(2).expect("m > 0");
    for (k, c) in [(0, c1), (1, c2)] {
        for ((_, _, _, a, b, g), v) in mixed_null(c, half.clone()).nonzero() {
            t.set((k, k, k, a, b, g), v.clone());
        }
    }
    t.set((0, 1, 1, 0, 0, 0), half.clone());
    for l in 1..4 {
        t.set((1, 0, 0, 0, l, l), half.clone());
    }
    t
}
