#![allow(dead_code)]

use rand::Rng;

use nullwave_core::tensor::{CoeffTensor, Rational};

pub fn f(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

/// `Σ C^{kkk}_{αβγ} X_α X_β X_γ` summed term by term in floating point.
pub fn direct_cubic(c: &CoeffTensor, k: usize, x: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for g in 0..4 {
                s += f(c.get((k, k, k, a, b, g))) * x[a] * x[b] * x[g];
            }
        }
    }
    s
}

/// Sampling verdict: the self cubic of family `k` vanishes (to roundoff)
/// at `samples` random points `(±c, ξ)`, `|ξ| = 1`, of the cone.
pub fn cone_sampling_null<R: Rng>(c: &CoeffTensor, k: usize, speed: f64, samples: usize, rng: &mut R) -> bool {
    let mut dense = [0.0; 64];
    let mut scale = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            for g in 0..4 {
                let v = f(c.get((k, k, k, a, b, g)));
                dense[16 * a + 4 * b + g] = v;
                scale += v.abs();
            }
        }
    }
    if scale == 0.0 {
        return true;
    }
    let norm = 1.0 + speed.powi(3);
    for n in 0..samples {
        let xi = loop {
            let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if r > 1e-3 && r <= 1.0 {
                break [v[0] / r, v[1] / r, v[2] / r];
            }
        };
        let t = if n % 2 == 0 { speed } else { -speed };
        let x = [t, xi[0], xi[1], xi[2]];
        let mut q = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for g in 0..4 {
                    q += dense[16 * a + 4 * b + g] * x[a] * x[b] * x[g];
                }
            }
        }
        if q.abs() > 1e-9 * scale * norm {
            return false;
        }
    }
    true
}
