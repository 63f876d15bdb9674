use num_traits::Zero;

use super::{rat, to_f64, CoeffTensor, Rational, TensorError};

pub const MONOMIAL_COUNT: usize = 20;

/// Degree-3 monomials in `(X₀, X₁, X₂, X₃)`, each as a sorted index triple
/// `α ≤ β ≤ γ` standing for `X_α X_β X_γ`.
pub fn monomials() -> [[usize; 3]; MONOMIAL_COUNT] {
    let mut out = [[0usize; 3]; MONOMIAL_COUNT];
    let mut n = 0;
    for a in 0..4 {
        for b in a..4 {
            for c in b..4 {
                out[n] = [a, b, c];
                n += 1;
            }
        }
    }
    out
}

/// Position of the monomial `X_a X_b X_c` (any slot order) in [`monomials`].
pub(crate) fn monomial_index(a: usize, b: usize, c: usize) -> usize {
    let mut t = [a, b, c];
    t.sort_unstable();
    // Ranks of sorted triples, precomputed: triples starting with `a`
    // occupy a contiguous block.
    const START: [usize; 4] = [0, 10, 16, 19];
    const START2: [[usize; 4]; 4] = [[0, 4, 7, 9], [0, 0, 3, 5], [0, 0, 0, 2], [0, 0, 0, 0]];
    START[t[0]] + START2[t[0]][t[1]] + (t[2] - t[1])
}

/// Number of distinct slot orderings of a sorted triple.
fn multiplicity(t: [usize; 3]) -> i64 {
    match (t[0] == t[1], t[1] == t[2]) {
        (true, true) => 1,
        (true, false) | (false, true) => 3,
        (false, false) => 6,
    }
}

/// Homogeneous cubic `q(X) = Σ coeff_e X^e` over the 20 degree-3 monomials.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicForm {
    coeffs: Vec<Rational>,
}

impl CubicForm {
    pub fn zero() -> Self {
        Self { coeffs: vec![Rational::zero(); MONOMIAL_COUNT] }
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        assert_eq!(coeffs.len(), MONOMIAL_COUNT);
        Self { coeffs }
    }

    /// `Σ_{αβγ} T_{αβγ} X_α X_β X_γ` for a raw (unsymmetrized) 4×4×4 block.
    pub fn from_contraction(block: impl Fn(usize, usize, usize) -> Rational) -> Self {
        let mut q = Self::zero();
        for a in 0..4 {
            for b in 0..4 {
                for g in 0..4 {
                    let v = block(a, b, g);
                    if !v.is_zero() {
                        q.coeffs[monomial_index(a, b, g)] += v;
                    }
                }
            }
        }
        q
    }

    /// `L(X) · Σ_μ d_μ X_μ²` for a linear form `L` and a diagonal quadric.
    pub fn linear_times_diagonal_quadric(l: &[Rational; 4], d: &[Rational; 4]) -> Self {
        let mut q = Self::zero();
        for (a, la) in l.iter().enumerate() {
            if la.is_zero() {
                continue;
            }
            for (mu, dm) in d.iter().enumerate() {
                q.coeffs[monomial_index(a, mu, mu)] += la * dm;
            }
        }
        q
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &[f64; 4]) -> f64 {
        monomials()
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(t, c)| to_f64(c) * x[t[0]] * x[t[1]] * x[t[2]])
            .sum()
    }

    pub fn eval_exact(&self, x: &[Rational; 4]) -> Rational {
        let mut acc = Rational::zero();
        for (t, c) in monomials().iter().zip(&self.coeffs) {
            if !c.is_zero() {
                acc += c * &x[t[0]] * &x[t[1]] * &x[t[2]];
            }
        }
        acc
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| to_f64(c).abs()).fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect() }
    }

    /// Fully symmetric 4×4×4 block whose contraction reproduces `self`.
    pub fn symmetric_block(&self) -> Vec<Rational> {
        let mut block = vec![Rational::zero(); 64];
        for (t, c) in monomials().iter().zip(&self.coeffs) {
            if c.is_zero() {
                continue;
            }
            let share = c / rat(multiplicity(*t));
            for a in 0..4 {
                for b in 0..4 {
                    for g in 0..4 {
                        if monomial_index(a, b, g) == monomial_index(t[0], t[1], t[2]) {
                            block[a * 16 + b * 4 + g] = share.clone();
                        }
                    }
                }
            }
        }
        block
    }
}

/// The self-interaction cubic `q_k(X) = C^{kkk}_{αβγ} X_α X_β X_γ`.
pub fn self_cubic(c: &CoeffTensor, k: usize) -> Result<CubicForm, TensorError> {
    if k >= c.m() {
        return Err(TensorError::FamilyOutOfRange(k));
    }
    Ok(triple_cubic(c, k, k, k))
}

/// `C^{ijk}_{αβγ} X_α X_β X_γ` for one family triple.
pub(crate) fn triple_cubic(c: &CoeffTensor, i: usize, j: usize, k: usize) -> CubicForm {
    CubicForm::from_contraction(|a, b, g| c.get((i, j, k, a, b, g)).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rat;

    #[test]
    fn monomial_index_matches_enumeration() {
        for (n, t) in monomials().iter().enumerate() {
            assert_eq!(monomial_index(t[0], t[1], t[2]), n);
            assert_eq!(monomial_index(t[2], t[0], t[1]), n);
        }
    }

    #[test]
    fn zero_tensor_gives_zero_form() {
        let c = CoeffTensor::zeros(2).unwrap();
        assert!(self_cubic(&c, 1).unwrap().is_zero());
        assert!(self_cubic(&c, 2).is_err());
    }

    #[test]
    fn single_entry_is_x0_cubed() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        let q = self_cubic(&c, 0).unwrap();
        let mut expected = CubicForm::zero();
        expected.coeffs[monomial_index(0, 0, 0)] = rat(1);
        assert_eq!(q, expected);
        assert_eq!(q.eval(&[2.0, 5.0, 1.0, 1.0]), 8.0);
    }

    #[test]
    fn x0_times_cone_quadric() {
        // C_000 = 1, C_0ll = -c² with c = 2.
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        for l in 1..4 {
            c.set((0, 0, 0, 0, l, l), rat(-4));
        }
        let q = self_cubic(&c, 0).unwrap();
        // brute-force contraction over all 64 index triples at sample points
        let pts = [[1.0, 0.5, -0.25, 2.0], [-3.0, 1.0, 1.0, 0.0], [0.1, 0.2, 0.3, 0.4]];
        for x in pts {
            let mut brute = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    for g in 0..4 {
                        brute += to_f64(c.get((0, 0, 0, a, b, g))) * x[a] * x[b] * x[g];
                    }
                }
            }
            let closed = x[0] * (x[0] * x[0] - 4.0 * (x[1] * x[1] + x[2] * x[2] + x[3] * x[3]));
            assert!((q.eval(&x) - brute).abs() < 1e-12);
            assert!((q.eval(&x) - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_block_round_trips() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 1, 2, 3), rat(6));
        c.set((0, 0, 0, 0, 0, 1), rat(-3));
        let q = self_cubic(&c, 0).unwrap();
        let block = q.symmetric_block();
        let back = CubicForm::from_contraction(|a, b, g| block[a * 16 + b * 4 + g].clone());
        assert_eq!(back, q);
        assert_eq!(block[3 * 16 + 2 * 4 + 1], rat(1));
    }
}
