//! Exact coefficient algebra of the quadratic nonlinearity
//!
//! ```text
//! N^k(u, v) = C^{ijk}_{αβγ} ∂_α u^i ∂_β ∂_γ v^j
//! ```
//!
//! Families are indexed from 0 in the API (`0..m`); the text format and
//! witness reports use 1-based family numbers. Greek indices run over
//! `0..4` with slot 0 the time direction.

mod commutator;
mod cubic;
mod io;
mod linsolve;
mod null;
pub mod testing;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

pub use commutator::{
    commutator, iterated_commutators, levi_civita, VectorField, DEFAULT_COMMUTATOR_DEPTH,
};
pub use cubic::{monomials, self_cubic, CubicForm, MONOMIAL_COUNT};
pub use io::{format_entry, format_rational, parse_rational, parse_tensor_file, write_tensor_file, TensorFile};
pub use linsolve::{solve_exact, solve_normal_equations};
pub use null::{
    check_null, check_null_extended, check_symmetry, cone_quadric, fibonacci_sphere,
    witness_search, ExtendedNullReport, FamilyNull, NullReport, NullWitness, SymmetryReport,
    WITNESS_DIRECTIONS,
};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("number of families must be positive")]
    NoFamilies,
    #[error("speed list has {got} entries, expected {expected}")]
    SpeedCount { expected: usize, got: usize },
    #[error("speed c_{index} = {value} is not positive")]
    NonPositiveSpeed { index: usize, value: String },
    #[error("speeds must be strictly decreasing (c_{index} >= c_{prev})", prev = .index - 1)]
    NotDecreasing { index: usize },
    #[error("family index {0} out of range")]
    FamilyOutOfRange(usize),
    #[error("inconsistent speed partition: {0}")]
    BadPartition(String),
    #[error("commutator sequence of length {len} exceeds bound {bound}")]
    SequenceTooLong { len: usize, bound: usize },
    #[error("vector field index {0} is not in 0..8")]
    BadFieldIndex(usize),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[cfg(test)]
pub(crate) fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub(crate) fn to_f64(r: &Rational) -> f64 {
    // BigRational::to_f64 is exact-ish for moderate sizes; fall back to
    // numerator/denominator division for huge terms.
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Propagation speeds `c_1 > … > c_m > 0`, held exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedVector {
    exact: Vec<Rational>,
    float: Vec<f64>,
    repeated: bool,
}

impl SpeedVector {
    /// Strictly decreasing positive speeds.
    pub fn new(speeds: Vec<Rational>) -> Result<Self, TensorError> {
        Self::build(speeds, false)
    }

    /// Non-increasing positive speeds, for the repeated-speed extension.
    pub fn with_repeats(speeds: Vec<Rational>) -> Result<Self, TensorError> {
        Self::build(speeds, true)
    }

    pub fn from_f64(speeds: &[f64]) -> Result<Self, TensorError> {
        let exact = speeds
            .iter()
            .map(|&c| Rational::from_float(c).ok_or(TensorError::NonPositiveSpeed {
                index: 1,
                value: c.to_string(),
            }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(exact)
    }

    fn build(speeds: Vec<Rational>, allow_repeats: bool) -> Result<Self, TensorError> {
        if speeds.is_empty() {
            return Err(TensorError::NoFamilies);
        }
        for (i, c) in speeds.iter().enumerate() {
            if !c.is_positive() {
                return Err(TensorError::NonPositiveSpeed { index: i + 1, value: c.to_string() });
            }
            if i > 0 {
                let prev = &speeds[i - 1];
                if c > prev || (!allow_repeats && c == prev) {
                    return Err(TensorError::NotDecreasing { index: i + 1 });
                }
            }
        }
        let float = speeds.iter().map(to_f64).collect();
        let repeated = speeds.windows(2).any(|w| w[0] == w[1]);
        Ok(Self { exact: speeds, float, repeated })
    }

    pub fn len(&self) -> usize {
        self.exact.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exact.is_empty()
    }

    pub fn exact(&self) -> &[Rational] {
        &self.exact
    }

    pub fn as_f64(&self) -> &[f64] {
        &self.float
    }

    pub fn get(&self, k: usize) -> f64 {
        self.float[k]
    }

    pub fn has_repeats(&self) -> bool {
        self.repeated
    }

    /// Largest speed `c_1`; sets the CFL restriction.
    pub fn max(&self) -> f64 {
        self.float[0]
    }

    /// `c_0 = min_k c_k / 2`, the exterior-region slope.
    pub fn c0(&self) -> f64 {
        self.float.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0
    }

    pub fn c0_exact(&self) -> Rational {
        let min = self.exact.iter().min().cloned().unwrap_or_else(Rational::zero);
        min / rat(2)
    }
}

/// Coefficients `C^{ijk}_{αβγ}`, an `m³ × 4³` array of exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTensor {
    m: usize,
    entries: Vec<Rational>,
}

/// A full index tuple `(i, j, k, α, β, γ)`, families 0-based.
pub type TensorIndex = (usize, usize, usize, usize, usize, usize);

impl CoeffTensor {
    pub fn zeros(m: usize) -> Result<Self, TensorError> {
        if m == 0 {
            return Err(TensorError::NoFamilies);
        }
        Ok(Self { m, entries: vec![Rational::zero(); m * m * m * 64] })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    fn offset(&self, (i, j, k, a, b, g): TensorIndex) -> usize {
        debug_assert!(i < self.m && j < self.m && k < self.m && a < 4 && b < 4 && g < 4);
        ((i * self.m + j) * self.m + k) * 64 + a * 16 + b * 4 + g
    }

    pub fn get(&self, idx: TensorIndex) -> &Rational {
        &self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: TensorIndex, value: Rational) {
        let o = self.offset(idx);
        self.entries[o] = value;
    }

    pub fn add_to(&mut self, idx: TensorIndex, value: &Rational) {
        let o = self.offset(idx);
        self.entries[o] += value;
    }

    /// Sets `value` at `idx` and at every slot image under `j↔k` and `β↔γ`.
    pub fn set_symmetric(&mut self, (i, j, k, a, b, g): TensorIndex, value: Rational) {
        for (jj, kk) in [(j, k), (k, j)] {
            for (bb, gg) in [(b, g), (g, b)] {
                self.set((i, jj, kk, a, bb, gg), value.clone());
            }
        }
    }

    /// Iterates over the nonzero entries in lexicographic index order.
    pub fn nonzero(&self) -> impl Iterator<Item = (TensorIndex, &Rational)> + '_ {
        let m = self.m;
        self.entries.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(o, v)| {
            let g = o % 4;
            let b = (o / 4) % 4;
            let a = (o / 16) % 4;
            let block = o / 64;
            let k = block % m;
            let j = (block / m) % m;
            let i = block / (m * m);
            ((i, j, k, a, b, g), v)
        })
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn scale(&self, factor: &Rational) -> Self {
        Self { m: self.m, entries: self.entries.iter().map(|v| v * factor).collect() }
    }

    /// Entrywise `a·self + b·other`.
    pub fn combine(&self, a: &Rational, other: &Self, b: &Rational) -> Self {
        assert_eq!(self.m, other.m, "tensor family counts differ");
        let entries =
            self.entries.iter().zip(&other.entries).map(|(x, y)| a * x + b * y).collect();
        Self { m: self.m, entries }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| to_f64(v).powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> Rational {
        self.entries.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }

    pub fn to_dense(&self) -> DenseTensor {
        DenseTensor::from(self)
    }
}

impl fmt::Display for CoeffTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CoeffTensor(m={}", self.m)?;
        for ((i, j, k, a, b, g), v) in self.nonzero() {
            write!(f, ", C[{}{}{}|{}{}{}]={}", i + 1, j + 1, k + 1, a, b, g, v)?;
        }
        write!(f, ")")
    }
}

/// Floating-point copy of a [`CoeffTensor`] for pointwise evaluation.
///
/// Stores the nonzero entries grouped by output family `k` so the grid
/// kernels only loop over active couplings.
#[derive(Debug, Clone)]
pub struct DenseTensor {
    m: usize,
    values: Vec<f64>,
    by_output: Vec<Vec<SparseEntry>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseEntry {
    pub i: usize,
    pub j: usize,
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub value: f64,
}

impl From<&CoeffTensor> for DenseTensor {
    fn from(c: &CoeffTensor) -> Self {
        let values: Vec<f64> = c.entries.iter().map(to_f64).collect();
        let mut by_output = vec![Vec::new(); c.m];
        for ((i, j, k, alpha, beta, gamma), v) in c.nonzero() {
            by_output[k].push(SparseEntry { i, j, alpha, beta, gamma, value: to_f64(v) });
        }
        Self { m: c.m, values, by_output }
    }
}

impl DenseTensor {
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, (i, j, k, a, b, g): TensorIndex) -> f64 {
        self.values[((i * self.m + j) * self.m + k) * 64 + a * 16 + b * 4 + g]
    }

    /// Nonzero couplings feeding output family `k`.
    pub fn entries_for(&self, k: usize) -> &[SparseEntry] {
        &self.by_output[k]
    }

    pub fn is_zero(&self) -> bool {
        self.by_output.iter().all(Vec::is_empty)
    }
}

/// Pointwise `N^k = C^{ijk}_{αβγ} (∂_α u^i)(∂_β∂_γ v^j)`.
///
/// `grad_u[i][α]` and `hess_v[j][β][γ]`; the Hessian should be symmetric in
/// its two derivative slots.
pub fn evaluate_nonlinearity(
    c: &DenseTensor,
    grad_u: &[[f64; 4]],
    hess_v: &[[[f64; 4]; 4]],
) -> Vec<f64> {
    debug_assert_eq!(grad_u.len(), c.m);
    debug_assert_eq!(hess_v.len(), c.m);
    debug_assert!(hess_v.iter().all(|h| {
        (0..4).all(|b| (0..4).all(|g| (h[b][g] - h[g][b]).abs() <= 1e-10 * (1.0 + h[b][g].abs())))
    }));
    (0..c.m)
        .map(|k| {
            c.entries_for(k)
                .iter()
                .map(|e| e.value * grad_u[e.i][e.alpha] * hess_v[e.j][e.beta][e.gamma])
                .sum()
        })
        .collect()
}
