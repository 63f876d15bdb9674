//! Coefficient tensors of `[Γ, N](u, v) = Γ N(u, v) − N(Γu, v) − N(u, Γv)`.

use std::fmt;

use super::{rat, CoeffTensor, TensorError};

pub const DEFAULT_COMMUTATOR_DEPTH: usize = 4;

/// The eight fields `Γ = (∂₀, ∂₁, ∂₂, ∂₃, Ω₁, Ω₂, Ω₃, S)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VectorField {
    Partial(usize),
    /// `Ω_λ = ε_{λμν} x_μ ∂_ν`, `λ ∈ 1..=3`.
    Rotation(usize),
    /// `S = t∂_t + r∂_r`.
    Scaling,
}

impl VectorField {
    pub const ALL: [VectorField; 8] = [
        VectorField::Partial(0),
        VectorField::Partial(1),
        VectorField::Partial(2),
        VectorField::Partial(3),
        VectorField::Rotation(1),
        VectorField::Rotation(2),
        VectorField::Rotation(3),
        VectorField::Scaling,
    ];

    pub fn from_index(idx: usize) -> Result<Self, TensorError> {
        Self::ALL.get(idx).copied().ok_or(TensorError::BadFieldIndex(idx))
    }

    pub fn index(self) -> usize {
        match self {
            VectorField::Partial(mu) => mu,
            VectorField::Rotation(l) => 3 + l,
            VectorField::Scaling => 7,
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Partial(mu) => write!(f, "∂{mu}"),
            VectorField::Rotation(l) => write!(f, "Ω{l}"),
            VectorField::Scaling => write!(f, "S"),
        }
    }
}

/// `ε_{λμν}` on spatial indices `1..=3`; zero if any index is 0.
pub fn levi_civita(l: usize, m: usize, n: usize) -> i64 {
    if l == 0 || m == 0 || n == 0 || l > 3 || m > 3 || n > 3 {
        return 0;
    }
    match (l, m, n) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

pub fn commutator(c: &CoeffTensor, field: VectorField) -> CoeffTensor {
    let m = c.m();
    match field {
        VectorField::Partial(_) => CoeffTensor::zeros(m).expect("m > 0"),
        VectorField::Scaling => c.scale(&rat(-3)),
        VectorField::Rotation(lambda) => {
            let mut out = CoeffTensor::zeros(m).expect("m > 0");
            for ((i, j, k, a, b, g), v) in c.nonzero() {
                // Each source entry C_{abg} contributes to the three slots
                // it can be rotated out of:
                //   C̃_{ab g'} += C_{abg} ε_{λ g' g}
                //   C̃_{a' bg} += C_{abg} ε_{λ a' a}
                //   C̃_{a b' g} += C_{abg} ε_{λ b' b}
                for s in 1..4 {
                    let e = levi_civita(lambda, s, g);
                    if e != 0 {
                        out.add_to((i, j, k, a, b, s), &(v * rat(e)));
                    }
                    let e = levi_civita(lambda, s, a);
                    if e != 0 {
                        out.add_to((i, j, k, s, b, g), &(v * rat(e)));
                    }
                    let e = levi_civita(lambda, s, b);
                    if e != 0 {
                        out.add_to((i, j, k, a, s, g), &(v * rat(e)));
                    }
                }
            }
            out
        }
    }
}

/// `N_d = [Γ_{d_k}, [… [Γ_{d_1}, N]]]`, folding from the first entry of `d`.
pub fn iterated_commutators(
    c: &CoeffTensor,
    d: &[VectorField],
    bound: usize,
) -> Result<CoeffTensor, TensorError> {
    if d.len() > bound {
        return Err(TensorError::SequenceTooLong { len: d.len(), bound });
    }
    Ok(d.iter().fold(c.clone(), |acc, &f| commutator(&acc, f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levi_civita_values() {
        assert_eq!(levi_civita(1, 2, 3), 1);
        assert_eq!(levi_civita(2, 1, 3), -1);
        assert_eq!(levi_civita(1, 1, 3), 0);
        assert_eq!(levi_civita(0, 1, 2), 0);
        let mut sum = 0;
        for a in 1..4 {
            for b in 1..4 {
                for c in 1..4 {
                    sum += levi_civita(a, b, c).abs();
                }
            }
        }
        assert_eq!(sum, 6);
    }

    #[test]
    fn field_index_round_trip() {
        for (i, f) in VectorField::ALL.iter().enumerate() {
            assert_eq!(f.index(), i);
            assert_eq!(VectorField::from_index(i).unwrap(), *f);
        }
        assert!(VectorField::from_index(8).is_err());
    }

    fn sample() -> CoeffTensor {
        let mut c = CoeffTensor::zeros(2).unwrap();
        c.set_symmetric((0, 1, 0, 2, 1, 3), rat(3));
        c.set_symmetric((1, 1, 1, 0, 0, 2), rat(-2));
        c
    }

    #[test]
    fn partial_and_scaling() {
        let c = sample();
        assert!(commutator(&c, VectorField::Partial(2)).is_zero());
        assert_eq!(commutator(&c, VectorField::Scaling), c.scale(&rat(-3)));
    }

    #[test]
    fn iterated_examples() {
        let c = sample();
        assert_eq!(iterated_commutators(&c, &[], 4).unwrap(), c);
        assert_eq!(
            iterated_commutators(&c, &[VectorField::Scaling, VectorField::Scaling], 4).unwrap(),
            c.scale(&rat(9))
        );
        assert!(matches!(
            iterated_commutators(&c, &[VectorField::Scaling; 5], 4),
            Err(TensorError::SequenceTooLong { len: 5, bound: 4 })
        ));
    }

    #[test]
    fn rotation_of_time_only_tensor_vanishes() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        for l in 1..4 {
            assert!(commutator(&c, VectorField::Rotation(l)).is_zero());
        }
    }
}
