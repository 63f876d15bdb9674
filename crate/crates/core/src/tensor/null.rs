//! Symmetry and null-condition checks.
//!
//! A homogeneous cubic vanishes on the cone `X₀² = c²|X'|²` exactly when it
//! is divisible by the (irreducible) quadric, i.e. `q = L·Q` for a linear
//! form `L`. That membership test is a 20×4 exact linear system.

use std::fmt;

use num_traits::Signed;

use super::cubic::{triple_cubic, CubicForm};
use super::{linsolve, rat, CoeffTensor, Rational, SpeedVector, TensorError, TensorIndex};

/// Directions on the unit sphere used for failure witnesses (both sheets).
pub const WITNESS_DIRECTIONS: usize = 2048;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    /// Lexicographically smallest `(i, j, k, α, β, γ)` where
    /// `C^{ijk}_{αβγ} ≠ C^{ikj}_{αβγ}` or `C^{ijk}_{αβγ} ≠ C^{ijk}_{αγβ}`.
    pub violation: Option<TensorIndex>,
}

pub fn check_symmetry(c: &CoeffTensor) -> SymmetryReport {
    let m = c.m();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for a in 0..4 {
                    for b in 0..4 {
                        for g in 0..4 {
                            let v = c.get((i, j, k, a, b, g));
                            if v != c.get((i, k, j, a, b, g)) || v != c.get((i, j, k, a, g, b)) {
                                return SymmetryReport {
                                    symmetric: false,
                                    violation: Some((i, j, k, a, b, g)),
                                };
                            }
                        }
                    }
                }
            }
        }
    }
    SymmetryReport { symmetric: true, violation: None }
}

/// A point on the cone `N_k` where the self-interaction cubic is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct NullWitness {
    pub k: usize,
    pub x: [f64; 4],
    pub value: f64,
}

impl NullWitness {
    /// `|X₀² − c²|X'|²| / (X₀² + c²|X'|²)`.
    pub fn cone_residual(&self, c: f64) -> f64 {
        let s = self.x[1].powi(2) + self.x[2].powi(2) + self.x[3].powi(2);
        let q = self.x[0].powi(2) - c * c * s;
        q.abs() / (self.x[0].powi(2) + c * c * s)
    }
}

impl fmt::Display for NullWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "family {}: q({:.6}, {:.6}, {:.6}, {:.6}) = {:.6e}",
            self.k + 1,
            self.x[0],
            self.x[1],
            self.x[2],
            self.x[3],
            self.value
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyNull {
    /// `q_k = L·Q_k` with the given linear factor.
    Null { factor: [Rational; 4] },
    NotNull(NullWitness),
}

impl FamilyNull {
    pub fn is_null(&self) -> bool {
        matches!(self, FamilyNull::Null { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullReport {
    pub families: Vec<FamilyNull>,
}

impl NullReport {
    pub fn all_null(&self) -> bool {
        self.families.iter().all(FamilyNull::is_null)
    }

    pub fn first_witness(&self) -> Option<&NullWitness> {
        self.families.iter().find_map(|f| match f {
            FamilyNull::NotNull(w) => Some(w),
            FamilyNull::Null { .. } => None,
        })
    }
}

/// Diagonal of `X₀² − c²(X₁² + X₂² + X₃²)`.
pub fn cone_quadric(c: &Rational) -> [Rational; 4] {
    let c2 = -(c * c);
    [rat(1), c2.clone(), c2.clone(), c2]
}

/// Columns `X_α·Q` of the divisibility system, as a 20×4 row-major matrix.
pub(crate) fn divisibility_matrix(c: &Rational) -> Vec<Vec<Rational>> {
    let quad = cone_quadric(c);
    let columns: Vec<CubicForm> = (0..4)
        .map(|a| {
            let mut l: [Rational; 4] = Default::default();
            l[a] = rat(1);
            CubicForm::linear_times_diagonal_quadric(&l, &quad)
        })
        .collect();
    (0..super::MONOMIAL_COUNT)
        .map(|row| columns.iter().map(|col| col.coeffs()[row].clone()).collect())
        .collect()
}

/// Exact cone divisibility: the linear factor `L` with `q = L·Q`, if any.
pub(crate) fn cone_factor(q: &CubicForm, c: &Rational) -> Option<[Rational; 4]> {
    if q.is_zero() {
        return Some(Default::default());
    }
    let a = divisibility_matrix(c);
    linsolve::solve_exact(&a, q.coeffs()).map(|x| [x[0].clone(), x[1].clone(), x[2].clone(), x[3].clone()])
}

/// Deterministic quasi-uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Point of maximal `|q|` over `X = (±c, ω)` on the Fibonacci sphere.
pub fn witness_search(q: &CubicForm, k: usize, c: f64) -> NullWitness {
    let mut best = NullWitness { k, x: [c, 1.0, 0.0, 0.0], value: q.eval(&[c, 1.0, 0.0, 0.0]) };
    for w in fibonacci_sphere(WITNESS_DIRECTIONS) {
        for sheet in [1.0, -1.0] {
            let x = [sheet * c, w[0], w[1], w[2]];
            let v = q.eval(&x);
            if v.abs() > best.value.abs() {
                best = NullWitness { k, x, value: v };
            }
        }
    }
    best
}

/// Null condition per family: `q_k` vanishes on `N_k`.
pub fn check_null(c: &CoeffTensor, speeds: &SpeedVector) -> Result<NullReport, TensorError> {
    if speeds.len() != c.m() {
        return Err(TensorError::SpeedCount { expected: c.m(), got: speeds.len() });
    }
    validate_speeds(speeds)?;
    let families = (0..c.m())
        .map(|k| family_verdict(&triple_cubic(c, k, k, k), k, speeds, k))
        .collect();
    Ok(NullReport { families })
}

fn validate_speeds(speeds: &SpeedVector) -> Result<(), TensorError> {
    for (i, ck) in speeds.exact().iter().enumerate() {
        if !ck.is_positive() {
            return Err(TensorError::NonPositiveSpeed { index: i + 1, value: ck.to_string() });
        }
    }
    Ok(())
}

fn family_verdict(q: &CubicForm, k: usize, speeds: &SpeedVector, speed_of: usize) -> FamilyNull {
    match cone_factor(q, &speeds.exact()[speed_of]) {
        Some(factor) => FamilyNull::Null { factor },
        None => FamilyNull::NotNull(witness_search(q, k, speeds.get(speed_of))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedNullReport {
    pub null: bool,
    /// Offending family triple `(i, j, k)` and a cone point for it.
    pub witness: Option<((usize, usize, usize), NullWitness)>,
}

/// Null condition for repeated speeds: every `(i, j, k)` inside one speed
/// group must give a cubic vanishing on that group's cone.
pub fn check_null_extended(
    c: &CoeffTensor,
    speeds: &SpeedVector,
    groups: &[Vec<usize>],
) -> Result<ExtendedNullReport, TensorError> {
    if speeds.len() != c.m() {
        return Err(TensorError::SpeedCount { expected: c.m(), got: speeds.len() });
    }
    validate_speeds(speeds)?;
    validate_partition(speeds, groups)?;
    for group in groups {
        for &i in group {
            for &j in group {
                for &k in group {
                    let q = triple_cubic(c, i, j, k);
                    if let FamilyNull::NotNull(w) = family_verdict(&q, k, speeds, group[0]) {
                        return Ok(ExtendedNullReport { null: false, witness: Some(((i, j, k), w)) });
                    }
                }
            }
        }
    }
    Ok(ExtendedNullReport { null: true, witness: None })
}

fn validate_partition(speeds: &SpeedVector, groups: &[Vec<usize>]) -> Result<(), TensorError> {
    let m = speeds.len();
    let mut seen = vec![false; m];
    for g in groups {
        if g.is_empty() {
            return Err(TensorError::BadPartition("empty group".into()));
        }
        for &k in g {
            if k >= m {
                return Err(TensorError::BadPartition(format!("family {} out of range", k + 1)));
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(TensorError::BadPartition(format!("family {} listed twice", k + 1)));
            }
            if speeds.exact()[k] != speeds.exact()[g[0]] {
                return Err(TensorError::BadPartition(format!(
                    "families {} and {} share a group but have different speeds",
                    g[0] + 1,
                    k + 1
                )));
            }
        }
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(TensorError::BadPartition(format!("family {} not covered", k + 1)));
    }
    for (p, a) in groups.iter().enumerate() {
        for b in &groups[p + 1..] {
            if speeds.exact()[a[0]] == speeds.exact()[b[0]] {
                return Err(TensorError::BadPartition(format!(
                    "families {} and {} have equal speeds but different groups",
                    a[0] + 1,
                    b[0] + 1
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{rat_frac, self_cubic};

    fn speeds(cs: &[i64]) -> SpeedVector {
        SpeedVector::with_repeats(cs.iter().map(|&c| rat(c)).collect()).unwrap()
    }

    #[test]
    fn symmetry_examples() {
        assert!(check_symmetry(&CoeffTensor::zeros(1).unwrap()).symmetric);

        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        assert!(check_symmetry(&c).symmetric);

        let mut c = CoeffTensor::zeros(2).unwrap();
        c.set((0, 0, 1, 0, 0, 0), rat(1));
        let r = check_symmetry(&c);
        assert!(!r.symmetric);
        // (1,1,2,0,0,0) in 1-based family numbering
        assert_eq!(r.violation, Some((0, 0, 1, 0, 0, 0)));
    }

    #[test]
    fn beta_gamma_asymmetry_detected() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 2, 1, 3), rat(1));
        assert_eq!(check_symmetry(&c).violation, Some((0, 0, 0, 2, 1, 3)));
    }

    #[test]
    fn zero_tensor_is_null() {
        let c = CoeffTensor::zeros(3).unwrap();
        let s = SpeedVector::new(vec![rat(3), rat(2), rat(1)]).unwrap();
        assert!(check_null(&c, &s).unwrap().all_null());
    }

    #[test]
    fn x0_cubed_fails_with_witness() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        let r = check_null(&c, &speeds(&[1])).unwrap();
        let w = r.first_witness().unwrap();
        // X₀³ peaks at |X₀| = c on the unit-direction cone: value ±1.
        assert!((w.value.abs() - 1.0).abs() < 1e-12);
        assert!(w.cone_residual(1.0) < 1e-12);
        let q = self_cubic(&c, 0).unwrap();
        assert_eq!(q.eval(&[1.0, 1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn cone_multiple_is_null_with_factor() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        for l in 1..4 {
            c.set((0, 0, 0, 0, l, l), rat(-4));
        }
        let r = check_null(&c, &speeds(&[2])).unwrap();
        match &r.families[0] {
            FamilyNull::Null { factor } => {
                assert_eq!(factor, &[rat(1), rat(0), rat(0), rat(0)]);
            }
            other => panic!("expected null, got {other:?}"),
        }
        // dense sampling oracle
        let q = self_cubic(&c, 0).unwrap();
        for w in fibonacci_sphere(10_000) {
            for s in [2.0, -2.0] {
                assert!(q.eval(&[s, w[0], w[1], w[2]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn wrong_speed_breaks_nullness() {
        let mut c = CoeffTensor::zeros(1).unwrap();
        c.set((0, 0, 0, 0, 0, 0), rat(1));
        for l in 1..4 {
            c.set((0, 0, 0, 0, l, l), rat(-4));
        }
        let s = SpeedVector::new(vec![rat_frac(3, 2)]).unwrap();
        assert!(!check_null(&c, &s).unwrap().all_null());
    }

    #[test]
    fn extended_reduces_to_plain_for_singletons() {
        let mut c = CoeffTensor::zeros(2).unwrap();
        c.set((1, 1, 1, 0, 0, 0), rat(1));
        c.set((0, 1, 1, 1, 0, 0), rat(1));
        let s = SpeedVector::new(vec![rat(2), rat(1)]).unwrap();
        let plain = check_null(&c, &s).unwrap();
        let ext = check_null_extended(&c, &s, &[vec![0], vec![1]]).unwrap();
        assert_eq!(plain.all_null(), ext.null);
        assert!(!ext.null);
        assert_eq!(ext.witness.unwrap().0, (1, 1, 1));
    }

    #[test]
    fn extended_equal_speeds() {
        let s = speeds(&[1, 1]);
        let groups = [vec![0, 1]];
        let c = CoeffTensor::zeros(2).unwrap();
        assert!(check_null_extended(&c, &s, &groups).unwrap().null);

        let mut c = CoeffTensor::zeros(2).unwrap();
        c.set((0, 1, 0, 0, 0, 0), rat(1));
        let r = check_null_extended(&c, &s, &groups).unwrap();
        assert!(!r.null);
        let (triple, w) = r.witness.unwrap();
        assert_eq!(triple, (0, 1, 0));
        assert!(w.cone_residual(1.0) < 1e-12);
        assert!(w.value.abs() > 0.0);
        // sampling oracle at X = (1, 1, 0, 0)
        let q = triple_cubic(&c, 0, 1, 0);
        assert_eq!(q.eval(&[1.0, 1.0, 0.0, 0.0]), 1.0);
    }

    #[test]
    fn extended_rejects_bad_partitions() {
        let s = speeds(&[2, 1, 1]);
        let c = CoeffTensor::zeros(3).unwrap();
        for bad in [
            vec![vec![0, 1], vec![2]],
            vec![vec![0], vec![1]],
            vec![vec![0], vec![1], vec![2]],
            vec![vec![0], vec![1, 2, 2]],
            vec![vec![0], vec![1, 3]],
        ] {
            assert!(
                matches!(check_null_extended(&c, &s, &bad), Err(TensorError::BadPartition(_))),
                "{bad:?}"
            );
        }
        assert!(check_null_extended(&c, &s, &[vec![0], vec![1, 2]]).unwrap().null);
    }

    #[test]
    fn fibonacci_points_are_unit() {
        for p in fibonacci_sphere(WITNESS_DIRECTIONS) {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
