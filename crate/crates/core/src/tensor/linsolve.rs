use num_traits::Zero;

use super::Rational;

/// Solves `A x = b` exactly; `None` when the system is inconsistent.
///
/// `A` is row-major with any shape. Free variables are set to zero, so for
/// an underdetermined consistent system one particular solution is returned.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    assert_eq!(rows, b.len());
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(r, p);
        let inv = aug[r][c].recip();
        for v in aug[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for jj in c..=cols {
                    let d = &f * &aug[r][jj];
                    aug[i][jj] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if aug[r..].iter().any(|row| !row[cols].is_zero()) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = aug[row][cols].clone();
    }
    Some(x)
}

/// Least-squares solution of `A x ≈ b` through the normal equations
/// `AᵀA x = Aᵀb`. `A` must have full column rank.
pub fn solve_normal_equations(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut gram = vec![vec![Rational::zero(); cols]; cols];
    let mut rhs = vec![Rational::zero(); cols];
    for (row, bv) in a.iter().zip(b) {
        for p in 0..cols {
            if row[p].is_zero() {
                continue;
            }
            rhs[p] += &row[p] * bv;
            for q in 0..cols {
                gram[p][q] += &row[p] * &row[q];
            }
        }
    }
    solve_exact(&gram, &rhs)
}
