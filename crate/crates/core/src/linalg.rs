//! Exact Gaussian elimination over the rationals.

use crate::rational::Rational;
use num_traits::{One, Zero};

pub type RatMatrix = Vec<Vec<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let factor = m[i][c].clone();
                let (pivot_row, row) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (x, p) in row.iter_mut().zip(pivot_row) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &RatMatrix) -> usize {
    let mut work = m.clone();
    rref(&mut work).len()
}

/// Unique solution of `a x = b` for a square nonsingular `a`, else `None`.
pub fn solve_unique(a: &RatMatrix, b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: RatMatrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n].clone()).collect())
}

/// Basis of the right nullspace `{x : m x = 0}` for an `r x n` matrix.
pub fn nullspace(m: &RatMatrix, n: usize) -> Vec<Vec<Rational>> {
    let mut work = m.clone();
    let pivots = rref(&mut work);
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -work[row][f].clone();
            }
            v
        })
        .collect()
}

/// Overflow-checked `i128` kernels used as a fast path. Every function
/// returns `None` on overflow so callers can fall back to exact rationals.
pub mod small {
    use crate::rational::Rational;
    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, ToPrimitive};

    /// Fraction-free Bareiss determinant.
    pub fn det(m: &[Vec<i128>]) -> Option<i128> {
        let n = m.len();
        if n == 0 {
            return Some(1);
        }
        let mut a: Vec<Vec<i128>> = m.to_vec();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                    return Some(0);
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                    a[i][j] = num / prev;
                }
            }
            prev = a[k][k];
        }
        a[n - 1][n - 1].checked_mul(sign)
    }

    /// Generalized cross product of `n - 1` rows of length `n`: a vector
    /// orthogonal to every row, zero iff the rows are dependent.
    pub fn cofactor_normal(rows: &[Vec<i128>]) -> Option<Vec<i128>> {
        let n = rows.len() + 1;
        (0..n)
            .map(|j| {
                let minor: Vec<Vec<i128>> = rows
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let d = det(&minor)?;
                if j % 2 == 0 { Some(d) } else { d.checked_neg() }
            })
            .collect()
    }

    pub fn dot(a: &[i128], b: &[i128]) -> Option<i128> {
        a.iter().zip(b).try_fold(0i128, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?))
    }

    /// Common denominator of a set of rationals, if it fits.
    pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<i128> {
        let mut l = BigInt::one();
        for v in values {
            l = l.lcm(v.denom());
        }
        l.to_i128().filter(|&x| x < 1i128 << 40)
    }

    /// `value * scale` as an integer; `scale` must clear the denominator.
    pub fn scaled(value: &Rational, scale: i128) -> Option<i128> {
        let x = value * Rational::from_integer(BigInt::from(scale));
        x.to_integer().to_i128().filter(|v| v.abs() < 1i128 << 50)
    }

    /// Divide out the gcd of the entries.
    pub fn primitive(v: &mut [i128]) {
        let g = v.iter().fold(0i128, |g, &x| g.gcd(&x));
        if g > 1 {
            v.iter_mut().for_each(|x| *x /= g);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn solves_small_system() {
        let a = vec![vec![int(1), int(1)], vec![int(0), int(1)]];
        let x = solve_unique(&a, &[rat(4, 3), rat(9, 10)]).unwrap();
        assert_eq!(x, vec![rat(13, 30), rat(9, 10)]);
    }

    #[test]
    fn singular_has_no_unique_solution() {
        let a = vec![vec![int(1), int(2)], vec![int(2), int(4)]];
        assert!(solve_unique(&a, &[int(1), int(2)]).is_none());
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn nullspace_of_single_row() {
        let m = vec![vec![int(1), int(1), int(0)]];
        let basis = nullspace(&m, 3);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(crate::rational::dot(&m[0], v).is_zero());
        }
        assert_eq!(nullspace(&vec![], 2).len(), 2);
    }
}
