//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use dofbench::geometry::Halfspace;
use dofbench::Rational;
use num_traits::{One, Zero};
use rand::Rng;

/// Solves the square system `a x = b` by Gauss-Jordan elimination; `None`
/// when singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for k in 0..n {
            a[col][k] = &a[col][k] / &p;
        }
        b[col] = &b[col] / &p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..n {
                    let v = &a[col][k] * &f;
                    a[r][k] -= v;
                }
                let v = &b[col] * &f;
                b[r] -= v;
            }
        }
    }
    Some(b)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Every feasible intersection point of `dim` linearly independent
/// boundaries, sorted and deduplicated.
pub fn exhaustive_vertices(hs: &[Halfspace], dim: usize) -> Vec<Vec<Rational>> {
    let mut out = Vec::new();
    for s in subsets(hs.len(), dim) {
        let a = s.iter().map(|&i| hs[i].coeffs.clone()).collect();
        let b = s.iter().map(|&i| hs[i].bound.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            let feasible = hs.iter().all(|h| {
                let lhs: Rational = h.coeffs.iter().zip(&x).map(|(c, v)| c * v).sum();
                lhs <= h.bound
            });
            if feasible {
                out.push(x);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// A box `0 <= x_k <= b_k` cut by `extra` random halfspaces that keep the
/// origin feasible.
pub fn random_bounded_system<R: Rng>(rng: &mut R, dim: usize, extra: usize) -> Vec<Halfspace> {
    let mut hs = Vec::new();
    for k in 0..dim {
        let mut lo = vec![Rational::zero(); dim];
        lo[k] = -Rational::one();
        hs.push(Halfspace::new(lo, Rational::zero()).unwrap());
        let mut hi = vec![Rational::zero(); dim];
        hi[k] = Rational::one();
        hs.push(Halfspace::new(hi, q(rng.random_range(1..6))).unwrap());
    }
    while hs.len() < 2 * dim + extra {
        let coeffs: Vec<Rational> = (0..dim).map(|_| q(rng.random_range(-3..4))).collect();
        if coeffs.iter().all(Zero::is_zero) {
            continue;
        }
        hs.push(Halfspace::new(coeffs, q(rng.random_range(0..8))).unwrap());
    }
    hs
}
