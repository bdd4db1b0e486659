//! Minimal field interface shared by the exact and modular elimination paths.

use std::fmt::Debug;

use crate::algebra::Rat;
use crate::modp::Fp;

pub trait Field {
    type E: Clone + Debug + PartialEq;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    /// Inverse of a nonzero element.
    fn inv(&self, a: &Self::E) -> Self::E;
}

/// The rationals.
#[derive(Clone, Copy, Debug, Default)]
pub struct Q;

impl Field for Q {
    type E = Rat;

    fn zero(&self) -> Rat {
        Rat::new()
    }
    fn one(&self) -> Rat {
        Rat::from(1)
    }
    fn is_zero(&self, a: &Rat) -> bool {
        *a == 0
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        Rat::from(a + b)
    }
    fn sub(&self, a: &Rat, b: &Rat) -> Rat {
        Rat::from(a - b)
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        Rat::from(a * b)
    }
    fn neg(&self, a: &Rat) -> Rat {
        Rat::from(-a)
    }
    fn inv(&self, a: &Rat) -> Rat {
        Rat::from(a.recip_ref())
    }
}

impl Field for Fp {
    type E = u64;

    fn zero(&self) -> u64 {
        Fp::zero(self)
    }
    fn one(&self) -> u64 {
        Fp::one(self)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        Fp::add(self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        Fp::sub(self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        Fp::mul(self, *a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        Fp::neg(self, *a)
    }
    fn inv(&self, a: &u64) -> u64 {
        Fp::inv(self, *a)
    }
}

/// Rank of a dense matrix by row reduction; rows are consumed.
pub fn dense_rank<F: Field>(f: &F, mut rows: Vec<Vec<F::E>>) -> usize {
    dense_echelon(f, &mut rows).len()
}

/// Reduces `rows` in place to echelon form and returns the pivot columns,
/// row `r` carrying pivot `pivots[r]`. Zero rows are moved to the end.
pub fn dense_echelon<F: Field>(f: &F, rows: &mut [Vec<F::E>]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !f.is_zero(&rows[i][c])) else {
            continue;
        };
        rows.swap(r, p);
        let inv = f.inv(&rows[r][c]);
        for v in rows[r][c..].iter_mut() {
            *v = f.mul(v, &inv);
        }
        let (head, tail) = rows.split_at_mut(r + 1);
        let prow = &head[r];
        for row in tail.iter_mut() {
            if f.is_zero(&row[c]) {
                continue;
            }
            let factor = row[c].clone();
            for (v, pv) in row[c..].iter_mut().zip(&prow[c..]) {
                if !f.is_zero(pv) {
                    *v = f.sub(v, &f.mul(&factor, pv));
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Right kernel basis of a dense matrix with `ncols` columns.
pub fn dense_kernel<F: Field>(f: &F, mut rows: Vec<Vec<F::E>>, ncols: usize) -> Vec<Vec<F::E>> {
    let piv = dense_echelon(f, &mut rows);
    let mut is_pivot = vec![false; ncols];
    for &c in &piv {
        is_pivot[c] = true;
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![f.zero(); ncols];
        x[free] = f.one();
        for (r, &c) in piv.iter().enumerate().rev() {
            let mut acc = f.zero();
            for k in c + 1..ncols {
                if !f.is_zero(&rows[r][k]) && !f.is_zero(&x[k]) {
                    acc = f.add(&acc, &f.mul(&rows[r][k], &x[k]));
                }
            }
            x[c] = f.neg(&acc);
        }
        out.push(x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_over_q_and_fp() {
        let m = |v: &[i64]| v.iter().map(|&x| Rat::from(x)).collect::<Vec<_>>();
        let rows = vec![m(&[1, 2, 3]), m(&[2, 4, 6]), m(&[0, 1, 1])];
        assert_eq!(dense_rank(&Q, rows), 2);
        let fp = Fp::new(7);
        let rows = vec![vec![fp.from_i64(1), fp.from_i64(3)], vec![fp.from_i64(2), fp.from_i64(-1)]];
        // det = -1 - 6 = -7 = 0 mod 7
        assert_eq!(dense_rank(&fp, rows), 1);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let m = |v: &[i64]| v.iter().map(|&x| Rat::from(x)).collect::<Vec<_>>();
        let a = vec![m(&[1, 2, 3, 4]), m(&[2, 4, 7, 9])];
        let ker = dense_kernel(&Q, a.clone(), 4);
        assert_eq!(ker.len(), 2);
        for v in &ker {
            for row in &a {
                let dot: Rat = row.iter().zip(v).map(|(x, y)| Rat::from(x * y)).sum();
                assert_eq!(dot, 0);
            }
        }
    }
}
