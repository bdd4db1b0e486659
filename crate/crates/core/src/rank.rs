//! Rank and kernel of sparse integer matrices: modular lower bounds and exact elimination.

use std::io::{self, BufRead, Write};

use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::algebra::Rat;
use crate::field::dense_rank;
use crate::modp::Fp;
use crate::prolong::SparseRow;

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseIntMatrix {
    pub nrows: usize,
    pub ncols: usize,
    /// Rows sorted by column, no explicit zeros.
    pub rows: Vec<Vec<(usize, Integer)>>,
}

fn content(row: &[(usize, Integer)]) -> Integer {
    let mut g = Integer::new();
    for (_, v) in row {
        g.gcd_mut(v);
        if g == 1 {
            break;
        }
    }
    g
}

fn make_primitive(row: &mut [(usize, Integer)]) {
    let g = content(row);
    if g > 1 {
        for (_, v) in row.iter_mut() {
            v.div_exact_mut(&g);
        }
    }
}

/// A rational row scaled to coprime integers (sign preserved).
pub fn integer_row(row: &[(usize, Rat)]) -> Vec<(usize, Integer)> {
    let mut l = Integer::from(1);
    for (_, v) in row {
        l.lcm_mut(v.denom());
    }
    let mut out: Vec<(usize, Integer)> =
        row.iter().filter(|(_, v)| *v != 0).map(|(c, v)| (*c, Integer::from(v.numer() * &l) / v.denom())).collect();
    make_primitive(&mut out);
    out
}

impl SparseIntMatrix {
    pub fn new(ncols: usize, rows: Vec<Vec<(usize, Integer)>>) -> Self {
        SparseIntMatrix { nrows: rows.len(), ncols, rows }
    }

    /// Clears denominators row by row and removes each row's content.
    pub fn from_rational_rows(ncols: usize, rows: &[Vec<(usize, Rat)>]) -> Self {
        Self::new(ncols, rows.iter().map(|r| integer_row(r)).collect())
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0).map(|(c, v)| (c, Integer::from(*v))).collect())
            .collect();
        Self::new(ncols, rows)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.len()).sum()
    }

    /// Dense image modulo `p`.
    pub fn to_fp_dense(&self, fp: &Fp) -> Vec<Vec<u64>> {
        self.rows
            .iter()
            .map(|r| {
                let mut v = vec![0u64; self.ncols];
                for (c, x) in r {
                    v[*c] = fp.from_int(x);
                }
                v
            })
            .collect()
    }

    /// Exact check of `A v = 0`.
    pub fn annihilates(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ncols);
        self.rows.iter().all(|r| {
            let mut acc = Rat::new();
            for (c, a) in r {
                if v[*c] != 0 {
                    acc += Rat::from(a * &v[*c]);
                }
            }
            acc == 0
        })
    }

    /// Triplet text: a `nrows ncols nnz` header, then one `row col value` line per entry (0-based).
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                writeln!(w, "{r} {c} {v}")?;
            }
        }
        Ok(())
    }

    pub fn read_triplets<R: BufRead>(r: R) -> io::Result<Self> {
        let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| bad("empty input".into()))??;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(format!("bad header '{header}'"))))
            .collect::<Result<_, _>>()?;
        let [nrows, ncols, nnz] = h[..] else { return Err(bad(format!("bad header '{header}'"))) };
        let mut rows: Vec<Vec<(usize, Integer)>> = vec![Vec::new(); nrows];
        let mut seen = 0;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(bad(format!("bad entry '{line}'")));
            }
            let (i, j): (usize, usize) = match (t[0].parse(), t[1].parse()) {
                (Ok(i), Ok(j)) if i < nrows && j < ncols => (i, j),
                _ => return Err(bad(format!("index out of range in '{line}'"))),
            };
            let v: Integer = t[2].parse().map_err(|_| bad(format!("bad value in '{line}'")))?;
            if v != 0 {
                rows[i].push((j, v));
            }
            seen += 1;
        }
        if seen != nnz {
            return Err(bad(format!("expected {nnz} entries, found {seen}")));
        }
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let n = row.len();
            row.dedup_by_key(|e| e.0);
            if row.len() != n {
                return Err(bad("duplicate entry".into()));
            }
        }
        Ok(SparseIntMatrix { nrows, ncols, rows })
    }
}

/// Dense matrix over F_p from sparse rows.
pub fn fp_dense(rows: &[SparseRow<u64>], ncols: usize) -> Vec<Vec<u64>> {
    rows.iter()
        .map(|r| {
            let mut v = vec![0u64; ncols];
            for (c, x) in &r.entries {
                v[*c] = *x;
            }
            v
        })
        .collect()
}

/// Rank over `F_p`; never exceeds the rank over the rationals.
pub fn rank_mod_p(a: &SparseIntMatrix, p: u64) -> usize {
    let fp = Fp::new(p);
    dense_rank(&fp, a.to_fp_dense(&fp))
}

/// Echelon form from exact elimination: pivot column and its (primitive) row.
#[derive(Clone, Debug)]
pub struct IntEchelon {
    pub ncols: usize,
    pub pivots: Vec<(usize, Vec<(usize, Integer)>)>,
}

/// `(a * s - b * p) / content`, dropping column `skip`.
fn cross(a: &Integer, s: &[(usize, Integer)], b: &Integer, p: &[(usize, Integer)], skip: usize) -> Vec<(usize, Integer)> {
    let mut out = Vec::with_capacity(s.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < s.len() || j < p.len() {
        let cs = s.get(i).map_or(usize::MAX, |e| e.0);
        let cp = p.get(j).map_or(usize::MAX, |e| e.0);
        let (col, val) = if cs < cp {
            i += 1;
            (cs, Integer::from(a * &s[i - 1].1))
        } else if cp < cs {
            j += 1;
            (cp, -Integer::from(b * &p[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (cs, Integer::from(a * &s[i - 1].1) - Integer::from(b * &p[j - 1].1))
        };
        if col != skip && val != 0 {
            out.push((col, val));
        }
    }
    make_primitive(&mut out);
    out
}

/// Fraction-free sparse elimination. Pivot column: fewest live entries;
/// pivot row within it: shortest, then smallest pivot magnitude.
pub fn echelon_exact(a: &SparseIntMatrix) -> IntEchelon {
    let mut live: Vec<Option<Vec<(usize, Integer)>>> =
        a.rows.iter().map(|r| if r.is_empty() { None } else { Some(r.clone()) }).collect();
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); a.ncols];
    let mut count = vec![0usize; a.ncols];
    for (n, r) in live.iter().enumerate() {
        for (c, _) in r.iter().flatten() {
            occ[*c].push(n);
            count[*c] += 1;
        }
    }
    let mut done = vec![false; a.ncols];
    let mut pivots = Vec::new();
    loop {
        let Some(c) = (0..a.ncols).filter(|&c| !done[c] && count[c] > 0).min_by_key(|&c| (count[c], c)) else {
            break;
        };
        let mut users = std::mem::take(&mut occ[c]);
        users.sort_unstable();
        users.dedup();
        users.retain(|&s| live[s].as_ref().is_some_and(|r| r.binary_search_by_key(&c, |e| e.0).is_ok()));
        let entry = |s: usize| {
            let r = live[s].as_ref().unwrap();
            let v = &r[r.binary_search_by_key(&c, |e| e.0).unwrap()].1;
            (r.len(), v.significant_bits(), s)
        };
        let prow_idx = *users.iter().min_by_key(|&&s| entry(s)).expect("column count is positive");
        let prow = live[prow_idx].take().unwrap();
        for (k, _) in &prow {
            count[*k] -= 1;
        }
        let pv = prow[prow.binary_search_by_key(&c, |e| e.0).unwrap()].1.clone();
        for s in users {
            if s == prow_idx {
                continue;
            }
            let row = live[s].take().unwrap();
            let sv = &row[row.binary_search_by_key(&c, |e| e.0).unwrap()].1;
            let g = Integer::from(pv.gcd_ref(sv));
            let (a_mul, b_mul) = (Integer::from(pv.div_exact_ref(&g)), Integer::from(sv.div_exact_ref(&g)));
            for (k, _) in &row {
                count[*k] -= 1;
            }
            let new = cross(&a_mul, &row, &b_mul, &prow, c);
            for (k, _) in &new {
                count[*k] += 1;
                occ[*k].push(s);
            }
            if !new.is_empty() {
                live[s] = Some(new);
            }
        }
        done[c] = true;
        pivots.push((c, prow));
    }
    IntEchelon { ncols: a.ncols, pivots }
}

impl IntEchelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Kernel basis: one vector per non-pivot column, by back substitution.
    pub fn kernel_basis(&self) -> Vec<Vec<Rat>> {
        let mut is_pivot = vec![false; self.ncols];
        for (c, _) in &self.pivots {
            is_pivot[*c] = true;
        }
        let mut out = Vec::new();
        for free in (0..self.ncols).filter(|&c| !is_pivot[c]) {
            let mut x = vec![Rat::new(); self.ncols];
            x[free] = Rat::from(1);
            for (c, row) in self.pivots.iter().rev() {
                let mut acc = Rat::new();
                let mut pv = None;
                for (k, v) in row {
                    if k == c {
                        pv = Some(v);
                    } else if x[*k] != 0 {
                        acc += Rat::from(v * &x[*k]);
                    }
                }
                x[*c] = -acc / Rat::from(pv.unwrap());
            }
            out.push(x);
        }
        out
    }
}

pub fn rank_exact(a: &SparseIntMatrix) -> usize {
    echelon_exact(a).rank()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMethod {
    /// Rank modulo a prime equals the column count.
    ModularFullRank,
    /// Rank modulo a prime plus the number of exactly verified, independent kernel vectors equals the column count.
    ModularVerifiedKernel,
    ExactElimination,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    pub rank: usize,
    pub method: RankMethod,
    pub primes_used: Vec<u64>,
    pub kernel_dim: usize,
    pub kernel_verified: bool,
}

/// Failure of an exact self-check; never expected on correct input.
#[derive(Debug, thiserror::Error)]
#[error("internal consistency failure: {0}")]
pub struct ConsistencyError(pub String);

/// Exact rank with a verified kernel basis.
pub fn kernel_basis(a: &SparseIntMatrix) -> Result<(Vec<Vec<Rat>>, RankCertificate), ConsistencyError> {
    let ech = echelon_exact(a);
    let ker = ech.kernel_basis();
    if let Some(n) = ker.iter().position(|v| !a.annihilates(v)) {
        return Err(ConsistencyError(format!("kernel vector {n} does not annihilate the matrix")));
    }
    let cert = RankCertificate {
        rank: ech.rank(),
        method: RankMethod::ExactElimination,
        primes_used: vec![],
        kernel_dim: ker.len(),
        kernel_verified: true,
    };
    Ok((ker, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        assert_eq!(rank_exact(&SparseIntMatrix::from_dense(&[vec![2, 4], vec![1, 2]])), 1);
        let id = SparseIntMatrix::from_dense(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        assert_eq!(rank_mod_p(&id, 1_000_000_007), 3);
        assert!(kernel_basis(&id).unwrap().0.is_empty());
        let (k, c) = kernel_basis(&SparseIntMatrix::from_dense(&[vec![1, 1, 0]])).unwrap();
        assert_eq!((k.len(), c.kernel_dim, c.rank), (2, 2, 1));
    }

    #[test]
    fn modular_rank_is_a_lower_bound() {
        let q = 1_000_000_007i64;
        let a = SparseIntMatrix::from_dense(&[vec![q, 0], vec![0, 1]]);
        assert_eq!(rank_mod_p(&a, q as u64), 1);
        assert_eq!(rank_exact(&a), 2);
    }

    #[test]
    fn rational_rows_are_scaled() {
        let a = SparseIntMatrix::from_rational_rows(2, &[vec![(0, Rat::from((1, 2))), (1, Rat::from((-3, 4)))]]);
        assert_eq!(a.rows[0], vec![(0, Integer::from(2)), (1, Integer::from(-3))]);
        let b = SparseIntMatrix::from_rational_rows(2, &[vec![(0, Rat::from(6)), (1, Rat::from(-4))]]);
        assert_eq!(b.rows[0], vec![(0, Integer::from(3)), (1, Integer::from(-2))]);
    }

    #[test]
    fn triplets_round_trip() {
        let a = SparseIntMatrix::from_dense(&[vec![0, 5, -7], vec![123456789012345, 0, 0]]);
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("2 3 3\n"));
        assert_eq!(SparseIntMatrix::read_triplets(&buf[..]).unwrap(), a);
        assert!(SparseIntMatrix::read_triplets(&b"2 3 4\n0 1 5\n"[..]).is_err());
    }
}
