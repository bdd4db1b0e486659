//! Elimination of monomial rows: a row of nominal level `m` whose only live
//! unknown of order `m + 1` is pivoted out and substituted into every other row.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::algebra::Rat;
use crate::field::Field;
use crate::prolong::SparseRow;

/// Outcome of [`eliminate`]. Row entries index into `remaining_cols`.
#[derive(Clone, Debug)]
pub struct Elimination<E> {
    pub ncols: usize,
    pub gauge_cols: Vec<usize>,
    pub remaining_cols: Vec<usize>,
    pub rows: Vec<SparseRow<E>>,
    /// Pivot column and pivot row (original column indices), in elimination order.
    pub log: Vec<(usize, Vec<(usize, E)>)>,
    pub zero_rows_dropped: usize,
}

impl<E: Clone> Elimination<E> {
    pub fn eliminated_count(&self) -> usize {
        self.log.len()
    }

    /// Extends a solution of the reduced system (zero on gauge columns) to all columns.
    pub fn lift<F: Field<E = E>>(&self, f: &F, reduced: &[E]) -> Vec<E> {
        assert_eq!(reduced.len(), self.remaining_cols.len());
        let mut full = vec![f.zero(); self.ncols];
        for (p, &c) in self.remaining_cols.iter().enumerate() {
            full[c] = reduced[p].clone();
        }
        for (c, row) in self.log.iter().rev() {
            let mut acc = f.zero();
            let mut a = None;
            for (k, v) in row {
                if k == c {
                    a = Some(v);
                } else if !f.is_zero(&full[*k]) {
                    acc = f.add(&acc, &f.mul(v, &full[*k]));
                }
            }
            let a = a.expect("pivot entry present");
            full[*c] = f.neg(&f.mul(&acc, &f.inv(a)));
        }
        full
    }
}

impl Elimination<Rat> {
    pub fn rational_rows(&self) -> Vec<Vec<(usize, Rat)>> {
        self.rows.iter().map(|r| r.entries.clone()).collect()
    }
}

fn top_count<E>(level: u32, entries: &[(usize, E)], orders: &[u32]) -> usize {
    entries.iter().filter(|(c, _)| orders[*c] == level + 1).count()
}

/// `s - factor * p`, dropping column `skip`.
fn axpy<F: Field>(f: &F, s: &[(usize, F::E)], factor: &F::E, p: &[(usize, F::E)], skip: usize) -> Vec<(usize, F::E)> {
    let mut out = Vec::with_capacity(s.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < s.len() || j < p.len() {
        let cs = s.get(i).map_or(usize::MAX, |e| e.0);
        let cp = p.get(j).map_or(usize::MAX, |e| e.0);
        let (col, val) = if cs < cp {
            i += 1;
            (cs, s[i - 1].1.clone())
        } else if cp < cs {
            j += 1;
            (cp, f.neg(&f.mul(factor, &p[j - 1].1)))
        } else {
            i += 1;
            j += 1;
            (cs, f.sub(&s[i - 1].1, &f.mul(factor, &p[j - 1].1)))
        };
        if col != skip && !f.is_zero(&val) {
            out.push((col, val));
        }
    }
    out
}

/// Runs monomial-row elimination, highest level first, after zeroing `gauge` columns.
pub fn eliminate<F: Field>(f: &F, rows: Vec<SparseRow<F::E>>, orders: &[u32], gauge: &[usize]) -> Elimination<F::E> {
    let ncols = orders.len();
    let mut is_gauge = vec![false; ncols];
    for &g in gauge {
        is_gauge[g] = true;
    }
    let mut live: Vec<Option<SparseRow<F::E>>> = rows
        .into_iter()
        .map(|mut r| {
            r.entries.retain(|(c, _)| !is_gauge[*c]);
            Some(r)
        })
        .collect();
    let mut occ: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    let mut heap = BinaryHeap::new();
    for (n, r) in live.iter().enumerate() {
        let r = r.as_ref().unwrap();
        for (c, _) in &r.entries {
            occ[*c].push(n);
        }
        if top_count(r.eq.m, &r.entries, orders) == 1 {
            heap.push((r.eq.m, Reverse(n)));
        }
    }
    let mut eliminated = vec![false; ncols];
    let mut log = Vec::new();
    while let Some((_, Reverse(n))) = heap.pop() {
        let Some(r) = live[n].as_ref() else { continue };
        let level = r.eq.m;
        let mut tops = r.entries.iter().filter(|(c, _)| orders[*c] == level + 1);
        let (Some((c, a)), None) = (tops.next(), tops.next()) else { continue };
        let (c, inv) = (*c, f.inv(a));
        let pivot = live[n].take().unwrap().entries;
        let mut users = std::mem::take(&mut occ[c]);
        users.sort_unstable();
        users.dedup();
        for s in users {
            let Some(row) = live[s].as_mut() else { continue };
            let Ok(pos) = row.entries.binary_search_by_key(&c, |e| e.0) else { continue };
            let factor = f.mul(&row.entries[pos].1, &inv);
            row.entries = axpy(f, &row.entries, &factor, &pivot, c);
            for (k, _) in &pivot {
                if *k != c {
                    occ[*k].push(s);
                }
            }
            if top_count(row.eq.m, &row.entries, orders) == 1 {
                heap.push((row.eq.m, Reverse(s)));
            }
        }
        eliminated[c] = true;
        log.push((c, pivot));
    }
    let remaining_cols: Vec<usize> = (0..ncols).filter(|&c| !eliminated[c] && !is_gauge[c]).collect();
    let mut pos = vec![usize::MAX; ncols];
    for (p, &c) in remaining_cols.iter().enumerate() {
        pos[c] = p;
    }
    let mut out_rows = Vec::new();
    let mut dropped = 0;
    for r in live.into_iter().flatten() {
        if r.entries.is_empty() {
            dropped += 1;
            continue;
        }
        let entries = r.entries.into_iter().map(|(c, v)| (pos[c], v)).collect();
        out_rows.push(SparseRow { eq: r.eq, entries });
    }
    let mut gauge_cols = gauge.to_vec();
    gauge_cols.sort_unstable();
    gauge_cols.dedup();
    Elimination { ncols, gauge_cols, remaining_cols, rows: out_rows, log, zero_rows_dropped: dropped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Q;
    use crate::system::EqId;

    fn row(m: u32, e: &[(usize, i64)]) -> SparseRow<Rat> {
        SparseRow { eq: EqId { i: 0, j: 0, k: 0, m, mu: 0 }, entries: e.iter().map(|&(c, v)| (c, Rat::from(v))).collect() }
    }

    #[test]
    fn chain_is_eliminated_and_lifts() {
        // columns 0,1 order 0; 2,3 order 1
        let orders = [0, 0, 1, 1];
        let rows = vec![row(0, &[(0, 1), (2, 2)]), row(0, &[(1, 1), (2, 1), (3, 1)]), row(1, &[(0, 1), (1, -1), (3, 1)])];
        let el = eliminate(&Q, rows, &orders, &[]);
        assert_eq!(el.eliminated_count(), 2);
        assert_eq!(el.remaining_cols, vec![0, 1]);
        assert_eq!(el.rows.len(), 1);
        // x2 = -x0/2, x3 = x0/2 - x1, leaving 3/2 x0 - 2 x1
        let r = &el.rows[0].entries;
        let sol = [Rat::from(4), Rat::from(3)];
        let dot: Rat = r.iter().map(|(c, v)| Rat::from(v * &sol[*c])).sum();
        assert_eq!(dot, 0);
        let full = el.lift(&Q, &sol);
        assert_eq!(full[2], Rat::from(-2));
        assert_eq!(full[3], Rat::from(-1));
    }
}
