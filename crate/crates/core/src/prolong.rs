//! Prolongation of the order-0 system and its evaluation at a point.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::algebra::{AlgebraError, Jet, Rat, RatFunc};
use crate::field::{dense_rank, Q};
use crate::modp::Fp;
use crate::momentum::Mono;
use crate::system::{
    equation_templates, trivial_exponents, BranchSpec, CoefTerm, DerivCoef, EqId, HamiltonianData, LinearForm,
    UnknownId,
};

/// Sort key of a column: block `floor(i/2)`, then derivative order, then indices.
pub fn column_key(u: &UnknownId) -> (u32, u32, u32, u32, u32, u32) {
    (u.i / 2, u.m, u.i, u.j, u.k, u.mu)
}

fn tri(a: u32, b: u32) -> usize {
    let n = (a + b) as usize;
    n * (n + 1) / 2 + b as usize
}

fn binomials(n: u32) -> Vec<Vec<i64>> {
    let mut c = vec![vec![0i64; n as usize + 1]; n as usize + 1];
    for i in 0..=n as usize {
        c[i][0] = 1;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j < i { c[i - 1][j] } else { 0 };
        }
    }
    c
}

/// All derivatives of order `<= M` of the order-0 equations of a branch.
///
/// Rows are produced on demand from the order-0 templates; the unknowns run
/// over every derivative of order `<= M + 1`.
#[derive(Clone, Debug)]
pub struct ProlongedSystem {
    pub branch: BranchSpec,
    pub order: u32,
    h: HamiltonianData,
    base: Vec<(EqId, LinearForm<DerivCoef>)>,
    columns: Vec<UnknownId>,
    col_index: HashMap<UnknownId, usize>,
}

pub fn prolong(h: &HamiltonianData, branch: &BranchSpec, order: u32) -> ProlongedSystem {
    let base = equation_templates(h, branch);
    let mut columns = Vec::new();
    for ijk in branch.ansatz_ijk() {
        for m in 0..=order + 1 {
            for mu in 0..=m {
                columns.push(UnknownId::with_derivative(ijk, mu, m - mu));
            }
        }
    }
    columns.sort_by_key(column_key);
    let col_index = columns.iter().enumerate().map(|(n, u)| (*u, n)).collect();
    ProlongedSystem { branch: *branch, order, h: h.clone(), base, columns, col_index }
}

impl ProlongedSystem {
    pub fn hamiltonian(&self) -> &HamiltonianData {
        &self.h
    }

    pub fn base_equations(&self) -> &[(EqId, LinearForm<DerivCoef>)] {
        &self.base
    }

    pub fn columns(&self) -> &[UnknownId] {
        &self.columns
    }

    pub fn column_index(&self, u: &UnknownId) -> Option<usize> {
        self.col_index.get(u).copied()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn nrows(&self) -> usize {
        let m = self.order as usize;
        self.base.len() * (m + 1) * (m + 2) / 2
    }

    /// Row labels `(template index, dx, dy)` in output order.
    pub fn row_labels(&self) -> Vec<(usize, u32, u32)> {
        let mut out = Vec::with_capacity(self.nrows());
        for m in 0..=self.order {
            for b in 0..self.base.len() {
                for mu in (0..=m).rev() {
                    out.push((b, mu, m - mu));
                }
            }
        }
        out
    }

    pub fn eq_id(&self, base: usize, dx: u32, dy: u32) -> EqId {
        let e = self.base[base].0;
        EqId { i: e.i, j: e.j, k: e.k, m: dx + dy, mu: dx }
    }

    /// The `(dx, dy)` derivative of template `base`, by the Leibniz rule.
    pub fn row(&self, base: usize, dx: u32, dy: u32) -> LinearForm<DerivCoef> {
        let binom = binomials(dx.max(dy));
        let mut out = LinearForm::default();
        for (u, c) in &self.base[base].1.terms {
            let (ux, uy) = u.orders();
            for b1 in 0..=dx {
                for b2 in 0..=dy {
                    let w = binom[dx as usize][b1 as usize] * binom[dy as usize][b2 as usize];
                    let target = UnknownId::with_derivative(u.ijk(), ux + dx - b1, uy + dy - b2);
                    for (t, mult) in &c.terms {
                        out.add_deriv(target, CoefTerm { f: t.f, dx: t.dx + b1, dy: t.dy + b2 }, w * mult);
                    }
                }
            }
        }
        out
    }

    pub fn rows(&self) -> impl Iterator<Item = (EqId, LinearForm<DerivCoef>)> + '_ {
        self.row_labels().into_iter().map(move |(b, dx, dy)| (self.eq_id(b, dx, dy), self.row(b, dx, dy)))
    }
}

/// Derivatives of the Hamiltonian's coefficient functions at a point.
#[derive(Clone, Debug)]
pub struct PointJets {
    pub x: Rat,
    pub y: Rat,
    pub order: u32,
    jets: Vec<Jet>,
    derivs: Vec<Vec<Rat>>,
}

impl PointJets {
    pub fn new(funcs: &[RatFunc], x: &Rat, y: &Rat, order: u32) -> Result<Self, AlgebraError> {
        let jets = funcs.iter().map(|f| Jet::of(f, x, y, order)).collect::<Result<Vec<_>, _>>()?;
        let derivs = jets
            .iter()
            .map(|j| {
                let mut v = Vec::with_capacity(tri(0, order + 1));
                for n in 0..=order {
                    for b in 0..=n {
                        v.push(j.derivative(n - b, b));
                    }
                }
                v
            })
            .collect();
        Ok(PointJets { x: x.clone(), y: y.clone(), order, jets, derivs })
    }

    pub fn jet(&self, f: usize) -> &Jet {
        &self.jets[f]
    }

    pub fn derivative(&self, f: usize, a: u32, b: u32) -> &Rat {
        &self.derivs[f][tri(a, b)]
    }

    pub fn value(&self, c: &DerivCoef) -> Rat {
        let mut acc = Rat::new();
        for (t, &mult) in &c.terms {
            acc += Rat::from(self.derivative(t.f, t.dx, t.dy) * mult);
        }
        acc
    }
}

/// Sparse row over some field; entries sorted by column, no zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow<E> {
    pub eq: EqId,
    pub entries: Vec<(usize, E)>,
}

/// The prolonged system with coefficients evaluated at a rational point.
#[derive(Clone, Debug)]
pub struct PointSystem {
    pub point: (Rat, Rat),
    pub columns: Vec<UnknownId>,
    pub rows: Vec<SparseRow<Rat>>,
    pub zero_rows_dropped: usize,
}

impl PointSystem {
    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn col_orders(&self) -> Vec<u32> {
        self.columns.iter().map(|u| u.m).collect()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    /// Reduction modulo `p`; `None` if some denominator vanishes.
    pub fn reduce(&self, fp: &Fp) -> Option<Vec<SparseRow<u64>>> {
        let mut out = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let mut entries = Vec::with_capacity(r.entries.len());
            for (c, v) in &r.entries {
                let w = fp.from_rat(v)?;
                if w != 0 {
                    entries.push((*c, w));
                }
            }
            out.push(SparseRow { eq: r.eq, entries });
        }
        Some(out)
    }

    /// Does `v` solve every row exactly?
    pub fn annihilates(&self, v: &[Rat]) -> bool {
        assert_eq!(v.len(), self.ncols());
        self.rows.iter().all(|r| {
            let mut acc = Rat::new();
            for (c, a) in &r.entries {
                if v[*c] != 0 {
                    acc += Rat::from(a * &v[*c]);
                }
            }
            acc == 0
        })
    }

    /// Text dump, one row per line: `eq: col:coeff ...`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let _ = write!(s, "{}:", r.eq);
            for (c, v) in &r.entries {
                let _ = write!(s, " {}:{}", self.columns[*c], v);
            }
            s.push('\n');
        }
        s
    }
}

pub fn point_jets(sys: &ProlongedSystem, x: &Rat, y: &Rat) -> Result<PointJets, AlgebraError> {
    PointJets::new(&sys.h.funcs, x, y, sys.order + 1)
}

pub fn evaluate(sys: &ProlongedSystem, x: &Rat, y: &Rat) -> Result<PointSystem, AlgebraError> {
    Ok(evaluate_with(sys, &point_jets(sys, x, y)?))
}

/// Evaluation without materializing the symbolic prolonged rows: each
/// template term is expanded once per shift and reused for every derivative.
pub fn evaluate_with(sys: &ProlongedSystem, pj: &PointJets) -> PointSystem {
    let mo = sys.order;
    assert!(pj.order > mo, "jets too short for this prolongation order");
    let binom = binomials(mo);
    let nshift = tri(0, mo + 1);
    let mut rows_by_label: HashMap<(usize, u32, u32), Vec<(usize, Rat)>> = HashMap::new();
    for (bidx, (_, lf)) in sys.base.iter().enumerate() {
        // vals[t][tri(b1, b2)] = value of the (b1, b2) derivative of term t's coefficient.
        let terms: Vec<(&UnknownId, Vec<Rat>)> = lf
            .terms
            .iter()
            .map(|(u, c)| {
                let mut v = vec![Rat::new(); nshift];
                for n in 0..=mo {
                    for b2 in 0..=n {
                        let b1 = n - b2;
                        let mut acc = Rat::new();
                        for (t, &mult) in &c.terms {
                            acc += Rat::from(pj.derivative(t.f, t.dx + b1, t.dy + b2) * mult);
                        }
                        v[tri(b1, b2)] = acc;
                    }
                }
                (u, v)
            })
            .collect();
        for m in 0..=mo {
            for dx in 0..=m {
                let dy = m - dx;
                let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
                for (u, vals) in &terms {
                    let (ux, uy) = u.orders();
                    for b1 in 0..=dx {
                        for b2 in 0..=dy {
                            let val = &vals[tri(b1, b2)];
                            if *val == 0 {
                                continue;
                            }
                            let w = binom[dx as usize][b1 as usize] * binom[dy as usize][b2 as usize];
                            let target = UnknownId::with_derivative(u.ijk(), ux + dx - b1, uy + dy - b2);
                            let col = sys.col_index[&target];
                            *acc.entry(col).or_default() += Rat::from(val * w);
                        }
                    }
                }
                let entries: Vec<(usize, Rat)> = acc.into_iter().filter(|(_, v)| *v != 0).collect();
                rows_by_label.insert((bidx, dx, dy), entries);
            }
        }
    }
    let mut rows = Vec::with_capacity(sys.nrows());
    let mut dropped = 0;
    for (b, dx, dy) in sys.row_labels() {
        let entries = rows_by_label.remove(&(b, dx, dy)).expect("row evaluated");
        if entries.is_empty() {
            dropped += 1;
        } else {
            rows.push(SparseRow { eq: sys.eq_id(b, dx, dy), entries });
        }
    }
    PointSystem { point: (pj.x.clone(), pj.y.clone()), columns: sys.columns.clone(), rows, zero_rows_dropped: dropped }
}

type JetPoly = BTreeMap<Mono, Jet>;

fn jetpoly_mul(a: &JetPoly, b: &JetPoly) -> JetPoly {
    let mut out: JetPoly = BTreeMap::new();
    for (m1, j1) in a {
        for (m2, j2) in b {
            let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]];
            let p = j1.mul(j2);
            match out.get_mut(&m) {
                Some(v) => *v = v.add(&p),
                None => {
                    out.insert(m, p);
                }
            }
        }
    }
    out
}

/// Jet vectors (one entry per column) of the trivial integrals `p_phi^a p_t^b H^c` of the branch.
pub fn trivial_vectors(sys: &ProlongedSystem, pj: &PointJets) -> Vec<Vec<Rat>> {
    let order = sys.order + 1;
    let one = Jet::constant(order, Rat::from(1));
    let mut hjet: JetPoly = BTreeMap::new();
    for &(m, f) in &sys.h.terms {
        hjet.insert(m, pj.jet(f).clone());
    }
    let mut hpow: Vec<JetPoly> = vec![BTreeMap::from([([0; 4], one.clone())])];
    let mut out = Vec::new();
    for (a, b, c) in trivial_exponents(&sys.branch) {
        while hpow.len() <= c as usize {
            let next = jetpoly_mul(hpow.last().unwrap(), &hjet);
            hpow.push(next);
        }
        let poly = jetpoly_mul(&BTreeMap::from([([0, 0, a, b], one.clone())]), &hpow[c as usize]);
        let v = sys
            .columns
            .iter()
            .map(|u| match poly.get(&u.ijk().mono(sys.branch.d)) {
                Some(j) => j.derivative(u.mu, u.m - u.mu),
                None => Rat::new(),
            })
            .collect();
        out.push(v);
    }
    out
}

/// Exact rank of the trivial jet vectors.
pub fn trivial_span_dim(tv: &[Vec<Rat>]) -> usize {
    if tv.is_empty() {
        return 0;
    }
    let fp = Fp::new(crate::modp::word_primes()[0]);
    if let Some(rows) = tv.iter().map(|v| v.iter().map(|q| fp.from_rat(q)).collect::<Option<Vec<_>>>()).collect() {
        if dense_rank(&fp, rows) == tv.len() {
            return tv.len();
        }
    }
    dense_rank(&Q, tv.to_vec())
}

/// Columns to zero so that the trivial jets restricted to them are invertible.
///
/// Candidates are taken greedily: order-0 columns with `j = 0`, then the other
/// order-0 columns, then higher orders. Returns fewer than `span` columns only
/// if the vectors do not have rank `span`.
pub fn select_gauge(sys: &ProlongedSystem, tv: &[Vec<Rat>], span: usize) -> Vec<usize> {
    let mut cands: Vec<usize> = (0..sys.ncols()).collect();
    cands.sort_by_key(|&c| {
        let u = &sys.columns[c];
        (u.m, u.j != 0, column_key(u))
    });
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<Rat>> = Vec::new();
    for c in cands {
        if chosen.len() == span {
            break;
        }
        let col: Vec<Rat> = tv.iter().map(|v| v[c].clone()).collect();
        if col.iter().all(|q| *q == 0) {
            continue;
        }
        let mut trial = basis.clone();
        trial.push(col.clone());
        if dense_rank(&Q, trial) > basis.len() {
            basis.push(col);
            chosen.push(c);
        }
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::builtin;
    use crate::momentum::PhiParity;
    use crate::system::meqns;

    fn setup(name: &str, d: u32, e: u32, m: u32) -> (ProlongedSystem, PointJets) {
        let g = builtin(name).unwrap();
        let h = HamiltonianData::from_metric(&g).unwrap();
        let sys = prolong(&h, &BranchSpec::new(d, e, PhiParity::Any), m);
        let (x, y) = g.suggested_points[0].clone();
        let pj = point_jets(&sys, &x, &y).unwrap();
        (sys, pj)
    }

    #[test]
    fn sizes_match_closed_forms() {
        let (sys, _) = setup("kerr_extreme", 3, 1, 3);
        assert_eq!(sys.nrows() as u64, meqns(3, 1, 3).to_u64().unwrap());
        assert_eq!(sys.ncols() as u64, crate::system::nvars(3, 1, 3).to_u64().unwrap());
    }

    #[test]
    fn fast_evaluation_agrees_with_symbolic_rows() {
        let (sys, pj) = setup("kerr_extreme", 2, 0, 2);
        let ps = evaluate_with(&sys, &pj);
        let funcs = &sys.hamiltonian().funcs;
        let mut k = 0;
        for (eq, lf) in sys.rows() {
            let sym = lf.realize(funcs);
            let mut expect: Vec<(usize, Rat)> = sym
                .terms
                .iter()
                .map(|(u, c)| (sys.column_index(u).unwrap(), c.eval(&pj.x, &pj.y).unwrap()))
                .filter(|(_, v)| *v != 0)
                .collect();
            expect.sort_by_key(|(c, _)| *c);
            if expect.is_empty() {
                continue;
            }
            assert_eq!(ps.rows[k].eq, eq);
            assert_eq!(ps.rows[k].entries, expect, "{eq}");
            k += 1;
        }
        assert_eq!(k, ps.rows.len());
    }

    #[test]
    fn trivial_jets_solve_the_point_system() {
        let (sys, pj) = setup("ts2", 2, 0, 3);
        let ps = evaluate_with(&sys, &pj);
        let tv = trivial_vectors(&sys, &pj);
        assert_eq!(tv.len(), 4);
        for v in &tv {
            assert!(ps.annihilates(v));
        }
        let mut bad = tv[0].clone();
        let c = sys.column_index(&UnknownId { i: 2, j: 1, k: 0, m: 1, mu: 1 }).unwrap();
        bad[c] += 1;
        assert!(!ps.annihilates(&bad));
    }
}
