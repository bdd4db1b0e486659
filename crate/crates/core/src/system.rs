//! The linear PDE system `{H, I} = 0` for a homogeneous integral `I` of degree `d`.
//!
//! Unknowns are the coefficient functions `K_ijk` of
//! `p_x^(i-j) p_y^j p_phi^k p_t^(d-i-k)` in `I` together with their partial
//! derivatives; [`UnknownId`] names `d^m K_ijk / dx^mu dy^(m-mu)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{Int, RatFunc, Var};
use crate::metric::{MetricError, MetricSpec};
use crate::momentum::{Ijk, Mono, MomPoly, PhiParity};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnknownId {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub mu: u32,
}

impl UnknownId {
    pub fn ijk(&self) -> Ijk {
        Ijk { i: self.i, j: self.j, k: self.k }
    }

    /// Derivative orders `(in x, in y)`.
    pub fn orders(&self) -> (u32, u32) {
        (self.mu, self.m - self.mu)
    }

    pub fn with_derivative(ijk: Ijk, dx: u32, dy: u32) -> Self {
        UnknownId { i: ijk.i, j: ijk.j, k: ijk.k, m: dx + dy, mu: dx }
    }
}

impl fmt::Display for UnknownId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I({},{},{},{})_{}", self.i, self.j, self.m, self.mu, self.k)
    }
}

/// Equation `P(i,j,m,mu)_k`: the `d^m / dx^mu dy^(m-mu)` derivative of the
/// coefficient of momentum monomial `(i, j, k)` in `{H, I}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EqId {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub m: u32,
    pub mu: u32,
}

impl EqId {
    pub fn ijk(&self) -> Ijk {
        Ijk { i: self.i, j: self.j, k: self.k }
    }
}

impl fmt::Display for EqId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P({},{},{},{})_{}", self.i, self.j, self.m, self.mu, self.k)
    }
}

/// Homogeneous linear combination of unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm<C> {
    pub terms: BTreeMap<UnknownId, C>,
}

impl<C> Default for LinearForm<C> {
    fn default() -> Self {
        LinearForm { terms: BTreeMap::new() }
    }
}

impl<C> LinearForm<C> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_order(&self) -> Option<u32> {
        self.terms.keys().map(|u| u.m).max()
    }
}

impl LinearForm<RatFunc> {
    pub fn add_term(&mut self, u: UnknownId, c: &RatFunc) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(u).or_insert_with(RatFunc::zero);
        *e = e.add(c);
        if e.is_zero() {
            self.terms.remove(&u);
        }
    }

    pub fn diff(&self, v: Var) -> LinearForm<RatFunc> {
        let mut out = LinearForm::default();
        for (u, c) in &self.terms {
            out.add_term(*u, &c.diff(v));
            let (dx, dy) = u.orders();
            let shifted = match v {
                Var::X => UnknownId::with_derivative(u.ijk(), dx + 1, dy),
                Var::Y => UnknownId::with_derivative(u.ijk(), dx, dy + 1),
            };
            out.add_term(shifted, c);
        }
        out
    }

    /// Substitute functions for the unknowns.
    pub fn apply<F: FnMut(&UnknownId) -> RatFunc>(&self, mut val: F) -> RatFunc {
        let mut acc = RatFunc::zero();
        for (u, c) in &self.terms {
            acc = acc.add(&c.mul(&val(u)));
        }
        acc
    }
}

/// One summand `mult * d^(dx+dy) f / dx^dx dy^dy` of a coefficient, `f` indexing [`HamiltonianData::funcs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoefTerm {
    pub f: usize,
    pub dx: u32,
    pub dy: u32,
}

/// Coefficient expressed through derivatives of the Hamiltonian's coefficient functions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DerivCoef {
    pub terms: BTreeMap<CoefTerm, i64>,
}

impl DerivCoef {
    pub fn single(f: usize, dx: u32, dy: u32, mult: i64) -> Self {
        let mut d = DerivCoef::default();
        d.add(CoefTerm { f, dx, dy }, mult);
        d
    }

    pub fn add(&mut self, t: CoefTerm, mult: i64) {
        if mult == 0 {
            return;
        }
        let e = self.terms.entry(t).or_insert(0);
        *e += mult;
        if *e == 0 {
            self.terms.remove(&t);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Symbolic value.
    pub fn realize(&self, funcs: &[RatFunc]) -> RatFunc {
        let mut acc = RatFunc::zero();
        for (t, &mult) in &self.terms {
            let mut g = funcs[t.f].clone();
            for _ in 0..t.dx {
                g = g.diff(Var::X);
            }
            for _ in 0..t.dy {
                g = g.diff(Var::Y);
            }
            acc = acc.add(&g.mul(&RatFunc::from_int(mult)));
        }
        acc
    }
}

impl LinearForm<DerivCoef> {
    pub fn add_deriv(&mut self, u: UnknownId, t: CoefTerm, mult: i64) {
        let e = self.terms.entry(u).or_default();
        e.add(t, mult);
        if e.is_zero() {
            self.terms.remove(&u);
        }
    }

    pub fn realize(&self, funcs: &[RatFunc]) -> LinearForm<RatFunc> {
        let mut out = LinearForm::default();
        for (u, c) in &self.terms {
            out.add_term(*u, &c.realize(funcs));
        }
        out
    }
}

/// Parity branch of the integral ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchSpec {
    pub d: u32,
    pub e: u32,
    pub phi_parity: PhiParity,
    pub multiplicity: u32,
}

impl BranchSpec {
    pub fn new(d: u32, e: u32, phi_parity: PhiParity) -> Self {
        assert!(e < 2, "parity must be 0 or 1");
        assert!(phi_parity != PhiParity::Odd, "odd p_phi branches are realized through the static split");
        BranchSpec { d, e, phi_parity, multiplicity: 1 }
    }

    /// The refined static branch `S_k`: even in `p_phi`, `(p_x, p_y)` parity equal to that of `k`.
    pub fn static_branch(k: u32) -> Self {
        Self::new(k, k % 2, PhiParity::Even)
    }

    pub fn with_multiplicity(mut self, m: u32) -> Self {
        assert!((1..=2).contains(&m));
        self.multiplicity = m;
        self
    }

    pub fn label(&self) -> String {
        match self.phi_parity {
            PhiParity::Even if self.e == self.d % 2 => format!("S{}", self.d),
            PhiParity::Even => format!("d={} e={} phi-even", self.d, self.e),
            _ => format!("d={} e={}", self.d, self.e),
        }
    }

    /// Coefficient indices `(i, j, k)` of the ansatz, in lexicographic order.
    pub fn ansatz_ijk(&self) -> Vec<Ijk> {
        let mut out = Vec::new();
        for i in (self.e..=self.d).step_by(2) {
            for j in 0..=i {
                for k in 0..=(self.d - i) {
                    if self.phi_parity.admits(k) {
                        out.push(Ijk { i, j, k });
                    }
                }
            }
        }
        out
    }

    /// Equation indices `(i, j, k)` of `{H, I}` (degree `d + 1`, opposite parity).
    pub fn equation_ijk(&self) -> Vec<Ijk> {
        let mut out = Vec::new();
        for i in ((1 - self.e)..=(self.d + 1)).step_by(2) {
            for j in 0..=i {
                for k in 0..=(self.d + 1 - i) {
                    if self.phi_parity.admits(k) {
                        out.push(Ijk { i, j, k });
                    }
                }
            }
        }
        out
    }

    pub fn contains_mono(&self, m: &Mono) -> bool {
        m.iter().sum::<u32>() == self.d && (m[0] + m[1]) % 2 == self.e && self.phi_parity.admits(m[2])
    }
}

/// `{H, I}` for a branch, in templated form.
#[derive(Clone, Debug)]
pub struct HamiltonianData {
    /// Distinct coefficient functions of `H`.
    pub funcs: Vec<RatFunc>,
    /// Monomials of `H` with their function index.
    pub terms: Vec<(Mono, usize)>,
}

impl HamiltonianData {
    pub fn new(h: &MomPoly) -> Self {
        let mut funcs: Vec<RatFunc> = Vec::new();
        let mut terms = Vec::new();
        for (m, c) in h.terms() {
            let idx = match funcs.iter().position(|f| f == c) {
                Some(p) => p,
                None => {
                    funcs.push(c.clone());
                    funcs.len() - 1
                }
            };
            terms.push((*m, idx));
        }
        HamiltonianData { funcs, terms }
    }

    pub fn from_metric(g: &MetricSpec) -> Result<Self, MetricError> {
        Ok(Self::new(&g.hamiltonian()?))
    }

    /// Is `H` even in `(p_x, p_y)` and, when required, in `p_phi`?
    pub fn compatible(&self, branch: &BranchSpec) -> bool {
        self.terms.iter().all(|(m, _)| {
            (m[0] + m[1]) % 2 == 0 && (branch.phi_parity != PhiParity::Even || m[2] % 2 == 0)
        })
    }
}

/// Order-0 equations as templates; every index of the equation range is present, possibly empty.
pub fn equation_templates(h: &HamiltonianData, branch: &BranchSpec) -> Vec<(EqId, LinearForm<DerivCoef>)> {
    assert!(h.compatible(branch), "Hamiltonian parity does not admit this branch");
    let mut by_mono: BTreeMap<Ijk, LinearForm<DerivCoef>> =
        branch.equation_ijk().into_iter().map(|ijk| (ijk, LinearForm::default())).collect();
    for ijk in branch.ansatz_ijk() {
        let m = ijk.mono(branch.d);
        for q in 0..2 {
            let (dx, dy) = if q == 0 { (1, 0) } else { (0, 1) };
            for &(h_mono, f) in &h.terms {
                // d_q H * d_{p_q} I
                if m[q] > 0 {
                    let mut out = add_mono(&h_mono, &m);
                    out[q] -= 1;
                    let u = UnknownId::with_derivative(ijk, 0, 0);
                    by_mono
                        .get_mut(&Ijk::of(&out))
                        .expect("equation index in range")
                        .add_deriv(u, CoefTerm { f, dx, dy }, m[q] as i64);
                }
                // - d_{p_q} H * d_q I
                if h_mono[q] > 0 {
                    let mut out = add_mono(&h_mono, &m);
                    out[q] -= 1;
                    let u = UnknownId::with_derivative(ijk, dx, dy);
                    by_mono
                        .get_mut(&Ijk::of(&out))
                        .expect("equation index in range")
                        .add_deriv(u, CoefTerm { f, dx: 0, dy: 0 }, -(h_mono[q] as i64));
                }
            }
        }
    }
    by_mono
        .into_iter()
        .map(|(ijk, lf)| (EqId { i: ijk.i, j: ijk.j, k: ijk.k, m: 0, mu: 0 }, lf))
        .collect()
}

fn add_mono(a: &Mono, b: &Mono) -> Mono {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Unknowns of order 0.
pub fn ansatz(branch: &BranchSpec) -> Vec<UnknownId> {
    branch.ansatz_ijk().into_iter().map(|ijk| UnknownId::with_derivative(ijk, 0, 0)).collect()
}

/// Order-0 equations with symbolic coefficients.
pub fn equations(h: &HamiltonianData, branch: &BranchSpec) -> Vec<(EqId, LinearForm<RatFunc>)> {
    equation_templates(h, branch).into_iter().map(|(id, lf)| (id, lf.realize(&h.funcs))).collect()
}

/// `p_phi^a p_t^b H^c` with `a + b + 2c = d`, restricted to the branch.
pub fn trivial_exponents(branch: &BranchSpec) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    if branch.e != 0 {
        return out;
    }
    for c in 0..=branch.d / 2 {
        let rest = branch.d - 2 * c;
        for a in 0..=rest {
            if branch.phi_parity.admits(a) {
                out.push((a, rest - a, c));
            }
        }
    }
    out
}

pub fn trivial_family(h: &MomPoly, branch: &BranchSpec) -> Vec<MomPoly> {
    trivial_exponents(branch)
        .into_iter()
        .map(|(a, b, c)| MomPoly::p(2).pow(a).mul(&MomPoly::p(3).pow(b)).mul(&h.pow(c)))
        .collect()
}

fn binom(n: u64, k: u64) -> Int {
    Int::from(Int::binomial_u(n as u32, k as u32))
}

/// Number of trivial integrals of degree `d` in dimension `dim`:
/// `sum_{l=0}^{d/2} C(dim + d - 2l - 3, d - 2l)`.
pub fn trivials_count(d: u32, dim: u32) -> Int {
    assert!(dim >= 3);
    let mut acc = Int::new();
    for l in 0..=d / 2 {
        let r = (d - 2 * l) as u64;
        acc += binom(dim as u64 + r - 3, r);
    }
    acc
}

fn parity_tilde(d: u32, e: u32) -> i64 {
    ((d + e) % 2) as i64
}

/// Unknown count of the `(d, e)` system prolonged `M` times (closed form, `p_phi` unrestricted).
pub fn nvars(d: u32, e: u32, m: u32) -> Int {
    let (d, e, m) = (d as i64, e as i64, m as i64);
    let s = e + parity_tilde(d as u32, e as u32);
    let v = (d + 2 - s) * (m + 2) * (m + 3) * (d * d + d * s - 2 * s * s + 4 * d + 6 * e * (s - 1) + 2 * s + 6);
    debug_assert!(v % 24 == 0);
    Int::from(v / 24)
}

/// Equation count of the `(d, e)` system prolonged `M` times (closed form, `p_phi` unrestricted).
pub fn meqns(d: u32, e: u32, m: u32) -> Int {
    let (d, e, m) = (d as i64, e as i64, m as i64);
    let dl = e - parity_tilde(d as u32, e as u32);
    let v = (d + 2 + dl) * (m + 1) * (m + 2) * (d * d - d * dl - 2 * dl * dl + 6 * e * dl + 7 * d - 5 * dl + 12);
    debug_assert!(v % 24 == 0);
    Int::from(v / 24)
}

/// Unknown count as the block sum over `l`.
pub fn nvars_sum(d: u32, e: u32, m: u32) -> Int {
    let et = parity_tilde(d, e) as u32;
    let mut acc = Int::new();
    if d + 1 < e + et {
        return acc;
    }
    for l in 0..=(d - e - et) / 2 {
        acc += Int::from((2 * l + 1 + et) * (d + 1 - et - 2 * l));
    }
    acc * binom(m as u64 + 3, 2)
}

/// Equation count as the block sum over `l`.
pub fn meqns_sum(d: u32, e: u32, m: u32) -> Int {
    let et = parity_tilde(d, e) as u32;
    let mut acc = Int::new();
    for l in 0..=(d + e - et) / 2 {
        acc += Int::from((2 * l + 1 + et) * (d + 2 - et - 2 * l));
    }
    acc * binom(m as u64 + 2, 2)
}

/// `(equations, unknowns)` of a branch prolonged `M` times, by enumeration.
pub fn branch_counts(branch: &BranchSpec, m: u32) -> (u64, u64) {
    let eqs = branch.equation_ijk().len() as u64 * ((m as u64 + 1) * (m as u64 + 2) / 2);
    let vars = branch.ansatz_ijk().len() as u64 * ((m as u64 + 2) * (m as u64 + 3) / 2);
    (eqs, vars)
}

/// The refined split for static metrics: `S_d`, `S_{d-1}` twice, `S_{d-2}`.
pub fn static_split_plan(d: u32) -> Vec<BranchSpec> {
    let mut out = vec![BranchSpec::static_branch(d)];
    if d >= 1 {
        out.push(BranchSpec::static_branch(d - 1).with_multiplicity(2));
    }
    if d >= 2 {
        out.push(BranchSpec::static_branch(d - 2));
    }
    out
}

/// Static split for a metric, rejecting non-static ones.
pub fn static_split_plan_for(g: &MetricSpec, d: u32) -> Result<Vec<BranchSpec>, MetricError> {
    if !g.static_flag {
        return Err(MetricError::Invariant(format!("metric '{}' is not static; the refined split does not apply", g.name)));
    }
    Ok(static_split_plan(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::builtin;

    #[test]
    fn ansatz_sizes() {
        assert_eq!(ansatz(&BranchSpec::new(1, 1, PhiParity::Any)).len(), 2);
        assert_eq!(ansatz(&BranchSpec::new(7, 0, PhiParity::Any)).len(), 60);
        assert_eq!(ansatz(&BranchSpec::new(2, 0, PhiParity::Even)).len(), 5);
    }

    #[test]
    fn closed_forms_published_values() {
        assert_eq!(nvars(7, 0, 7), 2700);
        assert_eq!(nvars(7, 1, 7), 2700);
        assert_eq!(meqns(7, 0, 7), 2880);
        assert_eq!(meqns(7, 1, 7), 3060);
        assert_eq!(trivials_count(7, 4), 20);
        assert_eq!(trivials_count(0, 4), 1);
        assert_eq!(trivials_count(9, 4), 30);
        assert_eq!(trivials_count(11, 4), 42);
    }

    #[test]
    fn static_branch_counts() {
        assert_eq!(branch_counts(&BranchSpec::static_branch(9), 9), (5005, 4620));
        assert_eq!(branch_counts(&BranchSpec::static_branch(10), 10), (7392, 7098));
        assert_eq!(branch_counts(&BranchSpec::static_branch(11), 11).1, 10192);
        assert_eq!(branch_counts(&BranchSpec::static_branch(8), 8), (3150, 3025));
        assert_eq!(branch_counts(&BranchSpec::static_branch(7), 7), (1980, 1800));
    }

    #[test]
    fn trivial_family_sizes() {
        let h = builtin("flat_cyl").unwrap().hamiltonian().unwrap();
        assert_eq!(trivial_family(&h, &BranchSpec::new(2, 0, PhiParity::Any)).len(), 4);
        assert_eq!(trivial_exponents(&BranchSpec::new(7, 0, PhiParity::Any)).len(), 20);
        assert_eq!(trivial_exponents(&BranchSpec::static_branch(8)).len(), 15);
        assert_eq!(trivial_exponents(&BranchSpec::static_branch(10)).len(), 21);
    }

    #[test]
    fn split_plans() {
        let p = static_split_plan(11);
        assert_eq!(p.iter().map(|b| (b.d, b.multiplicity)).collect::<Vec<_>>(), vec![(11, 1), (10, 2), (9, 1)]);
        assert_eq!(static_split_plan(1).len(), 2);
        assert_eq!(static_split_plan(0).len(), 1);
        assert!(static_split_plan_for(&builtin("kerr_extreme").unwrap(), 2).is_err());
    }

    #[test]
    fn equations_have_first_order_unknowns_only() {
        let g = builtin("kerr_extreme").unwrap();
        let h = HamiltonianData::from_metric(&g).unwrap();
        let b = BranchSpec::new(3, 1, PhiParity::Any);
        let eqs = equations(&h, &b);
        assert_eq!(eqs.len() as u64, meqns(3, 1, 0).to_u64().unwrap());
        assert!(eqs.iter().all(|(_, lf)| lf.max_order().unwrap_or(0) <= 1));
    }
}
