//! Polynomials in `(p_x, p_y, p_phi, p_t)` with rational-function coefficients.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::{RatFunc, Var};

/// Exponents of `(p_x, p_y, p_phi, p_t)`.
pub type Mono = [u32; 4];

pub fn mono_degree(m: &Mono) -> u32 {
    m.iter().sum()
}

/// Parity in `p_phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiParity {
    Even,
    Odd,
    Any,
}

impl PhiParity {
    pub fn admits(self, k: u32) -> bool {
        match self {
            PhiParity::Even => k.is_multiple_of(2),
            PhiParity::Odd => k % 2 == 1,
            PhiParity::Any => true,
        }
    }
}

/// Parity class: `e` is the parity of the `(p_x, p_y)` degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParityClass {
    pub e: u32,
    pub phi: PhiParity,
}

impl ParityClass {
    pub fn new(e: u32, phi: PhiParity) -> Self {
        assert!(e < 2);
        ParityClass { e, phi }
    }

    pub fn contains(&self, m: &Mono) -> bool {
        (m[0] + m[1]) % 2 == self.e && self.phi.admits(m[2])
    }
}

/// Index of a monomial of total degree `deg`: `p_x^(i-j) p_y^j p_phi^k p_t^(deg-i-k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ijk {
    pub i: u32,
    pub j: u32,
    pub k: u32,
}

impl Ijk {
    pub fn of(m: &Mono) -> Ijk {
        Ijk { i: m[0] + m[1], j: m[1], k: m[2] }
    }

    pub fn mono(&self, deg: u32) -> Mono {
        [self.i - self.j, self.j, self.k, deg - self.i - self.k]
    }
}

#[derive(Clone, PartialEq, Eq, Default)]
pub struct MomPoly {
    terms: BTreeMap<Mono, RatFunc>,
}

impl MomPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: RatFunc) -> Self {
        Self::monomial([0; 4], c)
    }

    pub fn monomial(m: Mono, c: RatFunc) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MomPoly { terms }
    }

    /// The momentum `p_idx` (0 = p_x, 1 = p_y, 2 = p_phi, 3 = p_t).
    pub fn p(idx: usize) -> Self {
        let mut m = [0; 4];
        m[idx] = 1;
        Self::monomial(m, RatFunc::one())
    }

    /// A function of the coordinates, viewed as a momentum-free polynomial.
    pub fn coord(f: RatFunc) -> Self {
        Self::constant(f)
    }

    pub fn from_terms<I: IntoIterator<Item = (Mono, RatFunc)>>(it: I) -> Self {
        let mut out = MomPoly::zero();
        for (m, c) in it {
            out.add_term(m, &c);
        }
        out
    }

    pub fn add_term(&mut self, m: Mono, c: &RatFunc) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = v.add(c);
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &RatFunc)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> RatFunc {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(mono_degree);
        match it.next() {
            None => true,
            Some(d) => it.all(|e| e == d),
        }
    }

    pub fn add(&self, o: &MomPoly) -> MomPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c);
        }
        out
    }

    pub fn sub(&self, o: &MomPoly) -> MomPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> MomPoly {
        MomPoly { terms: self.terms.iter().map(|(m, c)| (*m, c.neg())).collect() }
    }

    pub fn scale(&self, f: &RatFunc) -> MomPoly {
        if f.is_zero() {
            return MomPoly::zero();
        }
        MomPoly { terms: self.terms.iter().map(|(m, c)| (*m, c.mul(f))).collect() }
    }

    pub fn mul(&self, o: &MomPoly) -> MomPoly {
        let mut out = MomPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]];
                out.add_term(m, &c1.mul(c2));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> MomPoly {
        let mut acc = MomPoly::constant(RatFunc::one());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative in a coordinate.
    pub fn diff_coord(&self, v: Var) -> MomPoly {
        MomPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, c.diff(v))))
    }

    /// Partial derivative in `p_x` (`idx = 0`) or `p_y` (`idx = 1`), or any momentum.
    pub fn diff_mom(&self, idx: usize) -> MomPoly {
        let mut out = MomPoly::zero();
        for (m, c) in &self.terms {
            if m[idx] == 0 {
                continue;
            }
            let mut m2 = *m;
            m2[idx] -= 1;
            out.add_term(m2, &c.mul(&RatFunc::from_int(m[idx] as i64)));
        }
        out
    }

    /// Terms lying in the parity class.
    pub fn parity_project(&self, c: ParityClass) -> MomPoly {
        MomPoly { terms: self.terms.iter().filter(|(m, _)| c.contains(m)).map(|(m, v)| (*m, v.clone())).collect() }
    }

    /// Terms with `(p_x, p_y)` parity `e`, any `p_phi` parity.
    pub fn project_e(&self, e: u32) -> MomPoly {
        self.parity_project(ParityClass::new(e, PhiParity::Any))
    }

    /// Coefficients keyed by `(i, j, k)` and total degree.
    pub fn coefficients(&self) -> BTreeMap<(u32, Ijk), RatFunc> {
        self.terms.iter().map(|(m, c)| ((mono_degree(m), Ijk::of(m)), c.clone())).collect()
    }

    pub fn display_with(&self, names: [&str; 2]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let pn = ["p_x", "p_y", "p_phi", "p_t"];
        let mut parts = Vec::new();
        for (m, c) in self.terms.iter().rev() {
            let mut mono: Vec<String> = Vec::new();
            for (e, n) in m.iter().zip(pn) {
                match e {
                    0 => {}
                    1 => mono.push(n.to_string()),
                    _ => mono.push(format!("{n}^{e}")),
                }
            }
            let coef = c.display_with(names);
            if mono.is_empty() {
                parts.push(format!("({coef})"));
            } else {
                parts.push(format!("({coef})*{}", mono.join("*")));
            }
        }
        parts.join(" + ")
    }
}

/// Reduced bracket `{A, B} = sum_q dA/dq dB/dp_q - dA/dp_q dB/dq` over `q in {x, y}`.
pub fn poisson(a: &MomPoly, b: &MomPoly) -> MomPoly {
    let mut out = MomPoly::zero();
    for (k, v) in [(0usize, Var::X), (1usize, Var::Y)] {
        out = out.add(&a.diff_coord(v).mul(&b.diff_mom(k)));
        out = out.sub(&a.diff_mom(k).mul(&b.diff_coord(v)));
    }
    out
}

impl fmt::Display for MomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(["x", "y"]))
    }
}

impl fmt::Debug for MomPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MomPoly({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_expr, Scope};

    fn rf(s: &str) -> RatFunc {
        parse_expr(s, &Scope::xy()).unwrap()
    }

    fn flat_h() -> MomPoly {
        MomPoly::from_terms([
            ([2, 0, 0, 0], rf("1")),
            ([0, 2, 0, 0], rf("1")),
            ([0, 0, 2, 0], rf("1/x^2")),
            ([0, 0, 0, 2], rf("-1")),
        ])
    }

    #[test]
    fn canonical_pair() {
        let x = MomPoly::coord(RatFunc::x());
        assert_eq!(poisson(&x, &MomPoly::p(0)), MomPoly::constant(RatFunc::one()));
        assert!(poisson(&flat_h(), &flat_h()).is_zero());
    }

    #[test]
    fn flat_translation_commutes() {
        assert!(poisson(&flat_h(), &MomPoly::p(1)).is_zero());
        assert!(!poisson(&flat_h(), &MomPoly::p(0)).is_zero());
    }

    #[test]
    fn coefficient_indexing() {
        let p = MomPoly::p(0).mul(&MomPoly::p(1));
        let c = p.coefficients();
        assert_eq!(c.len(), 1);
        let ((deg, ijk), v) = c.into_iter().next().unwrap();
        assert_eq!((deg, ijk), (2, Ijk { i: 2, j: 1, k: 0 }));
        assert!(v.is_one());
        assert_eq!(ijk.mono(2), [1, 1, 0, 0]);
    }

    #[test]
    fn projections() {
        let p = MomPoly::p(0).pow(2).add(&MomPoly::p(0).mul(&MomPoly::p(2)));
        assert_eq!(p.project_e(0), MomPoly::p(0).pow(2));
        assert_eq!(p.project_e(0).add(&p.project_e(1)), p);
    }
}
