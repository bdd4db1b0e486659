use std::collections::BTreeMap;
use std::fmt;

use rug::ops::Pow;
use rug::Integer;

use super::zpoly::ZPoly;
use super::Rat;

/// Sparse polynomial in `x, y` with rational coefficients.
///
/// Keys are `(deg_x, deg_y)`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct BiPoly {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl BiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Rat)>>(it: I) -> Self {
        let mut terms: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
        for (e, c) in it {
            *terms.entry(e).or_default() += c;
        }
        terms.retain(|_, c| *c != 0);
        BiPoly { terms }
    }

    pub(crate) fn from_zpoly(p: &ZPoly) -> Self {
        Self::from_terms(p.terms().map(|(e, c)| (e, Rat::from(c.clone()))))
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Rat)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn coeff(&self, a: u32, b: u32) -> Rat {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = Rat::new();
        for (&(a, b), c) in &self.terms {
            let mut t = c.clone();
            t *= Rat::from(x.pow(a));
            t *= Rat::from(y.pow(b));
            acc += t;
        }
        acc
    }

    pub fn display_with(&self, names: [&str; 2]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (&(a, b), c)) in self.terms.iter().rev().enumerate() {
            let neg = *c < 0;
            let mag = Rat::from(c.abs_ref());
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            if mag != 1 || (a == 0 && b == 0) {
                factors.push(mag.to_string());
            }
            for (e, name) in [(a, names[0]), (b, names[1])] {
                match e {
                    0 => {}
                    1 => factors.push(name.to_string()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }

    /// Integer multiple with coprime integer coefficients (positive leading term).
    pub fn primitive_integer(&self) -> Vec<((u32, u32), Integer)> {
        let mut l = Integer::from(1);
        for c in self.terms.values() {
            l.lcm_mut(c.denom());
        }
        let mut ints: Vec<((u32, u32), Integer)> = self
            .terms
            .iter()
            .map(|(e, c)| (*e, (c.numer() * Integer::from(&l / c.denom()))))
            .collect();
        let mut g = Integer::new();
        for (_, v) in &ints {
            g.gcd_mut(v);
        }
        if g > 1 {
            for (_, v) in ints.iter_mut() {
                v.div_exact_mut(&g);
            }
        }
        ints
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(["x", "y"]))
    }
}
