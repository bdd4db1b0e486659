use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Integer, Rational};

use super::zpoly::{gcd, ZPoly};
use super::{AlgebraError, BiPoly, Rat};

/// One of the two non-ignorable coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
}

/// Reduced quotient of two integer polynomials in `x, y`.
///
/// Canonical form: `gcd(num, den) = 1` in `Z[x, y]` and the leading
/// coefficient of `den` (lex order, `y > x`) is positive. Rational
/// coefficients are absorbed by clearing denominators, so two equal
/// functions always have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: ZPoly,
    den: ZPoly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc { num: ZPoly::zero(), den: ZPoly::one() }
    }

    pub fn one() -> Self {
        RatFunc { num: ZPoly::one(), den: ZPoly::one() }
    }

    pub fn x() -> Self {
        RatFunc { num: ZPoly::x(), den: ZPoly::one() }
    }

    pub fn y() -> Self {
        RatFunc { num: ZPoly::y(), den: ZPoly::one() }
    }

    pub fn var(v: Var) -> Self {
        match v {
            Var::X => Self::x(),
            Var::Y => Self::y(),
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::constant(&Rat::from(v))
    }

    pub fn constant(q: &Rat) -> Self {
        if *q == 0 {
            return Self::zero();
        }
        RatFunc {
            num: ZPoly::constant(q.numer().clone()),
            den: ZPoly::constant(q.denom().clone()),
        }
    }

    /// Canonicalize an arbitrary integer fraction.
    pub fn from_zpolys(num: ZPoly, den: ZPoly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = gcd(&num, &den);
        let (mut n, mut d) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        if !d.is_lead_positive() {
            n = n.neg();
            d = d.neg();
        }
        Ok(RatFunc { num: n, den: d })
    }

    pub fn from_bipoly(p: &BiPoly) -> Self {
        let mut l = Integer::from(1);
        for (_, c) in p.terms() {
            l.lcm_mut(c.denom());
        }
        let num = ZPoly::from_terms(p.terms().map(|(e, c)| {
            let v = c.numer() * Integer::from(&l / c.denom());
            (e, v)
        }));
        Self::from_zpolys(num, ZPoly::constant(l)).expect("nonzero denominator")
    }

    pub(crate) fn num_z(&self) -> &ZPoly {
        &self.num
    }

    pub(crate) fn den_z(&self) -> &ZPoly {
        &self.den
    }

    pub fn numerator(&self) -> BiPoly {
        BiPoly::from_zpoly(&self.num)
    }

    pub fn denominator(&self) -> BiPoly {
        BiPoly::from_zpoly(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Rat> {
        let n = self.num.constant_value()?;
        let d = self.den.constant_value()?;
        Some(Rat::from((n, d)))
    }

    /// Total number of stored nonzero coefficients, a rough size measure.
    pub fn size(&self) -> usize {
        self.num.nterms() + self.den.nterms()
    }

    /// Total degree bounds `(deg_x, deg_y)` of numerator and denominator.
    pub fn degrees(&self) -> ((usize, usize), (usize, usize)) {
        ((self.num.deg_x(), self.num.deg_y()), (self.den.deg_x(), self.den.deg_y()))
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            let t = self.num.add(&o.num);
            if t.is_zero() {
                return Self::zero();
            }
            if self.den.is_one() {
                return RatFunc { num: t, den: self.den.clone() };
            }
            return Self::from_zpolys(t, self.den.clone()).unwrap();
        }
        let g = gcd(&self.den, &o.den);
        let d1 = self.den.div_exact(&g).unwrap();
        let d2 = o.den.div_exact(&g).unwrap();
        let t = self.num.mul(&d2).add(&o.num.mul(&d1));
        if t.is_zero() {
            return Self::zero();
        }
        if g.is_one() {
            return RatFunc { num: t, den: d1.mul(&o.den) };
        }
        let h = gcd(&t, &g);
        let num = t.div_exact(&h).unwrap();
        let den = d1.mul(&g.div_exact(&h).unwrap()).mul(&d2);
        let mut out = RatFunc { num, den };
        out.fix_sign();
        out
    }

    pub fn sub(&self, o: &RatFunc) -> RatFunc {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &RatFunc) -> RatFunc {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        if self.is_one() {
            return o.clone();
        }
        if o.is_one() {
            return self.clone();
        }
        let g1 = gcd(&self.num, &o.den);
        let g2 = gcd(&o.num, &self.den);
        let n1 = if g1.is_one() { self.num.clone() } else { self.num.div_exact(&g1).unwrap() };
        let d2 = if g1.is_one() { o.den.clone() } else { o.den.div_exact(&g1).unwrap() };
        let n2 = if g2.is_one() { o.num.clone() } else { o.num.div_exact(&g2).unwrap() };
        let d1 = if g2.is_one() { self.den.clone() } else { self.den.div_exact(&g2).unwrap() };
        let mut out = RatFunc { num: n1.mul(&n2), den: d1.mul(&d2) };
        out.fix_sign();
        out
    }

    pub fn scale(&self, q: &Rat) -> RatFunc {
        self.mul(&RatFunc::constant(q))
    }

    pub fn inv(&self) -> Result<RatFunc, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let mut out = RatFunc { num: self.den.clone(), den: self.num.clone() };
        out.fix_sign();
        Ok(out)
    }

    pub fn checked_div(&self, o: &RatFunc) -> Result<RatFunc, AlgebraError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u32) -> RatFunc {
        if e == 0 {
            return Self::one();
        }
        RatFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn diff(&self, v: Var) -> RatFunc {
        let (dn, dd) = match v {
            Var::X => (self.num.diff_x(), self.den.diff_x()),
            Var::Y => (self.num.diff_y(), self.den.diff_y()),
        };
        if dd.is_zero() {
            if dn.is_zero() {
                return Self::zero();
            }
            // Denominator is constant in v: no new common factors can appear.
            return Self::from_zpolys(dn, self.den.clone()).unwrap();
        }
        // f' = (n' d - n d') / d^2 with g = gcd(d, d'), d = g e:
        //    = (n' e - n d'/g) / (d e)
        let g = gcd(&self.den, &dd);
        let e = self.den.div_exact(&g).unwrap();
        let ddg = dd.div_exact(&g).unwrap();
        let t = dn.mul(&e).sub(&self.num.mul(&ddg));
        Self::from_zpolys(t, self.den.mul(&e)).unwrap()
    }

    pub fn eval(&self, x: &Rat, y: &Rat) -> Result<Rat, AlgebraError> {
        let d = self.den.eval(x, y);
        if d == 0 {
            return Err(AlgebraError::ZeroDenominatorAtPoint { x: x.to_string(), y: y.to_string() });
        }
        Ok(self.num.eval(x, y) / d)
    }

    /// Denominator value at a point, used for admissibility checks.
    pub fn den_at(&self, x: &Rat, y: &Rat) -> Rat {
        self.den.eval(x, y)
    }

    fn fix_sign(&mut self) {
        if !self.den.is_lead_positive() {
            self.num = self.num.neg();
            self.den = self.den.neg();
        }
    }

    /// Render with the given names for the two coordinates.
    pub fn display_with(&self, names: [&str; 2]) -> String {
        let n = fmt_zpoly(&self.num, names);
        if self.den.is_one() {
            return n;
        }
        format!("({})/({})", n, fmt_zpoly(&self.den, names))
    }
}

pub(crate) fn fmt_zpoly(p: &ZPoly, names: [&str; 2]) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<((u32, u32), &Integer)> = p.terms().collect();
    terms.sort_by(|a, b| (b.0 .1, b.0 .0).cmp(&(a.0 .1, a.0 .0)));
    let mut out = String::new();
    for (k, ((a, b), c)) in terms.into_iter().enumerate() {
        let neg = *c < 0;
        let mag = Integer::from(c.abs_ref());
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

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(["x", "y"]))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

impl Default for RatFunc {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for RatFunc {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<&Rational> for RatFunc {
    fn from(q: &Rational) -> Self {
        Self::constant(q)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&RatFunc> for &RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &RatFunc) -> RatFunc {
                $body(self, o)
            }
        }
        impl $tr<RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: RatFunc) -> RatFunc {
                $body(&self, &o)
            }
        }
        impl $tr<&RatFunc> for RatFunc {
            type Output = RatFunc;
            fn $m(self, o: &RatFunc) -> RatFunc {
                $body(&self, o)
            }
        }
    };
}

binop!(Add, add, |a: &RatFunc, b: &RatFunc| a.add(b));
binop!(Sub, sub, |a: &RatFunc, b: &RatFunc| a.sub(b));
binop!(Mul, mul, |a: &RatFunc, b: &RatFunc| a.mul(b));
binop!(Div, div, |a: &RatFunc, b: &RatFunc| a.checked_div(b).expect("division by zero"));

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(self)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> RatFunc {
        RatFunc::x()
    }
    fn y() -> RatFunc {
        RatFunc::y()
    }
    fn c(v: i64) -> RatFunc {
        RatFunc::from_int(v)
    }

    #[test]
    fn cancellation_to_one() {
        let a = &x() / &(x() - c(1));
        let b = &c(-1) / &(x() - c(1));
        assert!((a + b).is_one());
    }

    #[test]
    fn gcd_reduction() {
        let f = &(x().pow(2) - c(1)) / &(x() - c(1));
        assert_eq!(f, x() + c(1));
        assert!(f.is_polynomial());
    }

    #[test]
    fn inverse_product() {
        let f = &(x().pow(2) - y().pow(2)) / &(x().pow(2) - c(1));
        assert!((&f * &f.inv().unwrap()).is_one());
    }

    #[test]
    fn derivatives() {
        assert_eq!((x().pow(2) - y().pow(2)).diff(Var::X), &c(2) * &x());
        let f = c(1) / (x().pow(2) - c(1));
        let expect = -(&c(2) * &x()) / (x().pow(2) - c(1)).pow(2);
        assert_eq!(f.diff(Var::X), expect);
    }

    #[test]
    fn evaluation() {
        let f = x().pow(2) - y().pow(2);
        let v = f.eval(&Rat::from((1, 2)), &Rat::from(2)).unwrap();
        assert_eq!(v, Rat::from((-15, 4)));
        let g = c(1) / (x().pow(2) - c(1));
        assert!(g.eval(&Rat::from(1), &Rat::from(0)).is_err());
    }

    #[test]
    fn rational_constants_are_canonical() {
        let half = RatFunc::constant(&Rat::from((1, 2)));
        let a = &half * &x();
        let b = &x() / &c(2);
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "(x)/(2)");
        let d = &c(-3) / &(&c(-6) * &y());
        assert_eq!(d, &c(1) / &(&c(2) * &y()));
    }
}
