//! Truncated bivariate Taylor expansions at a rational point.

use rug::Integer;

use super::zpoly::ZPoly;
use super::{AlgebraError, Rat, RatFunc};

/// Taylor coefficients `t[a][b]` of `f(x0 + u, y0 + v)` for `a + b <= order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jet {
    order: u32,
    c: Vec<Rat>,
}

#[inline]
fn idx(a: u32, b: u32) -> usize {
    let n = (a + b) as usize;
    n * (n + 1) / 2 + b as usize
}

impl Jet {
    pub fn zero(order: u32) -> Self {
        Jet { order, c: vec![Rat::new(); idx(0, order + 1)] }
    }

    pub fn constant(order: u32, c: Rat) -> Self {
        let mut j = Jet::zero(order);
        j.c[0] = c;
        j
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0)
    }

    pub fn add(&self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        let n = idx(0, order + 1);
        Jet { order, c: self.c[..n].iter().zip(&o.c[..n]).map(|(a, b)| Rat::from(a + b)).collect() }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Taylor coefficient of `u^a v^b`.
    pub fn coeff(&self, a: u32, b: u32) -> &Rat {
        &self.c[idx(a, b)]
    }

    /// The partial derivative `d^(a+b) f / dx^a dy^b` at the point.
    pub fn derivative(&self, a: u32, b: u32) -> Rat {
        let mut f = Integer::from(Integer::factorial(a));
        f *= Integer::from(Integer::factorial(b));
        Rat::from(self.coeff(a, b) * f)
    }

    fn of_zpoly(p: &ZPoly, x0: &Rat, y0: &Rat, order: u32) -> Jet {
        let mut out = Jet::zero(order);
        if p.is_zero() {
            return out;
        }
        let shift = |deg: usize, v: &Rat| -> Vec<Vec<Rat>> {
            // s[i][a] = C(i, a) v^(i - a), a <= min(i, order)
            let mut pw = vec![Rat::from(1)];
            for k in 1..=deg {
                pw.push(Rat::from(&pw[k - 1] * v));
            }
            (0..=deg)
                .map(|i| {
                    (0..=i.min(order as usize))
                        .map(|a| {
                            let b = Integer::from(Integer::binomial_u(i as u32, a as u32));
                            Rat::from(&pw[i - a] * b)
                        })
                        .collect()
                })
                .collect()
        };
        let sx = shift(p.deg_x(), x0);
        let sy = shift(p.deg_y(), y0);
        for (j, row) in p.c.iter().enumerate() {
            if row.is_empty() {
                continue;
            }
            // Shift in x first: s[a] = sum_i c_ij C(i,a) x0^(i-a).
            let mut s = vec![Rat::new(); (order as usize + 1).min(row.len())];
            for (i, c) in row.iter().enumerate() {
                if *c == 0 {
                    continue;
                }
                for (a, w) in sx[i].iter().enumerate() {
                    s[a] += Rat::from(w * c);
                }
            }
            for (b, wy) in sy[j].iter().enumerate() {
                let b = b as u32;
                for (a, sa) in s.iter().enumerate() {
                    let a = a as u32;
                    if a + b > order || *sa == 0 {
                        continue;
                    }
                    out.c[idx(a, b)] += Rat::from(sa * wy);
                }
            }
        }
        out
    }

    /// Truncated series of `f` at `(x0, y0)` through total degree `order`.
    pub fn of(f: &RatFunc, x0: &Rat, y0: &Rat, order: u32) -> Result<Jet, AlgebraError> {
        let n = Jet::of_zpoly(f.num_z(), x0, y0, order);
        if f.den_z().is_one() {
            return Ok(n);
        }
        let d = Jet::of_zpoly(f.den_z(), x0, y0, order);
        n.div(&d).ok_or_else(|| AlgebraError::ZeroDenominatorAtPoint {
            x: x0.to_string(),
            y: y0.to_string(),
        })
    }

    /// Truncated product.
    pub fn mul(&self, o: &Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut out = Jet::zero(order);
        for n1 in 0..=order {
            for b1 in 0..=n1 {
                let a1 = n1 - b1;
                let c1 = self.coeff(a1, b1);
                if *c1 == 0 {
                    continue;
                }
                for n2 in 0..=(order - n1) {
                    for b2 in 0..=n2 {
                        let a2 = n2 - b2;
                        let c2 = o.coeff(a2, b2);
                        if *c2 == 0 {
                            continue;
                        }
                        out.c[idx(a1 + a2, b1 + b2)] += Rat::from(c1 * c2);
                    }
                }
            }
        }
        out
    }

    /// Truncated quotient; `None` if the divisor vanishes at the point.
    pub fn div(&self, d: &Jet) -> Option<Jet> {
        let order = self.order.min(d.order);
        let d0 = d.coeff(0, 0).clone();
        if d0 == 0 {
            return None;
        }
        let inv0 = Rat::from(d0.recip_ref());
        let mut q = Jet::zero(order);
        // q = (n - sum_{(a',b') != 0} d[a',b'] q[a-a', b-b']) / d0, by total degree.
        for n in 0..=order {
            for b in 0..=n {
                let a = n - b;
                let mut acc = self.coeff(a, b).clone();
                for bb in 0..=b {
                    for aa in 0..=a {
                        if aa == 0 && bb == 0 {
                            continue;
                        }
                        let dv = d.coeff(aa, bb);
                        if *dv == 0 {
                            continue;
                        }
                        let qv = q.coeff(a - aa, b - bb);
                        if *qv == 0 {
                            continue;
                        }
                        acc -= Rat::from(dv * qv);
                    }
                }
                q.c[idx(a, b)] = acc * &inv0;
            }
        }
        Some(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_expr, Scope, Var};

    #[test]
    fn jet_matches_symbolic_derivatives() {
        let s = Scope::xy();
        let f = parse_expr("(x^3*y - 2*y^2 + 1)/(x^2 - y^2 + 3*x*y)", &s).unwrap();
        let (x0, y0) = (Rat::from((1, 2)), Rat::from(2));
        let jet = Jet::of(&f, &x0, &y0, 4).unwrap();
        for a in 0..=4u32 {
            for b in 0..=(4 - a) {
                let mut g = f.clone();
                for _ in 0..a {
                    g = g.diff(Var::X);
                }
                for _ in 0..b {
                    g = g.diff(Var::Y);
                }
                assert_eq!(jet.derivative(a, b), g.eval(&x0, &y0).unwrap(), "a={a} b={b}");
            }
        }
    }

    #[test]
    fn pole_at_point_is_reported() {
        let s = Scope::xy();
        let f = parse_expr("1/(x^2-1)", &s).unwrap();
        assert!(Jet::of(&f, &Rat::from(1), &Rat::from(0), 2).is_err());
    }

    #[test]
    fn product_of_jets() {
        let s = Scope::xy();
        let f = parse_expr("x/(1+y)", &s).unwrap();
        let g = parse_expr("(x - y)^2", &s).unwrap();
        let (x0, y0) = (Rat::from(3), Rat::from((-1, 3)));
        let lhs = Jet::of(&f.mul(&g), &x0, &y0, 3).unwrap();
        let rhs = Jet::of(&f, &x0, &y0, 3).unwrap().mul(&Jet::of(&g, &x0, &y0, 3).unwrap());
        assert_eq!(lhs, rhs);
    }
}
