//! Dense integer polynomials in `Z[x]` and `Z[x][y]`.
//!
//! These are the working representation behind [`super::RatFunc`]. The gcd is
//! a dense modular algorithm: images modulo word primes, evaluation in `x`,
//! univariate Euclid in `y`, Newton interpolation back to `x`, CRT across
//! primes, and an exact trial division as the final check.

use rug::{Integer, Rational};

use crate::modp::{crt_step, inv_mod, splitmix64, symmetric, word_primes, Fp};

/// Coefficient of `x^i` at index `i`; no trailing zeros; zero is empty.
pub type UPoly = Vec<Integer>;

pub mod upoly {
    use super::*;

    pub fn trim(a: &mut UPoly) {
        while a.last().is_some_and(|c| *c == 0) {
            a.pop();
        }
    }

    pub fn add(a: &[Integer], b: &[Integer]) -> UPoly {
        let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
        let mut out: UPoly = long.to_vec();
        for (o, s) in out.iter_mut().zip(short) {
            *o += s;
        }
        trim(&mut out);
        out
    }

    pub fn sub(a: &[Integer], b: &[Integer]) -> UPoly {
        let n = a.len().max(b.len());
        let mut out: UPoly = Vec::with_capacity(n);
        for i in 0..n {
            let mut c = a.get(i).cloned().unwrap_or_default();
            if let Some(bi) = b.get(i) {
                c -= bi;
            }
            out.push(c);
        }
        trim(&mut out);
        out
    }

    pub fn mul(a: &[Integer], b: &[Integer]) -> UPoly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out: UPoly = vec![Integer::new(); a.len() + b.len() - 1];
        mul_acc(&mut out, a, b);
        trim(&mut out);
        out
    }

    /// `out += a * b`; `out` must be long enough.
    pub fn mul_acc(out: &mut [Integer], a: &[Integer], b: &[Integer]) {
        for (i, ai) in a.iter().enumerate() {
            if *ai == 0 {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                out[i + j] += ai * bj;
            }
        }
    }

    pub fn scale(a: &[Integer], c: &Integer) -> UPoly {
        if *c == 0 {
            return Vec::new();
        }
        a.iter().map(|x| Integer::from(x * c)).collect()
    }

    pub fn content(a: &[Integer]) -> Integer {
        let mut g = Integer::new();
        for c in a {
            g.gcd_mut(c);
            if g == 1 {
                break;
            }
        }
        g
    }

    pub fn div_exact_int(a: &mut [Integer], c: &Integer) {
        if *c == 1 {
            return;
        }
        for x in a.iter_mut() {
            x.div_exact_mut(c);
        }
    }

    /// Exact quotient `a / b`, or `None` if `b` does not divide `a` in `Z[x]`.
    pub fn div_exact(a: &[Integer], b: &[Integer]) -> Option<UPoly> {
        assert!(!b.is_empty(), "division by zero polynomial");
        if a.is_empty() {
            return Some(Vec::new());
        }
        if b.len() > a.len() {
            return None;
        }
        let db = b.len() - 1;
        let lc = &b[db];
        let mut r: UPoly = a.to_vec();
        let mut q: UPoly = vec![Integer::new(); a.len() - db];
        for i in (0..q.len()).rev() {
            if r[i + db] == 0 {
                continue;
            }
            let (qi, rem) = r[i + db].clone().div_rem(lc.clone());
            if rem != 0 {
                return None;
            }
            for (j, bj) in b.iter().enumerate() {
                r[i + j] -= &qi * bj;
            }
            q[i] = qi;
        }
        if r.iter().any(|c| *c != 0) {
            return None;
        }
        trim(&mut q);
        Some(q)
    }

    pub fn derivative(a: &[Integer]) -> UPoly {
        let mut out: UPoly = a
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| Integer::from(c * i as u32))
            .collect();
        trim(&mut out);
        out
    }

    pub fn to_mod(a: &[Integer], f: &Fp) -> Vec<u64> {
        a.iter().map(|c| f.from_int(c)).collect()
    }

    pub fn eval_mod(a: &[Integer], f: &Fp, x: u64) -> u64 {
        let mut acc = 0u64;
        for c in a.iter().rev() {
            acc = f.add(f.mul(acc, x), f.from_int(c));
        }
        acc
    }

    /// Make the leading coefficient positive.
    pub fn normalize_sign(a: &mut UPoly) {
        if a.last().is_some_and(|c| *c < 0) {
            for c in a.iter_mut() {
                *c = Integer::from(-&*c);
            }
        }
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(a: &[Integer]) -> UPoly {
        let mut out = a.to_vec();
        let c = content(&out);
        if c > 1 {
            div_exact_int(&mut out, &c);
        }
        normalize_sign(&mut out);
        out
    }

    /// gcd in `Z[x]`, positive leading coefficient, integer content included.
    pub fn gcd(a: &[Integer], b: &[Integer]) -> UPoly {
        if a.is_empty() {
            let mut o = b.to_vec();
            normalize_sign(&mut o);
            return o;
        }
        if b.is_empty() {
            let mut o = a.to_vec();
            normalize_sign(&mut o);
            return o;
        }
        let ca = content(a);
        let cb = content(b);
        let ic = Integer::from(ca.gcd_ref(&cb));
        if a.len() == 1 || b.len() == 1 {
            return vec![ic];
        }
        let mut pa = a.to_vec();
        div_exact_int(&mut pa, &ca);
        let mut pb = b.to_vec();
        div_exact_int(&mut pb, &cb);
        if pa == pb || pa.iter().zip(&pb).all(|(x, y)| *x == -y.clone()) && pa.len() == pb.len() {
            let mut g = pa;
            normalize_sign(&mut g);
            return scale(&g, &ic);
        }
        let lca = pa.last().unwrap().clone();
        let lcb = pb.last().unwrap().clone();
        let gamma = Integer::from(lca.gcd_ref(&lcb));

        let mut acc: Option<(UPoly, Integer)> = None;
        let mut prev: Option<UPoly> = None;
        for &p in word_primes() {
            let f = Fp::new(p);
            if f.from_int(&lca) == 0 || f.from_int(&lcb) == 0 {
                continue;
            }
            let ga = to_mod(&pa, &f);
            let gb = to_mod(&pb, &f);
            let mut g = modpoly::gcd_monic(&f, ga, gb);
            if g.len() == 1 {
                return vec![ic];
            }
            let gm = f.from_int(&gamma);
            for c in g.iter_mut() {
                *c = f.to_std(f.mul(*c, gm));
            }
            acc = match acc.take() {
                None => Some((g.iter().map(|&c| Integer::from(c)).collect(), Integer::from(p))),
                Some((res, m)) => {
                    if g.len() < res.len() {
                        prev = None;
                        Some((g.iter().map(|&c| Integer::from(c)).collect(), Integer::from(p)))
                    } else if g.len() > res.len() {
                        Some((res, m))
                    } else {
                        let mi = inv_mod(&m, p);
                        let res = res
                            .iter()
                            .zip(&g)
                            .map(|(r, &gi)| crt_step(r, &m, gi, p, mi))
                            .collect();
                        Some((res, m * p))
                    }
                }
            };
            let (res, m) = acc.as_ref().unwrap();
            let mut h: UPoly = res.iter().map(|r| symmetric(r.clone(), m)).collect();
            trim(&mut h);
            if prev.as_ref() == Some(&h) {
                let cand = primitive(&h);
                if div_exact(&pa, &cand).is_some() && div_exact(&pb, &cand).is_some() {
                    return scale(&cand, &ic);
                }
            }
            prev = Some(h);
        }
        panic!("modular gcd did not converge")
    }
}

/// Polynomials over a word prime field in Montgomery form.
pub mod modpoly {
    use super::Fp;

    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    /// Monic gcd; the zero polynomial is returned as empty.
    pub fn gcd_monic(f: &Fp, mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
        trim(&mut a);
        trim(&mut b);
        while !b.is_empty() {
            rem_in_place(f, &mut a, &b);
            std::mem::swap(&mut a, &mut b);
        }
        if let Some(&lc) = a.last() {
            let inv = f.inv(lc);
            for c in a.iter_mut() {
                *c = f.mul(*c, inv);
            }
        }
        a
    }

    /// `a <- a mod b`.
    pub fn rem_in_place(f: &Fp, a: &mut Vec<u64>, b: &[u64]) {
        let db = b.len() - 1;
        let inv = f.inv(b[db]);
        while a.len() > db {
            let top = a.len() - 1;
            let c = f.mul(a[top], inv);
            if c != 0 {
                let shift = top - db;
                for (j, &bj) in b.iter().enumerate() {
                    a[shift + j] = f.sub(a[shift + j], f.mul(c, bj));
                }
            }
            a.pop();
            trim(a);
        }
    }

    pub fn eval(f: &Fp, a: &[u64], x: u64) -> u64 {
        let mut acc = 0u64;
        for &c in a.iter().rev() {
            acc = f.add(f.mul(acc, x), c);
        }
        acc
    }

    /// Newton interpolation through `(xs[i], ys[i])`; values in Montgomery form.
    pub fn interpolate(f: &Fp, xs: &[u64], ys: &[u64]) -> Vec<u64> {
        let n = xs.len();
        let mut coef = ys.to_vec();
        for j in 1..n {
            for i in (j..n).rev() {
                let num = f.sub(coef[i], coef[i - 1]);
                let den = f.sub(xs[i], xs[i - j]);
                coef[i] = f.mul(num, f.inv(den));
            }
        }
        // Expand the Newton form.
        let mut poly = vec![0u64; n];
        for i in (0..n).rev() {
            // poly = poly * (x - xs[i]) + coef[i]
            let mut next = vec![0u64; n];
            for k in 0..n {
                if poly[k] == 0 {
                    continue;
                }
                if k + 1 < n {
                    next[k + 1] = f.add(next[k + 1], poly[k]);
                }
                next[k] = f.sub(next[k], f.mul(poly[k], xs[i]));
            }
            next[0] = f.add(next[0], coef[i]);
            poly = next;
        }
        trim(&mut poly);
        poly
    }
}

/// Element of `Z[x][y]`: `c[j]` is the coefficient of `y^j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct ZPoly {
    pub(crate) c: Vec<UPoly>,
}

impl ZPoly {
    pub fn zero() -> Self {
        ZPoly { c: Vec::new() }
    }

    pub fn constant(v: Integer) -> Self {
        if v == 0 {
            Self::zero()
        } else {
            ZPoly { c: vec![vec![v]] }
        }
    }

    pub fn one() -> Self {
        Self::constant(Integer::from(1))
    }

    pub fn x() -> Self {
        ZPoly { c: vec![vec![Integer::new(), Integer::from(1)]] }
    }

    pub fn y() -> Self {
        ZPoly { c: vec![Vec::new(), vec![Integer::from(1)]] }
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Integer)>>(terms: I) -> Self {
        let mut out = ZPoly::zero();
        for ((a, b), v) in terms {
            let (a, b) = (a as usize, b as usize);
            if out.c.len() <= b {
                out.c.resize(b + 1, Vec::new());
            }
            let row = &mut out.c[b];
            if row.len() <= a {
                row.resize(a + 1, Integer::new());
            }
            row[a] += v;
        }
        out.trim();
        out
    }

    /// Nonzero terms as `((deg_x, deg_y), coeff)`.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &Integer)> {
        self.c.iter().enumerate().flat_map(|(j, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(move |(i, v)| ((i as u32, j as u32), v))
        })
    }

    pub fn trim(&mut self) {
        for row in self.c.iter_mut() {
            upoly::trim(row);
        }
        while self.c.last().is_some_and(|r| r.is_empty()) {
            self.c.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.c.len() <= 1 && self.c.first().is_none_or(|r| r.len() <= 1)
    }

    pub fn constant_value(&self) -> Option<Integer> {
        if self.is_zero() {
            Some(Integer::new())
        } else if self.is_constant() {
            Some(self.c[0][0].clone())
        } else {
            None
        }
    }

    pub fn is_one(&self) -> bool {
        self.c.len() == 1 && self.c[0].len() == 1 && self.c[0][0] == 1
    }

    pub fn deg_y(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    pub fn deg_x(&self) -> usize {
        self.c.iter().map(|r| r.len()).max().unwrap_or(0).saturating_sub(1)
    }

    pub fn nterms(&self) -> usize {
        self.c.iter().map(|r| r.iter().filter(|v| **v != 0).count()).sum()
    }

    /// Leading coefficient in lex order with `y > x`.
    pub fn lead(&self) -> Option<&Integer> {
        self.c.last().and_then(|r| r.last())
    }

    pub fn neg(&self) -> Self {
        ZPoly {
            c: self.c.iter().map(|r| r.iter().map(|v| Integer::from(-v)).collect()).collect(),
        }
    }

    pub fn add(&self, o: &ZPoly) -> ZPoly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for j in 0..n {
            let a = self.c.get(j).map(|v| v.as_slice()).unwrap_or(&[]);
            let b = o.c.get(j).map(|v| v.as_slice()).unwrap_or(&[]);
            c.push(upoly::add(a, b));
        }
        let mut out = ZPoly { c };
        out.trim();
        out
    }

    pub fn sub(&self, o: &ZPoly) -> ZPoly {
        let n = self.c.len().max(o.c.len());
        let mut c = Vec::with_capacity(n);
        for j in 0..n {
            let a = self.c.get(j).map(|v| v.as_slice()).unwrap_or(&[]);
            let b = o.c.get(j).map(|v| v.as_slice()).unwrap_or(&[]);
            c.push(upoly::sub(a, b));
        }
        let mut out = ZPoly { c };
        out.trim();
        out
    }

    pub fn mul(&self, o: &ZPoly) -> ZPoly {
        if self.is_zero() || o.is_zero() {
            return ZPoly::zero();
        }
        if let Some(v) = self.constant_value() {
            return o.scale(&v);
        }
        if let Some(v) = o.constant_value() {
            return self.scale(&v);
        }
        let dx = self.deg_x() + o.deg_x() + 1;
        let mut c: Vec<UPoly> = vec![vec![Integer::new(); dx]; self.c.len() + o.c.len() - 1];
        for (j1, r1) in self.c.iter().enumerate() {
            if r1.is_empty() {
                continue;
            }
            for (j2, r2) in o.c.iter().enumerate() {
                if r2.is_empty() {
                    continue;
                }
                upoly::mul_acc(&mut c[j1 + j2], r1, r2);
            }
        }
        let mut out = ZPoly { c };
        out.trim();
        out
    }

    pub fn pow(&self, mut e: u32) -> ZPoly {
        let mut base = self.clone();
        let mut acc = ZPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn scale(&self, v: &Integer) -> ZPoly {
        if *v == 0 {
            return ZPoly::zero();
        }
        ZPoly { c: self.c.iter().map(|r| upoly::scale(r, v)).collect() }
    }

    pub fn mul_upoly(&self, u: &[Integer]) -> ZPoly {
        let mut out = ZPoly { c: self.c.iter().map(|r| upoly::mul(r, u)).collect() };
        out.trim();
        out
    }

    pub fn int_content(&self) -> Integer {
        let mut g = Integer::new();
        for r in &self.c {
            for v in r {
                g.gcd_mut(v);
                if g == 1 {
                    return g;
                }
            }
        }
        g
    }

    pub fn div_exact_int(&mut self, v: &Integer) {
        for r in self.c.iter_mut() {
            upoly::div_exact_int(r, v);
        }
    }

    /// gcd of the `y`-coefficients, as a primitive polynomial in `Z[x]`.
    pub fn x_content(&self) -> UPoly {
        let mut g: UPoly = Vec::new();
        for r in &self.c {
            if r.is_empty() {
                continue;
            }
            g = upoly::gcd(&g, r);
            if g.len() == 1 {
                break;
            }
        }
        upoly::primitive(&g)
    }

    pub fn div_exact_upoly(&self, u: &[Integer]) -> Option<ZPoly> {
        let mut c = Vec::with_capacity(self.c.len());
        for r in &self.c {
            c.push(upoly::div_exact(r, u)?);
        }
        Some(ZPoly { c })
    }

    /// Exact quotient in `Z[x,y]`, or `None` when `g` does not divide `self`.
    pub fn div_exact(&self, g: &ZPoly) -> Option<ZPoly> {
        assert!(!g.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        if g.is_one() {
            return Some(self.clone());
        }
        if let Some(v) = g.constant_value() {
            let mut out = self.clone();
            for r in &out.c {
                for x in r {
                    if !x.is_divisible(&v) {
                        return None;
                    }
                }
            }
            out.div_exact_int(&v);
            return Some(out);
        }
        let dg = g.deg_y();
        if self.deg_y() < dg {
            return None;
        }
        let lcg = &g.c[dg];
        let mut r = self.clone();
        let nq = self.deg_y() - dg + 1;
        let mut q: Vec<UPoly> = vec![Vec::new(); nq];
        for i in (0..nq).rev() {
            let top = &r.c[i + dg];
            if top.is_empty() {
                continue;
            }
            let qi = upoly::div_exact(top, lcg)?;
            for (j, gj) in g.c.iter().enumerate() {
                if gj.is_empty() {
                    continue;
                }
                let prod = upoly::mul(&qi, gj);
                r.c[i + j] = upoly::sub(&r.c[i + j], &prod);
            }
            q[i] = qi;
        }
        if r.c.iter().any(|row| !row.is_empty()) {
            return None;
        }
        let mut out = ZPoly { c: q };
        out.trim();
        Some(out)
    }

    pub fn diff_x(&self) -> ZPoly {
        let mut out = ZPoly { c: self.c.iter().map(|r| upoly::derivative(r)).collect() };
        out.trim();
        out
    }

    pub fn diff_y(&self) -> ZPoly {
        let mut out = ZPoly {
            c: self
                .c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, r)| upoly::scale(r, &Integer::from(j as u32)))
                .collect(),
        };
        out.trim();
        out
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let mut acc = Rational::new();
        for r in self.c.iter().rev() {
            let mut inner = Rational::new();
            for v in r.iter().rev() {
                inner *= x;
                inner += v;
            }
            acc *= y;
            acc += inner;
        }
        acc
    }

    /// Evaluate at `x = alpha` modulo p, giving a polynomial in `y`.
    pub fn eval_x_mod(&self, f: &Fp, alpha: u64) -> Vec<u64> {
        let mut out: Vec<u64> = self.c.iter().map(|r| upoly::eval_mod(r, f, alpha)).collect();
        modpoly::trim(&mut out);
        out
    }

    /// Sign-normalized: leading coefficient (lex, `y > x`) positive.
    pub fn normalize_sign(&mut self) {
        if self.lead().is_some_and(|v| *v < 0) {
            *self = self.neg();
        }
    }

    pub fn is_lead_positive(&self) -> bool {
        self.lead().is_none_or(|v| *v > 0)
    }

    /// Primitive part over `Z[x]` (integer content and `x`-content removed).
    pub fn primitive_y(&self) -> ZPoly {
        let xc = self.x_content();
        let mut out = self.div_exact_upoly(&xc).expect("content divides");
        let ic = out.int_content();
        if ic > 1 {
            out.div_exact_int(&ic);
        }
        out.normalize_sign();
        out
    }
}

/// gcd in `Z[x,y]` with positive leading coefficient.
pub fn gcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
    if a.is_zero() {
        let mut o = b.clone();
        o.normalize_sign();
        return o;
    }
    if b.is_zero() {
        let mut o = a.clone();
        o.normalize_sign();
        return o;
    }
    if a.is_one() || b.is_one() {
        return ZPoly::one();
    }
    if a == b {
        let mut o = a.clone();
        o.normalize_sign();
        return o;
    }
    let ca = a.int_content();
    let cb = b.int_content();
    let ic = Integer::from(ca.gcd_ref(&cb));
    if a.is_constant() || b.is_constant() {
        return ZPoly::constant(ic);
    }
    let mut a1 = a.clone();
    a1.div_exact_int(&ca);
    let mut b1 = b.clone();
    b1.div_exact_int(&cb);
    let xa = a1.x_content();
    let xb = b1.x_content();
    let xg = upoly::gcd(&xa, &xb);
    let a2 = if xa.len() > 1 { a1.div_exact_upoly(&xa).unwrap() } else { a1 };
    let b2 = if xb.len() > 1 { b1.div_exact_upoly(&xb).unwrap() } else { b1 };
    let main = if a2.deg_y() == 0 || b2.deg_y() == 0 {
        ZPoly::one()
    } else {
        gcd_primitive_y(&a2, &b2)
    };
    let mut out = main.mul_upoly(&xg).scale(&ic);
    out.normalize_sign();
    out
}

fn gcd_primitive_y(a: &ZPoly, b: &ZPoly) -> ZPoly {
    {
        let mut an = a.clone();
        an.normalize_sign();
        let mut bn = b.clone();
        bn.normalize_sign();
        if an == bn {
            return an;
        }
    }
    let lca = &a.c[a.deg_y()];
    let lcb = &b.c[b.deg_y()];
    let gamma = upoly::gcd(lca, lcb);
    let npts = gamma.len() - 1 + a.deg_x().min(b.deg_x()) + 1;

    // Residues of the gamma-normalized gcd, dense [y][x] with npts x-slots.
    let mut acc: Option<(Vec<Vec<Integer>>, Integer)> = None;
    let mut prev: Option<ZPoly> = None;
    for &p in word_primes() {
        let f = Fp::new(p);
        if f.from_int(lca.last().unwrap()) == 0 || f.from_int(lcb.last().unwrap()) == 0 {
            continue;
        }
        let image = match gcd_image_mod_p(&f, a, b, lca, lcb, &gamma, npts) {
            Some(ModImage::Coprime) => return ZPoly::one(),
            Some(ModImage::Poly(g)) => g,
            None => continue,
        };
        acc = match acc.take() {
            None => Some((to_int_grid(&image), Integer::from(p))),
            Some((res, m)) => {
                if image.len() < res.len() {
                    prev = None;
                    Some((to_int_grid(&image), Integer::from(p)))
                } else if image.len() > res.len() {
                    Some((res, m))
                } else {
                    let mi = inv_mod(&m, p);
                    let res = res
                        .iter()
                        .zip(&image)
                        .map(|(rr, gr)| {
                            rr.iter().zip(gr).map(|(r, &g)| crt_step(r, &m, g, p, mi)).collect()
                        })
                        .collect();
                    Some((res, m * p))
                }
            }
        };
        let (res, m) = acc.as_ref().unwrap();
        let mut h = ZPoly {
            c: res.iter().map(|row| row.iter().map(|r| symmetric(r.clone(), m)).collect()).collect(),
        };
        h.trim();
        if prev.as_ref() == Some(&h) {
            let cand = h.primitive_y();
            if a.div_exact(&cand).is_some() && b.div_exact(&cand).is_some() {
                return cand;
            }
        }
        prev = Some(h);
    }
    panic!("modular gcd did not converge:\n{}\n{}", crate::algebra::fmt_zpoly_xy(a), crate::algebra::fmt_zpoly_xy(b))
}

fn to_int_grid(image: &[Vec<u64>]) -> Vec<Vec<Integer>> {
    image.iter().map(|r| r.iter().map(|&v| Integer::from(v)).collect()).collect()
}

enum ModImage {
    Coprime,
    /// `[y][x]` standard residues, each row padded to the same length.
    Poly(Vec<Vec<u64>>),
}

fn gcd_image_mod_p(
    f: &Fp,
    a: &ZPoly,
    b: &ZPoly,
    lca: &[Integer],
    lcb: &[Integer],
    gamma: &[Integer],
    npts: usize,
) -> Option<ModImage> {
    let mut xs: Vec<u64> = Vec::with_capacity(npts);
    let mut vals: Vec<Vec<u64>> = Vec::with_capacity(npts);
    let mut deg = usize::MAX;
    let limit = 4 * npts as u64 + 64;
    let p = f.modulus();
    for t in 1..=limit {
        // Pseudo-random points: a fixed small sequence would hit the same
        // unlucky values for every prime.
        let alpha = f.from_std(splitmix64(p ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15)) % p);
        if upoly::eval_mod(lca, f, alpha) == 0 || upoly::eval_mod(lcb, f, alpha) == 0 {
            continue;
        }
        let ua = a.eval_x_mod(f, alpha);
        let ub = b.eval_x_mod(f, alpha);
        let g = modpoly::gcd_monic(f, ua, ub);
        let dg = g.len() - 1;
        if dg == 0 {
            return Some(ModImage::Coprime);
        }
        if dg < deg {
            deg = dg;
            xs.clear();
            vals.clear();
        } else if dg > deg {
            continue;
        }
        let gm = upoly::eval_mod(gamma, f, alpha);
        xs.push(alpha);
        vals.push(g.iter().map(|&c| f.mul(c, gm)).collect());
        if xs.len() == npts {
            let mut out: Vec<Vec<u64>> = Vec::with_capacity(deg + 1);
            for j in 0..=deg {
                let ys: Vec<u64> = vals.iter().map(|v| v[j]).collect();
                let mut coeffs = modpoly::interpolate(f, &xs, &ys);
                coeffs.resize(npts, 0);
                out.push(coeffs.into_iter().map(|c| f.to_std(c)).collect());
            }
            return Some(ModImage::Poly(out));
        }
    }
    None
}
