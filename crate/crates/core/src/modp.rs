//! Word-sized prime fields with Montgomery multiplication.
//!
//! Elements handed out by [`Fp`] are always in Montgomery form; convert with
//! [`Fp::to_std`] / [`Fp::from_std`] at the boundaries.

use rand::Rng;
use rug::ops::RemRounding;
use rug::integer::IsPrime;
use rug::{Integer, Rational};

/// Largest modulus the Montgomery reduction below is valid for.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fp {
    p: u64,
    /// -p^{-1} mod 2^64
    pinv: u64,
    /// 2^128 mod p
    r2: u64,
}

impl Fp {
    /// `p` must be an odd prime below 2^62.
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p > 2 && p < MAX_MODULUS, "modulus out of range");
        // Newton iteration for p^{-1} mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..7 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let pinv = inv.wrapping_neg();
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Fp { p, pinv, r2 }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.pinv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn from_std(&self, a: u64) -> u64 {
        self.redc((a % self.p) as u128 * self.r2 as u128)
    }

    #[inline]
    pub fn to_std(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    #[inline]
    pub fn zero(&self) -> u64 {
        0
    }

    #[inline]
    pub fn one(&self) -> u64 {
        self.from_std(1)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = self.one();
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a != 0);
        self.pow(a, self.p - 2)
    }

    pub fn from_int(&self, n: &Integer) -> u64 {
        self.from_std(mod_u64(n, self.p))
    }

    pub fn from_i64(&self, n: i64) -> u64 {
        let m = n.rem_euclid(self.p as i64) as u64;
        self.from_std(m)
    }

    /// `None` when the denominator vanishes modulo p.
    pub fn from_rat(&self, q: &Rational) -> Option<u64> {
        let d = self.from_int(q.denom());
        if d == 0 {
            return None;
        }
        Some(self.mul(self.from_int(q.numer()), self.inv(d)))
    }
}

/// Least nonnegative residue of `n` modulo `p`.
pub fn mod_u64(n: &Integer, p: u64) -> u64 {
    if let Some(v) = n.to_i64() {
        return v.rem_euclid(p as i64) as u64;
    }
    let pz = Integer::from(p);
    let mut r = Integer::from(n % &pz);
    if r < 0 {
        r += &pz;
    }
    r.to_u64_wrapping()
}

/// Odd primes in `[lo, 2^62)` drawn from a seeded generator.
pub fn random_primes<R: Rng>(rng: &mut R, count: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(count);
    while out.len() < count {
        let cand = rng.gen_range((1u64 << 61)..MAX_MODULUS) | 1;
        let p = next_prime(cand);
        if p < MAX_MODULUS && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub fn next_prime(from: u64) -> u64 {
    let mut n = Integer::from(from);
    if n.is_probably_prime(40) == IsPrime::No {
        n.next_prime_mut();
    }
    n.to_u64().expect("prime fits in u64")
}

/// Deterministic descending sequence of primes just below 2^62.
pub struct PrimeStream {
    cur: u64,
}

impl PrimeStream {
    pub fn new() -> Self {
        PrimeStream { cur: MAX_MODULUS }
    }
}

impl Default for PrimeStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let mut c = self.cur - 1;
        loop {
            if c < 3 {
                return None;
            }
            if c % 2 == 1 && Integer::from(c).is_probably_prime(40) != IsPrime::No {
                self.cur = c;
                return Some(c);
            }
            c -= 1;
        }
    }
}

/// A fixed list of primes just below 2^62, computed once.
pub fn word_primes() -> &'static [u64] {
    static PRIMES: std::sync::OnceLock<Vec<u64>> = std::sync::OnceLock::new();
    PRIMES.get_or_init(|| PrimeStream::new().take(256).collect())
}

/// SplitMix64 finalizer, used to derive well-spread evaluation points.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Symmetric representative of `residue` modulo `modulus`.
pub fn symmetric(residue: Integer, modulus: &Integer) -> Integer {
    let half = Integer::from(modulus >> 1);
    if residue > half {
        residue - modulus
    } else {
        residue
    }
}

/// Combine `a mod m` with `b mod p` into the residue modulo `m*p`.
pub fn crt_step(a: &Integer, m: &Integer, b: u64, p: u64, m_inv_mod_p: u64) -> Integer {
    // x = a + m * ((b - a) * m^{-1} mod p)
    let a_mod = mod_u64(a, p);
    let diff = (b as u128 + p as u128 - a_mod as u128) % p as u128;
    let t = (diff * m_inv_mod_p as u128 % p as u128) as u64;
    a + Integer::from(m * t)
}

/// Inverse of `m` modulo the prime `p` (plain arithmetic, not Montgomery).
pub fn inv_mod(m: &Integer, p: u64) -> u64 {
    let r = mod_u64(m, p);
    let f = Fp::new(p);
    f.to_std(f.inv(f.from_std(r)))
}

/// Rational reconstruction of `a mod m`: finds n/d with |n|, d <= sqrt(m/2).
pub fn rational_reconstruct(a: &Integer, m: &Integer) -> Option<Rational> {
    let bound = Integer::from(m >> 1).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.clone().rem_euc(m));
    let (mut t0, mut t1) = (Integer::new(), Integer::from(1));
    while r1 > bound {
        let (q, r) = r0.div_rem_floor_ref(&r1).into();
        let q: Integer = q;
        let r: Integer = r;
        r0 = std::mem::replace(&mut r1, r);
        let t2 = &t0 - Integer::from(&q * &t1);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1 == 0 || Integer::from(t1.abs_ref()) > bound {
        return None;
    }
    let q = Rational::from((r1, t1));
    let check = Integer::from(q.denom().gcd_ref(m));
    if check != 1 {
        return None;
    }
    Some(q)
}
