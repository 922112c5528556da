//! Exact arithmetic in finite fields `F_q`, `q = p^e`.
//!
//! Elements are stored by their canonical encoding
//! `enc(x) = sum(coeffs[i] * p^i)` in the polynomial basis `1, x, ..., x^(e-1)`
//! modulo a monic irreducible of degree `e`. Every deterministic tie-break in
//! the crate (square roots, PSL representatives, witness searches) is defined
//! through this encoding.
//!
//! Prime fields use direct modular arithmetic. Extension fields use
//! exponential/logarithm tables over a primitive element together with a
//! Zech-logarithm table for addition, so every operation is O(1) after setup.

mod ext;
pub(crate) mod poly;
mod set;

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use ext::QuadraticExtension;
pub use set::ElementSet;

/// Largest supported field order.
pub const MAX_ORDER: u64 = 1 << 24;

const NO_LOG: u32 = u32::MAX;

/// A field element, identified by its canonical encoding in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fe(pub(crate) u32);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    #[inline]
    pub const fn enc(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Fe {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors in ascending order.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Splits `q = p^e`, or `None` when `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u32, u32)> {
    let factors = prime_factors(q);
    if factors.len() != 1 || factors[0] > u32::MAX as u64 {
        return None;
    }
    let p = factors[0];
    let mut e = 0u32;
    let mut r = q;
    while r > 1 {
        r /= p;
        e += 1;
    }
    Some((p as u32, e))
}

/// The lexicographically first monic irreducible of degree `e` over `F_p`,
/// compared on `(c_{e-1}, ..., c_0)`. Coefficients are returned little-endian
/// with the leading 1 included. For `e = 1` the sentinel `x - 0` is returned.
pub fn find_irreducible(p: u32, e: u32) -> Result<Vec<u32>> {
    if !is_prime(p as u64) {
        return Err(Error::NotPrime(p as u64));
    }
    if e == 0 {
        return Err(Error::InvalidDegree);
    }
    check_order(p, e)?;
    if e == 1 {
        return Ok(vec![0, 1]);
    }
    let p64 = p as u64;
    let total = p64.pow(e);
    for k in 0..total {
        let mut f: Vec<u64> = (0..e).map(|i| (k / p64.pow(i)) % p64).collect();
        f.push(1);
        if poly::is_irreducible(&f, p64) {
            return Ok(f.into_iter().map(|c| c as u32).collect());
        }
    }
    Err(Error::Internal(format!("no irreducible of degree {e} over F_{p}")))
}

fn check_order(p: u32, e: u32) -> Result<u32> {
    let order = (p as u128).checked_pow(e).unwrap_or(u128::MAX);
    if order > MAX_ORDER as u128 {
        return Err(Error::OrderTooLarge { order, max: MAX_ORDER });
    }
    Ok(order as u32)
}

struct Tables {
    /// `exp[i] = g^i` for `i < 2(q-1)`, doubled so sums of logs need no reduction.
    exp: Vec<u32>,
    /// `log[enc]`, `NO_LOG` at zero.
    log: Vec<u32>,
    /// `zech[d] = log(1 + g^d)`, `NO_LOG` where `1 + g^d = 0`.
    zech: Vec<u32>,
}

struct Inner {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    tables: Option<Tables>,
    nonresidue: Option<Fe>,
}

/// The finite field `F_q`. Cheap to clone; all operations are pure.
#[derive(Clone)]
pub struct Field(Arc<Inner>);

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{} (p={}, e={}, modulus={:?})", self.q(), self.p(), self.e(), self.modulus())
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p() == other.p() && self.modulus() == other.modulus()
    }
}

impl Eq for Field {}

impl Field {
    /// `F_{p^e}` with the lexicographically first irreducible modulus.
    pub fn new(p: u32, e: u32) -> Result<Field> {
        let modulus = find_irreducible(p, e)?;
        Self::build(p, e, modulus)
    }

    /// `F_q` for a prime power `q`.
    pub fn from_order(q: u64) -> Result<Field> {
        if q > MAX_ORDER {
            return Err(Error::OrderTooLarge { order: q as u128, max: MAX_ORDER });
        }
        let (p, e) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
        Self::new(p, e)
    }

    /// `F_p[x]/(modulus)` with an explicit monic irreducible modulus (little-endian).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if modulus.len() < 2 {
            return Err(Error::InvalidDegree);
        }
        let e = (modulus.len() - 1) as u32;
        check_order(p, e)?;
        if modulus.iter().any(|&c| c >= p) || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidModulus);
        }
        if e == 1 {
            if modulus != [0, 1] {
                return Err(Error::InvalidModulus);
            }
        } else {
            let f: Vec<u64> = modulus.iter().map(|&c| c as u64).collect();
            if !poly::is_irreducible(&f, p as u64) {
                return Err(Error::InvalidModulus);
            }
        }
        Self::build(p, e, modulus)
    }

    fn build(p: u32, e: u32, modulus: Vec<u32>) -> Result<Field> {
        let q = check_order(p, e)?;
        let tables = if e > 1 { Some(build_tables(p, e, q, &modulus)) } else { None };
        let mut field = Field(Arc::new(Inner { p, e, q, modulus, tables, nonresidue: None }));
        if p != 2 {
            let z = field.iter().find(|&x| !field.is_square(x));
            Arc::get_mut(&mut field.0).expect("unshared").nonresidue = z;
        }
        Ok(field)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.0.p
    }

    #[inline]
    pub fn e(&self) -> u32 {
        self.0.e
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.0.modulus
    }

    #[inline]
    pub fn is_even(&self) -> bool {
        self.0.p == 2
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.0.p as i64) as u32)
    }

    pub fn element(&self, enc: u64) -> Result<Fe> {
        if enc >= self.0.q as u64 {
            return Err(Error::ElementOutOfRange { enc, q: self.0.q });
        }
        Ok(Fe(enc as u32))
    }

    /// Element from little-endian residues; missing high coefficients are zero.
    pub fn from_coeffs(&self, coeffs: &[u32]) -> Result<Fe> {
        if coeffs.len() > self.0.e as usize || coeffs.iter().any(|&c| c >= self.0.p) {
            return Err(Error::InvalidArgument(format!(
                "coefficients {coeffs:?} do not describe an element of F_{}",
                self.0.q
            )));
        }
        let mut enc = 0u64;
        for &c in coeffs.iter().rev() {
            enc = enc * self.0.p as u64 + c as u64;
        }
        Ok(Fe(enc as u32))
    }

    /// Little-endian residues of `x`, always of length `e`.
    pub fn coeffs(&self, x: Fe) -> Vec<u32> {
        let p = self.0.p;
        let mut r = x.0;
        (0..self.0.e)
            .map(|_| {
                let c = r % p;
                r /= p;
                c
            })
            .collect()
    }

    /// All elements in increasing `enc` order.
    pub fn iter(&self) -> impl Iterator<Item = Fe> + Clone {
        (0..self.0.q).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        match &self.0.tables {
            None => {
                let s = a.0 + b.0;
                Fe(if s >= self.0.p { s - self.0.p } else { s })
            }
            Some(t) => {
                if a.0 == 0 {
                    return b;
                }
                if b.0 == 0 {
                    return a;
                }
                let n = self.0.q - 1;
                let la = t.log[a.0 as usize];
                let lb = t.log[b.0 as usize];
                let d = if lb >= la { lb - la } else { lb + n - la };
                let z = t.zech[d as usize];
                if z == NO_LOG {
                    Fe(0)
                } else {
                    Fe(t.exp[(la + z) as usize])
                }
            }
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            return a;
        }
        match &self.0.tables {
            None => Fe(self.0.p - a.0),
            Some(t) => {
                if self.0.p == 2 {
                    a
                } else {
                    let half = (self.0.q - 1) / 2;
                    Fe(t.exp[(t.log[a.0 as usize] + half) as usize])
                }
            }
        }
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        match &self.0.tables {
            None => Fe(((a.0 as u64 * b.0 as u64) % self.0.p as u64) as u32),
            Some(t) => {
                if a.0 == 0 || b.0 == 0 {
                    Fe(0)
                } else {
                    Fe(t.exp[(t.log[a.0 as usize] + t.log[b.0 as usize]) as usize])
                }
            }
        }
    }

    #[inline]
    pub fn square(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        Ok(match &self.0.tables {
            None => self.pow(a, self.0.p as u64 - 2),
            Some(t) => {
                let n = self.0.q - 1;
                let l = t.log[a.0 as usize];
                Fe(t.exp[((n - l) % n) as usize])
            }
        })
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^k` with `0^0 = 1`.
    pub fn pow(&self, a: Fe, k: u64) -> Fe {
        if k == 0 {
            return Fe(1);
        }
        if a.0 == 0 {
            return Fe(0);
        }
        match &self.0.tables {
            None => Fe(poly::pow_mod(a.0 as u64, k, self.0.p as u64) as u32),
            Some(t) => {
                let n = (self.0.q - 1) as u64;
                let l = t.log[a.0 as usize] as u64;
                Fe(t.exp[((l * (k % n)) % n) as usize])
            }
        }
    }

    /// `a^(2^k)` by repeated squaring.
    pub fn pow2k(&self, a: Fe, k: u32) -> Fe {
        (0..k).fold(a, |acc, _| self.square(acc))
    }

    /// Quadratic-residue test; `0` counts as a square, and in characteristic 2
    /// every element is a square.
    pub fn is_square(&self, a: Fe) -> bool {
        if a.0 == 0 || self.0.p == 2 {
            return true;
        }
        match &self.0.tables {
            Some(t) => t.log[a.0 as usize] % 2 == 0,
            None => self.pow(a, (self.0.q as u64 - 1) / 2) == Fe(1),
        }
    }

    /// The square root with the smaller encoding.
    pub fn sqrt(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Ok(a);
        }
        if self.0.p == 2 {
            return Ok(self.pow(a, self.0.q as u64 / 2));
        }
        if !self.is_square(a) {
            return Err(Error::NotASquare);
        }
        let root = self.tonelli_shanks(a);
        debug_assert_eq!(self.square(root), a);
        let other = self.neg(root);
        Ok(if other.0 < root.0 { other } else { root })
    }

    fn tonelli_shanks(&self, a: Fe) -> Fe {
        let mut q_odd = self.0.q as u64 - 1;
        let mut s = 0u32;
        while q_odd.is_multiple_of(2) {
            q_odd /= 2;
            s += 1;
        }
        let z = self.0.nonresidue.expect("odd field has a non-residue");
        let mut m = s;
        let mut c = self.pow(z, q_odd);
        let mut t = self.pow(a, q_odd);
        let mut r = self.pow(a, q_odd.div_ceil(2));
        while t != Fe(1) {
            let mut i = 0u32;
            let mut tt = t;
            while tt != Fe(1) {
                tt = self.square(tt);
                i += 1;
            }
            let b = self.pow2k(c, m - i - 1);
            r = self.mul(r, b);
            c = self.square(b);
            t = self.mul(t, c);
            m = i;
        }
        r
    }

    /// A fixed non-square (smallest encoding), for odd `q`.
    pub fn nonresidue(&self) -> Option<Fe> {
        self.0.nonresidue
    }
}

/// Element multiplication on residue vectors, used only while building tables.
fn slow_mul(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    poly::mul_mod(a, b, modulus, p)
}

fn digits(enc: u64, p: u64, e: u32) -> Vec<u64> {
    let mut r = enc;
    let mut out: Vec<u64> = (0..e)
        .map(|_| {
            let c = r % p;
            r /= p;
            c
        })
        .collect();
    while out.last() == Some(&0) {
        out.pop();
    }
    out
}

fn undigits(d: &[u64], p: u64) -> u64 {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn build_tables(p: u32, e: u32, q: u32, modulus: &[u32]) -> Tables {
    let p64 = p as u64;
    let f: Vec<u64> = modulus.iter().map(|&c| c as u64).collect();
    let n = (q - 1) as u64;
    let factors = prime_factors(n);
    let slow_pow = |base: &[u64], mut k: u64| {
        let mut acc = vec![1u64];
        let mut b = base.to_vec();
        while k > 0 {
            if k & 1 == 1 {
                acc = slow_mul(&acc, &b, &f, p64);
            }
            b = slow_mul(&b, &b, &f, p64);
            k >>= 1;
        }
        acc
    };
    let generator = (2..q as u64)
        .map(|enc| digits(enc, p64, e))
        .find(|g| factors.iter().all(|&r| slow_pow(g, n / r) != [1]))
        .expect("multiplicative group of a finite field is cyclic");

    let mut exp = vec![0u32; 2 * (q as usize - 1)];
    let mut log = vec![NO_LOG; q as usize];
    let mut cur = vec![1u64];
    for (i, slot) in exp.iter_mut().take((q - 1) as usize).enumerate() {
        let enc = undigits(&cur, p64) as u32;
        *slot = enc;
        log[enc as usize] = i as u32;
        cur = slow_mul(&cur, &generator, &f, p64);
    }
    for i in (q - 1) as usize..exp.len() {
        exp[i] = exp[i - (q - 1) as usize];
    }
    let zech = (0..(q - 1) as usize)
        .map(|d| {
            let x = exp[d];
            // adding 1 only touches the constant residue
            let y = if x % p == p - 1 { x - (p - 1) } else { x + 1 };
            if y == 0 {
                NO_LOG
            } else {
                log[y as usize]
            }
        })
        .collect();
    Tables { exp, log, zech }
}
