//! Trace polynomials of two-generator words and the Engel trace map.
//!
//! Coordinates follow the usual convention `s = tr x`, `u = tr xy`,
//! `t = tr y`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{Fe, Field};
use crate::sl2::TraceTriple;
use crate::words::{Generator, Word};

/// Exponents of `(s, u, t)`.
pub type Monomial = [u32; 3];

/// A polynomial in `Z[s, u, t]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct TracePoly {
    terms: BTreeMap<Monomial, BigInt>,
}

impl TracePoly {
    pub fn zero() -> Self {
        TracePoly::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        TracePoly::monomial([0, 0, 0], c)
    }

    pub fn monomial(exps: Monomial, c: impl Into<BigInt>) -> Self {
        let mut p = TracePoly::zero();
        p.add_term(exps, c.into());
        p
    }

    pub fn s() -> Self {
        TracePoly::monomial([1, 0, 0], 1)
    }

    pub fn u() -> Self {
        TracePoly::monomial([0, 1, 0], 1)
    }

    pub fn t() -> Self {
        TracePoly::monomial([0, 0, 1], 1)
    }

    fn add_term(&mut self, exps: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(exps).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&exps);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: Monomial) -> BigInt {
        self.terms.get(&exps).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn add(&self, other: &TracePoly) -> TracePoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TracePoly) -> TracePoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, -c);
        }
        out
    }

    pub fn neg(&self) -> TracePoly {
        TracePoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }

    pub fn mul(&self, other: &TracePoly) -> TracePoly {
        let mut out = TracePoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    /// Image in `F_q` at `(s, u, t)`.
    pub fn evaluate(&self, f: &Field, s: Fe, u: Fe, t: Fe) -> Fe {
        let p = BigInt::from(f.p());
        let mut acc = f.zero();
        for (e, c) in &self.terms {
            let r = ((c % &p) + &p) % &p;
            let coeff = f.from_int(r.to_i64().expect("reduced coefficient fits in i64"));
            let mono = f.mul(f.mul(f.pow(s, e[0] as u64), f.pow(u, e[1] as u64)), f.pow(t, e[2] as u64));
            acc = f.add(acc, f.mul(coeff, mono));
        }
        acc
    }

    /// Terms in print order: total degree descending, then exponent
    /// vectors `(s, u, t)` lexicographically descending.
    pub fn sorted_terms(&self) -> Vec<(Monomial, BigInt)> {
        let mut v: Vec<(Monomial, BigInt)> = self.terms.iter().map(|(e, c)| (*e, c.clone())).collect();
        v.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        v
    }
}

impl fmt::Display for TracePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.sorted_terms().into_iter().enumerate() {
            let negative = c.is_negative();
            let mag = c.abs();
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mut factors: Vec<String> = Vec::new();
            for (var, &k) in ["s", "u", "t"].iter().zip(e.iter()) {
                match k {
                    0 => {}
                    1 => factors.push((*var).to_string()),
                    _ => factors.push(format!("{var}^{k}")),
                }
            }
            if factors.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                write!(f, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

impl Serialize for TracePoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// An element `a + b x + c y + d xy` of the algebra spanned by words in
/// two generic `SL(2)` matrices, with coefficients in `Z[s, u, t]`.
#[derive(Clone, Debug)]
struct NormalForm {
    one: TracePoly,
    x: TracePoly,
    y: TracePoly,
    xy: TracePoly,
}

impl NormalForm {
    fn identity() -> Self {
        NormalForm { one: TracePoly::constant(1), x: TracePoly::zero(), y: TracePoly::zero(), xy: TracePoly::zero() }
    }

    fn scale(&self, k: &TracePoly) -> Self {
        NormalForm { one: self.one.mul(k), x: self.x.mul(k), y: self.y.mul(k), xy: self.xy.mul(k) }
    }

    fn sub(&self, o: &NormalForm) -> Self {
        NormalForm { one: self.one.sub(&o.one), x: self.x.sub(&o.x), y: self.y.sub(&o.y), xy: self.xy.sub(&o.xy) }
    }

    fn times_x(&self) -> Self {
        let (s, u, t) = (TracePoly::s(), TracePoly::u(), TracePoly::t());
        let u_st = u.sub(&s.mul(&t));
        NormalForm {
            one: self.y.mul(&u_st).sub(&self.x).sub(&self.xy.mul(&t)),
            x: self.one.add(&self.x.mul(&s)).add(&self.y.mul(&t)).add(&self.xy.mul(&u)),
            y: self.y.mul(&s).add(&self.xy),
            xy: self.y.neg(),
        }
    }

    fn times_y(&self) -> Self {
        let t = TracePoly::t();
        NormalForm {
            one: self.y.neg(),
            x: self.xy.neg(),
            y: self.one.add(&self.y.mul(&t)),
            xy: self.x.add(&self.xy.mul(&t)),
        }
    }

    fn times_letter(&self, g: Generator, sign: i64) -> Self {
        let forward = match g {
            Generator::X => self.times_x(),
            Generator::Y => self.times_y(),
        };
        if sign > 0 {
            forward
        } else {
            let tr = match g {
                Generator::X => TracePoly::s(),
                Generator::Y => TracePoly::t(),
            };
            self.scale(&tr).sub(&forward)
        }
    }

    fn trace(&self) -> TracePoly {
        self.one
            .mul(&TracePoly::constant(2))
            .add(&self.x.mul(&TracePoly::s()))
            .add(&self.y.mul(&TracePoly::t()))
            .add(&self.xy.mul(&TracePoly::u()))
    }
}

/// The polynomial `P` with `tr w(x, y) = P(tr x, tr xy, tr y)`.
///
/// Works letter by letter in the basis `1, x, y, xy`, reducing with
/// `x^2 = s x - 1`, `y^2 = t y - 1` and
/// `y x = (u - s t) + t x + s y - xy`.
pub fn trace_polynomial(w: &Word) -> TracePoly {
    w.letters().fold(NormalForm::identity(), |v, (g, e)| v.times_letter(g, e)).trace()
}

/// `s^2 + t^2 + u^2 - s u t - 2`, the trace of `[x, y]`.
pub fn commutator_poly() -> TracePoly {
    let (s, u, t) = (TracePoly::s(), TracePoly::u(), TracePoly::t());
    s.mul(&s).add(&t.mul(&t)).add(&u.mul(&u)).sub(&s.mul(&u).mul(&t)).sub(&TracePoly::constant(2))
}

pub fn p_comm(f: &Field, s: Fe, u: Fe, t: Fe) -> Fe {
    let sq = f.add(f.add(f.square(s), f.square(t)), f.square(u));
    f.sub(f.sub(sq, f.mul(f.mul(s, u), t)), f.from_int(2))
}

/// `(p(s,u,t), t, t)`: the character coordinates of `([x, y], y)`.
pub fn psi(f: &Field, v: TraceTriple) -> TraceTriple {
    TraceTriple { s: p_comm(f, v.s, v.u, v.t), u: v.t, t: v.t }
}

/// A point `(s, t)` of the plane `u = t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PlanePoint {
    pub s: Fe,
    pub t: Fe,
}

impl PlanePoint {
    pub fn new(s: Fe, t: Fe) -> Self {
        PlanePoint { s, t }
    }
}

/// `(s^2 - s t^2 + 2 t^2 - 2, t)`.
#[inline]
pub fn mu(f: &Field, pt: PlanePoint) -> PlanePoint {
    PlanePoint { s: mu_slice(f, pt.s, f.square(pt.t)), t: pt.t }
}

/// First coordinate of `mu` with `t^2` precomputed.
#[inline]
pub fn mu_slice(f: &Field, s: Fe, t2: Fe) -> Fe {
    // s^2 - s t^2 + 2 t^2 - 2 = s(s - t^2) + 2(t^2 - 1)
    let two_t2m1 = f.add(f.sub(t2, f.one()), f.sub(t2, f.one()));
    f.add(f.mul(s, f.sub(s, t2)), two_t2m1)
}

pub fn rho_n(f: &Field, pt: PlanePoint, n: u32) -> Fe {
    let t2 = f.square(pt.t);
    (0..n).fold(pt.s, |s, _| mu_slice(f, s, t2))
}

/// `(z(z - kappa), kappa)`, conjugate to `mu` by `z = s - 2`, `kappa = t^2 - 4`.
pub fn m_conj(f: &Field, z: Fe, kappa: Fe) -> (Fe, Fe) {
    (f.mul(z, f.sub(z, kappa)), kappa)
}

/// `(s^2 - s t^2, t)`; only for characteristic two.
pub fn mu_char2(f: &Field, pt: PlanePoint) -> Result<PlanePoint> {
    if !f.is_even() {
        return Err(Error::UnsupportedField { q: f.q(), reason: "mu_char2 needs characteristic 2" });
    }
    Ok(PlanePoint { s: f.sub(f.square(pt.s), f.mul(pt.s, f.square(pt.t))), t: pt.t })
}

/// Closed forms of `rho_n` on the exceptional slices, kept separate from the
/// iteration so each can check the other.
pub mod closed_form {
    use crate::ff::QuadraticExtension;
    use crate::ff::{Fe, Field};

    /// `t^2 = 4`: `(s - 2)^{2^n} + 2`.
    pub fn rho_t2_eq_4(f: &Field, s: Fe, n: u32) -> Fe {
        let two = f.from_int(2);
        f.add(f.pow2k(f.sub(s, two), n), two)
    }

    /// `t^2 = 2`: `(s - 1)^{2^n} + 1`.
    pub fn rho_t2_eq_2(f: &Field, s: Fe, n: u32) -> Fe {
        f.add(f.pow2k(f.sub(s, f.one()), n), f.one())
    }

    /// `t = 0`, `s = x + 1/x` with `x` in `F_{q^2}`: `x^{2^n} + x^{-2^n}`,
    /// restricted back to `F_q`.
    pub fn rho_t_eq_0(qe: &QuadraticExtension, x: Fe, n: u32) -> Option<Fe> {
        let k = qe.field();
        let xn = k.pow2k(x, n);
        let v = k.add(xn, k.inv(xn).ok()?);
        qe.restrict(v)
    }

    /// Some `x` in `F_{q^2}` with `x + 1/x = s`.
    pub fn t0_parameter(qe: &QuadraticExtension, s: Fe) -> Option<Fe> {
        let k = qe.field();
        let se = qe.embed(s);
        k.iter().find(|&x| !x.is_zero() && k.add(x, k.inv(x).unwrap()) == se)
    }
}
