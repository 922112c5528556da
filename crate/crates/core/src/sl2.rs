//! The groups `SL(2,q)` and `PSL(2,q)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{Fe, Field};

/// A 2x2 matrix `((a, b), (c, d))` over `F_q` with `ad - bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GroupElement {
    a: Fe,
    b: Fe,
    c: Fe,
    d: Fe,
}

impl GroupElement {
    /// Row-major entries `[a, b, c, d]`.
    pub fn entries(&self) -> [Fe; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

/// The character coordinates `(tr x, tr xy, tr y)` of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct TraceTriple {
    pub s: Fe,
    pub u: Fe,
    pub t: Fe,
}

/// An element of `PSL(2,q)`, stored as the canonical member of `{M, -M}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct PslClass(GroupElement);

impl PslClass {
    pub fn rep(&self) -> GroupElement {
        self.0
    }
}

/// Partition of `SL(2,q)` into conjugacy classes.
#[derive(Clone, Debug)]
pub struct ConjugacyClasses {
    reps: Vec<GroupElement>,
    sizes: Vec<usize>,
    class_of: Vec<u32>,
}

impl ConjugacyClasses {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Representatives (smallest enumeration index in each class) with class sizes.
    pub fn reps(&self) -> impl Iterator<Item = (GroupElement, usize)> + '_ {
        self.reps.iter().copied().zip(self.sizes.iter().copied())
    }

    pub fn rep(&self, class: usize) -> GroupElement {
        self.reps[class]
    }

    pub fn size(&self, class: usize) -> usize {
        self.sizes[class]
    }

    /// Class id of the element with the given enumeration index.
    #[inline]
    pub fn class_of_index(&self, index: usize) -> usize {
        self.class_of[index] as usize
    }
}

/// `SL(2,q)` over a fixed field.
#[derive(Clone, Debug)]
pub struct Sl2 {
    field: Field,
}

impl Sl2 {
    pub fn new(field: &Field) -> Self {
        Sl2 { field: field.clone() }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// `q^3 - q`.
    pub fn order(&self) -> u64 {
        let q = self.field.q() as u64;
        q * q * q - q
    }

    pub fn element(&self, a: Fe, b: Fe, c: Fe, d: Fe) -> Result<GroupElement> {
        let f = &self.field;
        if f.sub(f.mul(a, d), f.mul(b, c)) != f.one() {
            return Err(Error::NotUnimodular);
        }
        Ok(GroupElement { a, b, c, d })
    }

    /// Convenience constructor from small integers mapped into the prime subfield.
    pub fn from_ints(&self, a: i64, b: i64, c: i64, d: i64) -> Result<GroupElement> {
        let f = &self.field;
        self.element(f.from_int(a), f.from_int(b), f.from_int(c), f.from_int(d))
    }

    pub fn identity(&self) -> GroupElement {
        let f = &self.field;
        GroupElement { a: f.one(), b: f.zero(), c: f.zero(), d: f.one() }
    }

    pub fn minus_identity(&self) -> GroupElement {
        self.neg(&self.identity())
    }

    /// `diag(a, 1/a)`.
    pub fn diag(&self, a: Fe) -> Result<GroupElement> {
        let f = &self.field;
        Ok(GroupElement { a, b: f.zero(), c: f.zero(), d: f.inv(a)? })
    }

    /// `((1, b), (0, 1))`.
    pub fn upper_unipotent(&self, b: Fe) -> GroupElement {
        let f = &self.field;
        GroupElement { a: f.one(), b, c: f.zero(), d: f.one() }
    }

    /// `((0, 1), (-1, 0))`.
    pub fn rotation(&self) -> GroupElement {
        let f = &self.field;
        GroupElement { a: f.zero(), b: f.one(), c: f.neg(f.one()), d: f.zero() }
    }

    #[inline]
    pub fn mul(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let f = &self.field;
        GroupElement {
            a: f.add(f.mul(x.a, y.a), f.mul(x.b, y.c)),
            b: f.add(f.mul(x.a, y.b), f.mul(x.b, y.d)),
            c: f.add(f.mul(x.c, y.a), f.mul(x.d, y.c)),
            d: f.add(f.mul(x.c, y.b), f.mul(x.d, y.d)),
        }
    }

    /// Closed form `((d, -b), (-c, a))`.
    #[inline]
    pub fn inv(&self, x: &GroupElement) -> GroupElement {
        let f = &self.field;
        GroupElement { a: x.d, b: f.neg(x.b), c: f.neg(x.c), d: x.a }
    }

    #[inline]
    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        let f = &self.field;
        GroupElement { a: f.neg(x.a), b: f.neg(x.b), c: f.neg(x.c), d: f.neg(x.d) }
    }

    #[inline]
    pub fn trace(&self, x: &GroupElement) -> Fe {
        self.field.add(x.a, x.d)
    }

    /// `g x g^-1`.
    pub fn conjugate(&self, x: &GroupElement, g: &GroupElement) -> GroupElement {
        self.mul(&self.mul(g, x), &self.inv(g))
    }

    /// `x y x^-1 y^-1`.
    #[inline]
    pub fn commutator(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let xy = self.mul(x, y);
        let yx = self.mul(y, x);
        self.mul(&xy, &self.inv(&yx))
    }

    pub fn pow(&self, x: &GroupElement, k: i64) -> GroupElement {
        let mut base = if k < 0 { self.inv(x) } else { *x };
        let mut e = k.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    /// `(tr x, tr xy, tr y)`.
    #[inline]
    pub fn pi(&self, x: &GroupElement, y: &GroupElement) -> TraceTriple {
        let f = &self.field;
        // tr(xy) without forming the product
        let u = f.add(f.add(f.mul(x.a, y.a), f.mul(x.b, y.c)), f.add(f.mul(x.c, y.b), f.mul(x.d, y.d)));
        TraceTriple { s: self.trace(x), u, t: self.trace(y) }
    }

    /// All `q^3 - q` elements in a fixed order: `a` ascending; for `a = 0`,
    /// `b != 0` ascending with `c = -1/b` and `d` ascending; for `a != 0`,
    /// `(b, c)` ascending with `d = (1 + bc)/a`.
    pub fn iter(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(move |i| self.element_at(i))
    }

    /// Position of `x` in [`iter`](Self::iter).
    #[inline]
    pub fn index_of(&self, x: &GroupElement) -> usize {
        let q = self.field.q() as usize;
        let (a, b, c, d) = (x.a.enc() as usize, x.b.enc() as usize, x.c.enc() as usize, x.d.enc() as usize);
        if a == 0 {
            (b - 1) * q + d
        } else {
            (q - 1) * q + ((a - 1) * q + b) * q + c
        }
    }

    pub fn element_at(&self, index: usize) -> GroupElement {
        let f = &self.field;
        let q = f.q() as usize;
        let head = (q - 1) * q;
        if index < head {
            let b = Fe((index / q + 1) as u32);
            let d = Fe((index % q) as u32);
            let c = f.neg(f.inv(b).expect("b != 0"));
            GroupElement { a: f.zero(), b, c, d }
        } else {
            let r = index - head;
            let c = Fe((r % q) as u32);
            let b = Fe(((r / q) % q) as u32);
            let a = Fe((r / (q * q) + 1) as u32);
            let d = f.div(f.add(f.one(), f.mul(b, c)), a).expect("a != 0");
            GroupElement { a, b, c, d }
        }
    }

    /// All elements of trace `tr`.
    pub fn elements_with_trace(&self, tr: Fe) -> impl Iterator<Item = GroupElement> + '_ {
        let f = self.field.clone();
        self.field.iter().flat_map(move |alpha| {
            let f = f.clone();
            let delta = f.sub(tr, alpha);
            // alpha * delta - beta * gamma = 1
            let k = f.sub(f.mul(alpha, delta), f.one());
            let f2 = f.clone();
            f.iter().flat_map(move |beta| {
                let f = f2.clone();
                let out: Vec<GroupElement> = if beta.is_zero() {
                    if k.is_zero() {
                        f.iter().map(|gamma| GroupElement { a: alpha, b: beta, c: gamma, d: delta }).collect()
                    } else {
                        Vec::new()
                    }
                } else {
                    let gamma = f.div(k, beta).expect("beta != 0");
                    vec![GroupElement { a: alpha, b: beta, c: gamma, d: delta }]
                };
                out
            })
        })
    }

    /// Generators of `SL(2,q)`: elementary matrices over an `F_p`-basis of `F_q`.
    fn generators(&self) -> Vec<GroupElement> {
        let f = &self.field;
        let mut gens = Vec::new();
        let mut basis = 1u32;
        for _ in 0..f.e() {
            let l = Fe(basis);
            gens.push(GroupElement { a: f.one(), b: l, c: f.zero(), d: f.one() });
            gens.push(GroupElement { a: f.one(), b: f.zero(), c: l, d: f.one() });
            basis *= f.p();
        }
        gens
    }

    /// Conjugacy classes by orbit partition: each unvisited element is closed
    /// under conjugation by a generating set.
    pub fn conjugacy_classes(&self) -> ConjugacyClasses {
        const UNSEEN: u32 = u32::MAX;
        let n = self.order() as usize;
        let gens: Vec<(GroupElement, GroupElement)> =
            self.generators().into_iter().map(|g| (g, self.inv(&g))).collect();
        let mut class_of = vec![UNSEEN; n];
        let mut reps = Vec::new();
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if class_of[start] != UNSEEN {
                continue;
            }
            let id = reps.len() as u32;
            let rep = self.element_at(start);
            reps.push(rep);
            class_of[start] = id;
            let mut size = 1usize;
            stack.push(rep);
            while let Some(x) = stack.pop() {
                for (g, g_inv) in &gens {
                    let y = self.mul(&self.mul(g, &x), g_inv);
                    let iy = self.index_of(&y);
                    if class_of[iy] == UNSEEN {
                        class_of[iy] = id;
                        size += 1;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        ConjugacyClasses { reps, sizes, class_of }
    }

    /// Canonical representative of `{x, -x}`: for odd `q`, the member whose first
    /// nonzero entry (scan order a, b, c, d) has the smaller encoding.
    pub fn psl_project(&self, x: &GroupElement) -> PslClass {
        let f = &self.field;
        if f.is_even() {
            return PslClass(*x);
        }
        let lead = x.entries().into_iter().find(|v| !v.is_zero()).expect("invertible matrix");
        if lead.enc() < f.neg(lead).enc() {
            PslClass(*x)
        } else {
            PslClass(self.neg(x))
        }
    }
}
