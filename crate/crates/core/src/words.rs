//! Words in the free group `F_2 = <x, y>`.
//!
//! Grammar accepted by [`parse`] (whitespace is ignored):
//!
//! ```text
//! word := term+
//! term := atom ('^' int)?
//! atom := 'x' | 'y' | '(' word ')' | '[' word ',' word ']'
//! ```
//!
//! `[u, v]` expands to `u v u^-1 v^-1`. The result is always freely reduced.

use std::fmt;

use crate::error::{Error, Result};
use crate::sl2::{GroupElement, Sl2};

/// Upper bound on the letter length of a parsed word.
pub const MAX_WORD_LEN: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    X,
    Y,
}

impl Generator {
    fn symbol(self) -> char {
        match self {
            Generator::X => 'x',
            Generator::Y => 'y',
        }
    }
}

/// A maximal power of one generator inside a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub generator: Generator,
    pub exponent: i64,
}

/// A freely reduced word: adjacent syllables have distinct generators and
/// nonzero exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn x() -> Self {
        Word::power(Generator::X, 1)
    }

    pub fn y() -> Self {
        Word::power(Generator::Y, 1)
    }

    pub fn power(generator: Generator, exponent: i64) -> Self {
        Word::from_syllables([Syllable { generator, exponent }])
    }

    /// Freely reduces an arbitrary syllable sequence.
    pub fn from_syllables<I: IntoIterator<Item = Syllable>>(seq: I) -> Self {
        let mut w = Word::identity();
        for s in seq {
            w.push(s);
        }
        w
    }

    fn push(&mut self, s: Syllable) {
        if s.exponent == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.generator == s.generator => {
                last.exponent += s.exponent;
                if last.exponent == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push(s),
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters, `sum |exponent|`.
    pub fn len(&self) -> u64 {
        self.syllables.iter().map(|s| s.exponent.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// Letters as `(generator, +1 | -1)`.
    pub fn letters(&self) -> impl Iterator<Item = (Generator, i64)> + '_ {
        self.syllables.iter().flat_map(|s| {
            std::iter::repeat_n((s.generator, s.exponent.signum()), s.exponent.unsigned_abs() as usize)
        })
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &s in &other.syllables {
            w.push(s);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable { generator: s.generator, exponent: -s.exponent })
                .collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.mul(&base);
        }
        w
    }

    /// `[u, v] = u v u^-1 v^-1`.
    pub fn commutator(u: &Word, v: &Word) -> Word {
        u.mul(v).mul(&u.inverse()).mul(&v.inverse())
    }

    /// Substitution homomorphism `x -> gx`, `y -> gy`.
    pub fn evaluate(&self, group: &Sl2, gx: &GroupElement, gy: &GroupElement) -> GroupElement {
        self.syllables.iter().fold(group.identity(), |acc, s| {
            let g = match s.generator {
                Generator::X => gx,
                Generator::Y => gy,
            };
            group.mul(&acc, &group.pow(g, s.exponent))
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, s) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", s.generator.symbol())?;
            if s.exponent != 1 {
                write!(f, "^{}", s.exponent)?;
            }
        }
        Ok(())
    }
}

/// The Engel word `e_m`: `e_1 = [x, y]`, `e_m = [e_{m-1}, y]`.
pub fn engel(m: u32) -> Result<Word> {
    if m == 0 {
        return Err(Error::InvalidArgument("Engel index must be at least 1".into()));
    }
    let y = Word::y();
    let mut w = Word::commutator(&Word::x(), &y);
    for _ in 1..m {
        w = Word::commutator(&w, &y);
    }
    Ok(w)
}

/// `e_m(x, y)` through `m` nested matrix commutators.
pub fn engel_eval(group: &Sl2, m: u32, x: &GroupElement, y: &GroupElement) -> GroupElement {
    let mut v = *x;
    for _ in 0..m {
        v = group.commutator(&v, y);
    }
    v
}

pub fn parse(text: &str) -> Result<Word> {
    let mut p = Parser { chars: text.char_indices().collect(), pos: 0, len: text.len() };
    let w = p.word()?;
    p.skip_ws();
    if let Some(&(at, c)) = p.chars.get(p.pos) {
        return Err(parse_error(at, format!("unexpected '{c}'")));
    }
    Ok(w)
}

fn parse_error(position: usize, message: impl Into<String>) -> Error {
    Error::Parse { position, message: message.into() }
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<(usize, char)> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn offset(&mut self) -> usize {
        self.peek().map_or(self.len, |(at, _)| at)
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some((_, c)) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some((at, c)) => Err(parse_error(at, format!("expected '{want}', found '{c}'"))),
            None => Err(parse_error(self.len, format!("expected '{want}', found end of input"))),
        }
    }

    fn word(&mut self) -> Result<Word> {
        let mut w = self.term()?;
        while let Some((_, c)) = self.peek() {
            if !matches!(c, 'x' | 'y' | '(' | '[') {
                break;
            }
            let t = self.term()?;
            w = w.mul(&t);
            check_len(&w, self.offset())?;
        }
        Ok(w)
    }

    fn term(&mut self) -> Result<Word> {
        let atom = self.atom()?;
        if let Some((at, '^')) = self.peek() {
            self.pos += 1;
            let k = self.int()?;
            if atom.len().saturating_mul(k.unsigned_abs()) > MAX_WORD_LEN {
                return Err(parse_error(at, "word too long"));
            }
            return Ok(atom.pow(k));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Word> {
        match self.peek() {
            Some((_, 'x')) => {
                self.pos += 1;
                Ok(Word::x())
            }
            Some((_, 'y')) => {
                self.pos += 1;
                Ok(Word::y())
            }
            Some((_, '(')) => {
                self.pos += 1;
                let w = self.word()?;
                self.expect(')')?;
                Ok(w)
            }
            Some((at, '[')) => {
                self.pos += 1;
                let u = self.word()?;
                self.expect(',')?;
                let v = self.word()?;
                self.expect(']')?;
                let w = Word::commutator(&u, &v);
                check_len(&w, at)?;
                Ok(w)
            }
            Some((at, c)) => Err(parse_error(at, format!("expected 'x', 'y', '(' or '[', found '{c}'"))),
            None => Err(parse_error(self.len, "unexpected end of input")),
        }
    }

    fn int(&mut self) -> Result<i64> {
        let start = self.offset();
        let mut digits = String::new();
        if let Some((_, c @ ('-' | '+'))) = self.peek() {
            digits.push(c);
            self.pos += 1;
        }
        self.skip_ws();
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            digits.push(c);
            self.pos += 1;
        }
        digits.parse::<i64>().map_err(|_| parse_error(start, "expected an integer exponent"))
    }
}

fn check_len(w: &Word, at: usize) -> Result<()> {
    if w.len() > MAX_WORD_LEN {
        return Err(parse_error(at, "word too long"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::Field;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn letters_word(spec: &[(Generator, i64)]) -> Word {
        Word::from_syllables(spec.iter().map(|&(generator, exponent)| Syllable { generator, exponent }))
    }

    /// Independent expansion: letters on a stack with cancellation.
    fn naive_engel_letters(m: u32) -> Vec<(char, i8)> {
        fn inv(w: &[(char, i8)]) -> Vec<(char, i8)> {
            w.iter().rev().map(|&(c, e)| (c, -e)).collect()
        }
        fn reduce(w: Vec<(char, i8)>) -> Vec<(char, i8)> {
            let mut out: Vec<(char, i8)> = Vec::new();
            for l in w {
                if out.last().is_some_and(|&(c, e)| c == l.0 && e == -l.1) {
                    out.pop();
                } else {
                    out.push(l);
                }
            }
            out
        }
        let y = vec![('y', 1i8)];
        let mut w = vec![('x', 1i8)];
        for _ in 0..m {
            let mut next = w.clone();
            next.extend(&y);
            next.extend(inv(&w));
            next.extend(inv(&y));
            w = reduce(next);
        }
        w
    }

    #[test]
    fn parse_examples() {
        use Generator::{X, Y};
        assert_eq!(parse("[x,y]").unwrap(), letters_word(&[(X, 1), (Y, 1), (X, -1), (Y, -1)]));
        assert!(parse("x x^-1").unwrap().is_identity());
        assert_eq!(
            parse("[[x,y],y]").unwrap(),
            letters_word(&[(X, 1), (Y, 1), (X, -1), (Y, 1), (X, 1), (Y, -1), (X, -1), (Y, -1)])
        );
        assert_eq!(parse(" ( x y ) ^ 2 ").unwrap().to_string(), "x y x y");
        assert_eq!(parse("x^3 y^-2 x^0").unwrap().to_string(), "x^3 y^-2");
        assert_eq!(parse("[x, y]").unwrap(), parse("x y x^-1 y^-1").unwrap());
    }

    #[test]
    fn parse_errors_carry_position() {
        assert_eq!(parse("").unwrap_err(), Error::Parse { position: 0, message: "unexpected end of input".into() });
        assert!(matches!(parse("x z"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(parse("[x y]"), Err(Error::Parse { position: 4, .. })));
        assert!(matches!(parse("x^"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(parse("(x"), Err(Error::Parse { position: 2, .. })));
        assert!(matches!(parse("x^99999999999 y"), Err(Error::Parse { .. })));
    }

    #[test]
    fn engel_words() {
        assert_eq!(engel(1).unwrap(), parse("[x,y]").unwrap());
        assert_eq!(engel(1).unwrap().len(), 4);
        assert_eq!(engel(2).unwrap().len(), 8);
        assert_eq!(engel(2).unwrap().to_string(), "x y x^-1 y x y^-1 x^-1 y^-1");
        for m in 1..=6u32 {
            let w = engel(m).unwrap();
            assert_eq!(w.len(), 4 * 2u64.pow(m - 1));
            let expanded: Vec<(char, i8)> = w
                .letters()
                .map(|(g, e)| (g.symbol(), e as i8))
                .collect();
            assert_eq!(expanded, naive_engel_letters(m));
        }
        assert!(engel(0).is_err());
    }

    #[test]
    fn engel_evaluation_examples() {
        for q in [5u64, 7, 9, 11, 13] {
            let f = Field::from_order(q).unwrap();
            let g = Sl2::new(&f);
            let mut rng = ChaCha8Rng::seed_from_u64(q);
            for m in 1..=5u32 {
                let w = engel(m).unwrap();
                let x = g.element_at(rng.gen_range(0..g.order() as usize));
                assert_eq!(w.evaluate(&g, &x, &g.identity()), g.identity());
                for a in f.iter().filter(|a| !a.is_zero()) {
                    let b = f.from_int(3);
                    let ub = g.upper_unipotent(b);
                    let da = g.diag(a).unwrap();
                    let factor = f.pow(f.sub(f.one(), f.square(a)), m as u64);
                    assert_eq!(engel_eval(&g, m, &ub, &da), g.upper_unipotent(f.mul(b, factor)));
                    assert_eq!(w.evaluate(&g, &ub, &da), g.upper_unipotent(f.mul(b, factor)));
                    // X(a) against the rotation
                    let rot = g.rotation();
                    let a2m = f.pow2k(a, m);
                    assert_eq!(engel_eval(&g, m, &da, &rot), g.diag(a2m).unwrap());
                }
            }
        }
    }

    #[test]
    fn engel_invariants_random() {
        for q in [5u64, 7, 9, 11, 13, 16, 25] {
            let f = Field::from_order(q).unwrap();
            let g = Sl2::new(&f);
            let mut rng = ChaCha8Rng::seed_from_u64(100 + q);
            let n = g.order() as usize;
            for _ in 0..40 {
                let x = g.element_at(rng.gen_range(0..n));
                let y = g.element_at(rng.gen_range(0..n));
                let h = g.element_at(rng.gen_range(0..n));
                for m in 1..=6u32 {
                    let w = engel(m).unwrap();
                    let v = w.evaluate(&g, &x, &y);
                    assert_eq!(v, engel_eval(&g, m, &x, &y));
                    let next = engel_eval(&g, m + 1, &x, &y);
                    assert_eq!(next, g.commutator(&v, &y));
                    let conj = w.evaluate(&g, &g.conjugate(&x, &h), &g.conjugate(&y, &h));
                    assert_eq!(conj, g.conjugate(&v, &h));
                    assert_eq!(g.trace(&g.mul(&v, &y)), g.trace(&y));
                    if !f.is_even() {
                        assert_eq!(engel_eval(&g, m, &g.neg(&x), &y), v);
                        assert_eq!(engel_eval(&g, m, &x, &g.neg(&y)), v);
                    }
                }
            }
        }
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        prop::collection::vec((prop::bool::ANY, -3i64..=3), 0..12).prop_map(|v| {
            Word::from_syllables(v.into_iter().map(|(b, e)| Syllable {
                generator: if b { Generator::X } else { Generator::Y },
                exponent: e,
            }))
        })
    }

    proptest! {
        #[test]
        fn display_reparses(w in arb_word()) {
            let text = w.to_string();
            if w.is_identity() {
                prop_assert_eq!(text, "1");
            } else {
                prop_assert_eq!(parse(&text).unwrap(), w);
            }
        }

        #[test]
        fn words_form_a_group(a in arb_word(), b in arb_word(), c in arb_word()) {
            prop_assert!(a.mul(&a.inverse()).is_identity());
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            let reduced = a.mul(&b);
            for pair in reduced.syllables().windows(2) {
                prop_assert_ne!(pair[0].generator, pair[1].generator);
            }
            prop_assert!(reduced.syllables().iter().all(|s| s.exponent != 0));
        }
    }
}
