use serde::ser::{Serialize, SerializeSeq, Serializer};

use super::Fe;

/// A subset of `F_q` as a bitset over encodings.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ElementSet {
    words: Vec<u64>,
    q: u32,
}

impl ElementSet {
    pub fn empty(q: u32) -> Self {
        ElementSet { words: vec![0; (q as usize).div_ceil(64)], q }
    }

    pub fn full(q: u32) -> Self {
        let mut s = Self::empty(q);
        for x in 0..q {
            s.insert(Fe(x));
        }
        s
    }

    pub fn universe(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn insert(&mut self, x: Fe) {
        let i = x.enc() as usize;
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn contains(&self, x: Fe) -> bool {
        let i = x.enc() as usize;
        i < self.q as usize && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.q as usize
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn complement(&self) -> ElementSet {
        let mut out = ElementSet::empty(self.q);
        for x in 0..self.q {
            if !self.contains(Fe(x)) {
                out.insert(Fe(x));
            }
        }
        out
    }

    /// Members in increasing encoding order.
    pub fn iter(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(Fe).filter(|&x| self.contains(x))
    }

    pub fn to_vec(&self) -> Vec<Fe> {
        self.iter().collect()
    }
}

impl Serialize for ElementSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for x in self.iter() {
            seq.serialize_element(&x.enc())?;
        }
        seq.end()
    }
}
