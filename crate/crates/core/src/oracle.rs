//! Brute-force ground truth over `SL(2,q) x SL(2,q)`.
//!
//! Engel values are conjugation-equivariant, so pairs are enumerated as
//! (class representative, any `y`) and weighted by class size. Work is
//! counted in pair evaluations and refused above the configured cap.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{ElementSet, Fe, Field};
use crate::sl2::{ConjugacyClasses, GroupElement, PslClass, Sl2};
use crate::tracemap::p_comm;

pub const DEFAULT_CAP: u128 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Maximum number of `(x, y, m)` evaluations.
    pub max_evaluations: u128,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { max_evaluations: DEFAULT_CAP }
    }
}

impl OracleConfig {
    fn check(&self, needed: u128) -> Result<()> {
        if needed > self.max_evaluations {
            return Err(Error::ResourceCap { needed, cap: self.max_evaluations });
        }
        Ok(())
    }
}

/// `SL(2,q)` with its class partition, ready for counting.
#[derive(Clone, Debug)]
pub struct Oracle {
    group: Sl2,
    classes: ConjugacyClasses,
    config: OracleConfig,
}

/// Elements attained by `e_m`.
#[derive(Clone, Debug)]
pub struct EngelImage {
    pub q: u32,
    pub m: u32,
    members: Vec<bool>,
    group: Sl2,
}

impl EngelImage {
    pub fn contains(&self, z: &GroupElement) -> bool {
        self.members[self.group.index_of(z)]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&b| b)
    }

    pub fn iter(&self) -> impl Iterator<Item = GroupElement> + '_ {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.group.element_at(i))
    }

    /// Traces of attained elements.
    pub fn traces(&self) -> ElementSet {
        let mut out = ElementSet::empty(self.q);
        for z in self.iter() {
            out.insert(self.group.trace(&z));
        }
        out
    }

    /// Traces attained by some non-central element.
    pub fn noncentral_traces(&self) -> ElementSet {
        let f = self.group.field();
        let (id, mid) = (self.group.identity(), self.group.minus_identity());
        let mut out = ElementSet::empty(f.q());
        for z in self.iter().filter(|z| *z != id && *z != mid) {
            out.insert(self.group.trace(&z));
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassFiber {
    pub rep: GroupElement,
    pub size: usize,
    pub trace: Fe,
    /// `|E_m(g)|` for each `g` in the class.
    pub fiber: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    pub q: u32,
    pub m: u32,
    pub classes: Vec<ClassFiber>,
    /// `|S|`, `S = {g : tr g != +-2}`.
    pub s_size: u64,
    /// Extremes of `|E_m(g)| / (q^3 - q) - 1` over `S`.
    pub min_rel_dev: f64,
    pub max_rel_dev: f64,
}

impl FiberReport {
    /// `max_{g in S} | |E_m(g)| / (q^3 - q) - 1 |`.
    pub fn max_abs_dev(&self) -> f64 {
        self.min_rel_dev.abs().max(self.max_rel_dev.abs())
    }
}

impl Oracle {
    pub fn new(f: &Field, config: OracleConfig) -> Result<Self> {
        let group = Sl2::new(f);
        // the class partition itself touches every element a few times
        config.check(group.order() as u128)?;
        let classes = group.conjugacy_classes();
        Ok(Oracle { group, classes, config })
    }

    pub fn group(&self) -> &Sl2 {
        &self.group
    }

    pub fn classes(&self) -> &ConjugacyClasses {
        &self.classes
    }

    fn reduced_pairs(&self) -> u128 {
        self.classes.len() as u128 * self.group.order() as u128
    }

    /// Pair counts landing in each class, for `e_1, ..., e_{m_max}`.
    pub fn tallies(&self, m_max: u32) -> Result<Vec<Vec<u64>>> {
        if m_max == 0 {
            return Err(Error::InvalidArgument("Engel index m must be at least 1".into()));
        }
        self.config.check(self.reduced_pairs() * m_max as u128)?;
        let g = &self.group;
        let nc = self.classes.len();
        let reps: Vec<(GroupElement, u64)> = self.classes.reps().map(|(r, k)| (r, k as u64)).collect();
        let tallies = (0..g.order() as usize)
            .into_par_iter()
            .fold(
                || vec![vec![0u64; nc]; m_max as usize],
                |mut acc, yi| {
                    let y = g.element_at(yi);
                    for &(rep, k) in &reps {
                        let mut v = rep;
                        for row in acc.iter_mut() {
                            v = g.commutator(&v, &y);
                            row[self.classes.class_of_index(g.index_of(&v))] += k;
                        }
                    }
                    acc
                },
            )
            .reduce(
                || vec![vec![0u64; nc]; m_max as usize],
                |mut a, b| {
                    for (ra, rb) in a.iter_mut().zip(b) {
                        for (x, y) in ra.iter_mut().zip(rb) {
                            *x += y;
                        }
                    }
                    a
                },
            );
        let total = g.order().pow(2);
        for (m, row) in tallies.iter().enumerate() {
            let sum: u64 = row.iter().sum();
            if sum != total {
                return Err(Error::Internal(format!("e_{} tally sums to {sum}, expected {total}", m + 1)));
            }
        }
        Ok(tallies)
    }

    fn image_from_tally(&self, m: u32, tally: &[u64]) -> EngelImage {
        let n = self.group.order() as usize;
        let members = (0..n).map(|i| tally[self.classes.class_of_index(i)] > 0).collect();
        EngelImage { q: self.group.field().q(), m, members, group: self.group.clone() }
    }

    pub fn engel_image(&self, m: u32) -> Result<EngelImage> {
        let t = self.tallies(m)?;
        Ok(self.image_from_tally(m, &t[m as usize - 1]))
    }

    /// Images of `e_1, ..., e_{m_max}` from a single pass.
    pub fn engel_images(&self, m_max: u32) -> Result<Vec<EngelImage>> {
        let t = self.tallies(m_max)?;
        Ok(t.iter().enumerate().map(|(i, row)| self.image_from_tally(i as u32 + 1, row)).collect())
    }

    pub fn psl_image(&self, m: u32) -> Result<BTreeSet<PslClass>> {
        Ok(self.engel_image(m)?.iter().map(|z| self.group.psl_project(&z)).collect())
    }

    fn fiber_report(&self, m: u32, tally: &[u64]) -> Result<FiberReport> {
        let g = &self.group;
        let f = g.field();
        let order = g.order() as f64;
        let (p2, m2) = (f.from_int(2), f.from_int(-2));
        let mut classes = Vec::with_capacity(self.classes.len());
        let (mut lo, mut hi, mut s_size) = (f64::INFINITY, f64::NEG_INFINITY, 0u64);
        for (i, (rep, size)) in self.classes.reps().enumerate() {
            if !tally[i].is_multiple_of(size as u64) {
                return Err(Error::Internal(format!("class {i} tally {} not divisible by {size}", tally[i])));
            }
            let fiber = tally[i] / size as u64;
            let trace = g.trace(&rep);
            if trace != p2 && trace != m2 {
                s_size += size as u64;
                let dev = fiber as f64 / order - 1.0;
                lo = lo.min(dev);
                hi = hi.max(dev);
            }
            classes.push(ClassFiber { rep, size, trace, fiber });
        }
        Ok(FiberReport { q: f.q(), m, classes, s_size, min_rel_dev: lo, max_rel_dev: hi })
    }

    pub fn fiber_sizes(&self, m: u32) -> Result<FiberReport> {
        let t = self.tallies(m)?;
        self.fiber_report(m, &t[m as usize - 1])
    }

    /// Fiber reports for `e_1, ..., e_{m_max}` from a single pass.
    pub fn fiber_sizes_upto(&self, m_max: u32) -> Result<Vec<FiberReport>> {
        let t = self.tallies(m_max)?;
        t.iter().enumerate().map(|(i, row)| self.fiber_report(i as u32 + 1, row)).collect()
    }

    /// Number of pairs over each triple, indexed `(s q + u) q + t` by encodings.
    pub fn trace_triple_counts(&self) -> Result<Vec<u64>> {
        self.config.check(self.reduced_pairs())?;
        let g = &self.group;
        let q = g.field().q() as usize;
        let reps: Vec<(GroupElement, u64)> = self.classes.reps().map(|(r, k)| (r, k as u64)).collect();
        let counts = (0..g.order() as usize)
            .into_par_iter()
            .fold(
                || vec![0u64; q * q * q],
                |mut acc, yi| {
                    let y = g.element_at(yi);
                    for &(rep, k) in &reps {
                        let v = g.pi(&rep, &y);
                        acc[(v.s.enc() as usize * q + v.u.enc() as usize) * q + v.t.enc() as usize] += k;
                    }
                    acc
                },
            )
            .reduce(
                || vec![0u64; q * q * q],
                |mut a, b| {
                    for (x, y) in a.iter_mut().zip(b) {
                        *x += y;
                    }
                    a
                },
            );
        Ok(counts)
    }

    /// Every `(s, u, t)` in `F_q^3` is the character triple of some pair.
    pub fn pi_fiber_check(&self) -> Result<bool> {
        Ok(self.trace_triple_counts()?.iter().all(|&c| c > 0))
    }

    /// `|{x : tr x = a}|`.
    pub fn tau_fiber_count(&self, a: Fe) -> u64 {
        self.group.elements_with_trace(a).count() as u64
    }

    /// `|{(x, y) : tr [x, y] = s, tr y = t}|` for every `(s, t)`, indexed
    /// `s q + t`.
    pub fn p_tilde_counts(&self) -> Result<Vec<u64>> {
        let f = self.group.field().clone();
        let q = f.q() as usize;
        let triples = self.trace_triple_counts()?;
        let mut out = vec![0u64; q * q];
        for (idx, &c) in triples.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let (s, u, t) = (Fe((idx / (q * q)) as u32), Fe((idx / q % q) as u32), Fe((idx % q) as u32));
            out[p_comm(&f, s, u, t).enc() as usize * q + t.enc() as usize] += c;
        }
        Ok(out)
    }

    pub fn p_tilde_fiber_count(&self, s: Fe, t: Fe) -> Result<u64> {
        let q = self.group.field().q() as usize;
        Ok(self.p_tilde_counts()?[s.enc() as usize * q + t.enc() as usize])
    }
}

/// `|E_m(g)|` for every element by full double enumeration (no class
/// reduction), indexed by element index.
pub fn engel_fibers_naive(f: &Field, m: u32, config: OracleConfig) -> Result<Vec<u64>> {
    if m == 0 {
        return Err(Error::InvalidArgument("Engel index m must be at least 1".into()));
    }
    let g = Sl2::new(f);
    let n = g.order() as usize;
    config.check((n as u128).pow(2) * m as u128)?;
    let counts = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, xi| {
                let x = g.element_at(xi);
                for yi in 0..n {
                    let y = g.element_at(yi);
                    let z = crate::words::engel_eval(&g, m, &x, &y);
                    acc[g.index_of(&z)] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(q: u64) -> Oracle {
        Oracle::new(&Field::from_order(q).unwrap(), OracleConfig::default()).unwrap()
    }

    #[test]
    fn reduction_matches_naive() {
        for q in [3u64, 5, 7] {
            let o = oracle(q);
            let f = o.group().field().clone();
            let reports = o.fiber_sizes_upto(3).unwrap();
            for (i, rep) in reports.iter().enumerate() {
                let m = i as u32 + 1;
                let naive = engel_fibers_naive(&f, m, OracleConfig::default()).unwrap();
                for (idx, &count) in naive.iter().enumerate() {
                    let c = o.classes().class_of_index(idx);
                    assert_eq!(rep.classes[c].fiber, count, "q={q} m={m} idx={idx}");
                }
            }
        }
    }

    #[test]
    fn conservation_and_identity_fiber() {
        for q in [4u64, 5, 9] {
            let o = oracle(q);
            let order = o.group().order();
            for r in o.fiber_sizes_upto(3).unwrap() {
                let total: u64 = r.classes.iter().map(|c| c.fiber * c.size as u64).sum();
                assert_eq!(total, order * order);
                let id_class = o.classes().class_of_index(o.group().index_of(&o.group().identity()));
                assert!(r.classes[id_class].fiber >= order);
            }
        }
    }

    #[test]
    fn commutator_map_is_onto() {
        for q in [5u64, 7, 9] {
            assert!(oracle(q).engel_image(1).unwrap().is_full());
        }
    }

    #[test]
    fn psl_images_small() {
        let o = oracle(5);
        for m in 1..=4 {
            assert_eq!(o.psl_image(m).unwrap().len(), 60);
        }
        let o = oracle(4);
        assert_eq!(o.psl_image(3).unwrap().len(), 60);
    }

    #[test]
    fn image_is_conjugation_closed() {
        let o = oracle(7);
        let g = o.group();
        let img = o.engel_image(3).unwrap();
        let h = g.from_ints(1, 2, 3, 0).unwrap_or_else(|_| g.from_ints(2, 1, 1, 1).unwrap());
        for z in img.iter() {
            assert!(img.contains(&g.conjugate(&z, &h)));
        }
    }

    #[test]
    fn counting_small_fields() {
        let o = oracle(5);
        let f = o.group().field().clone();
        assert_eq!(o.tau_fiber_count(f.zero()), 30);
        assert_eq!(o.tau_fiber_count(f.from_int(2)), 25);
        for q in [2u64, 3, 4, 5] {
            assert!(oracle(q).pi_fiber_check().unwrap());
        }
        let o7 = oracle(7);
        let f7 = o7.group().field().clone();
        let c = o7.p_tilde_fiber_count(f7.from_int(3), f7.from_int(3)).unwrap() as f64;
        let q4 = 7f64.powi(4);
        assert!((c / q4 - 1.0).abs() <= 4.0 / 7.0);
        let total: u64 = o7.p_tilde_counts().unwrap().iter().sum();
        assert_eq!(total, o7.group().order().pow(2));
    }

    #[test]
    fn cap_is_enforced() {
        let f = Field::from_order(13).unwrap();
        let tiny = OracleConfig { max_evaluations: 1000 };
        assert!(matches!(Oracle::new(&f, tiny), Err(Error::ResourceCap { .. })));
        let o = Oracle::new(&f, OracleConfig { max_evaluations: 40_000 }).unwrap();
        assert!(matches!(o.tallies(2), Err(Error::ResourceCap { .. })));
        assert!(matches!(engel_fibers_naive(&f, 1, tiny), Err(Error::ResourceCap { .. })));
    }
}
