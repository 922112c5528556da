//! Surjectivity verdicts for Engel words from the trace dynamics.
//!
//! Every public entry point takes the word index `m` of `e_m`; the matching
//! trace data is `T_{m-1}` and `rho_{m-1}`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ff::{is_prime, ElementSet, Fe, Field};
use crate::sl2::{GroupElement, Sl2};
use crate::tracemap::{mu_slice, rho_n, PlanePoint};
use crate::words::engel_eval;

const PARALLEL_SLICES: u32 = 128;

fn two(f: &Field) -> Fe {
    f.from_int(2)
}

fn exceptional_slice(f: &Field, t: Fe) -> bool {
    !f.is_even() && f.square(t) == f.from_int(4)
}

/// `(s, t) in Y_q`: the projection of the first-commutator image to the plane.
pub fn in_y(f: &Field, pt: PlanePoint) -> bool {
    !exceptional_slice(f, pt.t) || f.is_square(f.sub(pt.s, two(f)))
}

/// The image of `psi` inside the plane `u = t`.
#[derive(Clone, Debug, Serialize)]
pub struct PsiImage {
    pub q: u32,
    /// Points `(s, t)` of the plane not attained; empty for even `q`.
    pub exceptional: Vec<PlanePoint>,
}

impl PsiImage {
    pub fn contains(&self, f: &Field, s: Fe, u: Fe, t: Fe) -> bool {
        u == t && in_y(f, PlanePoint::new(s, t))
    }
}

pub fn psi_image(f: &Field) -> PsiImage {
    let mut exceptional = Vec::new();
    for t in f.iter().filter(|&t| exceptional_slice(f, t)) {
        for s in f.iter() {
            let pt = PlanePoint::new(s, t);
            if !in_y(f, pt) {
                exceptional.push(pt);
            }
        }
    }
    PsiImage { q: f.q(), exceptional }
}

#[derive(Clone, Debug, Serialize)]
pub struct ImageReport {
    pub q: u32,
    pub n: u32,
    pub t_n: ElementSet,
    pub t_n_prime: ElementSet,
    pub rho_full_image: ElementSet,
    /// Values outside `rho_n(F_q^2)`.
    pub missing: Vec<Fe>,
    /// Pairs `(a, -a)`, `enc(a) <= enc(-a)`, with neither member in `T_n`.
    pub missing_pairs: Vec<(Fe, Fe)>,
}

#[derive(Clone, Debug)]
struct Slice {
    t: Fe,
    t2: Fe,
    full: ElementSet,
    /// `Y_q` restricted to this slice when it differs from the full slice.
    restricted: Option<ElementSet>,
    stable: bool,
}

impl Slice {
    fn step(&mut self, f: &Field) {
        if self.stable {
            return;
        }
        let image = |set: &ElementSet| {
            let mut out = ElementSet::empty(f.q());
            for s in set.iter() {
                out.insert(mu_slice(f, s, self.t2));
            }
            out
        };
        let next = image(&self.full);
        let next_restricted = self.restricted.as_ref().map(image);
        // images only shrink, so equal sizes mean a fixed set
        let same = next.len() == self.full.len()
            && match (&next_restricted, &self.restricted) {
                (Some(a), Some(b)) => a.len() == b.len(),
                _ => true,
            };
        self.full = next;
        self.restricted = next_restricted;
        self.stable = same;
    }

    fn y(&self) -> &ElementSet {
        self.restricted.as_ref().unwrap_or(&self.full)
    }
}

/// Forward iteration of the point sets `mu_n(F_q^2)` and `mu_n(Y_q)`.
#[derive(Clone, Debug)]
pub struct ImageSequence {
    field: Field,
    slices: Vec<Slice>,
    n: u32,
    stable_at: Option<u32>,
}

impl ImageSequence {
    pub fn new(f: &Field) -> Self {
        let slices = f
            .iter()
            .map(|t| {
                let full = ElementSet::full(f.q());
                let restricted = exceptional_slice(f, t).then(|| {
                    let mut y = ElementSet::empty(f.q());
                    for s in f.iter().filter(|&s| in_y(f, PlanePoint::new(s, t))) {
                        y.insert(s);
                    }
                    y
                });
                Slice { t, t2: f.square(t), full, restricted, stable: false }
            })
            .collect();
        ImageSequence { field: f.clone(), slices, n: 0, stable_at: None }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// First `n` with `mu_{n+1}(F_q^2) = mu_n(F_q^2)` and the same for `Y_q`,
    /// once reached.
    pub fn stable_at(&self) -> Option<u32> {
        self.stable_at
    }

    pub fn step(&mut self) {
        let f = &self.field;
        if self.stable_at.is_none() {
            if f.q() >= PARALLEL_SLICES {
                self.slices.par_iter_mut().for_each(|sl| sl.step(f));
            } else {
                self.slices.iter_mut().for_each(|sl| sl.step(f));
            }
            if self.slices.iter().all(|sl| sl.stable) {
                self.stable_at = Some(self.n);
            }
        }
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: u32) {
        while self.n < n {
            self.step();
        }
    }

    pub fn report(&self) -> ImageReport {
        let f = &self.field;
        let q = f.q();
        let mut t_n = ElementSet::empty(q);
        let mut t_n_prime = ElementSet::empty(q);
        let mut full = ElementSet::empty(q);
        for sl in &self.slices {
            t_n.union_with(sl.y());
            if !sl.t.is_zero() {
                t_n_prime.union_with(sl.y());
            }
            full.union_with(&sl.full);
        }
        let missing = full.complement().to_vec();
        let missing_pairs = f
            .iter()
            .filter_map(|a| {
                let b = f.neg(a);
                (a.enc() <= b.enc() && !t_n.contains(a) && !t_n.contains(b)).then_some((a, b))
            })
            .collect();
        ImageReport { q, n: self.n, t_n, t_n_prime, rho_full_image: full, missing, missing_pairs }
    }

    /// `lambda_1(mu_n(F_q^2))`, the image of `rho_n` on the whole plane.
    pub fn full_image(&self) -> ElementSet {
        let mut full = ElementSet::empty(self.field.q());
        for sl in &self.slices {
            full.union_with(&sl.full);
        }
        full
    }
}

pub fn compute_tn(f: &Field, n: u32) -> ImageReport {
    let mut seq = ImageSequence::new(f);
    seq.advance_to(n);
    seq.report()
}

/// Reports for `n = 0, ..., n_max`.
pub fn image_sequence(f: &Field, n_max: u32) -> Vec<ImageReport> {
    let mut seq = ImageSequence::new(f);
    let mut out = vec![seq.report()];
    while seq.n() < n_max {
        seq.step();
        out.push(seq.report());
    }
    out
}

fn check_word_index(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("Engel index m must be at least 1".into()));
    }
    Ok(())
}

fn check_simple(f: &Field) -> Result<()> {
    if f.q() <= 3 {
        return Err(Error::UnsupportedField { q: f.q(), reason: "PSL(2,q) is not simple for q <= 3" });
    }
    Ok(())
}

/// Outcome of the `SL(2,q) \ {-id}` test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlAlmost {
    Yes,
    No,
    UndeterminedAtMinus2,
}

impl SlAlmost {
    pub fn as_str(self) -> &'static str {
        match self {
            SlAlmost::Yes => "yes",
            SlAlmost::No => "no",
            SlAlmost::UndeterminedAtMinus2 => "undetermined_at_minus2",
        }
    }
}

/// Trace pairs `{a, -a}` (or single traces for even `q`) that `e_m` misses
/// on `PSL(2,q)`.
pub fn psl_uncovered(f: &Field, report: &ImageReport) -> Vec<(Fe, Fe)> {
    if f.is_even() {
        return report.t_n.complement().iter().map(|a| (a, a)).collect();
    }
    let (p2, m2) = (two(f), f.from_int(-2));
    report.missing_pairs.iter().copied().filter(|&(a, _)| a != p2 && a != m2).collect()
}

pub fn decide_psl(f: &Field, m: u32) -> Result<bool> {
    check_word_index(m)?;
    check_simple(f)?;
    Ok(psl_uncovered(f, &compute_tn(f, m - 1)).is_empty())
}

/// Three-valued test from trace data alone. `No` also covers the case
/// `-2 notin T_{m-1}`, where no non-central element of trace `-2` is a value.
pub fn sl_almost_from_report(f: &Field, report: &ImageReport) -> SlAlmost {
    let m2 = f.from_int(-2);
    if f.iter().any(|a| a != m2 && !report.t_n.contains(a)) || !report.t_n.contains(m2) {
        SlAlmost::No
    } else if report.t_n_prime.contains(m2) {
        SlAlmost::Yes
    } else {
        SlAlmost::UndeterminedAtMinus2
    }
}

pub fn decide_sl_almost(f: &Field, m: u32) -> Result<SlAlmost> {
    check_word_index(m)?;
    check_odd_simple(f)?;
    Ok(sl_almost_from_report(f, &compute_tn(f, m - 1)))
}

fn check_odd_simple(f: &Field) -> Result<()> {
    check_simple(f)?;
    if f.is_even() {
        return Err(Error::UnsupportedField { q: f.q(), reason: "no -id in characteristic 2; use decide_psl" });
    }
    Ok(())
}

/// Whether some non-central element of trace `-2` is a value of `e_m`.
///
/// Values coming from `t = 0` are decided by construction: a pair whose
/// triple `(b, 0, 0)` has `b != +-2` is absolutely irreducible, so
/// `e_m` of it is fixed up to `GL(2,q)`-conjugacy, and `GL(2,q)` permutes the
/// non-central trace `-2` classes transitively.
pub fn resolve_minus2(f: &Field, m: u32) -> Result<bool> {
    check_word_index(m)?;
    check_odd_simple(f)?;
    let report = compute_tn(f, m - 1);
    resolve_minus2_with(f, m, &report)
}

fn resolve_minus2_with(f: &Field, m: u32, report: &ImageReport) -> Result<bool> {
    let m2 = f.from_int(-2);
    if report.t_n_prime.contains(m2) {
        return Ok(true);
    }
    if !report.t_n.contains(m2) {
        return Ok(false);
    }
    minus2_from_t0(f, m)
}

/// Whether a pair with `tr y = 0` sends `e_m` to a non-central element of
/// trace `-2`, checked on one constructed pair per admissible `tr [x, y]`
/// (`m >= 2`; `T'_0 = F_q` already covers `m = 1`).
pub fn minus2_from_t0(f: &Field, m: u32) -> Result<bool> {
    check_word_index(m)?;
    check_odd_simple(f)?;
    let m2 = f.from_int(-2);
    let g = Sl2::new(f);
    let minus_id = g.minus_identity();
    if m < 2 {
        return Err(Error::InvalidArgument("needs m >= 2, where tr [x, y] != +-2".into()));
    }
    for b in f.iter().filter(|&b| rho_n(f, PlanePoint::new(b, f.zero()), m - 1) == m2) {
        let (x, y) = commutator_preimage(f, b)?;
        let z = engel_eval(&g, m, &x, &y);
        debug_assert_eq!(g.trace(&z), m2);
        if z != minus_id {
            return Ok(true);
        }
    }
    Ok(false)
}

/// A pair `(x, y)` with `tr y = 0` and `tr [x, y] = b`.
fn commutator_preimage(f: &Field, b: Fe) -> Result<(GroupElement, GroupElement)> {
    let target = f.add(b, two(f));
    for s in f.iter() {
        let r = f.sub(target, f.square(s));
        if f.is_square(r) {
            return pair_with_traces(f, s, f.sqrt(r)?, f.zero());
        }
    }
    Err(Error::Internal(format!("no point on s^2 + u^2 = {}", target)))
}

/// 2-adic valuation of `q^2 - 1`.
fn v2_q2m1(q: u64) -> u32 {
    (q * q - 1).trailing_zeros()
}

/// `2^m | q^2 - 1`, equivalently some `c` in `F_{q^2}` has
/// `c^{2^{m-1}} = -1`. This condition alone is not sufficient for `-id`;
/// see [`minus_id_solvable`].
pub fn two_power_criterion(q: u64, m: u32) -> bool {
    v2_q2m1(q) >= m
}

/// `e_m(x, y) = -id` has a solution in `SL(2,q)` (odd `q >= 5`, `m >= 2`).
///
/// True iff some `c` in `F_{q^2}` has `c^{2^{m-1}} = -1` and `c + 1/c` in
/// `F_q`, that is iff `2^m` divides `q - 1` or `q + 1`. The trace `b = c + 1/c`
/// of `[x, y]` must lie in `F_q`, which the bare condition on `c` misses:
/// for `q = 7`, `m = 4` an element of order 16 exists in `F_49` but no pair
/// in `SL(2,7)` reaches `-id`.
pub fn minus_id_solvable(f: &Field, m: u32) -> Result<bool> {
    if f.is_even() || f.q() < 5 {
        return Err(Error::UnsupportedField { q: f.q(), reason: "criterion needs odd q >= 5" });
    }
    if m < 2 {
        return Err(Error::InvalidArgument("criterion needs m >= 2; e_1 reaches -id for every odd q".into()));
    }
    let q = f.q() as u64;
    let v = (q - 1).trailing_zeros().max((q + 1).trailing_zeros());
    Ok(v >= m)
}

/// A verified pair with `e_m(x, y) = -id`.
pub fn minus_id_witness(f: &Field, m: u32) -> Result<(GroupElement, GroupElement)> {
    check_word_index(m)?;
    if f.is_even() {
        return Err(Error::UnsupportedField { q: f.q(), reason: "-id = id in characteristic 2" });
    }
    let g = Sl2::new(f);
    let minus_id = g.minus_identity();
    if m == 1 {
        // [((0,1),(-1,0)), ((a,b),(b,-a))] = -id when a^2 + b^2 = -1
        let target = f.from_int(-1);
        for a in f.iter() {
            let r = f.sub(target, f.square(a));
            if f.is_square(r) {
                let b = f.sqrt(r)?;
                let x = g.rotation();
                let y = g.element(a, b, b, f.neg(a))?;
                if g.commutator(&x, &y) == minus_id {
                    return Ok((x, y));
                }
            }
        }
        return Err(Error::Internal("no a^2 + b^2 = -1".into()));
    }
    if !minus_id_solvable(f, m)? {
        return Err(Error::InvalidArgument(format!("e_{m}(x,y) = -id has no solution over F_{}", f.q())));
    }
    let m2 = f.from_int(-2);
    let p2 = two(f);
    for b in f.iter().filter(|&b| rho_n(f, PlanePoint::new(b, f.zero()), m - 1) == m2) {
        let target = f.add(b, p2);
        for s in f.iter().filter(|&s| s != p2 && s != m2) {
            let r = f.sub(target, f.square(s));
            if !f.is_square(r) {
                continue;
            }
            let (x, y) = pair_with_traces(f, s, f.sqrt(r)?, f.zero())?;
            if engel_eval(&g, m, &x, &y) == minus_id {
                return Ok((x, y));
            }
            return Err(Error::Internal(format!(
                "pair over (s,u,t) = ({s},{},0) does not reach -id under e_{m}",
                f.sqrt(r)?
            )));
        }
    }
    Err(Error::Internal(format!("no -id witness for q = {}, m = {m} although solvable", f.q())))
}

/// Some `(x, y)` in `SL(2,q)^2` with `(tr x, tr xy, tr y) = (s, u, t)`.
pub fn pair_with_traces(f: &Field, s: Fe, u: Fe, t: Fe) -> Result<(GroupElement, GroupElement)> {
    let g = Sl2::new(f);
    // y = ((t, 1), (-1, 0)), x = ((a, b), (c, s - a)) with c = u - a t + b,
    // and det x = 1 reads b^2 + b (u - a t) + 1 - a (s - a) = 0.
    let y = g.element(t, f.one(), f.neg(f.one()), f.zero())?;
    for a in f.iter() {
        let lin = f.sub(u, f.mul(a, t));
        let cst = f.sub(f.one(), f.mul(a, f.sub(s, a)));
        let root = if f.is_even() {
            f.iter().find(|&b| f.add(f.mul(b, f.add(b, lin)), cst).is_zero())
        } else {
            let disc = f.sub(f.square(lin), f.mul(f.from_int(4), cst));
            if f.is_square(disc) {
                Some(f.div(f.sub(f.sqrt(disc)?, lin), two(f))?)
            } else {
                None
            }
        };
        if let Some(b) = root {
            let c = f.add(lin, b);
            let x = g.element(a, b, c, f.sub(s, a))?;
            debug_assert_eq!(g.pi(&x, &y), crate::sl2::TraceTriple { s, u, t });
            return Ok((x, y));
        }
    }
    pair_with_traces_search(&g, s, u, t)
}

/// Exhaustive fallback over `y` in each class of trace `t`.
fn pair_with_traces_search(g: &Sl2, s: Fe, u: Fe, t: Fe) -> Result<(GroupElement, GroupElement)> {
    let f = g.field();
    let mut candidates = vec![];
    let sign = if t == two(f) { f.one() } else { f.neg(f.one()) };
    if t == two(f) || t == f.from_int(-2) {
        candidates.push(g.element(sign, f.zero(), f.zero(), sign)?);
        candidates.push(g.element(sign, f.one(), f.zero(), sign)?);
        if let Some(nu) = f.nonresidue() {
            candidates.push(g.element(sign, nu, f.zero(), sign)?);
        }
    }
    for y in candidates {
        for x in g.elements_with_trace(s) {
            if g.trace(&g.mul(&x, &y)) == u {
                return Ok((x, y));
            }
        }
    }
    Err(Error::Internal(format!("no pair with traces ({s},{u},{t})")))
}

/// A pair `(x, y)` with `tr e_m(x, y) = a`, if the trace data says one exists.
pub fn trace_witness(f: &Field, m: u32, a: Fe) -> Result<Option<(GroupElement, GroupElement)>> {
    check_word_index(m)?;
    let g = Sl2::new(f);
    for t in f.iter() {
        for s0 in f.iter() {
            let pt = PlanePoint::new(s0, t);
            if !in_y(f, pt) || rho_n(f, pt, m - 1) != a {
                continue;
            }
            // psi(s', u, t) = (s0, t, t): solve p(s', u, t) = s0
            for s1 in f.iter() {
                for u in f.iter() {
                    if crate::tracemap::p_comm(f, s1, u, t) == s0 {
                        let (x, y) = pair_with_traces(f, s1, u, t)?;
                        debug_assert_eq!(g.trace(&engel_eval(&g, m, &x, &y)), a);
                        return Ok(Some((x, y)));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub q: u32,
    pub m: u32,
    pub psl_surjective: bool,
    pub uncovered: Vec<(Fe, Fe)>,
    /// `None` for even `q`.
    pub sl_almost: Option<SlAlmost>,
    /// `None` where the trace data cannot decide it (`q = 5`).
    pub minus_id_attained: Option<bool>,
    /// Traces of no value of `e_m`: the complement of `T_{m-1}`.
    pub missing_traces: Vec<Fe>,
    pub witnesses: Option<BTreeMap<u32, (GroupElement, GroupElement)>>,
}

#[derive(Clone, Copy, Debug)]
pub struct VerdictOptions {
    /// Settle `undetermined_at_minus2` constructively.
    pub resolve_minus2: bool,
    pub witnesses: bool,
}

impl Default for VerdictOptions {
    fn default() -> Self {
        VerdictOptions { resolve_minus2: true, witnesses: false }
    }
}

pub fn verdict(f: &Field, m: u32, opts: VerdictOptions) -> Result<Verdict> {
    check_word_index(m)?;
    check_simple(f)?;
    let report = compute_tn(f, m - 1);
    verdict_from_report(f, m, &report, opts)
}

/// Builds a verdict from a precomputed `T_{m-1}` report.
pub fn verdict_from_report(f: &Field, m: u32, report: &ImageReport, opts: VerdictOptions) -> Result<Verdict> {
    check_word_index(m)?;
    check_simple(f)?;
    if report.n + 1 != m || report.q != f.q() {
        return Err(Error::InvalidArgument(format!("report is for n = {}, need n = {}", report.n, m - 1)));
    }
    let uncovered = psl_uncovered(f, report);
    let missing_traces = report.t_n.complement().to_vec();
    let (sl_almost, minus_id_attained) = if f.is_even() {
        (None, Some(true))
    } else {
        let mut sl = sl_almost_from_report(f, report);
        if sl == SlAlmost::UndeterminedAtMinus2 && opts.resolve_minus2 {
            sl = if resolve_minus2_with(f, m, report)? { SlAlmost::Yes } else { SlAlmost::No };
        }
        let minus_id = if m == 1 {
            Some(true)
        } else if f.q() >= 7 {
            Some(minus_id_solvable(f, m)?)
        } else {
            None
        };
        (Some(sl), minus_id)
    };
    let witnesses = if opts.witnesses {
        let mut map = BTreeMap::new();
        for a in report.t_n.iter() {
            if let Some(pair) = trace_witness(f, m, a)? {
                map.insert(a.enc(), pair);
            }
        }
        Some(map)
    } else {
        None
    };
    Ok(Verdict {
        q: f.q(),
        m,
        psl_surjective: uncovered.is_empty(),
        uncovered,
        sl_almost,
        minus_id_attained,
        missing_traces,
        witnesses,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Stabilization {
    pub q: u32,
    pub n0: u32,
    /// `rho_n(F_q^2)` for every `n >= n0`.
    pub image: ElementSet,
}

pub fn stabilized_image(f: &Field) -> Stabilization {
    let mut seq = ImageSequence::new(f);
    while seq.stable_at().is_none() {
        seq.step();
    }
    Stabilization { q: f.q(), n0: seq.stable_at().unwrap(), image: seq.full_image() }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointOrbit {
    pub cycle_length: u32,
    pub preperiod: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitReport {
    pub q: u32,
    /// Cycle length to number of distinct cycles.
    pub cycle_lengths: BTreeMap<u32, u64>,
    pub max_preperiod: u32,
    pub periodic_point_count: u64,
    /// Indexed by `enc(t) * q + enc(s)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<PointOrbit>>,
}

fn succ(f: &Field, idx: usize) -> usize {
    let q = f.q() as usize;
    let (t, s) = (Fe((idx / q) as u32), Fe((idx % q) as u32));
    let next = mu_slice(f, s, f.square(t));
    (idx / q) * q + next.enc() as usize
}

/// Functional-graph decomposition of `mu` on `F_q^2`.
pub fn orbit_analysis(f: &Field, keep_table: bool) -> OrbitReport {
    let n = (f.q() as usize).pow(2);
    const UNSEEN: u32 = u32::MAX;
    const ON_PATH: u32 = u32::MAX - 1;
    let mut cycle = vec![UNSEEN; n];
    let mut pre = vec![0u32; n];
    let mut cycle_lengths: BTreeMap<u32, u64> = BTreeMap::new();
    let mut path: Vec<usize> = Vec::new();
    for start in 0..n {
        if cycle[start] != UNSEEN {
            continue;
        }
        path.clear();
        let mut v = start;
        while cycle[v] == UNSEEN {
            cycle[v] = ON_PATH;
            path.push(v);
            v = succ(f, v);
        }
        let tail_end = if cycle[v] == ON_PATH {
            let at = path.iter().position(|&w| w == v).unwrap();
            let len = (path.len() - at) as u32;
            for &w in &path[at..] {
                cycle[w] = len;
                pre[w] = 0;
            }
            *cycle_lengths.entry(len).or_default() += 1;
            at
        } else {
            path.len()
        };
        for i in (0..tail_end).rev() {
            let w = path[i];
            let next = succ(f, w);
            cycle[w] = cycle[next];
            pre[w] = pre[next] + 1;
        }
    }
    let periodic_point_count = pre.iter().filter(|&&p| p == 0).count() as u64;
    let max_preperiod = pre.iter().copied().max().unwrap_or(0);
    let table = keep_table.then(|| {
        cycle.iter().zip(&pre).map(|(&c, &p)| PointOrbit { cycle_length: c, preperiod: p }).collect()
    });
    OrbitReport { q: f.q(), cycle_lengths, max_preperiod, periodic_point_count, table }
}

/// An orbit of `mu` of exact length `n` (a prime), starting at its least
/// point in `(enc t, enc s)` order.
pub fn find_prime_orbit(f: &Field, n: u32) -> Result<Option<Vec<PlanePoint>>> {
    if !is_prime(n as u64) {
        return Err(Error::NotPrime(n as u64));
    }
    let report = orbit_analysis(f, true);
    let table = report.table.expect("table requested");
    let q = f.q() as usize;
    let Some(start) = table.iter().position(|o| o.preperiod == 0 && o.cycle_length == n) else {
        return Ok(None);
    };
    let mut orbit = Vec::with_capacity(n as usize);
    let mut v = start;
    for _ in 0..n {
        orbit.push(PlanePoint::new(Fe((v % q) as u32), Fe((v / q) as u32)));
        v = succ(f, v);
    }
    Ok(Some(orbit))
}

/// `2^{2n+3} (n - 1)^2`, for `n > 2`.
pub fn bound_q0(n: u32) -> Result<u128> {
    if n <= 2 {
        return Err(Error::InvalidArgument("bound_q0 needs n > 2".into()));
    }
    let pow = 1u128.checked_shl(2 * n + 3).filter(|_| 2 * n + 3 < 128);
    pow.and_then(|p| p.checked_mul(((n - 1) as u128).pow(2)))
        .ok_or_else(|| Error::InvalidArgument(format!("bound_q0({n}) overflows u128")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FieldClass {
    pub has_sqrt2: bool,
    pub has_sqrt_minus1: bool,
    pub char2: bool,
}

pub fn field_class(f: &Field) -> FieldClass {
    FieldClass {
        has_sqrt2: f.is_square(f.from_int(2)),
        has_sqrt_minus1: f.is_square(f.from_int(-1)),
        char2: f.is_even(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureScan {
    pub q: u32,
    pub n_max: u32,
    /// `(n, a)` with neither `a` nor `-a` in `rho_n(F_q^2)`.
    pub pm_failures: Vec<(u32, Fe)>,
    /// `(n, values)` missing from `rho_n(F_q^2)`, leaving out `a = 1` when
    /// `sqrt 2` is not in `F_q`.
    pub missing: Vec<(u32, Vec<Fe>)>,
}

pub fn scan_conjecture(f: &Field, n_max: u32) -> ConjectureScan {
    let no_sqrt2 = !field_class(f).has_sqrt2;
    let mut seq = ImageSequence::new(f);
    let mut pm_failures = Vec::new();
    let mut missing = Vec::new();
    loop {
        let full = seq.full_image();
        let n = seq.n();
        for a in f.iter() {
            if !full.contains(a) && !full.contains(f.neg(a)) && a.enc() <= f.neg(a).enc() {
                pm_failures.push((n, a));
            }
        }
        let gaps: Vec<Fe> = full.complement().iter().filter(|&a| !(no_sqrt2 && a == f.one())).collect();
        if !gaps.is_empty() {
            missing.push((n, gaps));
        }
        if n >= n_max {
            break;
        }
        seq.step();
    }
    ConjectureScan { q: f.q(), n_max, pm_failures, missing }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ff::QuadraticExtension;
    use crate::tracemap::{mu, psi};
    use std::collections::BTreeSet;

    fn fe(f: &Field, ints: &[i64]) -> Vec<Fe> {
        let mut v: Vec<Fe> = ints.iter().map(|&i| f.from_int(i)).collect();
        v.sort();
        v
    }

    #[test]
    fn psi_image_formula() {
        let f7 = Field::from_order(7).unwrap();
        let z: BTreeSet<(u32, u32)> = psi_image(&f7).exceptional.iter().map(|p| (p.s.enc(), p.t.enc())).collect();
        let want: BTreeSet<(u32, u32)> = [2u32, 5].iter().flat_map(|&t| [0u32, 1, 5].map(|s| (s, t))).collect();
        assert_eq!(z, want);
        assert!(psi_image(&Field::from_order(8).unwrap()).exceptional.is_empty());
        for q in [5u64, 7, 9, 11] {
            let f = Field::from_order(q).unwrap();
            let mut hit = BTreeSet::new();
            for s in f.iter() {
                for u in f.iter() {
                    for t in f.iter() {
                        let v = psi(&f, crate::sl2::TraceTriple { s, u, t });
                        hit.insert((v.s, v.t));
                    }
                }
            }
            let img = psi_image(&f);
            for s in f.iter() {
                for t in f.iter() {
                    assert_eq!(hit.contains(&(s, t)), img.contains(&f, s, t, t), "q={q} ({s},{t})");
                }
            }
        }
    }

    #[test]
    fn example_missing_values() {
        let f11 = Field::from_order(11).unwrap();
        assert!(compute_tn(&f11, 2).missing.contains(&f11.from_int(9)));
        let f13 = Field::from_order(13).unwrap();
        assert!(compute_tn(&f13, 5).missing.contains(&f13.from_int(4)));
        let f17 = Field::from_order(17).unwrap();
        let seq = image_sequence(&f17, 6);
        assert_eq!(seq[2].missing, fe(&f17, &[10]));
        assert_eq!(seq[4].missing, fe(&f17, &[4, 10]));
        assert_eq!(seq[5].missing, fe(&f17, &[4, 5, 10]));
    }

    #[test]
    fn image_invariants() {
        for q in (5u64..=121).filter(|&q| q % 2 == 1 && crate::ff::prime_power(q).is_some()) {
            let f = Field::from_order(q).unwrap();
            for r in image_sequence(&f, 10) {
                assert!(r.t_n_prime.is_subset(&r.t_n));
                assert!(r.t_n.is_subset(&r.rho_full_image));
                assert!(r.t_n.contains(f.from_int(2)));
                for t in f.iter() {
                    assert!(r.t_n.contains(f.sub(f.square(t), f.one())));
                }
            }
        }
    }

    #[test]
    fn sequence_matches_pointwise_iteration() {
        for q in [5u64, 9, 13, 16] {
            let f = Field::from_order(q).unwrap();
            let seq = image_sequence(&f, 7);
            for (n, r) in seq.iter().enumerate() {
                let mut t_n = ElementSet::empty(f.q());
                let mut full = ElementSet::empty(f.q());
                for s in f.iter() {
                    for t in f.iter() {
                        let pt = PlanePoint::new(s, t);
                        let v = rho_n(&f, pt, n as u32);
                        full.insert(v);
                        if in_y(&f, pt) {
                            t_n.insert(v);
                        }
                    }
                }
                assert_eq!(r.t_n, t_n);
                assert_eq!(r.rho_full_image, full);
            }
        }
    }

    #[test]
    fn psl_verdicts() {
        let f11 = Field::from_order(11).unwrap();
        assert!(decide_psl(&f11, 3).unwrap());
        assert_eq!(decide_sl_almost(&f11, 3).unwrap(), SlAlmost::No);
        for q in [4u64, 8, 16, 32] {
            let f = Field::from_order(q).unwrap();
            for m in 1..=8 {
                assert!(decide_psl(&f, m).unwrap());
            }
        }
        let f7 = Field::from_order(7).unwrap();
        for m in 1..=30 {
            assert!(decide_psl(&f7, m).unwrap());
        }
        assert!(decide_psl(&Field::from_order(3).unwrap(), 2).is_err());
        assert!(decide_sl_almost(&Field::from_order(8).unwrap(), 2).is_err());
        assert!(decide_psl(&f7, 0).is_err());
        let big = Field::from_order(101).unwrap();
        assert_eq!(decide_sl_almost(&big, 2).unwrap(), SlAlmost::Yes);
    }

    #[test]
    fn two_power_reformulation_matches_root_search() {
        for q in (7u64..=49).filter(|&q| q % 2 == 1 && crate::ff::prime_power(q).is_some()) {
            let f = Field::from_order(q).unwrap();
            let qe = QuadraticExtension::new(&f).unwrap();
            let k = qe.field();
            let minus_one = k.neg(k.one());
            for m in 2..=7u32 {
                let roots: Vec<Fe> = k.iter().filter(|&c| k.pow2k(c, m - 1) == minus_one).collect();
                assert_eq!(!roots.is_empty(), two_power_criterion(q, m), "q={q} m={m}");
                let with_base_trace = roots.iter().any(|&c| qe.restrict(k.add(c, k.inv(c).unwrap())).is_some());
                assert_eq!(with_base_trace, minus_id_solvable(&f, m).unwrap(), "q={q} m={m}");
            }
        }
        let f7 = Field::from_order(7).unwrap();
        assert!(two_power_criterion(7, 4));
        assert!(!minus_id_solvable(&f7, 4).unwrap());
        assert!(minus_id_solvable(&f7, 3).unwrap());
        assert!(two_power_criterion(11, 3));
        assert!(minus_id_solvable(&Field::from_order(11).unwrap(), 2).unwrap());
        assert!(!minus_id_solvable(&Field::from_order(11).unwrap(), 3).unwrap());
    }

    #[test]
    fn minus_id_witnesses_verify() {
        for q in [5u64, 7, 9, 11, 13, 17, 25, 31] {
            let f = Field::from_order(q).unwrap();
            let g = Sl2::new(&f);
            let (x, y) = minus_id_witness(&f, 1).unwrap();
            assert_eq!(g.commutator(&x, &y), g.minus_identity());
            for m in 2..=6 {
                match minus_id_witness(&f, m) {
                    Ok((x, y)) => assert_eq!(engel_eval(&g, m, &x, &y), g.minus_identity()),
                    Err(e) => {
                        assert!(matches!(e, Error::InvalidArgument(_)), "q={q} m={m}: {e}");
                        assert!(!minus_id_solvable(&f, m).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn pair_construction() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = Field::from_order(q).unwrap();
            let g = Sl2::new(&f);
            for s in f.iter() {
                for u in f.iter() {
                    for t in f.iter() {
                        let (x, y) = pair_with_traces(&f, s, u, t).unwrap();
                        assert_eq!(g.pi(&x, &y), crate::sl2::TraceTriple { s, u, t });
                    }
                }
            }
        }
    }

    #[test]
    fn stabilization_and_orbits() {
        for q in (3u64..=101).filter(|&q| crate::ff::prime_power(q).is_some()) {
            let f = Field::from_order(q).unwrap();
            let st = stabilized_image(&f);
            let orbits = orbit_analysis(&f, false);
            assert_eq!(st.n0, orbits.max_preperiod, "q={q}");
            assert!(st.n0 <= q as u32, "q={q}: n0 = {}", st.n0);
            let cls = field_class(&f);
            if !f.is_even() {
                assert_eq!(st.image.contains(f.one()), cls.has_sqrt2, "q={q}");
                let fixed = orbits.cycle_lengths.get(&1).copied().unwrap_or(0);
                let sqrt3 = f.iter().filter(|&t| f.square(t) == f.from_int(3)).count() as u64;
                assert_eq!(fixed, 2 * q - sqrt3);
            }
            let total: u64 = orbits.cycle_lengths.iter().map(|(l, c)| *l as u64 * c).sum();
            assert_eq!(total, orbits.periodic_point_count);
        }
        let f5 = Field::from_order(5).unwrap();
        let table = orbit_analysis(&f5, true).table.unwrap();
        assert!(table.iter().all(|o| o.preperiod + o.cycle_length <= 25));
        let f11 = Field::from_order(11).unwrap();
        let table = orbit_analysis(&f11, true).table.unwrap();
        for t in f11.iter().filter(|&t| f11.square(t) != f11.from_int(2)) {
            let o = &table[(t.enc() * 11 + 1) as usize];
            assert!(o.preperiod > 0);
        }
    }

    #[test]
    fn prime_orbits() {
        let f = Field::from_order(7).unwrap();
        let fixed = find_prime_orbit(&f, 1);
        assert!(matches!(fixed, Err(Error::NotPrime(1))));
        let mut found = None;
        for q in [3u64, 5, 7, 9, 11, 13, 17, 19, 23, 25] {
            let f = Field::from_order(q).unwrap();
            if let Some(orbit) = find_prime_orbit(&f, 2).unwrap() {
                found = Some((f, orbit));
                break;
            }
        }
        let (f, orbit) = found.expect("a 2-cycle over some small field");
        assert_eq!(orbit.len(), 2);
        assert_ne!(mu(&f, orbit[0]), orbit[0]);
        assert_eq!(mu(&f, mu(&f, orbit[0])), orbit[0]);
        let f = Field::from_order(2053).unwrap();
        let orbit = find_prime_orbit(&f, 3).unwrap().expect("3-cycle above the bound");
        let back = (0..3).fold(orbit[0], |p, _| mu(&f, p));
        assert_eq!(back, orbit[0]);
        assert!(find_prime_orbit(&f, 4).is_err());
    }

    #[test]
    fn bound_values() {
        assert_eq!(bound_q0(3).unwrap(), 2048);
        assert_eq!(bound_q0(4).unwrap(), 18432);
        assert!(bound_q0(2).is_err());
        let mut prev = 0;
        for n in 3..40 {
            let b = bound_q0(n).unwrap();
            assert!(b > prev);
            prev = b;
        }
        assert!(bound_q0(80).is_err());
    }

    #[test]
    fn field_classes() {
        let c = |q| field_class(&Field::from_order(q).unwrap());
        assert_eq!(c(7), FieldClass { has_sqrt2: true, has_sqrt_minus1: false, char2: false });
        assert_eq!(c(13), FieldClass { has_sqrt2: false, has_sqrt_minus1: true, char2: false });
        assert_eq!(c(9), FieldClass { has_sqrt2: true, has_sqrt_minus1: true, char2: false });
        assert!(c(8).char2);
    }

    #[test]
    fn conjecture_scan_small() {
        for q in [5u64, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29] {
            let scan = scan_conjecture(&Field::from_order(q).unwrap(), 30);
            assert!(scan.pm_failures.is_empty(), "q={q}");
        }
        let scan = scan_conjecture(&Field::from_order(11).unwrap(), 11);
        assert_eq!(scan.missing.first().map(|(n, v)| (*n, v.len())), Some((2, 1)));
    }
}
