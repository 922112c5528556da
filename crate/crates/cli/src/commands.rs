//! Subcommand bodies. Each returns a table in canonical `(q, m)` order.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde_json::{json, Value};

use engel_core::analysis::{
    field_class, find_prime_orbit, minus_id_solvable, minus_id_witness, orbit_analysis, resolve_minus2,
    scan_conjecture, stabilized_image, two_power_criterion, verdict_from_report, ImageReport, ImageSequence,
    SlAlmost, VerdictOptions,
};
use engel_core::ff::{Fe, Field};
use engel_core::oracle::{Oracle, OracleConfig};
use engel_core::sl2::{GroupElement, Sl2};
use engel_core::tracemap::trace_polynomial;
use engel_core::words::{engel, engel_eval, parse, Word};
use engel_core::Error;

use crate::config::RunConfig;
use crate::output::{Cell, Row, Table};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Cap(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 1,
            Failure::Cap(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Cap(m) => write!(f, "refused: {m}"),
            Failure::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap { .. } => Failure::Cap(e.to_string()),
            Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<crate::config::ConfigError> for Failure {
    fn from(e: crate::config::ConfigError) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

/// A finished report. `mismatches` is non-empty when verification failed;
/// the table is still written.
pub struct Report {
    pub table: Table,
    pub mismatches: Vec<String>,
    /// Plain-text rendering used when no format is requested.
    pub text: Option<String>,
}

impl Report {
    fn table(table: Table) -> Self {
        Report { table, mismatches: Vec::new(), text: None }
    }
}

/// The fields `cfg.qs` accepted by `keep`. A rejected value is an error if
/// it was named explicitly and is skipped with a notice otherwise.
fn fields(cfg: &RunConfig, notices: &mut Vec<String>, keep: impl Fn(u64) -> Option<&'static str>) -> Outcome<Vec<Field>> {
    let mut out = Vec::new();
    let mut skipped: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for &q in cfg.require_qs()? {
        if let Some(reason) = keep(q) {
            if cfg.explicit_qs.contains(&q) {
                return Err(Failure::Usage(format!("{}: q = {q}: {reason}", cfg.command)));
            }
            skipped.entry(reason).or_default().push(q.to_string());
            continue;
        }
        out.push(Field::from_order(q)?);
    }
    for (reason, qs) in skipped {
        notices.push(format!("{}: skipping q = {} ({reason})", cfg.command, qs.join(" ")));
    }
    if out.is_empty() {
        return Err(Failure::Usage(format!("{}: no usable q", cfg.command)));
    }
    Ok(out)
}

fn simple(q: u64) -> Option<&'static str> {
    (q <= 3).then_some("PSL(2,q) is not simple")
}

fn encs(values: impl IntoIterator<Item = Fe>) -> Cell {
    Cell::List(values.into_iter().map(|a| a.enc() as u64).collect())
}

fn matrix(x: &GroupElement) -> Vec<u32> {
    x.entries().iter().map(|e| e.enc()).collect()
}

fn matrix_cell(x: &GroupElement) -> Cell {
    Cell::List(x.entries().iter().map(|e| e.enc() as u64).collect())
}

fn pair_json(pair: &(GroupElement, GroupElement)) -> Value {
    json!({ "x": matrix(&pair.0), "y": matrix(&pair.1) })
}

fn oracle_for(f: &Field, cfg: &RunConfig) -> Outcome<Oracle> {
    Ok(Oracle::new(f, OracleConfig { max_evaluations: cfg.oracle_cap })?)
}

fn max_m(cfg: &RunConfig) -> Outcome<u32> {
    Ok(*cfg.require_ms()?.last().expect("non-empty"))
}

/// Reports `T_{m-1}` for each requested `m`, in order.
fn reports(f: &Field, ms: &[u32]) -> Vec<(u32, ImageReport)> {
    let mut seq = ImageSequence::new(f);
    ms.iter()
        .map(|&m| {
            seq.advance_to(m - 1);
            (m, seq.report())
        })
        .collect()
}

fn collect_rows(cells: Vec<Outcome<Vec<Row>>>, table: &mut Table) -> Outcome<()> {
    for rows in cells {
        for row in rows? {
            table.push(row);
        }
    }
    Ok(())
}

pub fn survey(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, simple)?;
    let ms = cfg.require_ms()?.to_vec();
    let opts = VerdictOptions { resolve_minus2: cfg.resolve, witnesses: cfg.witnesses };
    let cells: Vec<Outcome<Vec<Row>>> = fs
        .par_iter()
        .map(|f| {
            let mut rows = Vec::new();
            let mut oracle_minus_id: Option<Vec<bool>> = None;
            for (m, report) in reports(f, &ms) {
                let v = verdict_from_report(f, m, &report, opts)?;
                let minus_id = match v.minus_id_attained {
                    Some(b) => b,
                    None => {
                        if oracle_minus_id.is_none() {
                            let o = oracle_for(f, cfg)?;
                            let mid = o.group().minus_identity();
                            let imgs = o.engel_images(*ms.last().expect("non-empty"))?;
                            oracle_minus_id = Some(imgs.iter().map(|img| img.contains(&mid)).collect());
                        }
                        oracle_minus_id.as_ref().expect("computed")[m as usize - 1]
                    }
                };
                let mut row = Row::new(vec![
                    f.q().into(),
                    f.p().into(),
                    f.e().into(),
                    m.into(),
                    v.psl_surjective.into(),
                    v.sl_almost.map_or("n/a", SlAlmost::as_str).into(),
                    minus_id.into(),
                    encs(v.missing_traces.iter().copied()),
                ]);
                if let Some(w) = &v.witnesses {
                    let obj: serde_json::Map<String, Value> =
                        w.iter().map(|(a, pair)| (a.to_string(), pair_json(pair))).collect();
                    row.extra.push(("witnesses".into(), Value::Object(obj)));
                }
                rows.push(row);
            }
            Ok(rows)
        })
        .collect();
    let mut table = Table::new(&[
        "q",
        "p",
        "e",
        "m",
        "psl_surjective",
        "sl_almost",
        "minus_id_attained",
        "missing_traces",
    ]);
    collect_rows(cells, &mut table)?;
    Ok(Report::table(table))
}

pub fn image(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, |_| None)?;
    let ms = cfg.require_ms()?.to_vec();
    let cells: Vec<Outcome<Vec<Row>>> = fs
        .par_iter()
        .map(|f| {
            Ok(reports(f, &ms)
                .into_iter()
                .map(|(m, r)| {
                    let pairs = r.missing_pairs.iter().map(|(a, b)| format!("{a}/{b}")).collect();
                    Row::new(vec![
                        f.q().into(),
                        m.into(),
                        r.n.into(),
                        encs(r.missing.iter().copied()),
                        encs(r.t_n.complement().iter()),
                        encs(r.t_n_prime.complement().iter()),
                        Cell::Words(pairs),
                    ])
                })
                .collect())
        })
        .collect();
    let mut table = Table::new(&["q", "m", "n", "missing", "t_missing", "t_prime_missing", "missing_pairs"]);
    collect_rows(cells, &mut table)?;
    Ok(Report::table(table))
}

pub fn orbits(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, |_| None)?;
    if let Some(n) = cfg.prime_orbit {
        if !engel_core::ff::is_prime(n as u64) {
            return Err(Failure::Usage(format!("--prime-orbit {n} is not prime")));
        }
    }
    let cells: Vec<Outcome<Vec<Row>>> = fs
        .par_iter()
        .map(|f| {
            let report = orbit_analysis(f, false);
            let st = stabilized_image(f);
            let cycles = report.cycle_lengths.iter().map(|(l, c)| format!("{l}:{c}")).collect();
            let orbit = match cfg.prime_orbit {
                Some(n) => match find_prime_orbit(f, n)? {
                    Some(pts) => Cell::Words(pts.iter().map(|p| format!("{}:{}", p.s, p.t)).collect()),
                    None => Cell::Words(Vec::new()),
                },
                None => Cell::Empty,
            };
            Ok(vec![Row::new(vec![
                f.q().into(),
                st.n0.into(),
                report.max_preperiod.into(),
                report.periodic_point_count.into(),
                Cell::Words(cycles),
                (st.image.len() as u64).into(),
                orbit,
            ])])
        })
        .collect();
    let mut table =
        Table::new(&["q", "n0", "max_preperiod", "periodic_points", "cycles", "stable_image_size", "prime_orbit"]);
    collect_rows(cells, &mut table)?;
    Ok(Report::table(table))
}

/// Exhaustive search for `e_m(x, y) = -id`, for the smallest fields.
fn search_minus_id(f: &Field, m: u32) -> Option<(GroupElement, GroupElement)> {
    let g = Sl2::new(f);
    let mid = g.minus_identity();
    let found = g.iter().find_map(|x| g.iter().find(|y| engel_eval(&g, m, &x, y) == mid).map(|y| (x, y)));
    found
}

pub fn minus_id(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, |q| (q % 2 == 0).then_some("no -id in characteristic 2"))?;
    let ms = cfg.require_ms()?.to_vec();
    let cells: Vec<Outcome<Vec<Row>>> = fs
        .par_iter()
        .map(|f| {
            let q = f.q() as u64;
            let mut rows = Vec::new();
            for &m in &ms {
                let (source, witness) = if m == 1 || q >= 7 {
                    let solvable = m == 1 || minus_id_solvable(f, m)?;
                    let w = if solvable { Some(minus_id_witness(f, m)?) } else { None };
                    (if m == 1 { "construction" } else { "criterion" }, w)
                } else {
                    let g = Sl2::new(f);
                    let needed = (g.order() as u128).pow(2) * m as u128;
                    if needed > cfg.oracle_cap {
                        return Err(Failure::Cap(format!("search needs {needed} evaluations, cap {}", cfg.oracle_cap)));
                    }
                    ("search", search_minus_id(f, m))
                };
                let (wx, wy) = match &witness {
                    Some((x, y)) => (matrix_cell(x), matrix_cell(y)),
                    None => (Cell::Empty, Cell::Empty),
                };
                rows.push(Row::new(vec![
                    f.q().into(),
                    m.into(),
                    two_power_criterion(q, m).into(),
                    witness.is_some().into(),
                    source.into(),
                    wx,
                    wy,
                ]));
            }
            Ok(rows)
        })
        .collect();
    let mut table = Table::new(&["q", "m", "two_power_criterion", "solvable", "source", "witness_x", "witness_y"]);
    collect_rows(cells, &mut table)?;
    Ok(Report::table(table))
}

fn opt_bool(v: Option<bool>) -> Cell {
    v.map_or(Cell::Empty, Cell::Bool)
}

pub fn oracle(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, simple)?;
    let ms = cfg.require_ms()?.to_vec();
    let top = max_m(cfg)?;
    let cells: Vec<Outcome<(Vec<Row>, Vec<String>)>> = fs
        .iter()
        .map(|f| {
            let o = oracle_for(f, cfg)?;
            let g = o.group();
            let images = o.engel_images(top)?;
            let m2 = f.from_int(-2);
            let mid = g.minus_identity();
            let mut rows = Vec::new();
            let mut bad = Vec::new();
            for (m, report) in reports(f, &ms) {
                let img = &images[m as usize - 1];
                let v = verdict_from_report(f, m, &report, VerdictOptions::default())?;
                let psl_brute = img.iter().map(|z| g.psl_project(&z)).collect::<std::collections::BTreeSet<_>>().len()
                    as u64
                    == if f.is_even() { g.order() } else { g.order() / 2 };
                let traces = img.traces();
                let skip_m2 = !f.is_even();
                let traces_agree =
                    f.iter().filter(|&a| !(skip_m2 && a == m2)).all(|a| traces.contains(a) == report.t_n.contains(a));
                let (minus2_brute, minus2_pred, almost_brute, almost_pred, mid_brute, mid_pred) = if f.is_even() {
                    (None, None, None, None, None, None)
                } else {
                    let almost = g.iter().all(|z| z == mid || img.contains(&z));
                    (
                        Some(img.noncentral_traces().contains(m2)),
                        Some(resolve_minus2(f, m)?),
                        Some(almost),
                        Some(v.sl_almost == Some(SlAlmost::Yes)),
                        Some(img.contains(&mid)),
                        v.minus_id_attained,
                    )
                };
                let pairs_agree = |a: Option<bool>, b: Option<bool>| a.zip(b).is_none_or(|(a, b)| a == b);
                let agree = psl_brute == v.psl_surjective
                    && traces_agree
                    && pairs_agree(minus2_brute, minus2_pred)
                    && pairs_agree(almost_brute, almost_pred)
                    && pairs_agree(mid_brute, mid_pred);
                if !agree {
                    bad.push(format!("q = {} m = {m}", f.q()));
                }
                rows.push(Row::new(vec![
                    f.q().into(),
                    m.into(),
                    psl_brute.into(),
                    v.psl_surjective.into(),
                    traces_agree.into(),
                    opt_bool(minus2_brute),
                    opt_bool(minus2_pred),
                    opt_bool(almost_brute),
                    opt_bool(almost_pred),
                    opt_bool(mid_brute),
                    opt_bool(mid_pred),
                    agree.into(),
                ]));
            }
            Ok((rows, bad))
        })
        .collect();
    let mut table = Table::new(&[
        "q",
        "m",
        "psl_brute",
        "psl_pred",
        "traces_agree",
        "minus2_brute",
        "minus2_pred",
        "sl_almost_brute",
        "sl_almost_pred",
        "minus_id_brute",
        "minus_id_pred",
        "agree",
    ]);
    let mut mismatches = Vec::new();
    for cell in cells {
        let (rows, bad) = cell?;
        rows.into_iter().for_each(|r| table.push(r));
        mismatches.extend(bad);
    }
    Ok(Report { table, mismatches, text: None })
}

pub fn equidist(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, |_| None)?;
    let ms = cfg.require_ms()?.to_vec();
    let top = max_m(cfg)?;
    let mut table =
        Table::new(&["q", "m", "s_size", "min_rel_dev", "max_rel_dev", "max_abs_dev", "scaled_dev"]);
    for f in &fs {
        let reports = oracle_for(f, cfg)?.fiber_sizes_upto(top)?;
        for &m in &ms {
            let r = &reports[m as usize - 1];
            let d = r.max_abs_dev();
            table.push(Row::new(vec![
                f.q().into(),
                m.into(),
                r.s_size.into(),
                r.min_rel_dev.into(),
                r.max_rel_dev.into(),
                d.into(),
                (d * (f.q() as f64).sqrt()).into(),
            ]));
        }
    }
    Ok(Report::table(table))
}

pub fn trace_poly(cfg: &RunConfig) -> Outcome<Report> {
    let words: Vec<(String, Word)> = match (&cfg.word, cfg.ms.is_empty()) {
        (Some(text), true) => vec![(text.clone(), parse(text)?)],
        (None, false) => cfg.ms.iter().map(|&m| Ok((format!("e_{m}"), engel(m)?))).collect::<Outcome<_>>()?,
        (Some(_), false) => return Err(Failure::Usage("trace-poly takes --word or --engel, not both".into())),
        (None, true) => return Err(Failure::Usage("trace-poly needs --word or --engel".into())),
    };
    let mut table = Table::new(&["word", "polynomial"]);
    let mut text = String::new();
    for (name, w) in words {
        let poly = trace_polynomial(&w).to_string();
        text.push_str(&poly);
        text.push('\n');
        table.push(Row::new(vec![name.into(), poly.into()]));
    }
    Ok(Report { table, mismatches: Vec::new(), text: Some(text) })
}

fn thresholds(entries: impl IntoIterator<Item = (u32, Fe)>) -> Cell {
    let mut first: BTreeMap<u32, u32> = BTreeMap::new();
    for (n, a) in entries {
        first.entry(a.enc()).or_insert(n);
    }
    let mut v: Vec<(u32, u32)> = first.into_iter().collect();
    v.sort_by_key(|&(a, n)| (n, a));
    Cell::Words(v.into_iter().map(|(a, n)| format!("{a}@{n}")).collect())
}

pub fn scan(cfg: &RunConfig, notices: &mut Vec<String>) -> Outcome<Report> {
    let fs = fields(cfg, notices, |_| None)?;
    let cells: Vec<Outcome<Vec<Row>>> = fs
        .par_iter()
        .map(|f| {
            let n_max = cfg.n_max.unwrap_or(f.q());
            let s = scan_conjecture(f, n_max);
            let missing = s.missing.iter().flat_map(|(n, vals)| vals.iter().map(move |&a| (*n, a)));
            Ok(vec![Row::new(vec![
                f.q().into(),
                n_max.into(),
                field_class(f).has_sqrt2.into(),
                thresholds(s.pm_failures.iter().copied()),
                thresholds(missing),
            ])])
        })
        .collect();
    let mut table = Table::new(&["q", "n_max", "has_sqrt2", "pm_failures", "missing"]);
    collect_rows(cells, &mut table)?;
    Ok(Report::table(table))
}
