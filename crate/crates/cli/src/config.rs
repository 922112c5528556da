//! Run configuration: command-line flags merged over an optional TOML file.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use engel_core::ff::prime_power;

#[derive(Debug)]
pub enum ConfigError {
    Usage(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

fn usage(msg: impl Into<String>) -> ConfigError {
    ConfigError::Usage(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Format, ConfigError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(usage(format!("unknown format '{other}' (expected csv or json)"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// One piece of a list argument: a single value or an inclusive range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Item {
    One(u64),
    Range(u64, u64),
}

fn parse_items(text: &str, what: &str) -> Result<Vec<Item>, ConfigError> {
    let mut items = Vec::new();
    for part in text.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(usage(format!("empty entry in {what} list '{text}'")));
        }
        let num = |s: &str| {
            s.trim().parse::<u64>().map_err(|_| usage(format!("bad {what} value '{s}' in '{text}'")))
        };
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(usage(format!("empty {what} range '{part}'")));
            }
            items.push(Item::Range(lo, hi));
        } else {
            items.push(Item::One(num(part)?));
        }
    }
    Ok(items)
}

/// Field orders from a list such as `4,5..9,16`. Ranges keep prime powers
/// only; an explicit value that is not a prime power is an error.
pub fn parse_q_list(text: &str, notices: &mut Vec<String>) -> Result<Vec<u64>, ConfigError> {
    parse_q_list_tagged(text, notices).map(|(all, _)| all)
}

/// As [`parse_q_list`], also returning the values named explicitly.
fn parse_q_list_tagged(text: &str, notices: &mut Vec<String>) -> Result<(Vec<u64>, Vec<u64>), ConfigError> {
    let mut out = Vec::new();
    let mut explicit = Vec::new();
    for item in parse_items(text, "q")? {
        match item {
            Item::One(q) => {
                if prime_power(q).is_none() {
                    return Err(usage(format!("q = {q} is not a prime power")));
                }
                out.push(q);
                explicit.push(q);
            }
            Item::Range(lo, hi) => {
                let mut skipped = Vec::new();
                for q in lo..=hi {
                    if prime_power(q).is_some() {
                        out.push(q);
                    } else if q >= 2 {
                        skipped.push(q.to_string());
                    }
                }
                if !skipped.is_empty() {
                    notices.push(format!("range {lo}..{hi}: skipping non-prime-powers {}", skipped.join(" ")));
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    explicit.sort_unstable();
    explicit.dedup();
    Ok((out, explicit))
}

pub fn parse_int_list(text: &str, what: &str) -> Result<Vec<u32>, ConfigError> {
    let mut out = Vec::new();
    for item in parse_items(text, what)? {
        let (lo, hi) = match item {
            Item::One(v) => (v, v),
            Item::Range(lo, hi) => (lo, hi),
        };
        for v in lo..=hi {
            out.push(u32::try_from(v).map_err(|_| usage(format!("{what} value {v} too large")))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// A list given either as a string (`"5..137"`) or as an array in TOML.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ListValue {
    Text(String),
    Ints(Vec<u64>),
    Int(u64),
}

impl ListValue {
    fn to_text(&self) -> String {
        match self {
            ListValue::Text(s) => s.clone(),
            ListValue::Ints(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            ListValue::Int(v) => v.to_string(),
        }
    }
}

/// Keys accepted in a `--config` file; the same names as the flags.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub q: Option<ListValue>,
    pub engel: Option<ListValue>,
    pub word: Option<String>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub oracle_cap: Option<u128>,
    pub n_max: Option<u32>,
    pub witnesses: Option<bool>,
    pub no_resolve: Option<bool>,
    pub prime_orbit: Option<u32>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("bad config {}: {e}", path.display())))
    }
}

/// Flag values as given on the command line (all optional).
#[derive(Clone, Debug, Default)]
pub struct FlagValues {
    pub q: Option<String>,
    pub engel: Option<String>,
    pub word: Option<String>,
    pub format: Option<String>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub oracle_cap: Option<u128>,
    pub n_max: Option<u32>,
    pub witnesses: bool,
    pub no_resolve: bool,
    pub prime_orbit: Option<u32>,
    pub config: Option<PathBuf>,
}

/// Normalized configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub q_text: Option<String>,
    pub qs: Vec<u64>,
    /// Members of `qs` named individually rather than through a range.
    pub explicit_qs: Vec<u64>,
    pub engel_text: Option<String>,
    pub ms: Vec<u32>,
    pub word: Option<String>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub oracle_cap: u128,
    pub n_max: Option<u32>,
    pub witnesses: bool,
    pub resolve: bool,
    pub prime_orbit: Option<u32>,
}

impl RunConfig {
    pub fn build(command: &str, flags: FlagValues, notices: &mut Vec<String>) -> Result<RunConfig, ConfigError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let q_text = flags.q.or_else(|| file.q.as_ref().map(ListValue::to_text));
        let engel_text = flags.engel.or_else(|| file.engel.as_ref().map(ListValue::to_text));
        let (qs, explicit_qs) = match &q_text {
            Some(t) => parse_q_list_tagged(t, notices)?,
            None => (Vec::new(), Vec::new()),
        };
        let ms = match &engel_text {
            Some(t) => parse_int_list(t, "engel")?,
            None => Vec::new(),
        };
        if ms.contains(&0) {
            return Err(usage("Engel index must be at least 1"));
        }
        let format = flags.format.or(file.format).map(|s| Format::parse(&s)).transpose()?;
        let threads = flags.threads.or(file.threads);
        if threads == Some(0) {
            return Err(usage("--threads must be positive"));
        }
        Ok(RunConfig {
            command: command.to_string(),
            q_text,
            qs,
            explicit_qs,
            engel_text,
            ms,
            word: flags.word.or(file.word),
            format,
            output: flags.output.or(file.output),
            threads,
            oracle_cap: flags.oracle_cap.or(file.oracle_cap).unwrap_or(engel_core::oracle::DEFAULT_CAP),
            n_max: flags.n_max.or(file.n_max),
            witnesses: flags.witnesses || file.witnesses.unwrap_or(false),
            resolve: !(flags.no_resolve || file.no_resolve.unwrap_or(false)),
            prime_orbit: flags.prime_orbit.or(file.prime_orbit),
        })
    }

    pub fn require_qs(&self) -> Result<&[u64], ConfigError> {
        if self.qs.is_empty() {
            return Err(usage(format!("{} needs --q", self.command)));
        }
        Ok(&self.qs)
    }

    pub fn require_ms(&self) -> Result<&[u32], ConfigError> {
        if self.ms.is_empty() {
            return Err(usage(format!("{} needs --engel", self.command)));
        }
        Ok(&self.ms)
    }

    /// `key=value` pairs describing the run, excluding output location and
    /// thread count, which do not affect the data.
    pub fn normalized(&self) -> Vec<(String, String)> {
        let mut kv = vec![("command".to_string(), self.command.clone())];
        if let Some(t) = &self.q_text {
            kv.push(("q".into(), t.clone()));
        }
        if let Some(t) = &self.engel_text {
            kv.push(("engel".into(), t.clone()));
        }
        if let Some(w) = &self.word {
            kv.push(("word".into(), w.clone()));
        }
        if let Some(n) = self.n_max {
            kv.push(("n-max".into(), n.to_string()));
        }
        if let Some(p) = self.prime_orbit {
            kv.push(("prime-orbit".into(), p.to_string()));
        }
        kv.push(("oracle-cap".into(), self.oracle_cap.to_string()));
        kv.push(("witnesses".into(), self.witnesses.to_string()));
        kv.push(("resolve-minus2".into(), self.resolve.to_string()));
        kv
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_lists() {
        let mut notes = Vec::new();
        assert_eq!(parse_q_list("5..13", &mut notes).unwrap(), vec![5, 7, 8, 9, 11, 13]);
        assert_eq!(notes.len(), 1);
        assert!(notes[0].contains("6 10 12"));
        assert_eq!(parse_q_list("16, 4,5..=5", &mut Vec::new()).unwrap(), vec![4, 5, 16]);
        assert!(parse_q_list("6", &mut Vec::new()).is_err());
        assert!(parse_q_list("9..5", &mut Vec::new()).is_err());
        assert!(parse_q_list("x", &mut Vec::new()).is_err());
    }

    #[test]
    fn int_lists() {
        assert_eq!(parse_int_list("3", "engel").unwrap(), vec![3]);
        assert_eq!(parse_int_list("1..3,7", "engel").unwrap(), vec![1, 2, 3, 7]);
        assert!(parse_int_list("", "engel").is_err());
    }

    #[test]
    fn file_values_are_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "q = \"5..7\"\nengel = [2, 3]\nformat = \"json\"\noracle-cap = 99\n").unwrap();
        let flags = FlagValues { config: Some(path.clone()), engel: Some("4".into()), ..Default::default() };
        let cfg = RunConfig::build("survey", flags, &mut Vec::new()).unwrap();
        assert_eq!(cfg.qs, vec![5, 7]);
        assert_eq!(cfg.ms, vec![4]);
        assert_eq!(cfg.format, Some(Format::Json));
        assert_eq!(cfg.oracle_cap, 99);
        std::fs::write(&path, "colour = 1\n").unwrap();
        let flags = FlagValues { config: Some(path), ..Default::default() };
        assert!(RunConfig::build("survey", flags, &mut Vec::new()).is_err());
    }
}
