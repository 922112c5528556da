use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::FlagValues;

#[derive(Debug, Parser)]
#[command(name = "engel", version, about = "Engel word maps on SL(2,q) and PSL(2,q) through the trace map")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Surjectivity verdicts per (q, m).
    Survey(SurveyArgs),
    /// Trace images T_n, T'_n and rho_n(F_q^2) for n = m - 1.
    Image(ImageArgs),
    /// Functional-graph statistics of mu on F_q^2.
    Orbits(OrbitsArgs),
    /// Solvability of e_m(x, y) = -id with witnesses.
    MinusId(MinusIdArgs),
    /// Brute-force images compared with trace-map predictions.
    Oracle(OracleArgs),
    /// Fiber-size deviation of e_m over non-central classes.
    Equidist(EquidistArgs),
    /// Trace polynomial of a word in s = tr x, u = tr xy, t = tr y.
    TracePoly(TracePolyArgs),
    /// Values missing from rho_n(F_q^2) for n up to a bound.
    ScanConjecture(ScanArgs),
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// Output format: csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// TOML file with default values for these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FieldsArg {
    /// Field orders, e.g. `5..137` or `4,8,16`.
    #[arg(long)]
    pub q: Option<String>,
}

#[derive(Debug, Args)]
pub struct EngelArg {
    /// Engel indices, e.g. `3` or `1..4`.
    #[arg(long)]
    pub engel: Option<String>,
}

#[derive(Debug, Args)]
pub struct SurveyArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    #[command(flatten)]
    pub engel: EngelArg,
    /// Leave `undetermined_at_minus2` unresolved.
    #[arg(long)]
    pub no_resolve: bool,
    /// Include a witness pair per attained trace (JSON only).
    #[arg(long)]
    pub witnesses: bool,
    #[arg(long)]
    pub oracle_cap: Option<u128>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ImageArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    #[command(flatten)]
    pub engel: EngelArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OrbitsArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    /// Also report one cycle of this prime length.
    #[arg(long)]
    pub prime_orbit: Option<u32>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct MinusIdArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    #[command(flatten)]
    pub engel: EngelArg,
    #[arg(long)]
    pub oracle_cap: Option<u128>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    #[command(flatten)]
    pub engel: EngelArg,
    /// Largest number of word evaluations allowed per field.
    #[arg(long)]
    pub oracle_cap: Option<u128>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EquidistArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    #[command(flatten)]
    pub engel: EngelArg,
    #[arg(long)]
    pub oracle_cap: Option<u128>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TracePolyArgs {
    /// A word such as `[x,y]` or `x^2 Y x`.
    #[arg(long, conflicts_with = "engel")]
    pub word: Option<String>,
    #[command(flatten)]
    pub engel: EngelArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub fields: FieldsArg,
    /// Largest n checked (default q).
    #[arg(long)]
    pub n_max: Option<u32>,
    #[command(flatten)]
    pub common: Common,
}

fn with_common(common: Common, flags: FlagValues) -> FlagValues {
    FlagValues {
        format: common.format,
        output: common.output,
        threads: common.threads,
        config: common.config,
        ..flags
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Survey(_) => "survey",
            Command::Image(_) => "image",
            Command::Orbits(_) => "orbits",
            Command::MinusId(_) => "minus-id",
            Command::Oracle(_) => "oracle",
            Command::Equidist(_) => "equidist",
            Command::TracePoly(_) => "trace-poly",
            Command::ScanConjecture(_) => "scan-conjecture",
        }
    }

    pub fn into_flags(self) -> FlagValues {
        match self {
            Command::Survey(a) => with_common(
                a.common,
                FlagValues {
                    q: a.fields.q,
                    engel: a.engel.engel,
                    no_resolve: a.no_resolve,
                    witnesses: a.witnesses,
                    oracle_cap: a.oracle_cap,
                    ..Default::default()
                },
            ),
            Command::Image(a) => {
                with_common(a.common, FlagValues { q: a.fields.q, engel: a.engel.engel, ..Default::default() })
            }
            Command::Orbits(a) => {
                with_common(a.common, FlagValues { q: a.fields.q, prime_orbit: a.prime_orbit, ..Default::default() })
            }
            Command::MinusId(a) => with_common(
                a.common,
                FlagValues { q: a.fields.q, engel: a.engel.engel, oracle_cap: a.oracle_cap, ..Default::default() },
            ),
            Command::Oracle(a) => with_common(
                a.common,
                FlagValues { q: a.fields.q, engel: a.engel.engel, oracle_cap: a.oracle_cap, ..Default::default() },
            ),
            Command::Equidist(a) => with_common(
                a.common,
                FlagValues { q: a.fields.q, engel: a.engel.engel, oracle_cap: a.oracle_cap, ..Default::default() },
            ),
            Command::TracePoly(a) => {
                with_common(a.common, FlagValues { word: a.word, engel: a.engel.engel, ..Default::default() })
            }
            Command::ScanConjecture(a) => {
                with_common(a.common, FlagValues { q: a.fields.q, n_max: a.n_max, ..Default::default() })
            }
        }
    }
}
