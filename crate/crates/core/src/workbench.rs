//! The command-line workbench: subcommands, reports and replay.
//!
//! Every run produces a [`Report`] whose `config` holds the parsed command
//! plus a digest of each input file. `config_hash` is the SHA-256 of that
//! config's JSON, so two runs with equal hashes must produce byte-identical
//! `verdict` and `counterexamples`; only `timings` may differ.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::binum::{BinNum, FsQuery, NumSet};
use crate::gap::{self, SolutionCandidate};
use crate::largeness::{
    self, bitmap_to_hex, immunity_audit, iterate, HardInstance, LargeSet, LargenessError,
    LayerStack, StackExport,
};
use crate::lll::{self, FamilySpec, LllError, LllParams, PartialColoring, Ratio};
use crate::oracle::{EnumFamily, OracleTrace};
use crate::search::{self, ColoringSpec, FsGoal, FsMode, Generator, SearchOutcome};
use crate::seed::mix;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Environment variable naming the default report directory.
pub const OUT_DIR_ENV: &str = "THINHT_OUT_DIR";

#[derive(Debug, Error)]
pub enum WorkbenchError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Input(String),
}

fn input(e: impl std::fmt::Display) -> WorkbenchError {
    WorkbenchError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "thinht", version, about = "Thin Hindman workbench")]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the report here instead of stdout or the report directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Generate or inspect staged enumeration traces.
    #[command(subcommand)]
    Trace(TraceCmd),
    /// Tabulate gap colors over the finite sums of a set.
    Encode(EncodeArgs),
    /// Verify a candidate and decode memberships from it.
    Decode(DecodeArgs),
    /// Build a harness candidate, verify it and decode every element.
    Roundtrip(RoundtripArgs),
    /// Two-coloring of set families.
    #[command(subcommand)]
    Lll(LllCmd),
    /// Largeness splitting and the layered hard coloring.
    #[command(subcommand)]
    Large(LargeCmd),
    /// Brute-force solvers.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Re-run the config stored in a report and compare verdicts.
    Replay(ReplayArgs),
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceCmd {
    /// Random trace (or family of traces) with distinct elements.
    Gen(TraceGenArgs),
    /// Print a trace with its settle stage.
    Show(TraceShowArgs),
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct TraceGenArgs {
    #[arg(long)]
    pub count: u64,
    #[arg(long)]
    pub max_element: u64,
    #[arg(long)]
    pub max_stage: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of traces; more than one writes a family file.
    #[arg(long, default_value_t = 1)]
    pub family: usize,
    /// Horizon of the written traces (default: max stage).
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct TraceShowArgs {
    #[arg(long)]
    pub trace: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct EncodeArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// JSON list of exponent lists, e.g. `[[5,6],[8,9]]`.
    #[arg(long)]
    pub set: String,
    /// Largest number of summands in the window.
    #[arg(long)]
    pub max_terms: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct DecodeArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Queries, comma separated; default every n up to the largest element.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct RoundtripArgs {
    #[arg(long)]
    pub trace: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub size: usize,
    /// Largest queried n (default: the largest trace element).
    #[arg(long)]
    pub max_n: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LllOptions {
    #[arg(long, default_value = "1/2")]
    pub q: Ratio,
    /// Size bound M (default: the least admissible for q).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl LllOptions {
    fn params(&self) -> Result<LllParams, LllError> {
        match self.m {
            Some(m) => LllParams::new(self.q, m, self.budget, self.seed),
            None => LllParams::minimal(self.q, self.budget, self.seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LllCmd {
    /// Audit a family, then two-color it up to a frontier.
    Color(LllColorArgs),
    /// Occurrence audit only.
    Audit(LllAuditArgs),
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LllColorArgs {
    /// `{"min_size": M, "sets": [[...], ...]}`.
    #[arg(long)]
    pub family: PathBuf,
    #[arg(long)]
    pub frontier: u64,
    /// Color up to this frontier first, then extend.
    #[arg(long)]
    pub prefix_frontier: Option<u64>,
    #[command(flatten)]
    pub lll: LllOptions,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LllAuditArgs {
    #[arg(long)]
    pub family: PathBuf,
    /// Largest audited point (default: the largest element).
    #[arg(long)]
    pub n_max: Option<u64>,
    #[command(flatten)]
    pub lll: LllOptions,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LargeCmd {
    /// Split N once and audit both halves.
    Split(LargeArgs),
    /// Iterate the split to build the layered coloring.
    Iterate(LargeIterateArgs),
    /// Immunity audit of a candidate set against an exported stack.
    Audit(LargeAuditArgs),
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LargeArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long, default_value_t = 4096)]
    pub window: u64,
    #[arg(long, default_value_t = 2)]
    pub k_max: u64,
    #[command(flatten)]
    pub lll: LllOptions,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LargeIterateArgs {
    #[command(flatten)]
    pub base: LargeArgs,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Also write the layer stack export here.
    #[arg(long)]
    pub export: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct LargeAuditArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long)]
    pub stack: PathBuf,
    /// Candidate set: comma list or JSON array of naturals.
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub color: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact2,
    Upto,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoalArg {
    Thin,
    Homogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpArg {
    Add,
    Max,
    Mul,
}

/// A coloring from a spec file or a generator shorthand:
/// `constant:C`, `sum_mod:M`, `identity`, `random:COLORS:SEED`.
#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ColoringArgs {
    #[arg(long, conflicts_with = "generator")]
    pub coloring: Option<PathBuf>,
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub arity: usize,
    #[arg(long, default_value_t = 32)]
    pub universe: u64,
    #[arg(long)]
    pub palette: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchCmd {
    Thin(SearchThinArgs),
    Fs(SearchFsArgs),
    Simul(SearchSimulArgs),
    Rrt(SearchThinArgs),
    Addlike(SearchAddlikeArgs),
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SearchThinArgs {
    #[command(flatten)]
    pub coloring: ColoringArgs,
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SearchFsArgs {
    #[command(flatten)]
    pub coloring: ColoringArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact2)]
    pub mode: ModeArg,
    /// Summand bound for `--mode upto`.
    #[arg(long = "terms", default_value_t = 2)]
    pub terms: usize,
    #[arg(long, value_enum, default_value_t = GoalArg::Thin)]
    pub goal: GoalArg,
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SearchSimulArgs {
    /// Spec files, one per coloring.
    #[arg(long = "spec")]
    pub specs: Vec<PathBuf>,
    /// Use the sum colorings of this unary coloring instead.
    #[command(flatten)]
    pub base: ColoringArgs,
    /// Number of sum colorings (arities 1..=n) derived from the base.
    #[arg(long)]
    pub sums: Option<usize>,
    #[arg(long)]
    pub size: usize,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct SearchAddlikeArgs {
    #[arg(long, value_enum)]
    pub op: OpArg,
    #[arg(long, default_value_t = 1)]
    pub b: u64,
    #[arg(long, default_value_t = 1)]
    pub escape_mul: u64,
    #[arg(long, default_value_t = 0)]
    pub escape_add: u64,
    #[arg(long, default_value_t = 32)]
    pub x_max: u64,
    #[arg(long, default_value_t = 32)]
    pub n_max: u64,
    #[arg(long)]
    pub y_max: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// Report file to replay.
    #[arg(long, conflicts_with = "hash")]
    pub report: Option<PathBuf>,
    /// Config hash (or a unique prefix) of a report in the report directory.
    #[arg(long)]
    pub hash: Option<String>,
    /// Report directory (default: the THINHT_OUT_DIR variable).
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Trace(TraceCmd::Gen(_)) => "trace gen",
            Command::Trace(TraceCmd::Show(_)) => "trace show",
            Command::Encode(_) => "encode",
            Command::Decode(_) => "decode",
            Command::Roundtrip(_) => "roundtrip",
            Command::Lll(LllCmd::Color(_)) => "lll color",
            Command::Lll(LllCmd::Audit(_)) => "lll audit",
            Command::Large(LargeCmd::Split(_)) => "large split",
            Command::Large(LargeCmd::Iterate(_)) => "large iterate",
            Command::Large(LargeCmd::Audit(_)) => "large audit",
            Command::Search(SearchCmd::Thin(_)) => "search thin",
            Command::Search(SearchCmd::Fs(_)) => "search fs",
            Command::Search(SearchCmd::Simul(_)) => "search simul",
            Command::Search(SearchCmd::Rrt(_)) => "search rrt",
            Command::Search(SearchCmd::Addlike(_)) => "search addlike",
            Command::Replay(_) => "replay",
        }
    }

    /// Files the command reads.
    pub fn inputs(&self) -> Vec<&Path> {
        fn col<'a>(c: &'a ColoringArgs, v: &mut Vec<&'a Path>) {
            if let Some(p) = &c.coloring {
                v.push(p);
            }
        }
        let mut v: Vec<&Path> = Vec::new();
        match self {
            Command::Trace(TraceCmd::Gen(_)) => {}
            Command::Trace(TraceCmd::Show(a)) => v.push(&a.trace),
            Command::Encode(a) => v.push(&a.trace),
            Command::Decode(a) => {
                v.push(&a.trace);
                v.push(&a.candidate);
            }
            Command::Roundtrip(a) => v.push(&a.trace),
            Command::Lll(LllCmd::Color(a)) => v.push(&a.family),
            Command::Lll(LllCmd::Audit(a)) => v.push(&a.family),
            Command::Large(LargeCmd::Split(a)) => v.push(&a.traces),
            Command::Large(LargeCmd::Iterate(a)) => v.push(&a.base.traces),
            Command::Large(LargeCmd::Audit(a)) => {
                v.push(&a.traces);
                v.push(&a.stack);
            }
            Command::Search(SearchCmd::Thin(a)) | Command::Search(SearchCmd::Rrt(a)) => {
                col(&a.coloring, &mut v)
            }
            Command::Search(SearchCmd::Fs(a)) => col(&a.coloring, &mut v),
            Command::Search(SearchCmd::Simul(a)) => {
                v.extend(a.specs.iter().map(PathBuf::as_path));
                col(&a.base, &mut v);
            }
            Command::Search(SearchCmd::Addlike(_)) => {}
            Command::Replay(a) => {
                if let Some(p) = &a.report {
                    v.push(p);
                }
            }
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Config {
    pub command: Command,
    /// SHA-256 of each input file, keyed by the path as given.
    pub inputs: BTreeMap<String, String>,
}

impl Config {
    pub fn for_command(command: &Command) -> Result<Self, WorkbenchError> {
        let mut inputs = BTreeMap::new();
        for p in command.inputs() {
            let bytes = read_bytes(p)?;
            inputs.insert(p.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        }
        Ok(Config {
            command: command.clone(),
            inputs,
        })
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    VerdictFailure,
    BudgetExhausted,
}

impl Status {
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::VerdictFailure => EXIT_VERDICT,
            Status::BudgetExhausted => EXIT_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: Config,
    pub config_hash: String,
    pub status: Status,
    pub verdict: Value,
    pub counterexamples: Vec<Value>,
    pub notes: Vec<String>,
    pub timings: Timings,
}

impl Report {
    /// The seed- and config-determined part of the report.
    pub fn payload(&self) -> Value {
        json!({
            "status": self.status,
            "verdict": self.verdict,
            "counterexamples": self.counterexamples,
            "notes": self.notes,
        })
    }
}

/// What a command computed, before it is wrapped into a [`Report`].
pub struct Outcome {
    pub status: Status,
    pub verdict: Value,
    pub counterexamples: Vec<Value>,
    pub notes: Vec<String>,
}

impl Outcome {
    fn ok(verdict: Value) -> Self {
        Outcome {
            status: Status::Ok,
            verdict,
            counterexamples: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn judged(pass: bool, verdict: Value) -> Self {
        Outcome {
            status: if pass {
                Status::Ok
            } else {
                Status::VerdictFailure
            },
            ..Outcome::ok(verdict)
        }
    }

    fn budget(verdict: Value) -> Self {
        Outcome {
            status: Status::BudgetExhausted,
            ..Outcome::ok(verdict)
        }
    }
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report values serialize")
}

fn read_bytes(p: &Path) -> Result<Vec<u8>, WorkbenchError> {
    fs::read(p).map_err(|source| WorkbenchError::Io {
        path: p.display().to_string(),
        source,
    })
}

fn read_json<T: for<'de> Deserialize<'de>>(p: &Path) -> Result<T, WorkbenchError> {
    let bytes = read_bytes(p)?;
    let mut v: Value = serde_json::from_slice(&bytes).map_err(|source| WorkbenchError::Parse {
        path: p.display().to_string(),
        source,
    })?;
    strip_format(&mut v).map_err(|m| input(format!("{}: {m}", p.display())))?;
    serde_json::from_value(v).map_err(|source| WorkbenchError::Parse {
        path: p.display().to_string(),
        source,
    })
}

/// Drops a top-level `"format": 1`; other versions are rejected and a
/// missing field is accepted.
fn strip_format(v: &mut Value) -> Result<(), String> {
    if let Value::Object(map) = v {
        match map.remove("format") {
            None => {}
            Some(Value::Number(n)) if n.as_u64() == Some(1) => {}
            Some(other) => return Err(format!("unsupported format {other}")),
        }
    }
    Ok(())
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), WorkbenchError> {
    let io = |source| WorkbenchError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn pretty<T: Serialize>(t: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(t).expect("serializes");
    v.push(b'\n');
    v
}

/// A trace file: a bare trace, with or without `"format": 1`.
pub fn load_trace(p: &Path) -> Result<OracleTrace, WorkbenchError> {
    read_json(p)
}

/// A family file: `{"traces": [...]}`, a bare array, or a single trace.
pub fn load_family(p: &Path) -> Result<EnumFamily, WorkbenchError> {
    let v: Value = read_json(p)?;
    let parse = |v: Value| -> Result<EnumFamily, WorkbenchError> {
        serde_json::from_value(v).map_err(|source| WorkbenchError::Parse {
            path: p.display().to_string(),
            source,
        })
    };
    match v {
        Value::Array(_) => parse(v),
        Value::Object(mut map) if map.contains_key("traces") => {
            parse(map.remove("traces").unwrap())
        }
        single => {
            let t: OracleTrace =
                serde_json::from_value(single).map_err(|source| WorkbenchError::Parse {
                    path: p.display().to_string(),
                    source,
                })?;
            Ok(EnumFamily::new(vec![t]))
        }
    }
}

pub fn trace_json(t: &OracleTrace) -> Value {
    let mut v = to_value(t);
    v.as_object_mut()
        .expect("trace is an object")
        .insert("format".into(), json!(1));
    v
}

pub fn family_json(f: &EnumFamily) -> Value {
    json!({ "format": 1, "traces": f.traces() })
}

fn parse_naturals(s: &str) -> Result<Vec<u64>, WorkbenchError> {
    let t = s.trim();
    if t.starts_with('[') {
        return serde_json::from_str(t).map_err(|e| input(format!("bad set {s:?}: {e}")));
    }
    t.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|e| input(format!("bad element {x:?}: {e}")))
        })
        .collect()
}

fn parse_generator(s: &str) -> Result<Generator, WorkbenchError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |i: usize| -> Result<u64, WorkbenchError> {
        parts
            .get(i)
            .ok_or_else(|| input(format!("generator {s:?} needs more parameters")))?
            .parse()
            .map_err(|e| input(format!("generator {s:?}: {e}")))
    };
    Ok(match parts[0] {
        "constant" => Generator::Constant { color: num(1)? },
        "sum_mod" => Generator::SumMod { modulus: num(1)? },
        "identity" => Generator::Identity,
        "random" => Generator::Random {
            colors: num(1)?,
            seed: num(2)?,
        },
        other => return Err(input(format!("unknown generator {other:?}"))),
    })
}

fn load_coloring(c: &ColoringArgs) -> Result<search::FiniteColoring, WorkbenchError> {
    let mut spec: ColoringSpec = match (&c.coloring, &c.generator) {
        (Some(p), _) => read_json(p)?,
        (None, Some(g)) => ColoringSpec::generated(c.arity, c.universe, parse_generator(g)?),
        (None, None) => return Err(input("either --coloring or --generator is required")),
    };
    if c.palette.is_some() {
        spec.palette = c.palette;
    }
    spec.build().map_err(input)
}

/// Extends every trace to cover the window, noting it when it happens.
fn cover_window(fam: EnumFamily, window: u64, notes: &mut Vec<String>) -> EnumFamily {
    let need = window.saturating_sub(1);
    if !fam.is_empty() && fam.min_horizon() < need {
        notes.push(format!(
            "trace horizons extended from {} to {need}; traces are read as complete",
            fam.min_horizon()
        ));
        fam.with_horizon(need)
    } else {
        fam
    }
}

fn large_error(e: LargenessError) -> Result<Outcome, WorkbenchError> {
    match e {
        LargenessError::Lll(LllError::BudgetExceeded {
            resamples,
            violating,
        }) => Ok(Outcome::budget(json!({
            "resamples": resamples,
            "violating": violating,
        }))),
        LargenessError::AuditFailed(v) => Ok(Outcome {
            counterexamples: v.failures.iter().map(to_value).collect(),
            ..Outcome::judged(false, json!({ "family_audit": v }))
        }),
        other => Err(input(other)),
    }
}

fn gen_trace(rng: &mut ChaCha8Rng, a: &TraceGenArgs) -> Result<OracleTrace, WorkbenchError> {
    let universe = a
        .max_element
        .checked_add(1)
        .ok_or_else(|| input("max element too large"))?;
    if a.count > universe {
        return Err(input(format!(
            "cannot draw {} distinct elements from [0, {}]",
            a.count, a.max_element
        )));
    }
    let mut elements: Vec<u64> = sample(rng, universe as usize, a.count as usize)
        .into_iter()
        .map(|x| x as u64)
        .collect();
    elements.sort_unstable();
    let entries: Vec<(u64, u64)> = elements
        .into_iter()
        .map(|m| (m, rng.gen_range(0..=a.max_stage)))
        .collect();
    let horizon = a.horizon.unwrap_or(a.max_stage).max(a.max_stage);
    OracleTrace::new(horizon, entries).map_err(input)
}

fn trace_listing(t: &OracleTrace) -> Value {
    let mut by_stage: Vec<(u64, u64)> = t.entries().map(|(m, s)| (s, m)).collect();
    by_stage.sort_unstable();
    json!({
        "horizon": t.horizon(),
        "settle_stage": t.settle_stage(),
        "size": t.len(),
        "entries_by_stage": by_stage.iter().map(|&(s, m)| json!([m, s])).collect::<Vec<_>>(),
    })
}

/// Runs one command. Input problems are errors; verdict failures and
/// budget exhaustion are outcomes.
pub fn execute(cmd: &Command) -> Result<Outcome, WorkbenchError> {
    match cmd {
        Command::Trace(TraceCmd::Gen(a)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(&[a.seed]));
            if a.family <= 1 {
                let t = gen_trace(&mut rng, a)?;
                write_atomic(&a.output, &pretty(&trace_json(&t)))?;
                Ok(Outcome::ok(json!({ "trace": trace_listing(&t) })))
            } else {
                let traces = (0..a.family)
                    .map(|_| gen_trace(&mut rng, a))
                    .collect::<Result<Vec<_>, _>>()?;
                let fam = EnumFamily::new(traces);
                write_atomic(&a.output, &pretty(&family_json(&fam)))?;
                Ok(Outcome::ok(json!({
                    "traces": fam.traces().iter().map(trace_listing).collect::<Vec<_>>(),
                })))
            }
        }
        Command::Trace(TraceCmd::Show(a)) => Ok(Outcome::ok(trace_listing(&load_trace(&a.trace)?))),
        Command::Encode(a) => {
            let trace = load_trace(&a.trace)?;
            let y: NumSet =
                serde_json::from_str(&a.set).map_err(|e| input(format!("bad --set: {e}")))?;
            let q = match a.max_terms {
                Some(m) => FsQuery::new(m),
                None => FsQuery::new(y.len().max(1)),
            }
            .map_err(input)?;
            let window = crate::binum::fs_enumerate(&y, &q).map_err(input)?;
            let rows: Vec<Value> = window
                .elements()
                .iter()
                .map(|x| {
                    let c = gap::gap_counts(x, &trace);
                    let color = gap::color_of_count(c.vsg);
                    json!({
                        "x": x,
                        "sg": c.sg,
                        "vsg": c.vsg,
                        "color": color.to_string(),
                        "code": color.encode(),
                    })
                })
                .collect();
            let absence = gap::almost_absence_report(&y, &trace, &q).map_err(input)?;
            Ok(Outcome::ok(json!({ "window": rows, "absence": absence })))
        }
        Command::Decode(a) => {
            let trace = load_trace(&a.trace)?;
            let cand: SolutionCandidate = read_json(&a.candidate)?;
            let q = FsQuery::new(2).map_err(input)?;
            let decoder = match gap::Decoder::new(&cand, &trace, &q) {
                Ok(d) => d,
                Err(gap::GapError::InvalidWindow(v)) => {
                    return Ok(Outcome {
                        counterexamples: v.violations.iter().map(to_value).collect(),
                        ..Outcome::judged(
                            false,
                            json!({ "error": "not a valid solution window", "verdict": v }),
                        )
                    })
                }
                Err(e) => return Err(input(e)),
            };
            let queries: Vec<u64> = if a.n.is_empty() {
                (0..=trace.entries().map(|(m, _)| m).max().unwrap_or(0)).collect()
            } else {
                a.n.clone()
            };
            let mut answers = Vec::new();
            let mut exhausted = Vec::new();
            for &n in &queries {
                match decoder.decode(n) {
                    Ok(b) => answers.push(json!({ "n": n, "member": b })),
                    Err(gap::GapError::WindowExhausted) => exhausted.push(n),
                    Err(e) => return Err(input(e)),
                }
            }
            Ok(Outcome::judged(
                exhausted.is_empty(),
                json!({
                    "candidate_verdict": decoder.verdict,
                    "answers": answers,
                    "window_exhausted": exhausted,
                }),
            ))
        }
        Command::Roundtrip(a) => {
            let trace = load_trace(&a.trace)?;
            let max_n = a
                .max_n
                .unwrap_or_else(|| trace.entries().map(|(m, _)| m).max().unwrap_or(0));
            let cand = gap::harness_candidate(&trace, max_n, a.size.max(2));
            let q = FsQuery::new(2).map_err(input)?;
            let verdict = gap::verify_candidate(&cand, &trace, &q).map_err(input)?;
            let mut mismatches = Vec::new();
            let mut agree = 0u64;
            if verdict.pass {
                let d = gap::Decoder::new(&cand, &trace, &q).map_err(input)?;
                for n in 0..=max_n {
                    let got = d.decode(n).map_err(input)?;
                    if got == trace.contains(n) {
                        agree += 1;
                    } else {
                        mismatches
                            .push(json!({ "n": n, "decoded": got, "actual": trace.contains(n) }));
                    }
                }
            }
            let total = max_n + 1;
            Ok(Outcome {
                counterexamples: mismatches.clone(),
                ..Outcome::judged(
                    verdict.pass && mismatches.is_empty(),
                    json!({
                        "candidate": cand,
                        "candidate_verdict": verdict,
                        "queries": total,
                        "agreements": agree,
                        "agreement_percent": if verdict.pass { 100.0 * agree as f64 / total as f64 } else { 0.0 },
                    }),
                )
            })
        }
        Command::Lll(LllCmd::Audit(a)) => {
            let params = a.lll.params().map_err(input)?;
            let spec: FamilySpec = read_json(&a.family)?;
            let fam = spec.build().map_err(input)?;
            let m_max = fam.sets().iter().map(Vec::len).max().unwrap_or(params.m);
            let n_max = a
                .n_max
                .unwrap_or_else(|| fam.sets().iter().flatten().copied().max().unwrap_or(0));
            let v = lll::occurrence_audit(&fam, &params, m_max, n_max);
            Ok(Outcome {
                counterexamples: v.failures.iter().map(to_value).collect(),
                ..Outcome::judged(v.pass, json!({ "params": params, "audit": v }))
            })
        }
        Command::Lll(LllCmd::Color(a)) => {
            let params = a.lll.params().map_err(input)?;
            let spec: FamilySpec = read_json(&a.family)?;
            let fam = spec.build().map_err(input)?;
            let m_max = fam.sets().iter().map(Vec::len).max().unwrap_or(params.m);
            let audit = lll::occurrence_audit(&fam, &params, m_max, a.frontier.saturating_sub(1));
            if !audit.pass {
                return Ok(Outcome {
                    counterexamples: audit.failures.iter().map(to_value).collect(),
                    ..Outcome::judged(false, json!({ "params": params, "audit": audit }))
                });
            }
            let run = || -> Result<_, LllError> {
                let mut stages = Vec::new();
                let mut prefix = PartialColoring::empty();
                if let Some(f) = a.prefix_frontier {
                    let (c, st) = lll::two_color_with_stats(&fam, &params, &prefix, f)?;
                    stages.push(st);
                    prefix = c;
                }
                let (c, st) = lll::two_color_with_stats(&fam, &params, &prefix, a.frontier)?;
                stages.push(st);
                Ok((prefix, c, stages))
            };
            match run() {
                Err(LllError::BudgetExceeded {
                    resamples,
                    violating,
                }) => Ok(Outcome::budget(
                    json!({ "resamples": resamples, "violating": violating }),
                )),
                Err(e) => Err(input(e)),
                Ok((prefix, coloring, stages)) => {
                    let mono = lll::monochromatic_sets(&fam, &coloring, a.frontier);
                    let kept = coloring.bits().starts_with(prefix.bits());
                    let bits: String = coloring
                        .bits()
                        .iter()
                        .map(|&b| if b { '1' } else { '0' })
                        .collect();
                    Ok(Outcome {
                        counterexamples: mono
                            .iter()
                            .map(|j| json!({ "monochromatic_set": j }))
                            .collect(),
                        ..Outcome::judged(
                            mono.is_empty() && kept,
                            json!({
                                "params": params,
                                "audit": audit,
                                "stages": stages,
                                "prefix_preserved": kept,
                                "coloring": bits,
                            }),
                        )
                    })
                }
            }
        }
        Command::Large(LargeCmd::Split(a)) => {
            let mut notes = Vec::new();
            let fam = cover_window(load_family(&a.traces)?, a.window, &mut notes);
            let params = a.lll.params().map_err(input)?;
            let g = std::sync::Arc::new(largeness::make_g(
                params.m as u64,
                largeness::Pairing::Cantor,
            ));
            let f0 = std::sync::Arc::new(largeness::BinaryFn::Identity);
            let out = match largeness::split(
                &LargeSet::Naturals,
                &f0,
                &g,
                &fam,
                &params,
                a.window,
                a.k_max,
            ) {
                Ok(o) => o,
                Err(e) => return large_error(e),
            };
            let partition = (0..a.window).all(|n| out.d0.contains(n) ^ out.d1.contains(n));
            let mut o = Outcome {
                counterexamples: out.audit.counterexamples.iter().map(to_value).collect(),
                ..Outcome::judged(
                    out.audit.pass && partition,
                    json!({
                        "params": params,
                        "f_hat": out.f_hat.description(),
                        "blocks": out.blocks.len(),
                        "family_audit_cells": out.family_audit.cells_checked,
                        "lll": out.lll,
                        "partition": partition,
                        "largeness": out.audit,
                        "d0": bitmap_to_hex(&out.d0.bitmap(a.window)),
                        "d1": bitmap_to_hex(&out.d1.bitmap(a.window)),
                    }),
                )
            };
            o.notes = notes;
            Ok(o)
        }
        Command::Large(LargeCmd::Iterate(a)) => {
            let mut notes = Vec::new();
            let fam = cover_window(load_family(&a.base.traces)?, a.base.window, &mut notes);
            let params = a.base.lll.params().map_err(input)?;
            let inst = match iterate(a.depth, &fam, &params, a.base.window, a.base.k_max) {
                Ok(i) => i,
                Err(e) => return large_error(e),
            };
            let export = inst.stack.export(fam.len());
            let rebuilt = LayerStack::from_export(&export)
                .map(HardInstance::from_stack)
                .map_err(input)?;
            let recomputed = rebuilt.coloring == inst.coloring;
            let audits_pass = inst.stack.reports.iter().all(|r| r.audit.pass);
            if let Some(p) = &a.export {
                write_atomic(p, &pretty(&export))?;
            }
            let counterexamples = inst
                .stack
                .reports
                .iter()
                .flat_map(|r| r.audit.counterexamples.iter().map(to_value))
                .collect();
            Ok(Outcome {
                counterexamples,
                notes,
                ..Outcome::judged(
                    recomputed && audits_pass,
                    json!({
                        "params": params,
                        "recomputed_from_export": recomputed,
                        "differences": inst.differences,
                        "coloring_sha256": hex::encode(Sha256::digest(
                            serde_json::to_vec(&inst.coloring).expect("serializes"),
                        )),
                        "stack": export,
                    }),
                )
            })
        }
        Command::Large(LargeCmd::Audit(a)) => {
            let export: StackExport =
                serde_json::from_slice(&read_bytes(&a.stack)?).map_err(|source| {
                    WorkbenchError::Parse {
                        path: a.stack.display().to_string(),
                        source,
                    }
                })?;
            let mut notes = Vec::new();
            let fam = cover_window(load_family(&a.traces)?, export.window, &mut notes);
            let inst = HardInstance::from_stack(LayerStack::from_export(&export).map_err(input)?);
            let set = parse_naturals(&a.set)?;
            let v = immunity_audit(&set, a.color, &inst, &fam).map_err(input)?;
            let bad: Vec<Value> = v
                .outcomes
                .iter()
                .filter(|(_, o)| matches!(o, largeness::ImmunityOutcome::Unwitnessed { .. }))
                .map(to_value)
                .collect();
            Ok(Outcome {
                counterexamples: bad,
                notes,
                ..Outcome::judged(v.pass, to_value(&v))
            })
        }
        Command::Search(s) => execute_search(s),
        Command::Replay(a) => replay(a),
    }
}

fn search_outcome<T: Serialize>(searched: search::Searched<T>, checked: Option<bool>) -> Outcome {
    let verdict = json!({
        "outcome": searched.outcome,
        "stats": searched.stats,
        "independent_check": checked,
    });
    match searched.outcome {
        SearchOutcome::Unknown => Outcome::budget(verdict),
        _ => Outcome::judged(checked != Some(false), verdict),
    }
}

fn execute_search(s: &SearchCmd) -> Result<Outcome, WorkbenchError> {
    match s {
        SearchCmd::Thin(a) => {
            let c = load_coloring(&a.coloring)?;
            let r = search::find_thin(&c, a.size, a.budget);
            let checked = r.outcome.found().map(|t| search::check_thin(&c, t));
            Ok(search_outcome(r, checked))
        }
        SearchCmd::Fs(a) => {
            let c = load_coloring(&a.coloring)?;
            let mode = match a.mode {
                ModeArg::Exact2 => FsMode::Exact2,
                ModeArg::Upto => FsMode::Upto { m: a.terms },
                ModeArg::Full => FsMode::Full,
            };
            let goal = match a.goal {
                GoalArg::Thin => FsGoal::Thin,
                GoalArg::Homogeneous => FsGoal::Homogeneous,
            };
            let r = search::find_fs_solution(&c, mode, goal, a.size, a.budget).map_err(input)?;
            let checked = r
                .outcome
                .found()
                .map(|t| search::check_fs_solution(&c, t, mode));
            Ok(search_outcome(r, checked))
        }
        SearchCmd::Simul(a) => {
            let mut cs = Vec::new();
            for p in &a.specs {
                let spec: ColoringSpec = read_json(p)?;
                cs.push(spec.build().map_err(input)?);
            }
            let mut base = None;
            if let Some(n) = a.sums {
                let c = load_coloring(&a.base)?;
                cs.extend(search::sum_colorings(&c, n).map_err(input)?);
                base = Some((c, n));
            }
            let r = search::simultaneous_thin(&cs, a.size, a.budget).map_err(input)?;
            let mut checked = r.outcome.found().map(|t| {
                cs.iter().all(|c| {
                    search::check_thin(c, t) || (c.overflow().is_some() && t.avoided >= c.palette())
                })
            });
            if let (Some((c, n)), Some(t)) = (&base, r.outcome.found()) {
                let sol = search::FsSolution {
                    elements: t.elements.clone(),
                    avoided: Some(t.avoided),
                    color: None,
                };
                checked = Some(
                    checked.unwrap_or(true)
                        && search::check_fs_solution(c, &sol, FsMode::Upto { m: *n }),
                );
            }
            Ok(search_outcome(r, checked))
        }
        SearchCmd::Rrt(a) => {
            let c = load_coloring(&a.coloring)?;
            let r = search::rrt_solve(&c, a.size, a.budget).map_err(input)?;
            let checked = r.outcome.found().map(|set| {
                let mut seen = std::collections::HashSet::new();
                set.iter()
                    .enumerate()
                    .all(|(i, &x)| set[i + 1..].iter().all(|&y| seen.insert(c.eval(&[x, y]))))
            });
            Ok(search_outcome(r, checked))
        }
        SearchCmd::Addlike(a) => {
            let f = search::AdditionLike {
                op: match a.op {
                    OpArg::Add => search::PairOp::Add,
                    OpArg::Max => search::PairOp::Max,
                    OpArg::Mul => search::PairOp::Mul,
                },
                escape_mul: a.escape_mul,
                escape_add: a.escape_add,
                collision_bound: a.b,
            };
            let v = search::addition_like_validate(&f, a.x_max, a.n_max, a.y_max);
            Ok(Outcome {
                counterexamples: v.violations.iter().map(to_value).collect(),
                notes: v.warnings.clone(),
                ..Outcome::judged(v.pass, to_value(&v))
            })
        }
    }
}

fn find_report_by_hash(dir: &Path, hash: &str) -> Result<PathBuf, WorkbenchError> {
    let entries = fs::read_dir(dir).map_err(|source| WorkbenchError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut hits = Vec::new();
    for entry in entries.flatten() {
        let p = entry.path();
        if p.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let Ok(bytes) = fs::read(&p) else { continue };
        let Ok(r) = serde_json::from_slice::<Report>(&bytes) else {
            continue;
        };
        if r.config_hash.starts_with(hash) {
            hits.push(p);
        }
    }
    hits.sort();
    match hits.len() {
        0 => Err(input(format!(
            "no report with config hash {hash} in {}",
            dir.display()
        ))),
        1 => Ok(hits.remove(0)),
        n => Err(input(format!("hash prefix {hash} matches {n} reports"))),
    }
}

fn replay(a: &ReplayArgs) -> Result<Outcome, WorkbenchError> {
    let path = match (&a.report, &a.hash) {
        (Some(p), _) => p.clone(),
        (None, Some(h)) => {
            let dir = a
                .dir
                .clone()
                .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
                .ok_or_else(|| input(format!("--dir or {OUT_DIR_ENV} is required with --hash")))?;
            find_report_by_hash(&dir, h)?
        }
        (None, None) => return Err(input("either --report or --hash is required")),
    };
    let report: Report =
        serde_json::from_slice(&read_bytes(&path)?).map_err(|source| WorkbenchError::Parse {
            path: path.display().to_string(),
            source,
        })?;
    if report.config.hash() != report.config_hash {
        return Err(input("stored config does not match its hash"));
    }
    if matches!(report.config.command, Command::Replay(_)) {
        return Err(input("refusing to replay a replay"));
    }
    let now = Config::for_command(&report.config.command)?;
    if now.inputs != report.config.inputs {
        return Err(input("input files changed since the report was written"));
    }
    let fresh = build_report(&report.config.command)?;
    let same = fresh.payload() == report.payload();
    Ok(Outcome::judged(
        same,
        json!({
            "replayed": path.display().to_string(),
            "config_hash": report.config_hash,
            "identical": same,
        }),
    ))
}

/// Runs a command and wraps the result into a report.
pub fn build_report(cmd: &Command) -> Result<Report, WorkbenchError> {
    let config = Config::for_command(cmd)?;
    let start = Instant::now();
    let out = execute(cmd)?;
    let total_ms = start.elapsed().as_secs_f64() * 1000.0;
    Ok(Report {
        format: 1,
        tool: "thinht".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.name().into(),
        config_hash: config.hash(),
        config,
        status: out.status,
        verdict: out.verdict,
        counterexamples: out.counterexamples,
        notes: out.notes,
        timings: Timings { total_ms },
    })
}

/// Where a report goes: `--out`, else the report directory, else stdout.
fn report_destination(cli_out: Option<&Path>, r: &Report) -> Option<PathBuf> {
    if let Some(p) = cli_out {
        return Some(p.to_path_buf());
    }
    let dir = std::env::var_os(OUT_DIR_ENV)?;
    let stem = r.command.replace(' ', "-");
    Some(PathBuf::from(dir).join(format!("{stem}-{}.json", &r.config_hash[..16])))
}

/// Entry point for the binary; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let pool = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    };
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let result = pool.install(|| build_report(&cli.command));
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    let bytes = pretty(&report);
    match report_destination(cli.out.as_deref(), &report) {
        Some(p) => {
            if let Err(e) = write_atomic(&p, &bytes) {
                eprintln!("error: {e}");
                return EXIT_INPUT;
            }
            eprintln!(
                "{}: {:?}, report {}",
                report.command,
                report.status,
                p.display()
            );
        }
        None => {
            let mut out = std::io::stdout().lock();
            if out.write_all(&bytes).is_err() {
                return EXIT_INPUT;
            }
        }
    }
    report.status.exit_code()
}

/// Convenience for examples: a trace from `(element, stage)` pairs with
/// horizon at the last stage.
pub fn trace_from_pairs(pairs: &[(u64, u64)]) -> Result<OracleTrace, WorkbenchError> {
    let horizon = pairs.iter().map(|&(_, s)| s).max().unwrap_or(0);
    OracleTrace::new(horizon, pairs.iter().copied()).map_err(input)
}

/// `BinNum` from an exponent list; for examples and tests.
pub fn num(exps: &[u64]) -> BinNum {
    BinNum::from_exponents(exps.to_vec()).expect("strictly increasing exponents")
}
