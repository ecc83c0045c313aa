//! Gap counting over a staged oracle, the prime-pair coloring built from it,
//! and the decoder that reads oracle membership off a 2-apart solution.
//!
//! For `x = 2^{n_0} + ... + 2^{n_k}` a consecutive pair `(n_i, n_{i+1})` is
//! *short* when some `m < n_i` is in the final set but not yet in it at stage
//! `n_{i+1}`; it is *very short* when moreover `m` has entered by stage
//! `n_k`. `sg` reads final membership and `vsg` only stages up to `n_k`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::binum::{fs_enumerate, is_two_apart, BinNum, BinumError, FsQuery, NumSet};
use crate::oracle::OracleTrace;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GapError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("color index {j} out of range for prime {p}")]
    IndexOutOfRange { p: u64, j: u64 },
    #[error("window exhausted")]
    WindowExhausted,
    #[error("not a valid solution window")]
    InvalidWindow(Box<Verdict>),
    #[error(transparent)]
    Binum(#[from] BinumError),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn next_prime(n: u64) -> u64 {
    let mut p = n + 1;
    while !is_prime(p) {
        p += 1;
    }
    p
}

/// A color `(p, i)` with `p` prime and `1 <= i < p`, or the reserved
/// `Bottom` for numbers with no very short gaps.
///
/// `vsg = 0` is divisible by every prime, so the least-non-divisor rule is
/// undefined there. `Bottom` plays the role of `(p, 0)` for every `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PrimePairColor {
    Bottom,
    Pair { p: u64, i: u64 },
}

impl PrimePairColor {
    pub fn pair(p: u64, i: u64) -> Result<Self, GapError> {
        if !is_prime(p) {
            return Err(GapError::NotPrime(p));
        }
        if i == 0 || i >= p {
            return Err(GapError::IndexOutOfRange { p, j: i });
        }
        Ok(PrimePairColor::Pair { p, i })
    }

    /// Bottom is 0; pairs follow ordered by `p` then `i`, starting at 1.
    pub fn encode(&self) -> u64 {
        match *self {
            PrimePairColor::Bottom => 0,
            PrimePairColor::Pair { p, i } => {
                let mut code = 1;
                let mut q = 2;
                while q < p {
                    code += q - 1;
                    q = next_prime(q);
                }
                code + i - 1
            }
        }
    }

    pub fn decode(code: u64) -> Self {
        if code == 0 {
            return PrimePairColor::Bottom;
        }
        let mut rest = code - 1;
        let mut p = 2;
        while rest >= p - 1 {
            rest -= p - 1;
            p = next_prime(p);
        }
        PrimePairColor::Pair { p, i: rest + 1 }
    }

    pub fn prime(&self) -> Option<u64> {
        match *self {
            PrimePairColor::Bottom => None,
            PrimePairColor::Pair { p, .. } => Some(p),
        }
    }
}

impl std::fmt::Display for PrimePairColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PrimePairColor::Bottom => write!(f, "bottom"),
            PrimePairColor::Pair { p, i } => write!(f, "({p},{i})"),
        }
    }
}

pub fn color_codec(c: PrimePairColor) -> u64 {
    c.encode()
}

pub fn color_from_code(code: u64) -> PrimePairColor {
    PrimePairColor::decode(code)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gap {
    pub lo: u64,
    pub hi: u64,
    pub is_short: bool,
    pub is_very_short: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapCounts {
    pub sg: u64,
    pub vsg: u64,
    pub gaps: Vec<Gap>,
}

pub fn gap_counts(x: &BinNum, trace: &OracleTrace) -> GapCounts {
    let top = x.mu();
    let gaps: Vec<Gap> = x
        .exponents()
        .windows(2)
        .map(|w| {
            let (lo, hi) = (w[0], w[1]);
            let late = |m: &u64| trace.contains(*m) && !trace.member_settled(*m, hi);
            let is_short = (0..lo).any(|m| late(&m));
            let is_very_short =
                is_short && (0..lo).any(|m| late(&m) && trace.member_settled(m, top));
            Gap {
                lo,
                hi,
                is_short,
                is_very_short,
            }
        })
        .collect();
    GapCounts {
        sg: gaps.iter().filter(|g| g.is_short).count() as u64,
        vsg: gaps.iter().filter(|g| g.is_very_short).count() as u64,
        gaps,
    }
}

pub fn sg(x: &BinNum, trace: &OracleTrace) -> u64 {
    gap_counts(x, trace).sg
}

pub fn vsg(x: &BinNum, trace: &OracleTrace) -> u64 {
    gap_counts(x, trace).vsg
}

/// Color of a number whose very-short-gap count is `vsg`.
pub fn color_of_count(vsg: u64) -> PrimePairColor {
    if vsg == 0 {
        return PrimePairColor::Bottom;
    }
    let mut p = 2;
    while vsg.is_multiple_of(p) {
        p = next_prime(p);
    }
    PrimePairColor::Pair { p, i: vsg % p }
}

pub fn encode_color(x: &BinNum, trace: &OracleTrace) -> PrimePairColor {
    color_of_count(vsg(x, trace))
}

/// `x` has color `(p, j)`. For `j` in `{0, p}` this means every prime up
/// to `p` divides `vsg(x)`.
pub fn has_color(x: &BinNum, trace: &OracleTrace, p: u64, j: u64) -> Result<bool, GapError> {
    has_color_count(vsg(x, trace), p, j)
}

fn has_color_count(vsg: u64, p: u64, j: u64) -> Result<bool, GapError> {
    if !is_prime(p) {
        return Err(GapError::NotPrime(p));
    }
    if j > p {
        return Err(GapError::IndexOutOfRange { p, j });
    }
    if j == 0 || j == p {
        let mut q = 2;
        while q <= p {
            if !vsg.is_multiple_of(q) {
                return Ok(false);
            }
            q = next_prime(q);
        }
        return Ok(true);
    }
    Ok(color_of_count(vsg) == PrimePairColor::Pair { p, i: j })
}

/// A claimed solution: a 2-apart `y`, the avoided color's code, and how many
/// leading elements to discard.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCandidate {
    #[serde(rename = "Y")]
    pub y: NumSet,
    pub witness: u64,
    pub trim: usize,
}

impl SolutionCandidate {
    pub fn trimmed(&self) -> NumSet {
        self.y.without_prefix(self.trim)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorStat {
    pub count: u64,
    pub max_lambda: u64,
}

impl ColorStat {
    fn merge(&mut self, other: &ColorStat) {
        self.count += other.count;
        self.max_lambda = self.max_lambda.max(other.max_lambda);
    }
}

/// Per-color counts and largest `lambda` over a finite-sums window.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsenceReport {
    pub window_size: u64,
    /// Keyed by color code.
    pub colors: BTreeMap<u64, ColorStat>,
    /// Numbers having color `(p, 0)`, keyed by `p`, for primes up to the
    /// largest prime seen (at least 2).
    pub zero_buckets: BTreeMap<u64, ColorStat>,
}

pub fn almost_absence_report(
    y: &NumSet,
    trace: &OracleTrace,
    q: &FsQuery,
) -> Result<AbsenceReport, GapError> {
    if y.is_empty() {
        return Ok(AbsenceReport::default());
    }
    let window = fs_enumerate(y, q)?;
    let tagged: Vec<(u64, u64)> = window
        .elements()
        .par_iter()
        .map(|x| (vsg(x, trace), x.lambda()))
        .collect();
    let mut report = AbsenceReport {
        window_size: tagged.len() as u64,
        ..Default::default()
    };
    for &(count, lambda) in &tagged {
        let stat = ColorStat {
            count: 1,
            max_lambda: lambda,
        };
        report
            .colors
            .entry(color_of_count(count).encode())
            .or_default()
            .merge(&stat);
    }
    let top_prime = report
        .colors
        .keys()
        .filter_map(|&c| PrimePairColor::decode(c).prime())
        .max()
        .unwrap_or(2);
    let mut p = 2;
    while p <= top_prime {
        let mut bucket = ColorStat::default();
        for &(count, lambda) in &tagged {
            if has_color_count(count, p, 0)? {
                bucket.merge(&ColorStat {
                    count: 1,
                    max_lambda: lambda,
                });
            }
        }
        report.zero_buckets.insert(p, bucket);
        p = next_prime(p);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NotTwoApart { index: usize },
    WitnessNotPair { witness: u64 },
    WitnessAttained { element: BinNum },
    SgNotDivisible { element: BinNum, sg: u64, p: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub window_size: u64,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

/// Checks a candidate on the `q` window of its trimmed set: 2-apartness,
/// absence of the witness color, and `p | sg(x)` for the witness prime.
pub fn verify_candidate(
    cand: &SolutionCandidate,
    trace: &OracleTrace,
    q: &FsQuery,
) -> Result<Verdict, GapError> {
    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    if let Some(i) = cand
        .y
        .elements()
        .windows(2)
        .position(|w| w[0].mu() >= w[1].lambda())
    {
        violations.push(Violation::NotTwoApart { index: i + 1 });
    }
    let witness = PrimePairColor::decode(cand.witness);
    let p = witness.prime();
    if p.is_none() {
        violations.push(Violation::WitnessNotPair {
            witness: cand.witness,
        });
    }
    let y = cand.trimmed();
    let mut window_size = 0;
    if y.is_empty() {
        warnings.push("empty window: passes vacuously".to_string());
    } else {
        let window = fs_enumerate(&y, q)?;
        window_size = window.len() as u64;
        let found: Vec<Violation> = window
            .elements()
            .par_iter()
            .flat_map_iter(|x| {
                let counts = gap_counts(x, trace);
                let mut v = Vec::new();
                if p.is_some() && color_of_count(counts.vsg) == witness {
                    v.push(Violation::WitnessAttained { element: x.clone() });
                }
                if let Some(p) = p {
                    if !counts.sg.is_multiple_of(p) {
                        v.push(Violation::SgNotDivisible {
                            element: x.clone(),
                            sg: counts.sg,
                            p,
                        });
                    }
                }
                v
            })
            .collect();
        violations.extend(found);
    }
    Ok(Verdict {
        pass: violations.is_empty(),
        window_size,
        violations,
        warnings,
    })
}

/// Least trim in `0..=|Y|-2` for which `p | sg` holds on the whole window.
pub fn find_trim(
    cand: &SolutionCandidate,
    trace: &OracleTrace,
    q: &FsQuery,
) -> Result<Option<usize>, GapError> {
    let Some(p) = PrimePairColor::decode(cand.witness).prime() else {
        return Ok(None);
    };
    let last = cand.y.len().saturating_sub(2);
    for trim in 0..=last {
        let y = cand.y.without_prefix(trim);
        if y.is_empty() {
            return Ok(Some(trim));
        }
        let window = fs_enumerate(&y, q)?;
        if window
            .elements()
            .par_iter()
            .all(|x| sg(x, trace).is_multiple_of(p))
        {
            return Ok(Some(trim));
        }
    }
    Ok(None)
}

/// Recovers membership of `n` from a verified candidate: take the first
/// `x < y` in the trimmed set with `n < mu(x)` and read stage `lambda(y)`.
pub struct Decoder<'a> {
    y: NumSet,
    trace: &'a OracleTrace,
    pub verdict: Verdict,
}

impl<'a> Decoder<'a> {
    /// Verifies on the `q` window first; a failing verdict is an error.
    pub fn new(
        cand: &SolutionCandidate,
        trace: &'a OracleTrace,
        q: &FsQuery,
    ) -> Result<Self, GapError> {
        let verdict = verify_candidate(cand, trace, q)?;
        if !verdict.pass {
            return Err(GapError::InvalidWindow(Box::new(verdict)));
        }
        Ok(Decoder {
            y: cand.trimmed(),
            trace,
            verdict,
        })
    }

    /// The pair `(x, y)` the decoder reads for `n`.
    pub fn pair_for(&self, n: u64) -> Result<(&BinNum, &BinNum), GapError> {
        let elems = self.y.elements();
        let i = elems
            .iter()
            .position(|x| n < x.mu())
            .ok_or(GapError::WindowExhausted)?;
        match elems.get(i + 1) {
            Some(y) => Ok((&elems[i], y)),
            None => Err(GapError::WindowExhausted),
        }
    }

    pub fn decode(&self, n: u64) -> Result<bool, GapError> {
        let (_, y) = self.pair_for(n)?;
        Ok(self.trace.member_settled(n, y.lambda()))
    }
}

/// Decodes `n`, verifying on the pair-sum window (sums of at most two
/// elements), which covers every number the decoder's argument inspects.
pub fn decode_membership(
    n: u64,
    cand: &SolutionCandidate,
    trace: &OracleTrace,
) -> Result<bool, GapError> {
    let q = FsQuery::new(2)?;
    Decoder::new(cand, trace, &q)?.decode(n)
}

/// A candidate whose elements all sit above the trace's settle stage and
/// above `max_query`, so every gap is long and decoding is exact for all
/// `n <= max_query`.
pub fn harness_candidate(trace: &OracleTrace, max_query: u64, size: usize) -> SolutionCandidate {
    let base = trace.settle_stage().max(max_query) + 1;
    let elements = (0..size as u64)
        .map(|i| {
            let lo = base + 3 * i;
            BinNum::from_exponents(vec![lo, lo + 1]).expect("increasing")
        })
        .collect();
    let y = NumSet::new(elements);
    debug_assert!(is_two_apart(&y));
    SolutionCandidate {
        y,
        witness: PrimePairColor::Pair { p: 2, i: 1 }.encode(),
        trim: 0,
    }
}
