//! Two-coloring sparse families of finite sets so that no set is
//! monochromatic, one committed prefix at a time.
//!
//! The coloring is produced by Moser–Tardos resampling restricted to the
//! uncommitted variables. Violated sets are picked by least index and the
//! random stream is seeded from the parameters and the frontier pair, so a
//! call is a pure function of its inputs.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::mix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LllError {
    #[error("q must lie strictly between 0 and 1, got {0}")]
    BadQ(Ratio),
    #[error("M = {given} is below the minimum {required} for q = {q}")]
    MTooSmall {
        given: usize,
        required: usize,
        q: Ratio,
    },
    #[error("resample budget must be positive")]
    ZeroBudget,
    #[error("budget exceeded ({resamples} resamples); violating sets {violating:?}")]
    BudgetExceeded {
        resamples: u64,
        violating: Vec<usize>,
    },
    #[error("set {0} is monochromatic inside the committed prefix")]
    CommittedConflict(usize),
    #[error("new frontier {new} is below the committed frontier {old}")]
    FrontierRegression { old: u64, new: u64 },
    #[error("set {index} has size {size}, below the minimum {min_size}")]
    SetTooSmall {
        index: usize,
        size: usize,
        min_size: usize,
    },
    #[error("malformed ratio {0:?}")]
    BadRatio(String),
}

/// A positive rational `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub const HALF: Ratio = Ratio { num: 1, den: 2 };

    pub fn new(num: u64, den: u64) -> Result<Self, LllError> {
        let r = Ratio { num, den };
        if den == 0 || num == 0 || num >= den {
            return Err(LllError::BadQ(r));
        }
        Ok(r)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `count <= 2^{q m}`, decided as `log2(count) * den <= num * m`.
    ///
    /// `log2` is exact on powers of two, the only counts that can tie.
    pub fn within_pow2(&self, count: usize, m: usize) -> bool {
        if count <= 1 {
            return true;
        }
        (count as f64).log2() * self.den as f64 <= (self.num as f64) * m as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl std::str::FromStr for Ratio {
    type Err = LllError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || LllError::BadRatio(s.to_string());
        let (a, b) = s.split_once('/').ok_or_else(bad)?;
        let num = a.trim().parse().map_err(|_| bad())?;
        let den = b.trim().parse().map_err(|_| bad())?;
        Ratio::new(num, den)
    }
}

/// A finite materialization of an enumerable family of sets, with the
/// occurrence procedure listing the sets of a given size through a point.
pub trait ConstraintFamily: Sync {
    fn min_size(&self) -> usize;

    /// Set `j`, or `None` past the end of the materialized family.
    fn enumerate(&self, j: usize) -> Option<&[u64]>;

    /// Indices `j` with `|F_j| = m` and `n` in `F_j`, ascending.
    fn occurrences(&self, m: usize, n: u64) -> Vec<usize>;

    fn iter_sets(&self) -> FamilyIter<'_, Self>
    where
        Self: Sized,
    {
        FamilyIter { fam: self, next: 0 }
    }
}

pub struct FamilyIter<'a, F> {
    fam: &'a F,
    next: usize,
}

impl<'a, F: ConstraintFamily> Iterator for FamilyIter<'a, F> {
    type Item = (usize, &'a [u64]);
    fn next(&mut self) -> Option<Self::Item> {
        let s = self.fam.enumerate(self.next)?;
        self.next += 1;
        Some((self.next - 1, s))
    }
}

/// An explicit list of sets with a `(size, element)` index.
#[derive(Clone, Debug, Default)]
pub struct ExplicitFamily {
    min_size: usize,
    sets: Vec<Vec<u64>>,
    index: HashMap<(usize, u64), Vec<usize>>,
}

impl ExplicitFamily {
    /// Sets are sorted and deduplicated; each must have at least `min_size`
    /// elements.
    pub fn new(min_size: usize, sets: Vec<Vec<u64>>) -> Result<Self, LllError> {
        let mut fam = ExplicitFamily {
            min_size,
            sets: Vec::with_capacity(sets.len()),
            index: HashMap::new(),
        };
        for s in sets {
            fam.push(s)?;
        }
        Ok(fam)
    }

    pub fn push(&mut self, mut set: Vec<u64>) -> Result<usize, LllError> {
        set.sort_unstable();
        set.dedup();
        let j = self.sets.len();
        if set.len() < self.min_size {
            return Err(LllError::SetTooSmall {
                index: j,
                size: set.len(),
                min_size: self.min_size,
            });
        }
        for &n in &set {
            self.index.entry((set.len(), n)).or_default().push(j);
        }
        self.sets.push(set);
        Ok(j)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }
}

impl ConstraintFamily for ExplicitFamily {
    fn min_size(&self) -> usize {
        self.min_size
    }

    fn enumerate(&self, j: usize) -> Option<&[u64]> {
        self.sets.get(j).map(Vec::as_slice)
    }

    fn occurrences(&self, m: usize, n: u64) -> Vec<usize> {
        self.index.get(&(m, n)).cloned().unwrap_or_default()
    }
}

/// Wire form of an explicit family: `{"min_size": M, "sets": [[...], ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub min_size: usize,
    pub sets: Vec<Vec<u64>>,
}

impl FamilySpec {
    pub fn build(&self) -> Result<ExplicitFamily, LllError> {
        ExplicitFamily::new(self.min_size, self.sets.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LllParams {
    pub q: Ratio,
    pub m: usize,
    pub resample_budget: u64,
    pub seed: u64,
}

impl LllParams {
    pub fn new(q: Ratio, m: usize, resample_budget: u64, seed: u64) -> Result<Self, LllError> {
        let q = Ratio::new(q.num, q.den)?;
        let required = choose_m(q);
        if m < required {
            return Err(LllError::MTooSmall {
                given: m,
                required,
                q,
            });
        }
        if resample_budget == 0 {
            return Err(LllError::ZeroBudget);
        }
        Ok(LllParams {
            q,
            m,
            resample_budget,
            seed,
        })
    }

    /// `q`, the least admissible `M`, and the given budget and seed.
    pub fn minimal(q: Ratio, resample_budget: u64, seed: u64) -> Result<Self, LllError> {
        let q = Ratio::new(q.num, q.den)?;
        LllParams::new(q, choose_m(q), resample_budget, seed)
    }
}

fn lll_lhs(q: f64, m: usize) -> f64 {
    let m = m as f64;
    // e * 2^{1-m} * (m 2^{qm} + 1), in log space.
    let ln2 = std::f64::consts::LN_2;
    let log_inner = (m.ln() + q * m * ln2).max(0.0) + (1.0 + (-(m.ln() + q * m * ln2)).exp()).ln();
    (1.0 + (1.0 - m) * ln2 + log_inner).exp()
}

/// Least `m0` with `e * 2^{1-m} * (m * 2^{qm} + 1) <= 1` for every `m >= m0`.
///
/// A set of size `m` is monochromatic with probability `2^{1-m}`; each of
/// its `m` points meets at most `2^{qm}` same-size sets. Past
/// `1 / ((1-q) ln 2)` the left side is decreasing, so the scan stops at the
/// first holding `m` beyond that point.
pub fn choose_m(q: Ratio) -> usize {
    let qf = q.as_f64();
    let peak = (1.0 / ((1.0 - qf) * std::f64::consts::LN_2)).ceil() as usize;
    let mut last_fail = 0;
    let mut m = 1;
    loop {
        if lll_lhs(qf, m) > 1.0 {
            last_fail = m;
        } else if m > peak {
            break;
        }
        m += 1;
    }
    last_fail + 1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AuditFailure {
    /// More than `2^{qm}` size-`m` sets through `n`.
    TooDense { m: usize, n: u64, count: usize },
    /// The occurrence procedure disagrees with the enumeration.
    Mismatch {
        m: usize,
        n: u64,
        listed: Vec<usize>,
        enumerated: Vec<usize>,
    },
    /// A set is smaller than the declared minimum.
    Undersized { index: usize, size: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditVerdict {
    pub pass: bool,
    pub cells_checked: u64,
    pub failures: Vec<AuditFailure>,
}

/// Checks, for `M <= m <= m_max` and `n <= n_max`, the `2^{qm}` density
/// bound and that `occurrences(m, n)` matches an enumeration scan.
pub fn occurrence_audit<F: ConstraintFamily>(
    fam: &F,
    params: &LllParams,
    m_max: usize,
    n_max: u64,
) -> AuditVerdict {
    let mut failures = Vec::new();
    let mut scanned: HashMap<(usize, u64), Vec<usize>> = HashMap::new();
    for (j, set) in fam.iter_sets() {
        if set.len() < fam.min_size().max(params.m) {
            failures.push(AuditFailure::Undersized {
                index: j,
                size: set.len(),
            });
        }
        if set.len() > m_max {
            continue;
        }
        for &n in set.iter().filter(|&&n| n <= n_max) {
            scanned.entry((set.len(), n)).or_default().push(j);
        }
    }
    let lo = params.m;
    let cells: Vec<(usize, u64)> = (lo..=m_max)
        .flat_map(|m| (0..=n_max).map(move |n| (m, n)))
        .collect();
    let cell_failures: Vec<AuditFailure> = cells
        .par_iter()
        .flat_map_iter(|&(m, n)| {
            let mut out = Vec::new();
            let mut listed = fam.occurrences(m, n);
            listed.sort_unstable();
            let enumerated = scanned.get(&(m, n)).cloned().unwrap_or_default();
            if listed != enumerated {
                out.push(AuditFailure::Mismatch {
                    m,
                    n,
                    listed: listed.clone(),
                    enumerated,
                });
            }
            if !params.q.within_pow2(listed.len(), m) {
                out.push(AuditFailure::TooDense {
                    m,
                    n,
                    count: listed.len(),
                });
            }
            out
        })
        .collect();
    failures.extend(cell_failures);
    AuditVerdict {
        pass: failures.is_empty(),
        cells_checked: cells.len() as u64,
        failures,
    }
}

/// Colors committed on `[0, frontier)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialColoring {
    bits: Vec<bool>,
}

impl PartialColoring {
    pub fn empty() -> Self {
        PartialColoring::default()
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        PartialColoring { bits }
    }

    pub fn frontier(&self) -> u64 {
        self.bits.len() as u64
    }

    pub fn get(&self, n: u64) -> Option<bool> {
        self.bits.get(n as usize).copied()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

/// Statistics of one extension.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringStats {
    pub active_sets: u64,
    pub resamples: u64,
}

/// Extends `prefix` to `[0, new_frontier)` so that no set lying inside the
/// new frontier is monochromatic. Committed bits never change.
pub fn two_color<F: ConstraintFamily>(
    fam: &F,
    params: &LllParams,
    prefix: &PartialColoring,
    new_frontier: u64,
) -> Result<PartialColoring, LllError> {
    two_color_with_stats(fam, params, prefix, new_frontier).map(|(c, _)| c)
}

pub fn two_color_with_stats<F: ConstraintFamily>(
    fam: &F,
    params: &LllParams,
    prefix: &PartialColoring,
    new_frontier: u64,
) -> Result<(PartialColoring, ColoringStats), LllError> {
    let old = prefix.frontier();
    if new_frontier < old {
        return Err(LllError::FrontierRegression {
            old,
            new: new_frontier,
        });
    }
    let active: Vec<(usize, &[u64])> = fam
        .iter_sets()
        .filter(|(_, s)| s.last().is_some_and(|&mx| mx < new_frontier))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(mix(&[params.seed, old, new_frontier]));
    let mut bits = prefix.bits.clone();
    bits.extend((old..new_frontier).map(|_| rng.gen::<bool>()));

    let mut by_var: HashMap<u64, Vec<usize>> = HashMap::new();
    for (slot, (_, set)) in active.iter().enumerate() {
        for &n in set.iter().filter(|&&n| n >= old) {
            by_var.entry(n).or_default().push(slot);
        }
    }
    let mono = |bits: &[bool], set: &[u64]| {
        let first = bits[set[0] as usize];
        set.iter().all(|&n| bits[n as usize] == first)
    };

    // Keyed by slot; slots follow family index order.
    let mut violated: BTreeSet<usize> = BTreeSet::new();
    for (slot, (j, set)) in active.iter().enumerate() {
        if mono(&bits, set) {
            if set.iter().all(|&n| n < old) {
                return Err(LllError::CommittedConflict(*j));
            }
            violated.insert(slot);
        }
    }

    let mut resamples = 0u64;
    while let Some(&slot) = violated.iter().next() {
        if resamples >= params.resample_budget {
            return Err(LllError::BudgetExceeded {
                resamples,
                violating: violated.iter().map(|&s| active[s].0).collect(),
            });
        }
        resamples += 1;
        let set = active[slot].1;
        for &n in set.iter().filter(|&&n| n >= old) {
            bits[n as usize] = rng.gen();
        }
        violated.remove(&slot);
        for &n in set.iter().filter(|&&n| n >= old) {
            for &other in &by_var[&n] {
                if mono(&bits, active[other].1) {
                    violated.insert(other);
                } else {
                    violated.remove(&other);
                }
            }
        }
    }
    Ok((
        PartialColoring { bits },
        ColoringStats {
            active_sets: active.len() as u64,
            resamples,
        },
    ))
}

/// Sets inside `[0, frontier)` that are monochromatic under `coloring`.
/// Shares nothing with the resampler.
pub fn monochromatic_sets<F: ConstraintFamily>(
    fam: &F,
    coloring: &PartialColoring,
    frontier: u64,
) -> Vec<usize> {
    fam.iter_sets()
        .filter(|(_, s)| !s.is_empty() && s.iter().all(|&n| n < frontier))
        .filter(|(_, s)| {
            let colors: BTreeSet<bool> = s.iter().filter_map(|&n| coloring.get(n)).collect();
            colors.len() < 2
        })
        .map(|(j, _)| j)
        .collect()
}
