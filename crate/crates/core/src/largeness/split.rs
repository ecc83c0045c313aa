use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BinaryFn, GFunction, LargeSet, LargenessError};
use crate::lll::{
    occurrence_audit, two_color_with_stats, AuditVerdict, ColoringStats, ConstraintFamily,
    LllParams, PartialColoring,
};
use crate::oracle::{approximant, approximant_runs, stable_approximant, EnumFamily};

/// Fallback approximants `[0, n)` above this size are never materialized.
const MAX_MATERIALIZED: u64 = 1 << 24;

fn approximant_size(f: &BinaryFn, g: &GFunction, e: usize, k: u64) -> (u64, u64) {
    let gv = g.eval(e as u64, k);
    let kg = k.saturating_mul(gv);
    (gv, f.eval(e as u64, kg))
}

fn check_size(fam: &EnumFamily, e: usize, n: u64) -> Result<(), LargenessError> {
    let present = fam.trace(e)?.len() as u64;
    if n > present && n > MAX_MATERIALIZED {
        return Err(LargenessError::BadBitmap(format!(
            "approximant of size {n} is too large to materialize"
        )));
    }
    Ok(())
}

/// Whether stage `s` is acceptable for `(e, k)`: `D` meets
/// `s + E^{f(e, k g(e,k))}_e[s]` in at least `k g(e,k)` points, and every
/// earlier shifted approximant overlapping it is the same set.
///
/// This is the literal definition, quadratic in `s`; [`split`] uses
/// [`acceptable_stages`] instead.
pub fn acceptable(
    s: u64,
    e: usize,
    k: u64,
    d: &LargeSet,
    f: &BinaryFn,
    g: &GFunction,
    fam: &EnumFamily,
) -> Result<bool, LargenessError> {
    let (gv, n) = approximant_size(f, g, e, k);
    check_size(fam, e, n)?;
    let kg = k.saturating_mul(gv);
    let here = approximant(fam, e, n as usize, s)?;
    let shifted: BTreeSet<u64> = here.elements.iter().map(|a| s + a).collect();
    if (shifted.iter().filter(|&&x| d.contains(x)).count() as u64) < kg {
        return Ok(false);
    }
    for t in 0..s {
        let before = approximant(fam, e, n as usize, t)?;
        let overlaps = before.elements.iter().any(|b| shifted.contains(&(t + b)));
        if overlaps && !before.same_set(&here) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The `k` consecutive `g(e,k)`-sized chunks of the ascending listing of
/// `D ∩ (s + E)`; elements past the first `k g(e,k)` are unused.
pub fn blocks(
    s: u64,
    e: usize,
    k: u64,
    d: &LargeSet,
    f: &BinaryFn,
    g: &GFunction,
    fam: &EnumFamily,
) -> Result<Vec<Vec<u64>>, LargenessError> {
    if !acceptable(s, e, k, d, f, g, fam)? {
        return Err(LargenessError::NotAcceptable { s, e, k });
    }
    let (gv, n) = approximant_size(f, g, e, k);
    let here = approximant(fam, e, n as usize, s)?;
    let listing: Vec<u64> = here
        .sorted()
        .into_iter()
        .map(|a| s + a)
        .filter(|&x| d.contains(x))
        .take((k * gv) as usize)
        .collect();
    Ok(listing.chunks(gv as usize).map(<[u64]>::to_vec).collect())
}

fn intervals(sorted: &[u64]) -> Vec<(u64, u64)> {
    let mut out: Vec<(u64, u64)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((_, hi)) if *hi + 1 == x => *hi = x,
            _ => out.push((x, x)),
        }
    }
    out
}

/// One constant stretch of `E^n_e[s]`.
struct Run {
    start: u64,
    sorted: Vec<u64>,
    intervals: Vec<(u64, u64)>,
}

/// Prefix counts of `D` over `[0, W)`.
struct Density<'a> {
    d: &'a LargeSet,
    prefix: Vec<u64>,
}

impl<'a> Density<'a> {
    fn new(d: &'a LargeSet, window: u64) -> Self {
        let mut prefix = Vec::with_capacity(window as usize + 1);
        prefix.push(0);
        for n in 0..window {
            prefix.push(prefix[n as usize] + d.contains(n) as u64);
        }
        Density { d, prefix }
    }

    /// `|D ∩ [lo, hi]|`.
    fn count(&self, lo: u64, hi: u64) -> u64 {
        let w = self.prefix.len() as u64 - 1;
        let inside = if lo >= w {
            0
        } else {
            let h = hi.min(w - 1);
            self.prefix[h as usize + 1] - self.prefix[lo as usize]
        };
        let outside = match self.d {
            LargeSet::Naturals if hi >= w => hi - lo.max(w) + 1,
            _ => 0,
        };
        inside + outside
    }
}

struct CellScan {
    k: u64,
    g: u64,
    runs: Vec<Run>,
}

impl CellScan {
    fn new(
        f: &BinaryFn,
        g: &GFunction,
        fam: &EnumFamily,
        e: usize,
        k: u64,
        window: u64,
    ) -> Result<Option<Self>, LargenessError> {
        let (gv, n) = approximant_size(f, g, e, k);
        // A fallback [0, n) with n >= W never fits; skip without building it.
        if n >= window && n > fam.trace(e)?.len() as u64 {
            return Ok(None);
        }
        let runs = approximant_runs(fam, e, n as usize)?
            .into_iter()
            .map(|(start, a)| {
                let sorted = a.sorted();
                Run {
                    start,
                    intervals: intervals(&sorted),
                    sorted,
                }
            })
            .collect();
        Ok(Some(CellScan { k, g: gv, runs }))
    }

    fn run_at(&self, s: u64) -> usize {
        self.runs.partition_point(|r| r.start <= s) - 1
    }

    fn acceptable(&self, s: u64, density: &Density) -> bool {
        let r = self.run_at(s);
        let here = &self.runs[r];
        let kg = self.k.saturating_mul(self.g);
        let hits: u64 = here
            .intervals
            .iter()
            .map(|&(lo, hi)| density.count(s + lo, s + hi))
            .sum();
        if hits < kg {
            return false;
        }
        for (i, before) in self.runs[..=r].iter().enumerate() {
            if before.sorted == here.sorted || before.start >= s {
                continue;
            }
            let t0 = before.start;
            let t1 = match self.runs.get(i + 1) {
                Some(next) => (next.start - 1).min(s - 1),
                None => s - 1,
            };
            // Union over t in [t0, t1] of t + [c, d] is [t0 + c, t1 + d].
            for &(c, dd) in &before.intervals {
                let (lo, hi) = (t0 + c, t1 + dd);
                if hi < s {
                    continue;
                }
                let need = lo.saturating_sub(s);
                let idx = here.sorted.partition_point(|&a| a < need);
                if here.sorted.get(idx).is_some_and(|&a| s + a <= hi) {
                    return false;
                }
            }
        }
        true
    }

    /// First `k g` elements of `D ∩ (s + E[s])`, chunked, if they all lie
    /// below the window.
    fn blocks(&self, s: u64, d: &LargeSet, window: u64) -> Option<Vec<Vec<u64>>> {
        let here = &self.runs[self.run_at(s)];
        let kg = (self.k * self.g) as usize;
        let listing: Vec<u64> = here
            .sorted
            .iter()
            .map(|a| s + a)
            .take_while(|&x| x < window)
            .filter(|&x| d.contains(x))
            .take(kg)
            .collect();
        if listing.len() < kg {
            return None;
        }
        Some(
            listing
                .chunks(self.g as usize)
                .map(<[u64]>::to_vec)
                .collect(),
        )
    }
}

/// Acceptability of every stage in `[0, window)` for `(e, k)`.
pub fn acceptable_stages(
    d: &LargeSet,
    f: &BinaryFn,
    g: &GFunction,
    fam: &EnumFamily,
    e: usize,
    k: u64,
    window: u64,
) -> Result<Vec<bool>, LargenessError> {
    check_horizon(fam, window)?;
    let density = Density::new(d, window);
    let Some(scan) = CellScan::new(f, g, fam, e, k, window)? else {
        return Ok(vec![false; window as usize]);
    };
    Ok((0..window).map(|s| scan.acceptable(s, &density)).collect())
}

fn check_horizon(fam: &EnumFamily, window: u64) -> Result<(), LargenessError> {
    let needed = window.saturating_sub(1);
    if !fam.is_empty() && fam.min_horizon() < needed {
        return Err(LargenessError::HorizonTooShort {
            horizon: fam.min_horizon(),
            needed,
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockTag {
    pub e: usize,
    pub k: u64,
    pub s: u64,
    pub j: u64,
}

/// The blocks `F_{e,k,s,j}` over every acceptable `s` whose blocks fit in
/// the window.
///
/// Sizes identify `(e, k)` through the image of `g`, which is how
/// [`ConstraintFamily::occurrences`] answers a `(m, n)` query.
#[derive(Clone, Debug)]
pub struct BlockFamily {
    min_size: usize,
    g: Arc<GFunction>,
    sets: Vec<Vec<u64>>,
    tags: Vec<BlockTag>,
    index: HashMap<(usize, u64), HashMap<u64, Vec<usize>>>,
}

impl BlockFamily {
    pub fn tags(&self) -> &[BlockTag] {
        &self.tags
    }

    pub fn sets(&self) -> &[Vec<u64>] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    fn push(&mut self, tag: BlockTag, set: Vec<u64>) {
        let j = self.sets.len();
        let cell = self.index.entry((tag.e, tag.k)).or_default();
        for &n in &set {
            cell.entry(n).or_default().push(j);
        }
        self.sets.push(set);
        self.tags.push(tag);
    }
}

impl ConstraintFamily for BlockFamily {
    fn min_size(&self) -> usize {
        self.min_size
    }

    fn enumerate(&self, j: usize) -> Option<&[u64]> {
        self.sets.get(j).map(Vec::as_slice)
    }

    fn occurrences(&self, m: usize, n: u64) -> Vec<usize> {
        let Some((e, k)) = self.g.image_member(m as u64) else {
            return Vec::new();
        };
        self.index
            .get(&(e as usize, k))
            .and_then(|cell| cell.get(&n))
            .cloned()
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellAudit {
    pub e: usize,
    pub k: u64,
    /// `f_hat(e, k)`, the size of the audited approximant.
    pub approximant_size: u64,
    pub fallback: bool,
    pub stable_from: u64,
    /// First audited stage; `None` when no stage fits.
    pub audit_start: Option<u64>,
    pub audited_stages: u64,
    /// Smallest `|D^i ∩ (s + E)|` seen, for `i = 0, 1`.
    pub min_hits: [u64; 2],
    pub blocks: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargenessCounterexample {
    pub e: usize,
    pub k: u64,
    pub s: u64,
    pub half: u8,
    pub hits: u64,
}

/// Windowed check that both halves are `f_hat`-large.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LargenessAudit {
    pub pass: bool,
    pub cells: Vec<CellAudit>,
    pub counterexamples: Vec<LargenessCounterexample>,
}

impl LargenessAudit {
    pub fn cell(&self, e: usize, k: u64) -> Option<&CellAudit> {
        self.cells.iter().find(|c| c.e == e && c.k == k)
    }
}

pub struct SplitOutcome {
    pub f_hat: BinaryFn,
    pub d0: LargeSet,
    pub d1: LargeSet,
    pub coloring: PartialColoring,
    pub blocks: BlockFamily,
    pub family_audit: AuditVerdict,
    pub lll: ColoringStats,
    pub audit: LargenessAudit,
}

/// Blocks per acceptable stage.
type StageBlocks = Vec<(u64, Vec<Vec<u64>>)>;

/// Splits `D` into two `f_hat`-large halves on `[0, window)` by two-coloring
/// the blocks of every `(e, k)` with `e` in the family and `1 <= k <= k_max`.
pub fn split(
    d: &LargeSet,
    f: &Arc<BinaryFn>,
    g: &Arc<GFunction>,
    fam: &EnumFamily,
    params: &LllParams,
    window: u64,
    k_max: u64,
) -> Result<SplitOutcome, LargenessError> {
    check_horizon(fam, window)?;
    if g.min_value() < params.m as u64 {
        return Err(LargenessError::GBelowM {
            g_min: g.min_value(),
            m: params.m,
        });
    }
    let density = Density::new(d, window);
    let cells: Vec<(usize, u64)> = (0..fam.len())
        .flat_map(|e| (1..=k_max).map(move |k| (e, k)))
        .collect();

    let scans: Vec<Option<CellScan>> = cells
        .par_iter()
        .map(|&(e, k)| CellScan::new(f, g, fam, e, k, window))
        .collect::<Result<_, _>>()?;
    let per_cell: Vec<(Vec<bool>, StageBlocks)> = scans
        .par_iter()
        .map(|scan| match scan {
            None => (vec![false; window as usize], Vec::new()),
            Some(scan) => {
                let ok: Vec<bool> = (0..window).map(|s| scan.acceptable(s, &density)).collect();
                let bl = (0..window)
                    .filter(|&s| ok[s as usize])
                    .filter_map(|s| scan.blocks(s, d, window).map(|b| (s, b)))
                    .collect();
                (ok, bl)
            }
        })
        .collect();

    let mut family = BlockFamily {
        min_size: params.m,
        g: Arc::clone(g),
        sets: Vec::new(),
        tags: Vec::new(),
        index: HashMap::new(),
    };
    for (&(e, k), (_, bl)) in cells.iter().zip(&per_cell) {
        for (s, chunks) in bl {
            for (j, set) in chunks.iter().enumerate() {
                family.push(
                    BlockTag {
                        e,
                        k,
                        s: *s,
                        j: j as u64,
                    },
                    set.clone(),
                );
            }
        }
    }

    let m_max = family.sets.iter().map(Vec::len).max().unwrap_or(params.m);
    let family_audit = occurrence_audit(&family, params, m_max, window.saturating_sub(1));
    if !family_audit.pass {
        return Err(LargenessError::AuditFailed(Box::new(family_audit)));
    }
    let (coloring, lll) = two_color_with_stats(&family, params, &PartialColoring::empty(), window)?;

    let mut b0 = vec![false; window as usize];
    let mut b1 = vec![false; window as usize];
    for n in 0..window {
        if d.contains(n) {
            if coloring.get(n) == Some(true) {
                b1[n as usize] = true;
            } else {
                b0[n as usize] = true;
            }
        }
    }
    let d0 = LargeSet::Window(b0);
    let d1 = LargeSet::Window(b1);
    let f_hat = f.hat(g);

    let audits: Vec<(CellAudit, Vec<LargenessCounterexample>)> = cells
        .par_iter()
        .zip(per_cell.par_iter())
        .map(|(&(e, k), (ok, bl))| {
            audit_cell(e, k, &f_hat, fam, window, ok, bl.len() as u64, [&d0, &d1])
        })
        .collect::<Result<_, _>>()?;
    let mut audit = LargenessAudit {
        pass: true,
        cells: Vec::with_capacity(audits.len()),
        counterexamples: Vec::new(),
    };
    for (cell, cex) in audits {
        audit.cells.push(cell);
        audit.counterexamples.extend(cex);
    }
    audit.pass = audit.counterexamples.is_empty();

    Ok(SplitOutcome {
        f_hat,
        d0,
        d1,
        coloring,
        blocks: family,
        family_audit,
        lll,
        audit,
    })
}

#[allow(clippy::too_many_arguments)]
fn audit_cell(
    e: usize,
    k: u64,
    f_hat: &BinaryFn,
    fam: &EnumFamily,
    window: u64,
    acceptable: &[bool],
    blocks: u64,
    halves: [&LargeSet; 2],
) -> Result<(CellAudit, Vec<LargenessCounterexample>), LargenessError> {
    let n = f_hat.eval(e as u64, k);
    let mut cell = CellAudit {
        e,
        k,
        approximant_size: n,
        fallback: true,
        stable_from: 0,
        audit_start: None,
        audited_stages: 0,
        min_hits: [u64::MAX; 2],
        blocks,
    };
    let mut cex = Vec::new();
    if n >= window && n > fam.trace(e)?.len() as u64 {
        cell.min_hits = [0; 2];
        return Ok((cell, cex));
    }
    let (limit, stable_from) = stable_approximant(fam, e, n as usize)?;
    cell.fallback = limit.fallback;
    cell.stable_from = stable_from;
    let sorted = limit.sorted();
    let top = sorted.last().copied().unwrap_or(0);
    if top >= window || stable_from >= window {
        cell.min_hits = [0; 2];
        return Ok((cell, cex));
    }
    let s_max = window - 1 - top;
    if s_max < stable_from || !acceptable[s_max as usize] {
        cell.min_hits = [0; 2];
        return Ok((cell, cex));
    }
    let mut start = s_max;
    while start > stable_from && acceptable[start as usize - 1] {
        start -= 1;
    }
    cell.audit_start = Some(start);
    cell.audited_stages = s_max - start + 1;
    for s in start..=s_max {
        for (i, half) in halves.iter().enumerate() {
            let hits = sorted.iter().filter(|&&a| half.contains(s + a)).count() as u64;
            cell.min_hits[i] = cell.min_hits[i].min(hits);
            if hits < k {
                cex.push(LargenessCounterexample {
                    e,
                    k,
                    s,
                    half: i as u8,
                    hits,
                });
            }
        }
    }
    Ok((cell, cex))
}
