use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::split::{split, LargenessAudit};
use super::{
    bitmap_from_hex, bitmap_to_hex, make_g, BinaryFn, FnTable, GFunction, LargeSet, LargenessError,
    Pairing,
};
use crate::lll::{ColoringStats, LllParams};
use crate::oracle::{stable_approximant, EnumFamily};
use crate::seed::mix;

/// What one split did.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub seed: u64,
    pub blocks: u64,
    pub family_cells_checked: u64,
    pub lll: ColoringStats,
    pub audit: LargenessAudit,
}

/// `D_0 = N ⊇ D_1 ⊇ ... ⊇ D_depth` with `D_i = D_i^0 ⊔ D_{i+1}` on the
/// window, and `D_i` being `f_i`-large.
#[derive(Clone, Debug)]
pub struct LayerStack {
    pub depth: usize,
    pub window: u64,
    pub k_max: u64,
    pub g: Arc<GFunction>,
    pub layers: Vec<LargeSet>,
    pub zero_halves: Vec<LargeSet>,
    pub fns: Vec<Arc<BinaryFn>>,
    pub reports: Vec<LevelReport>,
}

impl LayerStack {
    /// `c(x) = max { n <= min(x, depth) : x ∈ D_n }`.
    pub fn color(&self, x: u64) -> u64 {
        let top = (x.min(self.depth as u64)) as usize;
        (0..=top)
            .rev()
            .find(|&n| self.layers[n].contains(x))
            .unwrap_or(0) as u64
    }

    /// Level whose largeness guarantees color `n`: `min(n + 1, depth)`.
    pub fn guarantee_level(&self, n: u64) -> usize {
        (n as usize + 1).min(self.depth)
    }

    pub fn export(&self, e_count: usize) -> StackExport {
        let map = |sets: &[LargeSet]| {
            sets.iter()
                .enumerate()
                .map(|(level, d)| LayerExport {
                    level,
                    members: bitmap_to_hex(&d.bitmap(self.window)),
                })
                .collect()
        };
        StackExport {
            format: 1,
            window: self.window,
            depth: self.depth,
            k_max: self.k_max,
            m: self.g.min_value(),
            pairing: self.g.pairing(),
            layers: map(&self.layers),
            zero_halves: map(&self.zero_halves),
            f_tables: self
                .fns
                .iter()
                .map(|f| FnTable::of(f, e_count, self.k_max))
                .collect(),
            reports: self.reports.clone(),
        }
    }

    pub fn from_export(x: &StackExport) -> Result<Self, LargenessError> {
        if x.format != 1 {
            return Err(LargenessError::Format(x.format));
        }
        if x.layers.len() != x.depth + 1 || x.zero_halves.len() != x.depth {
            return Err(LargenessError::BadBitmap(
                "layer count does not match depth".into(),
            ));
        }
        let read =
            |l: &LayerExport| bitmap_from_hex(&l.members, x.window as usize).map(LargeSet::Window);
        let mut layers = x.layers.iter().map(read).collect::<Result<Vec<_>, _>>()?;
        // D_0 is all of N; keep it unbounded.
        layers[0] = LargeSet::Naturals;
        let zero_halves = x
            .zero_halves
            .iter()
            .map(read)
            .collect::<Result<Vec<_>, _>>()?;
        let g = Arc::new(make_g(x.m, x.pairing));
        let mut fns = vec![Arc::new(BinaryFn::Identity)];
        for _ in 0..x.depth {
            let next = fns.last().unwrap().hat(&g);
            fns.push(Arc::new(next));
        }
        Ok(LayerStack {
            depth: x.depth,
            window: x.window,
            k_max: x.k_max,
            g,
            layers,
            zero_halves,
            fns,
            reports: x.reports.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerExport {
    pub level: usize,
    /// Hex bitmap over the window, see [`bitmap_to_hex`].
    pub members: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackExport {
    pub format: u32,
    pub window: u64,
    pub depth: usize,
    pub k_max: u64,
    pub m: u64,
    pub pairing: Pairing,
    pub layers: Vec<LayerExport>,
    pub zero_halves: Vec<LayerExport>,
    pub f_tables: Vec<FnTable>,
    pub reports: Vec<LevelReport>,
}

/// The layered coloring on `[0, window)`.
#[derive(Clone, Debug)]
pub struct HardInstance {
    pub stack: LayerStack,
    pub coloring: Vec<u64>,
    /// `c^{-1}(n) Δ D_n^0` for `n < depth`, within the window.
    pub differences: Vec<Vec<u64>>,
}

impl HardInstance {
    pub fn from_stack(stack: LayerStack) -> Self {
        let coloring: Vec<u64> = (0..stack.window).map(|x| stack.color(x)).collect();
        let differences = (0..stack.depth)
            .map(|n| {
                (0..stack.window)
                    .filter(|&x| {
                        (coloring[x as usize] == n as u64) != stack.zero_halves[n].contains(x)
                    })
                    .collect()
            })
            .collect();
        HardInstance {
            stack,
            coloring,
            differences,
        }
    }

    pub fn color(&self, x: u64) -> Option<u64> {
        self.coloring.get(x as usize).copied()
    }
}

/// Splits `depth` times starting from `D_0 = N`, `f_0(e,k) = k`, with `g`
/// built from `params.m`.
pub fn iterate(
    depth: usize,
    fam: &EnumFamily,
    params: &LllParams,
    window: u64,
    k_max: u64,
) -> Result<HardInstance, LargenessError> {
    let g = Arc::new(make_g(params.m as u64, Pairing::Cantor));
    iterate_with_g(depth, fam, params, window, k_max, g)
}

pub fn iterate_with_g(
    depth: usize,
    fam: &EnumFamily,
    params: &LllParams,
    window: u64,
    k_max: u64,
    g: Arc<GFunction>,
) -> Result<HardInstance, LargenessError> {
    if depth == 0 {
        return Err(LargenessError::ZeroDepth);
    }
    let mut layers = vec![LargeSet::Naturals];
    let mut zero_halves = Vec::with_capacity(depth);
    let mut fns = vec![Arc::new(BinaryFn::Identity)];
    let mut reports = Vec::with_capacity(depth);
    for level in 0..depth {
        let mut p = params.clone();
        p.seed = mix(&[params.seed, level as u64]);
        let out = split(&layers[level], &fns[level], &g, fam, &p, window, k_max)?;
        reports.push(LevelReport {
            level,
            seed: p.seed,
            blocks: out.blocks.len() as u64,
            family_cells_checked: out.family_audit.cells_checked,
            lll: out.lll,
            audit: out.audit,
        });
        zero_halves.push(out.d0);
        layers.push(out.d1);
        fns.push(Arc::new(out.f_hat));
    }
    Ok(HardInstance::from_stack(LayerStack {
        depth,
        window,
        k_max,
        g,
        layers,
        zero_halves,
        fns,
        reports,
    }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ImmunityOutcome {
    /// `|S|` is below the size bound, so nothing is claimed.
    NotApplicable { bound: u64, size: u64 },
    /// `E` has an element outside `S`.
    Escapes { element: u64 },
    /// `x ∈ E`, `s ∈ S`, `x != s` and `c(x + s) = n`.
    Flagged { x: u64, s: u64 },
    /// `E ⊆ S` but no audited stage of `S` is available in the window.
    Inconclusive { reason: String },
    /// `E ⊆ S` and an audited `s ∈ S` exists, yet no witness: the coloring
    /// is wrong.
    Unwitnessed { s: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImmunityVerdict {
    pub color: u64,
    pub level: usize,
    pub outcomes: Vec<(usize, ImmunityOutcome)>,
    pub flagged: bool,
    pub pass: bool,
}

/// Checks that a candidate solution `S` for color `n` is refuted by every
/// index `e` with `|S| >= f_L(e, 1)` and `E^{f_L(e,1)}_e ⊆ S`, where
/// `L = min(n + 1, depth)`.
pub fn immunity_audit(
    s_set: &[u64],
    n: u64,
    inst: &HardInstance,
    fam: &EnumFamily,
) -> Result<ImmunityVerdict, LargenessError> {
    let stack = &inst.stack;
    if n > stack.depth as u64 {
        return Err(LargenessError::ColorOutOfRange {
            color: n,
            depth: stack.depth,
        });
    }
    let mut s_sorted = s_set.to_vec();
    s_sorted.sort_unstable();
    s_sorted.dedup();
    if let Some(&bad) = s_sorted.iter().find(|&&x| x >= stack.window) {
        return Err(LargenessError::OutsideWindow {
            element: bad,
            window: stack.window,
        });
    }
    let level = stack.guarantee_level(n);
    let report = &stack.reports[level - 1];
    let f = &stack.fns[level];
    let mut outcomes = Vec::with_capacity(fam.len());
    for e in 0..fam.len() {
        let bound = f.eval(e as u64, 1);
        let size = s_sorted.len() as u64;
        if bound > size {
            outcomes.push((e, ImmunityOutcome::NotApplicable { bound, size }));
            continue;
        }
        let (approx, _) = stable_approximant(fam, e, bound as usize)?;
        let elems = approx.sorted();
        if let Some(&out) = elems.iter().find(|x| s_sorted.binary_search(x).is_err()) {
            outcomes.push((e, ImmunityOutcome::Escapes { element: out }));
            continue;
        }
        let witness = elems.iter().find_map(|&x| {
            s_sorted
                .iter()
                .take_while(|&&s| x + s < stack.window)
                .find(|&&s| s != x && inst.coloring[(x + s) as usize] == n)
                .map(|&s| (x, s))
        });
        if let Some((x, s)) = witness {
            outcomes.push((e, ImmunityOutcome::Flagged { x, s }));
            continue;
        }
        let top = elems.last().copied().unwrap_or(0);
        let audited = report.audit.cell(e, 1).and_then(|c| {
            c.audit_start
                .map(|start| (start, start + c.audited_stages - 1))
        });
        let hit = audited.and_then(|(lo, hi)| {
            s_sorted
                .iter()
                .find(|&&s| s > top && s >= lo && s <= hi)
                .copied()
        });
        outcomes.push((
            e,
            match (audited, hit) {
                (_, Some(s)) => ImmunityOutcome::Unwitnessed { s },
                (None, None) => ImmunityOutcome::Inconclusive {
                    reason: "no audited stage for this index in the window".into(),
                },
                (Some((lo, hi)), None) => ImmunityOutcome::Inconclusive {
                    reason: format!(
                        "no element of S above {top} in the audited stages [{lo}, {hi}]"
                    ),
                },
            },
        ));
    }
    let flagged = outcomes
        .iter()
        .any(|(_, o)| matches!(o, ImmunityOutcome::Flagged { .. }));
    let pass = !outcomes
        .iter()
        .any(|(_, o)| matches!(o, ImmunityOutcome::Unwitnessed { .. }));
    Ok(ImmunityVerdict {
        color: n,
        level,
        outcomes,
        flagged,
        pass,
    })
}
