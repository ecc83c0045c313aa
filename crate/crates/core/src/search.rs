//! Exhaustive desk-scale solvers for thin sets, finite-sums windows,
//! simultaneous thin sets, rainbow sets and addition-like checks.
//!
//! Every search walks ascending element lists in lexicographic order with an
//! explicit node budget. Top-level branches run in parallel; the reported
//! result is the first branch (in order) that finds something, or
//! `Unknown` as soon as an earlier branch ran out of budget.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed::mix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("colorings disagree on the universe ({0} vs {1})")]
    UniverseMismatch(u64, u64),
    #[error("not 2-bounded: color {color} is attained {count} times")]
    NotTwoBounded { color: u64, count: u64 },
    #[error("expected arity {expected}, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("invalid coloring spec: {0}")]
    Spec(String),
    #[error("n must be at least 1")]
    ZeroN,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Table {
    Unary(Vec<u64>),
    /// `table[i][j]` colors `{i, j}` for `i < j`; the rest is ignored.
    Binary(Vec<Vec<u64>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        color: u64,
    },
    /// Sum of the tuple modulo `modulus`.
    SumMod {
        modulus: u64,
    },
    /// Sum of the tuple.
    Identity,
    /// A hash of `(seed, tuple)` reduced modulo `colors`.
    Random {
        colors: u64,
        seed: u64,
    },
    /// `base(a_0 + ... + a_j)` for a unary `base`; sums at or past the
    /// universe take the reserved overflow color.
    SumOf {
        base: Box<ColoringSpec>,
    },
}

/// A coloring given by a table or a named generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub arity: usize,
    pub universe: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palette: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Table>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
}

impl ColoringSpec {
    pub fn generated(arity: usize, universe: u64, generator: Generator) -> Self {
        ColoringSpec {
            format: Some(1),
            arity,
            universe,
            palette: None,
            table: None,
            generator: Some(generator),
        }
    }

    pub fn tabled(universe: u64, table: Table) -> Self {
        let arity = match table {
            Table::Unary(_) => 1,
            Table::Binary(_) => 2,
        };
        ColoringSpec {
            format: Some(1),
            arity,
            universe,
            palette: None,
            table: Some(table),
            generator: None,
        }
    }

    pub fn with_palette(mut self, palette: u64) -> Self {
        self.palette = Some(palette);
        self
    }

    pub fn build(&self) -> Result<FiniteColoring, SearchError> {
        FiniteColoring::from_spec(self)
    }
}

#[derive(Clone, Debug)]
enum Rule {
    Unary(Vec<u64>),
    Binary(Vec<Vec<u64>>),
    Constant(u64),
    SumMod(u64),
    Identity,
    Random { colors: u64, seed: u64 },
    SumOf(Arc<FiniteColoring>),
}

/// `c : [[0, N)]^arity -> [0, palette)`, possibly with a reserved overflow
/// color `palette` that never counts as a palette color.
#[derive(Clone, Debug)]
pub struct FiniteColoring {
    arity: usize,
    universe: u64,
    palette: u64,
    overflow: Option<u64>,
    rule: Rule,
    spec: ColoringSpec,
}

impl FiniteColoring {
    pub fn from_spec(spec: &ColoringSpec) -> Result<Self, SearchError> {
        let bad = |m: String| Err(SearchError::Spec(m));
        if spec.arity == 0 {
            return bad("arity must be at least 1".into());
        }
        let n = spec.universe;
        let (rule, natural, overflow) = match (&spec.table, &spec.generator) {
            (Some(_), Some(_)) | (None, None) => {
                return bad("exactly one of table and generator is required".into())
            }
            (Some(Table::Unary(t)), None) => {
                if spec.arity != 1 || t.len() as u64 != n {
                    return bad(format!("unary table needs arity 1 and {n} entries"));
                }
                let top = t.iter().max().map_or(1, |m| m + 1);
                (Rule::Unary(t.clone()), top, None)
            }
            (Some(Table::Binary(t)), None) => {
                if spec.arity != 2 || t.len() as u64 != n || t.iter().any(|r| r.len() as u64 != n) {
                    return bad(format!("binary table needs arity 2 and {n} x {n} entries"));
                }
                let top = (0..t.len())
                    .flat_map(|i| t[i][i + 1..].iter())
                    .max()
                    .map_or(1, |m| m + 1);
                (Rule::Binary(t.clone()), top, None)
            }
            (None, Some(g)) => match g {
                Generator::Constant { color } => (Rule::Constant(*color), (color + 1).max(2), None),
                Generator::SumMod { modulus } => {
                    if *modulus == 0 {
                        return bad("modulus must be positive".into());
                    }
                    (Rule::SumMod(*modulus), *modulus, None)
                }
                Generator::Identity => (
                    Rule::Identity,
                    (spec.arity as u64 * n.saturating_sub(1) + 1).max(1),
                    None,
                ),
                Generator::Random { colors, seed } => {
                    if *colors == 0 {
                        return bad("colors must be positive".into());
                    }
                    (
                        Rule::Random {
                            colors: *colors,
                            seed: *seed,
                        },
                        *colors,
                        None,
                    )
                }
                Generator::SumOf { base } => {
                    let base = FiniteColoring::from_spec(base)?;
                    if base.arity != 1 || base.universe != n {
                        return bad("sum_of needs a unary base on the same universe".into());
                    }
                    let p = base.palette;
                    (Rule::SumOf(Arc::new(base)), p, Some(p))
                }
            },
        };
        let palette = match spec.palette {
            Some(p) if p < natural => {
                return bad(format!(
                    "palette {p} is smaller than the colors in use ({natural})"
                ))
            }
            Some(p) => p,
            None => natural,
        };
        if overflow.is_some_and(|o| o != palette) {
            return bad("sum_of palettes are fixed by the base".into());
        }
        Ok(FiniteColoring {
            arity: spec.arity,
            universe: n,
            palette,
            overflow,
            rule,
            spec: spec.clone(),
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn palette(&self) -> u64 {
        self.palette
    }

    pub fn overflow(&self) -> Option<u64> {
        self.overflow
    }

    pub fn spec(&self) -> &ColoringSpec {
        &self.spec
    }

    /// Color of an ascending tuple of the right arity.
    pub fn eval(&self, tuple: &[u64]) -> u64 {
        debug_assert_eq!(tuple.len(), self.arity);
        match &self.rule {
            Rule::Unary(t) => t[tuple[0] as usize],
            Rule::Binary(t) => t[tuple[0] as usize][tuple[1] as usize],
            Rule::Constant(c) => *c,
            Rule::SumMod(m) => tuple.iter().sum::<u64>() % m,
            Rule::Identity => tuple.iter().sum(),
            Rule::Random { colors, seed } => {
                let mut words = vec![*seed, tuple.len() as u64];
                words.extend_from_slice(tuple);
                mix(&words) % colors
            }
            Rule::SumOf(base) => {
                let s: u64 = tuple.iter().sum();
                if s >= self.universe {
                    self.palette
                } else {
                    base.eval(&[s])
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "solution", rename_all = "snake_case")]
pub enum SearchOutcome<T> {
    Found(T),
    None,
    Unknown,
}

impl<T> SearchOutcome<T> {
    pub fn found(&self) -> Option<&T> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> SearchOutcome<U> {
        match self {
            SearchOutcome::Found(t) => SearchOutcome::Found(f(t)),
            SearchOutcome::None => SearchOutcome::None,
            SearchOutcome::Unknown => SearchOutcome::Unknown,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub branches: u64,
    pub exhausted_branches: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Searched<T> {
    pub outcome: SearchOutcome<T>,
    pub stats: SearchStats,
}

enum Branch<S> {
    Found(Vec<u64>, S),
    None,
    Unknown,
}

struct Dfs<'a, S, F> {
    cands: &'a [u64],
    size: usize,
    step: &'a F,
    budget: u64,
    nodes: u64,
    stack: Vec<u64>,
    _state: std::marker::PhantomData<S>,
}

impl<S: Clone, F: Fn(&S, &[u64], u64) -> Option<S>> Dfs<'_, S, F> {
    fn go(&mut self, start: usize, state: &S) -> Branch<S> {
        if self.stack.len() == self.size {
            return Branch::Found(self.stack.clone(), state.clone());
        }
        for i in start..self.cands.len() {
            if self.cands.len() - i < self.size - self.stack.len() {
                break;
            }
            if self.nodes >= self.budget {
                return Branch::Unknown;
            }
            self.nodes += 1;
            let x = self.cands[i];
            if let Some(next) = (self.step)(state, &self.stack, x) {
                self.stack.push(x);
                let r = self.go(i + 1, &next);
                self.stack.pop();
                if !matches!(r, Branch::None) {
                    return r;
                }
            }
        }
        Branch::None
    }
}

/// Lexicographically least ascending list from `cands` of length `size`
/// every prefix of which `step` accepts. The budget caps `step` calls per
/// top-level branch.
fn lex_search<S, F>(
    cands: &[u64],
    size: usize,
    budget: u64,
    root: S,
    step: F,
) -> Searched<(Vec<u64>, S)>
where
    S: Clone + Send + Sync,
    F: Fn(&S, &[u64], u64) -> Option<S> + Sync,
{
    if size == 0 {
        return Searched {
            outcome: SearchOutcome::Found((Vec::new(), root)),
            stats: SearchStats::default(),
        };
    }
    if cands.len() < size {
        return Searched {
            outcome: SearchOutcome::None,
            stats: SearchStats::default(),
        };
    }
    let tops = cands.len() + 1 - size;
    let results: Vec<(Branch<S>, u64)> = (0..tops)
        .into_par_iter()
        .map(|i| {
            let mut dfs = Dfs {
                cands,
                size,
                step: &step,
                budget,
                nodes: 1,
                stack: vec![cands[i]],
                _state: std::marker::PhantomData,
            };
            let r = match step(&root, &[], cands[i]) {
                None => Branch::None,
                Some(s) => dfs.go(i + 1, &s),
            };
            (r, dfs.nodes)
        })
        .collect();
    let mut stats = SearchStats {
        nodes: 0,
        branches: tops as u64,
        exhausted_branches: 0,
    };
    let mut outcome = SearchOutcome::None;
    for (r, nodes) in results {
        stats.nodes += nodes;
        match r {
            Branch::Unknown => {
                stats.exhausted_branches += 1;
                if matches!(outcome, SearchOutcome::None) {
                    outcome = SearchOutcome::Unknown;
                }
            }
            Branch::Found(t, s) => {
                if matches!(outcome, SearchOutcome::None) {
                    outcome = SearchOutcome::Found((t, s));
                }
            }
            Branch::None => {}
        }
    }
    Searched { outcome, stats }
}

/// Calls `f` on every `k`-subset of `xs` (ascending).
fn for_each_subset(xs: &[u64], k: usize, f: &mut impl FnMut(&[u64])) {
    fn rec(xs: &[u64], k: usize, from: usize, buf: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for i in from..xs.len() {
            buf.push(xs[i]);
            rec(xs, k, i + 1, buf, f);
            buf.pop();
        }
    }
    rec(xs, k, 0, &mut Vec::with_capacity(k), f);
}

/// Colors of the tuples that contain `x` as their largest element.
fn new_tuple_colors(c: &FiniteColoring, prefix: &[u64], x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if c.arity() > prefix.len() + 1 {
        return out;
    }
    for_each_subset(prefix, c.arity() - 1, &mut |sub| {
        let mut t = sub.to_vec();
        t.push(x);
        out.push(c.eval(&t));
    });
    out
}

fn least_absent(used: &[bool]) -> Option<u64> {
    used.iter().position(|&u| !u).map(|p| p as u64)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThinSet {
    pub elements: Vec<u64>,
    pub avoided: u64,
}

/// Lexicographically least `T ⊆ [0, N)` of the target size on whose
/// `arity`-subsets some palette color is absent, with the least such color.
pub fn find_thin(c: &FiniteColoring, size: usize, budget: u64) -> Searched<ThinSet> {
    let cands: Vec<u64> = (0..c.universe()).collect();
    let palette = c.palette() as usize;
    let r = lex_search(
        &cands,
        size,
        budget,
        vec![false; palette],
        |used, prefix, x| {
            let mut used = used.clone();
            for col in new_tuple_colors(c, prefix, x) {
                if let Some(u) = used.get_mut(col as usize) {
                    *u = true;
                }
            }
            least_absent(&used).map(|_| used)
        },
    );
    Searched {
        outcome: r.outcome.map(|(elements, used)| ThinSet {
            avoided: least_absent(&used).expect("search keeps a color free"),
            elements,
        }),
        stats: r.stats,
    }
}

/// Which subset sums form the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FsMode {
    /// Sums of exactly two distinct elements.
    Exact2,
    /// Sums of 1 to `m` distinct elements.
    Upto { m: usize },
    /// All nonempty finite sums.
    Full,
}

impl FsMode {
    fn colored(&self, k: usize) -> bool {
        match *self {
            FsMode::Exact2 => k == 2,
            FsMode::Upto { m } => (1..=m).contains(&k),
            FsMode::Full => k >= 1,
        }
    }

    /// Largest subset size worth remembering for later extension.
    fn keep_below(&self) -> usize {
        match *self {
            FsMode::Exact2 => 2,
            FsMode::Upto { m } => m,
            FsMode::Full => usize::MAX,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FsGoal {
    Thin,
    Homogeneous,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsSolution {
    pub elements: Vec<u64>,
    /// Least palette color missing from the window (thin goal).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avoided: Option<u64>,
    /// The single color of the window (homogeneous goal, nonempty window).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<u64>,
}

#[derive(Clone)]
struct FsState {
    /// `(sum, size)` over subsets (including the empty one) small enough to
    /// extend.
    sums: Vec<(u64, usize)>,
    used: Vec<bool>,
    color: Option<u64>,
}

/// Lexicographically least `S ⊆ [1, N)` of the target size whose window of
/// sums lies below `N` and is thin (or homogeneous) for the unary `c`.
pub fn find_fs_solution(
    c: &FiniteColoring,
    mode: FsMode,
    goal: FsGoal,
    size: usize,
    budget: u64,
) -> Result<Searched<FsSolution>, SearchError> {
    if c.arity() != 1 {
        return Err(SearchError::Arity {
            expected: 1,
            found: c.arity(),
        });
    }
    let n = c.universe();
    let cands: Vec<u64> = (1..n).collect();
    let root = FsState {
        sums: vec![(0, 0)],
        used: vec![false; c.palette() as usize],
        color: None,
    };
    let keep = mode.keep_below();
    let r = lex_search(&cands, size, budget, root, |st, _prefix, x| {
        let mut st = st.clone();
        let mut fresh = Vec::new();
        for &(s, k) in &st.sums {
            let (t, k1) = (s + x, k + 1);
            if mode.colored(k1) {
                if t >= n {
                    return None;
                }
                let col = c.eval(&[t]);
                if let Some(u) = st.used.get_mut(col as usize) {
                    *u = true;
                }
                match goal {
                    FsGoal::Thin => {}
                    FsGoal::Homogeneous => match st.color {
                        Some(prev) if prev != col => return None,
                        _ => st.color = Some(col),
                    },
                }
            }
            if k1 < keep {
                fresh.push((t, k1));
            }
        }
        st.sums.extend(fresh);
        if goal == FsGoal::Thin && least_absent(&st.used).is_none() {
            return None;
        }
        Some(st)
    });
    Ok(Searched {
        outcome: r.outcome.map(|(elements, st)| FsSolution {
            elements,
            avoided: match goal {
                FsGoal::Thin => least_absent(&st.used),
                FsGoal::Homogeneous => None,
            },
            color: match goal {
                FsGoal::Thin => None,
                FsGoal::Homogeneous => st.color,
            },
        }),
        stats: r.stats,
    })
}

/// Sums of the window of `set` under `mode`, recomputed from scratch.
pub fn fs_window(set: &[u64], mode: FsMode) -> Vec<u64> {
    let mut out = Vec::new();
    let k_max = match mode {
        FsMode::Exact2 => 2,
        FsMode::Upto { m } => m,
        FsMode::Full => set.len(),
    };
    for k in 1..=k_max.min(set.len()) {
        if mode.colored(k) {
            for_each_subset(set, k, &mut |sub| out.push(sub.iter().sum()));
        }
    }
    out
}

/// Independent re-check of an fs window: every sum inside the universe and
/// `avoided` absent (thin) or a single color (homogeneous).
pub fn check_fs_solution(c: &FiniteColoring, sol: &FsSolution, mode: FsMode) -> bool {
    let mut sorted = sol.elements.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sol.elements.len() {
        return false;
    }
    let window = fs_window(&sorted, mode);
    if window.iter().any(|&s| s >= c.universe()) {
        return false;
    }
    let colors: HashSet<u64> = window.iter().map(|&s| c.eval(&[s])).collect();
    match (sol.avoided, sol.color) {
        (Some(j), None) => j < c.palette() && !colors.contains(&j),
        (None, Some(col)) => colors.iter().all(|&x| x == col),
        (None, None) => colors.len() <= 1,
        (Some(_), Some(_)) => false,
    }
}

/// Independent re-check of a thin set.
pub fn check_thin(c: &FiniteColoring, t: &ThinSet) -> bool {
    let mut hit = false;
    for_each_subset(&t.elements, c.arity(), &mut |sub| {
        hit |= c.eval(sub) == t.avoided;
    });
    t.avoided < c.palette() && !hit
}

/// A single `T` and color `j` such that no coloring attains `j` on its
/// tuples from `T`. Tuples landing on an overflow color disqualify `T`.
pub fn simultaneous_thin(
    colorings: &[FiniteColoring],
    size: usize,
    budget: u64,
) -> Result<Searched<ThinSet>, SearchError> {
    let Some(first) = colorings.first() else {
        return Err(SearchError::Spec("no colorings".into()));
    };
    if let Some(c) = colorings.iter().find(|c| c.universe() != first.universe()) {
        return Err(SearchError::UniverseMismatch(
            first.universe(),
            c.universe(),
        ));
    }
    let palette = colorings
        .iter()
        .map(FiniteColoring::palette)
        .max()
        .unwrap_or(0) as usize;
    let cands: Vec<u64> = (0..first.universe()).collect();
    let r = lex_search(
        &cands,
        size,
        budget,
        vec![false; palette],
        |used, prefix, x| {
            let mut used = used.clone();
            for c in colorings {
                for col in new_tuple_colors(c, prefix, x) {
                    if c.overflow() == Some(col) {
                        return None;
                    }
                    if let Some(u) = used.get_mut(col as usize) {
                        *u = true;
                    }
                }
            }
            least_absent(&used).map(|_| used)
        },
    );
    Ok(Searched {
        outcome: r.outcome.map(|(elements, used)| ThinSet {
            avoided: least_absent(&used).expect("search keeps a color free"),
            elements,
        }),
        stats: r.stats,
    })
}

/// The colorings `{a_0, ..., a_j} -> c(a_0 + ... + a_j)` for arities `1..=n`.
pub fn sum_colorings(c: &FiniteColoring, n: usize) -> Result<Vec<FiniteColoring>, SearchError> {
    if n == 0 {
        return Err(SearchError::ZeroN);
    }
    if c.arity() != 1 {
        return Err(SearchError::Arity {
            expected: 1,
            found: c.arity(),
        });
    }
    let mut out = vec![c.clone()];
    for arity in 2..=n {
        let spec = ColoringSpec::generated(
            arity,
            c.universe(),
            Generator::SumOf {
                base: Box::new(c.spec().clone()),
            },
        );
        out.push(spec.build()?);
    }
    Ok(out)
}

/// Lexicographically least `R` of the target size with `c` injective on
/// `[R]^2`, for `c` attaining each color at most twice.
pub fn rrt_solve(
    c: &FiniteColoring,
    size: usize,
    budget: u64,
) -> Result<Searched<Vec<u64>>, SearchError> {
    if c.arity() != 2 {
        return Err(SearchError::Arity {
            expected: 2,
            found: c.arity(),
        });
    }
    let n = c.universe();
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for a in 0..n {
        for b in a + 1..n {
            *counts.entry(c.eval(&[a, b])).or_default() += 1;
        }
    }
    if let Some((&color, &count)) = counts.iter().find(|(_, &k)| k > 2) {
        return Err(SearchError::NotTwoBounded { color, count });
    }
    let cands: Vec<u64> = (0..n).collect();
    let r = lex_search(
        &cands,
        size,
        budget,
        HashSet::<u64>::new(),
        |used, prefix, x| {
            let mut used = used.clone();
            for &a in prefix {
                if !used.insert(c.eval(&[a, x])) {
                    return None;
                }
            }
            Some(used)
        },
    );
    Ok(Searched {
        outcome: r.outcome.map(|(r, _)| r),
        stats: r.stats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairOp {
    Add,
    Max,
    Mul,
}

impl PairOp {
    pub fn eval(&self, x: u64, y: u64) -> u64 {
        match self {
            PairOp::Add => x + y,
            PairOp::Max => x.max(y),
            PairOp::Mul => x * y,
        }
    }
}

/// `f({x,y})` with escape bound `g(x, n) = escape_mul * n + escape_add` and
/// collision bound `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditionLike {
    pub op: PairOp,
    #[serde(default = "one")]
    pub escape_mul: u64,
    #[serde(default)]
    pub escape_add: u64,
    pub collision_bound: u64,
}

fn one() -> u64 {
    1
}

impl AdditionLike {
    pub fn new(op: PairOp, collision_bound: u64) -> Self {
        AdditionLike {
            op,
            escape_mul: 1,
            escape_add: 0,
            collision_bound,
        }
    }

    pub fn escape(&self, _x: u64, n: u64) -> u64 {
        self.escape_mul * n + self.escape_add
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum AddLikeViolation {
    /// `y > g(x, n)` yet `f({x,y}) <= n`.
    Escape { x: u64, n: u64, y: u64, value: u64 },
    /// More than `b` values `z` share `f({x,z}) = f({x,y})`.
    Collisions { x: u64, y: u64, count: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddLikeVerdict {
    pub pass: bool,
    pub y_max: u64,
    pub checked_pairs: u64,
    pub violation_count: u64,
    /// First violations found, at most [`MAX_LISTED`].
    pub violations: Vec<AddLikeViolation>,
    pub warnings: Vec<String>,
}

pub const MAX_LISTED: usize = 20;

/// Window scan of the escape and collision clauses for `x <= x_max`,
/// `n <= n_max` and `y <= y_max` (default: the largest escape bound plus
/// `x_max + n_max + 2`).
pub fn addition_like_validate(
    f: &AdditionLike,
    x_max: u64,
    n_max: u64,
    y_max: Option<u64>,
) -> AddLikeVerdict {
    let y_max = y_max.unwrap_or_else(|| {
        (0..=x_max).map(|x| f.escape(x, n_max)).max().unwrap_or(0) + x_max + n_max + 2
    });
    let per_x: Vec<(u64, Vec<AddLikeViolation>, u64)> = (0..=x_max)
        .into_par_iter()
        .map(|x| {
            let mut found = Vec::new();
            let mut checked = 0;
            for n in 0..=n_max {
                for y in f.escape(x, n) + 1..=y_max {
                    if y == x {
                        continue;
                    }
                    checked += 1;
                    let v = f.op.eval(x, y);
                    if v <= n {
                        found.push(AddLikeViolation::Escape { x, n, y, value: v });
                    }
                }
            }
            let mut by_value: HashMap<u64, u64> = HashMap::new();
            for z in (0..=y_max).filter(|&z| z != x) {
                *by_value.entry(f.op.eval(x, z)).or_default() += 1;
            }
            for y in (0..=y_max).filter(|&y| y != x) {
                let count = by_value[&f.op.eval(x, y)];
                if count > f.collision_bound {
                    found.push(AddLikeViolation::Collisions { x, y, count });
                }
            }
            (x, found, checked)
        })
        .collect();
    let mut verdict = AddLikeVerdict {
        pass: true,
        y_max,
        checked_pairs: 0,
        violation_count: 0,
        violations: Vec::new(),
        warnings: Vec::new(),
    };
    for (_, found, checked) in per_x {
        verdict.checked_pairs += checked;
        verdict.violation_count += found.len() as u64;
        let room = MAX_LISTED.saturating_sub(verdict.violations.len());
        verdict.violations.extend(found.into_iter().take(room));
    }
    verdict.pass = verdict.violation_count == 0;
    if x_max == 0 {
        verdict
            .warnings
            .push("x_max = 0: the scan window is vacuous".into());
    }
    verdict
}
