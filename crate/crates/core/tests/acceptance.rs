//! Acceptance suite. Each criterion prints one `[acceptance N] PASS|FAIL`
//! line straight to stdout (bypassing the test harness capture) and then
//! asserts. Every limit and tolerance is a named constant below.

// The pinned tolerances are zero today; keep the comparisons general.
#![allow(clippy::absurd_extreme_comparisons)]

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use thinht::binum::{BinNum, FsQuery};
use thinht::gap::{self, PrimePairColor};
use thinht::largeness::{
    immunity_audit, iterate, make_g, split, BinaryFn, ImmunityOutcome, LargeSet, Pairing,
};
use thinht::lll::{self, ExplicitFamily, LllParams, PartialColoring, Ratio};
use thinht::oracle::{stable_approximant, EnumFamily, OracleTrace};
use thinht::search::{
    self, ColoringSpec, FsGoal, FsMode, FsSolution, Generator, SearchOutcome, Table,
};

const ROUNDTRIP_TRACES: usize = 50;
const ROUNDTRIP_MAX_ELEMENTS: usize = 8;
const ROUNDTRIP_MAX_STAGE: u64 = 64;
const ROUNDTRIP_LIMIT: Duration = Duration::from_secs(10);
const ROUNDTRIP_REQUIRED_AGREEMENT: f64 = 1.0;

const GAP_SAMPLES: usize = 1000;
const GAP_ALLOWED_VIOLATIONS: usize = 0;

const LLL_FAMILIES: usize = 100;
const LLL_UNIVERSE: u64 = 512;
const LLL_FIRST_FRONTIER: u64 = 256;
const LLL_LIMIT: Duration = Duration::from_secs(60);

const SPLIT_WINDOW: u64 = 1 << 10;
const SPLIT_K_MAX: u64 = 2;

const HARD_WINDOW: u64 = 1 << 12;
const HARD_DEPTH: usize = 2;
const HARD_K_MAX: u64 = 2;
const HARD_PLANTED: usize = 10;
const HARD_LIMIT: Duration = Duration::from_secs(300);
const HARD_ALLOWED_MISCLASSIFICATIONS: usize = 0;

const ORACLE_MIN_INSTANCES: usize = 200;
const ORACLE_MAX_UNIVERSE: u64 = 16;

const REDUCTION_UNIVERSE: u64 = 32;
const REDUCTION_N: usize = 2;
const REDUCTION_COLORINGS: usize = 50;
const REDUCTION_MAX_COLORS: u64 = 4;
const REDUCTION_SIZE: usize = 3;

const CODEC_CODES: u64 = 10_000;
const G_CODES: u64 = 100;

fn announce(n: u32, pass: bool, what: &str, detail: String) {
    let line = format!(
        "[acceptance {n}] {} {what}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
}

fn random_trace(
    rng: &mut ChaCha8Rng,
    max_elements: usize,
    universe: u64,
    max_stage: u64,
) -> OracleTrace {
    let count = rng.gen_range(0..=max_elements);
    let elems = sample(rng, universe as usize, count);
    let entries: Vec<(u64, u64)> = elems
        .into_iter()
        .map(|m| (m as u64, rng.gen_range(0..=max_stage)))
        .collect();
    OracleTrace::new(max_stage, entries).unwrap()
}

fn num(exps: Vec<u64>) -> BinNum {
    BinNum::from_exponents(exps).unwrap()
}

#[test]
fn acceptance_1_encoder_decoder_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a11);
    let (mut asked, mut agreed, mut invalid) = (0u64, 0u64, 0usize);
    for _ in 0..ROUNDTRIP_TRACES {
        let trace = random_trace(&mut rng, ROUNDTRIP_MAX_ELEMENTS, 64, ROUNDTRIP_MAX_STAGE);
        let max_n = trace.entries().map(|(m, _)| m).max().unwrap_or(0);
        let cand = gap::harness_candidate(&trace, max_n, 4);
        let full = FsQuery::new(cand.y.len()).unwrap();
        if !gap::verify_candidate(&cand, &trace, &full).unwrap().pass {
            invalid += 1;
            continue;
        }
        for n in 0..=max_n {
            asked += 1;
            if gap::decode_membership(n, &cand, &trace).unwrap() == trace.contains(n) {
                agreed += 1;
            }
        }
    }
    let took = start.elapsed();
    let rate = agreed as f64 / asked as f64;
    let pass = invalid == 0 && rate >= ROUNDTRIP_REQUIRED_AGREEMENT && took < ROUNDTRIP_LIMIT;
    announce(
        1,
        pass,
        "encoder/decoder round trip",
        format!(
            "{ROUNDTRIP_TRACES} traces, {invalid} invalid candidates, {agreed}/{asked} agree ({:.2}%), {:.2}s (limit {}s)",
            100.0 * rate,
            took.as_secs_f64(),
            ROUNDTRIP_LIMIT.as_secs()
        ),
    );
    assert!(pass);
}

fn random_exponents(rng: &mut ChaCha8Rng, lo: u64, hi: u64, max_len: usize) -> Vec<u64> {
    let len = rng.gen_range(1..=max_len.min((hi - lo) as usize));
    let mut v: Vec<u64> = sample(rng, (hi - lo) as usize, len)
        .into_iter()
        .map(|x| lo + x as u64)
        .collect();
    v.sort_unstable();
    v
}

/// Is the gap `(lo, hi)` short: some `m < lo` of the trace enters after `hi`.
fn short_gap(trace: &OracleTrace, lo: u64, hi: u64) -> bool {
    trace.entries().any(|(m, s)| m < lo && s > hi)
}

#[test]
fn acceptance_2_gap_additivity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a12);
    let (mut violations, mut broad_violations, mut broad_short) = (0usize, 0usize, 0usize);
    for _ in 0..GAP_SAMPLES {
        let trace = random_trace(&mut rng, 8, 40, 64);
        let settle = trace.settle_stage();
        let x = num(random_exponents(&mut rng, 0, 40, 4));
        // Stated condition: lambda(y) above both mu(x) and the settle stage.
        let base = x.mu().max(settle) + 1;
        let y = num(random_exponents(&mut rng, base, base + 40, 4));
        let d = gap::sg(&x.add(&y), &trace) as i64
            - gap::sg(&x, &trace) as i64
            - gap::sg(&y, &trace) as i64;
        let short = short_gap(&trace, x.mu(), y.lambda());
        if !(d == 0 || d == 1) || (d == 1) != short {
            violations += 1;
        }
        // Without the settle condition the middle gap can be short.
        let y2 = num(random_exponents(&mut rng, x.mu() + 1, x.mu() + 41, 4));
        let d2 = gap::sg(&x.add(&y2), &trace) as i64
            - gap::sg(&x, &trace) as i64
            - gap::sg(&y2, &trace) as i64;
        let short2 = short_gap(&trace, x.mu(), y2.lambda());
        broad_short += short2 as usize;
        if !(d2 == 0 || d2 == 1) || (d2 == 1) != short2 {
            broad_violations += 1;
        }
    }
    let pass = violations <= GAP_ALLOWED_VIOLATIONS && broad_violations <= GAP_ALLOWED_VIOLATIONS;
    announce(
        2,
        pass,
        "gap additivity",
        format!(
            "{GAP_SAMPLES} samples, {violations} violations; unrestricted check {broad_violations} violations over {broad_short} short middle gaps"
        ),
    );
    assert!(pass);
}

fn sparse_family(rng: &mut ChaCha8Rng, m: usize) -> ExplicitFamily {
    let sets = rng.gen_range(20..60);
    let mut fam = ExplicitFamily::new(m, Vec::new()).unwrap();
    for _ in 0..sets {
        let size = rng.gen_range(m..m + 8);
        // Half the sets stay below the first frontier.
        let top = if rng.gen_bool(0.5) {
            LLL_FIRST_FRONTIER
        } else {
            LLL_UNIVERSE
        };
        let set: Vec<u64> = sample(rng, top as usize, size)
            .into_iter()
            .map(|x| x as u64)
            .collect();
        fam.push(set).unwrap();
    }
    fam
}

#[test]
fn acceptance_3_lll_soundness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a13);
    let (mut unaudited, mut failures, mut mono, mut moved) = (0usize, 0usize, 0usize, 0usize);
    for i in 0..LLL_FAMILIES {
        let params = LllParams::minimal(Ratio::HALF, 100_000, i as u64).unwrap();
        let fam = sparse_family(&mut rng, params.m);
        let m_max = fam.sets().iter().map(Vec::len).max().unwrap();
        if !lll::occurrence_audit(&fam, &params, m_max, LLL_UNIVERSE - 1).pass {
            unaudited += 1;
            continue;
        }
        let first =
            match lll::two_color(&fam, &params, &PartialColoring::empty(), LLL_FIRST_FRONTIER) {
                Ok(c) => c,
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
        let second = match lll::two_color(&fam, &params, &first, LLL_UNIVERSE) {
            Ok(c) => c,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        if !second.bits().starts_with(first.bits()) {
            moved += 1;
        }
        mono += lll::monochromatic_sets(&fam, &first, LLL_FIRST_FRONTIER).len();
        mono += lll::monochromatic_sets(&fam, &second, LLL_UNIVERSE).len();
    }
    let took = start.elapsed();
    let pass = unaudited == 0 && failures == 0 && mono == 0 && moved == 0 && took < LLL_LIMIT;
    announce(
        3,
        pass,
        "LLL soundness",
        format!(
            "{LLL_FAMILIES} families, {unaudited} unaudited, {failures} budget failures, {mono} monochromatic sets, {moved} committed-bit changes, {:.2}s (limit {}s)",
            took.as_secs_f64(),
            LLL_LIMIT.as_secs()
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_4_splitting_audit() {
    let fam = EnumFamily::new(vec![
        OracleTrace::new(SPLIT_WINDOW - 1, [(3, 0), (10, 4), (11, 9)]).unwrap(),
        OracleTrace::new(SPLIT_WINDOW - 1, [(0, 2), (40, 30)]).unwrap(),
        OracleTrace::new(SPLIT_WINDOW - 1, [(7, 100)]).unwrap(),
        OracleTrace::new(SPLIT_WINDOW - 1, [(1, 1), (2, 2), (5, 700)]).unwrap(),
    ]);
    let params = LllParams::minimal(Ratio::HALF, 1_000_000, 4).unwrap();
    let g = Arc::new(make_g(params.m as u64, Pairing::Cantor));
    let out = split(
        &LargeSet::Naturals,
        &Arc::new(BinaryFn::Identity),
        &g,
        &fam,
        &params,
        SPLIT_WINDOW,
        SPLIT_K_MAX,
    )
    .unwrap();
    let partition = (0..SPLIT_WINDOW).all(|n| out.d0.contains(n) ^ out.d1.contains(n));
    let audited: u64 = out.audit.cells.iter().map(|c| c.audited_stages).sum();
    let vacuous = out
        .audit
        .cells
        .iter()
        .filter(|c| c.audited_stages == 0)
        .count();
    let pass = partition && out.audit.pass && out.audit.counterexamples.is_empty() && vacuous == 0;
    announce(
        4,
        pass,
        "splitting audit",
        format!(
            "partition {partition}, {} blocks, {} cells, {audited} audited stages, {vacuous} unaudited cells, {} counterexamples",
            out.blocks.len(),
            out.audit.cells.len(),
            out.audit.counterexamples.len()
        ),
    );
    assert!(pass);
}

/// Four traces: a dense one large enough for the depth-2 bound, two medium
/// ones with late entries, and a tiny one.
fn hard_family() -> EnumFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a15);
    let h = HARD_WINDOW - 1;
    let dense: Vec<(u64, u64)> = sample(&mut rng, 2600, 2300)
        .into_iter()
        .map(|m| (m as u64, 0))
        .collect();
    let medium = |rng: &mut ChaCha8Rng, count: usize| -> Vec<(u64, u64)> {
        sample(rng, 600, count)
            .into_iter()
            .map(|m| (m as u64, rng.gen_range(0..=64)))
            .collect()
    };
    let e1 = medium(&mut rng, 30);
    let e2 = medium(&mut rng, 25);
    EnumFamily::new(vec![
        OracleTrace::new(h, dense).unwrap(),
        OracleTrace::new(h, e1).unwrap(),
        OracleTrace::new(h, e2).unwrap(),
        OracleTrace::new(h, [(9, 3), (31, 40), (77, 60)]).unwrap(),
    ])
}

fn read_bits(hex_str: &str, len: usize) -> Vec<bool> {
    let bytes: Vec<u8> = (0..hex_str.len() / 2)
        .map(|i| u8::from_str_radix(&hex_str[2 * i..2 * i + 2], 16).unwrap())
        .collect();
    (0..len)
        .map(|n| bytes[n / 8] & (1 << (n % 8)) != 0)
        .collect()
}

#[test]
fn acceptance_5_hard_instance_audit() {
    let start = Instant::now();
    let fam = hard_family();
    let params = LllParams::minimal(Ratio::HALF, 10_000_000, 7).unwrap();
    let inst = iterate(HARD_DEPTH, &fam, &params, HARD_WINDOW, HARD_K_MAX).unwrap();

    // Recompute the coloring from the exported bitmaps alone.
    let export: Value = serde_json::to_value(inst.stack.export(fam.len())).unwrap();
    let layers: Vec<Vec<bool>> = export["layers"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| read_bits(l["members"].as_str().unwrap(), HARD_WINDOW as usize))
        .collect();
    let mismatched = (0..HARD_WINDOW)
        .filter(|&x| {
            let top = x.min(HARD_DEPTH as u64) as usize;
            let c = (1..=top)
                .rev()
                .find(|&n| layers[n][x as usize])
                .unwrap_or(0) as u64;
            inst.color(x) != Some(c)
        })
        .count();

    let mut misclassified = Vec::new();
    let mut planted = 0;
    let plants: [(u64, usize); 5] = [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0)];
    for (n, e) in plants {
        let level = (n as usize + 1).min(HARD_DEPTH);
        let bound = inst.stack.fns[level].eval(e as u64, 1);
        let (approx, _) = stable_approximant(&fam, e, bound as usize).unwrap();
        assert!(!approx.fallback, "planted E must be a real subset of W_e");
        for extra in [vec![3001, 3050], vec![3500, 3600, 3700, 4000]] {
            let mut s = approx.sorted();
            s.extend(extra);
            planted += 1;
            let v = immunity_audit(&s, n, &inst, &fam).unwrap();
            let hit = matches!(v.outcomes[e].1, ImmunityOutcome::Flagged { .. });
            if !(v.pass && v.flagged && hit) {
                misclassified.push(format!("planted n={n} e={e}: {:?}", v.outcomes[e].1));
            }
        }
    }

    let used: BTreeSet<u64> = fam
        .traces()
        .iter()
        .flat_map(|t| t.entries().map(|(m, _)| m))
        .collect();
    let free: Vec<u64> = (0..HARD_WINDOW).filter(|m| !used.contains(m)).collect();
    let controls: Vec<Vec<u64>> = vec![
        Vec::new(),
        free[..20].to_vec(),
        free[100..130].to_vec(),
        free[free.len() - 50..].to_vec(),
        free.clone(),
    ];
    for s in &controls {
        for n in 0..=HARD_DEPTH as u64 {
            let v = immunity_audit(s, n, &inst, &fam).unwrap();
            if !v.pass || v.flagged {
                misclassified.push(format!("control |S|={} n={n}", s.len()));
            }
        }
    }
    let took = start.elapsed();
    let audits = inst.stack.reports.iter().all(|r| r.audit.pass);
    let pass = planted == HARD_PLANTED
        && mismatched == 0
        && audits
        && misclassified.len() <= HARD_ALLOWED_MISCLASSIFICATIONS
        && took < HARD_LIMIT;
    announce(
        5,
        pass,
        "hard-instance audit",
        format!(
            "{mismatched} recomputation mismatches, level audits {audits}, {planted} planted + {} controls, {} misclassified {:?}, {:.1}s (limit {}s)",
            controls.len() * (HARD_DEPTH + 1),
            misclassified.len(),
            misclassified,
            took.as_secs_f64(),
            HARD_LIMIT.as_secs()
        ),
    );
    assert!(pass);
}

/// Lexicographically least clique of the given size in a graph on
/// `[1, n)`, by plain backtracking over adjacency.
fn least_clique(n: u64, size: usize, edge: &dyn Fn(u64, u64) -> bool) -> Option<Vec<u64>> {
    fn grow(
        n: u64,
        size: usize,
        from: u64,
        cur: &mut Vec<u64>,
        edge: &dyn Fn(u64, u64) -> bool,
    ) -> bool {
        if cur.len() == size {
            return true;
        }
        for v in from..n {
            if cur.iter().all(|&u| edge(u, v)) {
                cur.push(v);
                if grow(n, size, v + 1, cur, edge) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    let mut cur = Vec::new();
    grow(n, size, 1, &mut cur, edge).then_some(cur)
}

/// Independent solver for thin pair-sum windows: for each color `j`, the
/// least clique where `{a, b}` is an edge when `a + b < N` and
/// `c(a + b) != j`; the answer is the least over `j`.
fn pair_sum_oracle(c: &search::FiniteColoring, size: usize) -> Option<(Vec<u64>, u64)> {
    let n = c.universe();
    let best = (0..c.palette())
        .filter_map(|j| least_clique(n, size, &|a, b| a + b < n && c.eval(&[a + b]) != j))
        .min()?;
    let used: BTreeSet<u64> = best
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| best[i + 1..].iter().map(move |&b| a + b))
        .map(|s| c.eval(&[s]))
        .collect();
    let avoided = (0..c.palette()).find(|j| !used.contains(j)).unwrap();
    Some((best, avoided))
}

#[test]
fn acceptance_6_solver_oracle_equivalence() {
    let mut gens = Vec::new();
    for color in [0, 2] {
        gens.push(Generator::Constant { color });
    }
    for modulus in 2..=4 {
        gens.push(Generator::SumMod { modulus });
    }
    gens.push(Generator::Identity);
    for colors in 2..=4 {
        for seed in 0..3 {
            gens.push(Generator::Random { colors, seed });
        }
    }
    let (mut instances, mut disagreements, mut tight_bad, mut unknowns) =
        (0usize, Vec::new(), 0usize, 0usize);
    let mut tallies = [0usize; 2];
    for g in &gens {
        for universe in [6, 9, 12, ORACLE_MAX_UNIVERSE] {
            let c = ColoringSpec::generated(1, universe, g.clone())
                .build()
                .unwrap();
            for size in 1..=4 {
                instances += 1;
                let ours =
                    search::find_fs_solution(&c, FsMode::Exact2, FsGoal::Thin, size, 1 << 40)
                        .unwrap();
                let oracle = pair_sum_oracle(&c, size);
                let agree = match (&ours.outcome, &oracle) {
                    (SearchOutcome::Found(s), Some((t, j))) => {
                        s.elements == *t && s.avoided == Some(*j)
                    }
                    (SearchOutcome::None, None) => true,
                    _ => false,
                };
                tallies[oracle.is_some() as usize] += 1;
                if !agree {
                    disagreements.push(format!("{g:?} N={universe} size={size}"));
                }
                // A starved search may only answer Unknown or the same result.
                let tight =
                    search::find_fs_solution(&c, FsMode::Exact2, FsGoal::Thin, size, 3).unwrap();
                match (&tight.outcome, &ours.outcome) {
                    (SearchOutcome::Unknown, _) => unknowns += 1,
                    (a, b) if a == b => {}
                    _ => tight_bad += 1,
                }
            }
        }
    }
    let pass = instances >= ORACLE_MIN_INSTANCES
        && disagreements.is_empty()
        && tight_bad == 0
        && unknowns > 0;
    announce(
        6,
        pass,
        "solver oracle equivalence",
        format!(
            "{instances} instances ({} found, {} none), {} disagreements {:?}; budget-starved runs: {unknowns} unknown, {tight_bad} wrong",
            tallies[1],
            tallies[0],
            disagreements.len(),
            disagreements
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_7_reduction_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0a17);
    let (mut valid, mut missing) = (0usize, Vec::new());
    for i in 0..REDUCTION_COLORINGS {
        let colors = rng.gen_range(2..=REDUCTION_MAX_COLORS);
        let table: Vec<u64> = (0..REDUCTION_UNIVERSE)
            .map(|_| rng.gen_range(0..colors))
            .collect();
        let c = ColoringSpec::tabled(REDUCTION_UNIVERSE, Table::Unary(table))
            .with_palette(colors)
            .build()
            .unwrap();
        let derived = search::sum_colorings(&c, REDUCTION_N).unwrap();
        let r = search::simultaneous_thin(&derived, REDUCTION_SIZE, 1 << 40).unwrap();
        match r.outcome {
            SearchOutcome::Found(t) => {
                let sol = FsSolution {
                    elements: t.elements.clone(),
                    avoided: Some(t.avoided),
                    color: None,
                };
                if search::check_fs_solution(&c, &sol, FsMode::Upto { m: REDUCTION_N }) {
                    valid += 1;
                } else {
                    missing.push(format!("coloring {i}: {t:?} fails"));
                }
            }
            other => missing.push(format!("coloring {i}: {other:?}")),
        }
    }
    let pass = valid == REDUCTION_COLORINGS;
    announce(
        7,
        pass,
        "reduction correctness",
        format!("{valid}/{REDUCTION_COLORINGS} windows re-validate {missing:?}"),
    );
    assert!(pass);
}

fn payload(report: &Value) -> Value {
    let mut r = report.clone();
    r.as_object_mut().unwrap().remove("timings");
    r
}

fn run_cli(dir: &std::path::Path, threads: usize, args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_thinht"))
        .current_dir(dir)
        .env_remove("THINHT_OUT_DIR")
        .arg("--threads")
        .arg(threads.to_string())
        .args(args)
        .output()
        .unwrap();
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{args:?}: {e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

#[test]
fn acceptance_8_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("t.json"),
        r#"{"horizon":16,"entries":[[0,3],[2,9],[5,1]]}"#,
    )
    .unwrap();
    let fam = EnumFamily::new(vec![
        OracleTrace::new(1023, [(3, 0), (10, 4)]).unwrap(),
        OracleTrace::new(1023, [(0, 2), (40, 30), (41, 31)]).unwrap(),
    ]);
    std::fs::write(
        d.join("fam.json"),
        serde_json::to_vec(&thinht::workbench::family_json(&fam)).unwrap(),
    )
    .unwrap();
    let lll_sets: Vec<Vec<u64>> = (0..30u64)
        .map(|i| (0..14).map(|j| (i * 7 + j * 17) % 300).collect())
        .collect();
    std::fs::write(
        d.join("sets.json"),
        serde_json::to_vec(&serde_json::json!({"min_size": 13, "sets": lll_sets})).unwrap(),
    )
    .unwrap();
    std::fs::write(
        d.join("cand.json"),
        serde_json::to_vec(&gap::harness_candidate(
            &OracleTrace::new(16, [(0, 3), (2, 9), (5, 1)]).unwrap(),
            5,
            4,
        ))
        .unwrap(),
    )
    .unwrap();

    let commands: Vec<Vec<&str>> = vec![
        vec![
            "trace",
            "gen",
            "--count",
            "5",
            "--max-element",
            "30",
            "--max-stage",
            "20",
            "--seed",
            "7",
            "--output",
            "gen.json",
        ],
        vec![
            "trace",
            "gen",
            "--count",
            "3",
            "--max-element",
            "30",
            "--max-stage",
            "20",
            "--seed",
            "7",
            "--family",
            "3",
            "--output",
            "genf.json",
        ],
        vec!["trace", "show", "--trace", "t.json"],
        vec!["encode", "--trace", "t.json", "--set", "[[1,4],[6,7],[9]]"],
        vec!["decode", "--trace", "t.json", "--candidate", "cand.json"],
        vec!["roundtrip", "--trace", "t.json"],
        vec!["lll", "audit", "--family", "sets.json", "--seed", "3"],
        vec![
            "lll",
            "color",
            "--family",
            "sets.json",
            "--frontier",
            "300",
            "--prefix-frontier",
            "150",
            "--seed",
            "3",
        ],
        vec![
            "large", "split", "--traces", "fam.json", "--window", "1024", "--seed", "7",
        ],
        vec![
            "large",
            "iterate",
            "--traces",
            "fam.json",
            "--window",
            "1024",
            "--depth",
            "2",
            "--seed",
            "7",
            "--export",
            "stack.json",
        ],
        vec![
            "large",
            "audit",
            "--traces",
            "fam.json",
            "--stack",
            "stack.json",
            "--set",
            "3,10,500,600,700,800,900,950,960,970,980,990,1000,1010,1020",
            "--color",
            "0",
        ],
        vec![
            "search",
            "thin",
            "--generator",
            "sum_mod:2",
            "--arity",
            "2",
            "--universe",
            "8",
            "--size",
            "3",
        ],
        vec![
            "search",
            "fs",
            "--generator",
            "random:3:5",
            "--universe",
            "24",
            "--mode",
            "upto",
            "--terms",
            "2",
            "--size",
            "3",
        ],
        vec![
            "search",
            "simul",
            "--generator",
            "random:3:2",
            "--universe",
            "32",
            "--sums",
            "2",
            "--size",
            "3",
        ],
        vec![
            "search",
            "rrt",
            "--generator",
            "random:1000000:1",
            "--arity",
            "2",
            "--universe",
            "10",
            "--size",
            "5",
        ],
        vec!["search", "addlike", "--op", "add"],
    ];
    let mut differing = Vec::new();
    for args in &commands {
        let (c1, r1) = run_cli(d, 1, args);
        let (c2, r2) = run_cli(d, 1, args);
        let (c8, r8) = run_cli(d, 8, args);
        let p1 = serde_json::to_vec(&payload(&r1)).unwrap();
        if c1 != c2
            || c1 != c8
            || p1 != serde_json::to_vec(&payload(&r2)).unwrap()
            || p1 != serde_json::to_vec(&payload(&r8)).unwrap()
        {
            differing.push(args.join(" "));
        }
    }
    let pass = differing.is_empty();
    announce(
        8,
        pass,
        "determinism",
        format!(
            "{} commands x (2 runs at 1 thread + 1 run at 8 threads), differing: {differing:?}",
            commands.len()
        ),
    );
    assert!(pass);
}

#[test]
fn acceptance_9_codec_and_g_fixtures() {
    let codec_bad = (0..CODEC_CODES)
        .filter(|&code| {
            let c = gap::color_from_code(code);
            gap::color_codec(c) != code
                || match c {
                    PrimePairColor::Bottom => code != 0,
                    PrimePairColor::Pair { p, i } => !gap::is_prime(p) || i == 0 || i >= p,
                }
        })
        .count();
    let m = 13;
    let g = make_g(m, Pairing::Cantor);
    let mut seen = BTreeSet::new();
    let mut g_bad = Vec::new();
    for code in 0..G_CODES {
        let (e, k) = Pairing::Cantor.decode(code);
        let v = g.eval(e, k);
        let ineq = (k as u128 * v as u128).pow(2) <= 1u128 << v.min(127);
        if !seen.insert(v) || g.image_member(v) != Some((e, k)) || !ineq || v < m {
            g_bad.push(code);
        }
    }
    let pass = codec_bad == 0 && g_bad.is_empty();
    announce(
        9,
        pass,
        "codec and g fixtures",
        format!("{CODEC_CODES} codes, {codec_bad} codec failures; {G_CODES} g codes, failures {g_bad:?}"),
    );
    assert!(pass);
}
