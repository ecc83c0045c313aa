//! End-to-end checks of the `thinht` binary: exit codes, golden verdicts,
//! report files and replay.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn thinht(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thinht"))
        .current_dir(dir)
        .env_remove("THINHT_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

fn check_golden(args: &[&str], expected: &str) {
    let out = thinht(&golden(""), args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_eq!(r["format"], 1);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["verdict"], read_json(&golden(expected)), "{args:?}");
}

#[test]
fn golden_trace_show() {
    check_golden(
        &["trace", "show", "--trace", "trace.json"],
        "trace_show.verdict.json",
    );
}

#[test]
fn golden_decode() {
    check_golden(
        &[
            "decode",
            "--trace",
            "trace.json",
            "--candidate",
            "candidate.json",
        ],
        "decode.verdict.json",
    );
}

#[test]
fn golden_search() {
    check_golden(
        &["search", "fs", "--coloring", "coloring.json", "--size", "2"],
        "search_fs.verdict.json",
    );
    check_golden(
        &[
            "search",
            "thin",
            "--coloring",
            "coloring.json",
            "--size",
            "3",
        ],
        "search_thin.verdict.json",
    );
}

#[test]
fn invalid_candidate_is_a_verdict_failure() {
    let out = thinht(
        &golden(""),
        &[
            "decode",
            "--trace",
            "trace.json",
            "--candidate",
            "bad_candidate.json",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "verdict_failure");
    assert_eq!(
        r["verdict"]["verdict"]["violations"][0]["kind"],
        "not_two_apart"
    );
}

#[test]
fn input_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        thinht(d, &["trace", "show", "--trace", "missing.json"])
            .status
            .code(),
        Some(3)
    );
    std::fs::write(d.join("junk.json"), "{not json").unwrap();
    assert_eq!(
        thinht(d, &["trace", "show", "--trace", "junk.json"])
            .status
            .code(),
        Some(3)
    );
    // Entry past the horizon.
    std::fs::write(d.join("late.json"), r#"{"horizon":3,"entries":[[1,9]]}"#).unwrap();
    assert_eq!(
        thinht(d, &["trace", "show", "--trace", "late.json"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(thinht(d, &["no-such-command"]).status.code(), Some(3));
    assert_eq!(
        thinht(d, &["search", "fs", "--generator", "sum_mod:x"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(thinht(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn unaudited_family_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Many 13-sets through one point: far too dense for q = 1/2.
    let sets: Vec<Vec<u64>> = (0..200u64)
        .map(|i| {
            (0..13)
                .map(|j| if j == 0 { 0 } else { 1 + i * 13 + j })
                .collect()
        })
        .collect();
    std::fs::write(
        d.join("dense.json"),
        serde_json::to_vec(&serde_json::json!({"min_size": 13, "sets": sets})).unwrap(),
    )
    .unwrap();
    let out = thinht(
        d,
        &[
            "lll",
            "color",
            "--family",
            "dense.json",
            "--frontier",
            "3000",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(report(&out)["status"], "verdict_failure");
}

#[test]
fn budget_exhaustion_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = thinht(
        dir.path(),
        &[
            "search",
            "thin",
            "--generator",
            "sum_mod:2",
            "--arity",
            "2",
            "--universe",
            "30",
            "--size",
            "12",
            "--budget",
            "5",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(report(&out)["status"], "budget_exhausted");
}

#[test]
fn reports_land_in_out_dir_and_replay_by_hash() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::copy(golden("trace.json"), d.join("trace.json")).unwrap();
    let outdir = d.join("reports");
    std::fs::create_dir(&outdir).unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_thinht"))
        .current_dir(d)
        .env("THINHT_OUT_DIR", &outdir)
        .args(["roundtrip", "--trace", "trace.json"])
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0));
    let files: Vec<_> = std::fs::read_dir(&outdir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len(), 1);
    let stored = read_json(&files[0]);
    let hash = stored["config_hash"].as_str().unwrap().to_string();
    assert!(files[0]
        .file_name()
        .unwrap()
        .to_str()
        .unwrap()
        .starts_with("roundtrip-"));

    let replay = thinht(d, &["replay", "--hash", &hash[..12], "--dir", "reports"]);
    assert_eq!(
        replay.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&replay.stderr)
    );

    // Editing an input invalidates the replay.
    std::fs::write(d.join("trace.json"), r#"{"horizon":16,"entries":[[0,3]]}"#).unwrap();
    let stale = thinht(d, &["replay", "--report", files[0].to_str().unwrap()]);
    assert_eq!(stale.status.code(), Some(3));
}

#[test]
fn explicit_out_file_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = thinht(d, &["--out", "r.json", "search", "addlike", "--op", "max"]);
    assert!(out.stdout.is_empty());
    let r = read_json(&d.join("r.json"));
    assert_eq!(r["command"], "search addlike");
    assert_eq!(
        out.status.code(),
        Some(if r["status"] == "ok" { 0 } else { 2 })
    );
}
