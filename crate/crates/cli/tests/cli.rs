use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scengen"));
    c.env_remove("SCENGEN_MEMORY_LIMIT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn case_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/casestudies")
        .join(name)
}

fn malformed() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/malformed");
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "mon"))
        .collect();
    v.sort();
    v
}

const FREE6: &str = "#! scengen-dsl v1
var a in {v0, v1, v2, v3, v4, v5}
monitor m = unconstrained(a)
scenario = m
";

fn synth_text(dir: &Path, text: &str, extra: &[&str]) -> PathBuf {
    let spec = dir.join("spec.mon");
    fs::write(&spec, text).unwrap();
    let out = dir.join("gen.sg");
    let mut args = vec!["synth", spec.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn fcs_sg4(dir: &Path) -> PathBuf {
    let out = dir.join("fcs.sg");
    let spec = case_file("fcs.mon");
    let o = run(&[
        "synth",
        spec.to_str().unwrap(),
        "--scenario",
        "sg4",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    out
}

#[test]
fn malformed_files_fail_with_located_diagnostics() {
    let files = malformed();
    assert_eq!(files.len(), 30);
    let located = regex_free_location;
    for f in &files {
        let p = f.to_str().unwrap();
        let o = run(&["check", p]);
        assert_eq!(code(&o), 1, "{p}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.lines().any(|l| located(l, p)), "{p}: {err}");
        let out = f.with_extension("sg");
        let o = run(&["synth", p, "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 1, "{p}");
        assert!(!out.exists());
    }
}

/// `<path>:<line>:<col>: error[...]`
fn regex_free_location(line: &str, path: &str) -> bool {
    let Some(rest) = line.strip_prefix(path).and_then(|r| r.strip_prefix(':')) else {
        return false;
    };
    let mut parts = rest.splitn(3, ':');
    let (Some(l), Some(c), Some(msg)) = (parts.next(), parts.next(), parts.next()) else {
        return false;
    };
    l.parse::<usize>().is_ok_and(|l| l >= 1)
        && c.parse::<usize>().is_ok_and(|c| c >= 1)
        && msg.trim_start().starts_with("error[E")
}

#[test]
fn shipped_specifications_check_clean() {
    for f in ["fcs.mon", "bdc.mon", "alma.mon"] {
        let o = run(&["check", case_file(f).to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        assert!(o.stderr.is_empty(), "{}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn unconstrained_counts() {
    let dir = tempfile::tempdir().unwrap();
    let g = synth_text(dir.path(), FREE6, &[]);
    let o = run(&["count", g.to_str().unwrap(), "-H", "0..2"]);
    assert_eq!(stdout(&o), "horizon,nb_traces\n0,1\n1,6\n2,36\n");
}

#[test]
fn extract_and_rank_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let g = g.to_str().unwrap();
    let mut lines = String::new();
    for i in ["0", "17", "4455"] {
        let o = run(&["extract", g, i, "-H", "30"]);
        assert_eq!(code(&o), 0);
        let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(rec["index"], i);
        assert_eq!(rec["steps"].as_array().unwrap().len(), 30);
        lines.push_str(&stdout(&o));
    }
    let recs = dir.path().join("recs.jsonl");
    fs::write(&recs, lines).unwrap();
    let o = run(&["rank", g, recs.to_str().unwrap()]);
    assert_eq!(stdout(&o), "0\n17\n4455\n");
}

#[test]
fn out_of_bounds_index_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let o = run(&["extract", g.to_str().unwrap(), "4456", "-H", "30"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("index out of bounds"));
}

#[test]
fn inadmissible_prefix_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    // a repair with no pending fault
    let rec = r#"{"index":"0","horizon":1,"steps":[{"fcs":"r"}]}"#;
    let p = dir.path().join("bad.jsonl");
    fs::write(&p, rec).unwrap();
    let o = run(&["rank", g.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_scenario_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.sg");
    let o = run(&[
        "synth",
        case_file("bdc.mon").to_str().unwrap(),
        "--scenario",
        "sg11",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn memory_limit_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let o = bin()
        .args(["count", g.to_str().unwrap(), "-H", "200"])
        .env("SCENGEN_MEMORY_LIMIT", "4K")
        .output()
        .unwrap();
    assert_eq!(code(&o), 4);
    let o = run(&["count", g.to_str().unwrap(), "-H", "200", "--memory-limit", "64M"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&run(&["count"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["count", "/nonexistent.sg", "-H", "1"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn sampling_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let g = g.to_str().unwrap();
    let a = run(&["sample", g, "-H", "20..40", "-n", "5000", "--seed", "3", "-j", "1"]);
    let b = run(&["sample", g, "-H", "20..40", "-n", "5000", "--seed", "3", "-j", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 5000);
    let c = run(&["sample", g, "-H", "20..40", "-n", "5000", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sampling_without_replacement_is_distinct() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let g = g.to_str().unwrap();
    let o = run(&["sample", g, "-H", "10", "-n", "40", "--without-replacement"]);
    let idx: BTreeSet<String> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["index"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(idx.len(), 40);
    let o = run(&["sample", g, "-H", "10", "-n", "41", "--without-replacement"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn csv_output_has_a_column_per_variable_and_step() {
    let dir = tempfile::tempdir().unwrap();
    let text = "#! scengen-dsl v1
var a in {x, y}
var b in {u, v, w}
monitor m = unconstrained(a)
monitor n = no_reversal(b)
scenario = m & n
";
    let spec = dir.path().join("s.mon");
    fs::write(&spec, text).unwrap();
    let g = dir.path().join("t.json");
    assert_eq!(code(&run(&["synth", spec.to_str().unwrap(), "-o", g.to_str().unwrap()])), 0);
    let o = run(&["sample", g.to_str().unwrap(), "-H", "1..2", "-n", "20", "--format", "csv"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "index,horizon,a@0,b@0,a@1,b@1");
    for l in lines {
        assert_eq!(l.split(',').count(), 6);
    }
}

fn enumerate(g: &str, extra: &[&str]) -> Vec<String> {
    let mut args = vec!["enumerate", g, "-H", "12", "--seed", "9"];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).lines().map(String::from).collect()
}

#[test]
fn enumeration_covers_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let g = fcs_sg4(dir.path());
    let g = g.to_str().unwrap();
    let o = run(&["count", g, "-H", "12"]);
    let n: usize = stdout(&o).lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    let full = enumerate(g, &[]);
    assert_eq!(full.len(), n);
    let distinct: BTreeSet<&String> = full.iter().collect();
    assert_eq!(distinct.len(), n);

    let cursor = dir.path().join("cursor.json");
    let c = cursor.to_str().unwrap();
    let mut resumed = enumerate(g, &["--cursor", c, "--limit", "7"]);
    resumed.extend(enumerate(g, &["--cursor", c, "--limit", "5"]));
    resumed.extend(enumerate(g, &["--cursor", c]));
    assert_eq!(resumed, full);
    assert!(enumerate(g, &["--cursor", c]).is_empty());

    let mut sharded = Vec::new();
    for j in 0..3 {
        sharded.extend(enumerate(g, &["--shard", &format!("{j}/3"), "-j", "2"]));
    }
    assert_eq!(sharded, full);
}

#[test]
fn walks_on_a_non_blocking_monitor_never_deadlock() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.mon");
    fs::write(&spec, FREE6).unwrap();
    let o = run(&["walk", spec.to_str().unwrap(), "-H", "20", "-n", "500"]);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["deadlocks"], 0);
    assert_eq!(r["sg_selectivity_exact"], "1/1");
}

#[test]
fn stats_reports_four_quantities() {
    let o = run(&[
        "stats",
        case_file("fcs.mon").to_str().unwrap(),
        "--scenario",
        "sg4",
        "--baseline",
        "sg2",
        "-H",
        "10,20",
        "--extractions",
        "50",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(
        rows[0],
        ["horizon", "nb_traces", "extraction_us_nondeterministic", "constraint_selectivity", "sg_selectivity"]
    );
    for r in &rows[1..] {
        let sel: f64 = r[3].parse().unwrap();
        assert!(sel > 0.0 && sel < 1.0);
    }
}

#[test]
fn grid_flags_empty_scenarios() {
    let o = run(&["grid", "bdc", "--sgs", "3,11", "-H", "5,10", "--extractions", "10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("case_study,sg,"));
    assert!(rows[3].ends_with("no-traces") && rows[4].ends_with("no-traces"));
}
