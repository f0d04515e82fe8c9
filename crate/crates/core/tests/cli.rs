use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use stopsigma::fixtures::FIG1_JSON;
use tempfile::TempDir;

fn stopsigma() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_stopsigma"));
    cmd.env_remove("STOPSIGMA_MAX_ATOMS");
    cmd
}

fn run(args: &[&str]) -> Output {
    stopsigma().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn fig1_value() -> Value {
    serde_json::from_str(FIG1_JSON).unwrap()
}

fn write_value(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    write(dir, name, &serde_json::to_string_pretty(v).unwrap())
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn atoms_listings_for_fig1() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let cases = [
        (vec!["--time", "1"], "{{w1,w2},{w3,w4},{w5,w6,w7,w8}}\n"),
        (vec!["--time", "0"], "{{w1,w2,w3,w4,w5,w6,w7,w8}}\n"),
        (
            vec!["--time", "inf"],
            "{{w1},{w2},{w3},{w4},{w5},{w6},{w7},{w8}}\n",
        ),
        (vec!["--stopped"], "{{w1,w2},{w3},{w4},{w5,w6},{w7},{w8}}\n"),
        (vec!["--sigma-tau"], "{{w1,w2},{w3,w4,w7,w8},{w5,w6}}\n"),
    ];
    for (flags, expected) in cases {
        let mut args = vec!["atoms", s(&f)];
        args.extend(flags);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(stdout(&out), expected);
    }
}

#[test]
fn atoms_json_has_layers() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let out = run(&["--json", "atoms", s(&f), "--stopped"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["kind"], "stopped");
    assert_eq!(v["atoms"].as_array().unwrap().len(), 6);
    let layers = v["per_time"].as_array().unwrap();
    assert_eq!(layers.len(), 5);
    assert_eq!(layers[1]["time"], "1");
    assert_eq!(layers[1]["blocks"], serde_json::json!([["w1", "w2"]]));
    assert_eq!(layers[4]["time"], "inf");
    assert_eq!(layers[4]["blocks"], serde_json::json!([]));
}

#[test]
fn atoms_time_off_axis_is_invalid() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let out = run(&["atoms", s(&f), "--time", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_fig1_passes_with_strictness_note() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let out = run(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains("FAIL"));
    assert!(text.contains("note: sigma(tau) is a strict subset of F_tau (8 vs 64 events)"));

    let out = run(&["--json", "check", s(&f)]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["sigma_tau_events"], 8);
    assert_eq!(v["stopped_events"], 64);

    let out = run(&["--quiet", "check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn check_reports_violation_at_time_zero() {
    let dir = TempDir::new().unwrap();
    let mut v = fig1_value();
    v["tau"]["w1"] = 0.into();
    let f = write_value(&dir, "bad.json", &v);
    let out = run(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out)
        .contains("FAIL stopping_time: {tau <= 0} splits block {w1,w2,w3,w4,w5,w6,w7,w8}"));

    let out = run(&["atoms", s(&f), "--stopped"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["atoms", s(&f), "--stopped", "--force"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("not a stopping time"));
}

#[test]
fn check_constant_tau_notes_equal_level() {
    let dir = TempDir::new().unwrap();
    let mut v = fig1_value();
    for w in ["w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8"] {
        v["tau"][w] = 1.into();
    }
    let f = write_value(&dir, "const.json", &v);
    let out = run(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("note: F_tau = F_1"));
}

#[test]
fn missing_tau_exits_three() {
    let dir = TempDir::new().unwrap();
    let mut v = fig1_value();
    v.as_object_mut().unwrap().remove("tau");
    let f = write_value(&dir, "notau.json", &v);
    assert_eq!(run(&["atoms", s(&f), "--stopped"]).status.code(), Some(3));
    assert_eq!(run(&["check", s(&f)]).status.code(), Some(3));
    assert_eq!(run(&["atoms", s(&f), "--time", "2"]).status.code(), Some(0));
    assert_eq!(run(&["render", s(&f)]).status.code(), Some(0));
}

#[test]
fn invalid_instances_exit_two() {
    let dir = TempDir::new().unwrap();
    let typo = FIG1_JSON.replacen("\"w8\"]]", "\"w9\"]]", 1);
    assert_ne!(typo, FIG1_JSON);
    let f = write(&dir, "typo.json", &typo);
    let out = run(&["check", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("w9"));

    let f = write(&dir, "broken.json", "{\"omega\": [");
    let out = run(&["render", s(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 1"));

    let missing = dir.path().join("absent.json");
    assert_eq!(run(&["check", s(&missing)]).status.code(), Some(2));
}

#[test]
fn unknown_keys_warn_unless_strict() {
    let dir = TempDir::new().unwrap();
    let mut v = fig1_value();
    v["comment"] = "hand written".into();
    let f = write_value(&dir, "extra.json", &v);
    let out = run(&["atoms", s(&f), "--stopped"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    let out = run(&["--strict", "atoms", s(&f), "--stopped"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumeration_bound_comes_from_env() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let out = stopsigma()
        .env("STOPSIGMA_MAX_ATOMS", "4")
        .args(["check", s(&f)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("8"));
    let out = run(&["--max-atoms", "8", "check", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn render_is_stable_across_processes() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "fig1.json", FIG1_JSON);
    let a = run(&["render", s(&f)]);
    let b = run(&["render", s(&f)]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("0     1     2     3    tau  omega\n"));

    let dot = stdout(&run(&["render", s(&f), "--format", "dot"]));
    assert!(dot.starts_with("digraph filtration {"));
    assert!(dot.trim_end().ends_with('}'));
    let is_node = |l: &&str| {
        let l = l.trim_start();
        l.starts_with('n') && l[1..].starts_with(|c: char| c.is_ascii_digit()) && !l.contains("->")
    };
    let nodes = dot.lines().filter(is_node).count();
    let edges = dot.lines().filter(|l| l.contains("->")).count();
    assert_eq!((nodes, edges), (17, 16));
    assert_eq!(dot.matches("shape=box").count(), 6);
}

#[test]
fn gen_is_deterministic_and_replays() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let out = run(&["gen", "--seed", "11", "-o", s(&a)]);
    assert_eq!(out.status.code(), Some(0));
    let b = run(&["gen", "--seed", "11"]);
    assert_eq!(fs::read(&a).unwrap(), b.stdout);
    let v: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(v["generator"]["algorithm"], "splitmix64");
    assert_eq!(v["generator"]["seed"], 11);
    assert_eq!(run(&["--strict", "check", s(&a)]).status.code(), Some(0));

    let c = run(&["gen", "--seed", "12"]);
    assert_ne!(b.stdout, c.stdout);
}

#[test]
fn gen_rejects_bad_config() {
    let out = run(&["gen", "--split-prob", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["gen", "--n-outcomes", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fuzz_default_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "fuzz",
        "--iterations",
        "200",
        "--dump-dir",
        s(&dir.path().join("dump")),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("200 iterations, 0 failures (seed 42, splitmix64)"));
    assert!(!dir.path().join("dump").exists());
}

#[test]
fn fuzz_zero_iterations_warns() {
    let out = run(&["fuzz", "--iterations", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr(&out).contains("warning"));
    assert!(stdout(&out).contains("0 iterations, 0 failures"));
}

#[test]
fn fuzz_catches_mutant_and_dumps_replayable_files() {
    let dir = TempDir::new().unwrap();
    let dump = dir.path().join("dump");
    let out = run(&[
        "--json",
        "fuzz",
        "--iterations",
        "40",
        "--mutant",
        "cumulative",
        "--dump-dir",
        s(&dump),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let failures = v["failures"].as_u64().unwrap();
    assert!(failures > 0);
    let files: Vec<_> = fs::read_dir(&dump)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(files.len() as u64, failures);
    for file in files {
        assert_eq!(run(&["--strict", "check", s(&file)]).status.code(), Some(0));
    }
}

#[test]
fn fuzz_output_is_independent_of_thread_count() {
    let a = stopsigma()
        .env("RAYON_NUM_THREADS", "1")
        .args([
            "--json",
            "fuzz",
            "--iterations",
            "60",
            "--seed",
            "5",
            "--mutant",
            "cumulative",
            "--dump-dir",
        ])
        .arg(TempDir::new().unwrap().path())
        .output()
        .unwrap();
    let b = stopsigma()
        .env("RAYON_NUM_THREADS", "4")
        .args([
            "--json",
            "fuzz",
            "--iterations",
            "60",
            "--seed",
            "5",
            "--mutant",
            "cumulative",
            "--dump-dir",
        ])
        .arg(TempDir::new().unwrap().path())
        .output()
        .unwrap();
    let strip = |o: &Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        for f in v["failed"].as_array_mut().unwrap() {
            f.as_object_mut().unwrap().remove("file");
        }
        v
    };
    assert_eq!(strip(&a), strip(&b));
}
