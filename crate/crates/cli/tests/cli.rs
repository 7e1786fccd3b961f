use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gradplay(args: &[&str], out_env: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gradplay"));
    cmd.args(args).env_remove("GRADPLAY_OUT_DIR");
    if let Some(dir) = out_env {
        cmd.env("GRADPLAY_OUT_DIR", dir);
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bounds_prints_plan() {
    let o = gradplay(&["bounds", "--mu", "1", "--L", "1", "--sigma", "0.5", "--n", "2"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("term3: 0.0936602049066842\n"), "{s}");
    assert!(s.contains("binding_term: 3\n"));

    let o = gradplay(&["bounds", "--mu", "1", "--L", "1", "--sigma", "0.5", "--n", "2", "--json"], None);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["terms"][1], 0.5);

    let o = gradplay(&["bounds", "--mu", "1", "--L", "1", "--sigma", "0", "--n", "2"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("perfect mixing"));
}

#[test]
fn compare_grane_prints_gaps() {
    let o = gradplay(&["compare-grane", "--mu", "1", "--L", "1", "--n", "20"], None);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("grane_gap: 1.562500000000001e-8") || s.contains("grane_gap: 1.5625e-8"), "{s}");
    assert!(s.contains("play_faster: true"));
    let o = gradplay(&["compare-grane", "--mu", "1", "--L", "0.1", "--n", "4"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_writes_outputs_to_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    fs::write(&cfg, "n = 6\ntopology = \"ring\"\nmax_iters = 150\n").unwrap();
    let out = dir.path().join("out");
    let o = gradplay(&["run", "--config", cfg.to_str().unwrap()], Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace.csv", "summary.txt", "summary.json", "plot.gp"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with(
        "t,consensus_violation,distance_to_ne,avg_distance_to_ne,grad_norm,lemma1_slack,lemma2_slack,lemma3_slack\n"
    ));
    assert_eq!(trace.lines().count(), 152);

    // --out beats the environment, and the same config gives the same bytes
    let again = dir.path().join("again");
    let o = gradplay(&["run", "--config", cfg.to_str().unwrap(), "--out", again.to_str().unwrap()], Some(&out));
    assert!(o.status.success());
    assert_eq!(fs::read(again.join("trace.csv")).unwrap(), trace.into_bytes());
}

#[test]
fn paper_preset_states_capped_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("short.toml");
    fs::write(&cfg, "max_iters = 50\n").unwrap();
    let out = dir.path().join("o");
    let o = gradplay(
        &["run", "--preset", "paper-sim", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        None,
    );
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("exceeds alpha_max"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["n"], 20);
    assert_eq!(summary["passed"], true);
}

#[test]
fn explicit_inadmissible_alpha_warns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "n = 5\ntopology = \"star\"\nmax_iters = 100\n").unwrap();
    let o = gradplay(
        &["run", "--config", cfg.to_str().unwrap(), "--alpha", "0.05", "--out", dir.path().join("o").to_str().unwrap()],
        None,
    );
    assert!(String::from_utf8_lossy(&o.stderr).contains("not certified"));
}

#[test]
fn run_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n = 1\n").unwrap();
    let o = gradplay(&["run", "--config", cfg.to_str().unwrap(), "--out", "unused"], None);
    assert_eq!(o.status.code(), Some(2));
    let o = gradplay(&["run", "--out", "unused"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn audit_exit_status() {
    let o = gradplay(&["audit", "--sizes", "2,5", "--seeds", "0", "--max-iters", "100"], None);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS lemma1"));

    let o = gradplay(&["audit", "--sizes", "5", "--seeds", "0", "--alpha", "0.5", "--json"], None);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failures = v["failures"].as_array().unwrap();
    assert!(failures
        .iter()
        .any(|f| f["check"] == "envelope" || f["check"] == "divergence"));
}
