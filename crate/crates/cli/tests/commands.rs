use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn esds_data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../esds/data").join(name)
}

fn liveref(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liveref")).args(args).output().unwrap()
}

fn liveref_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_liveref"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn p(x: &Path) -> &str {
    x.to_str().unwrap()
}

fn tmp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("liveref-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn db_live_forward_fails_at_the_skip_step() {
    let (dbi, dbs, cand, pairs) = (corpus("dbi.json"), corpus("dbs.json"), corpus("db_cand.json"), corpus("db_pairs.json"));
    let out = liveref(&["check-live-sim", "fwd", p(&dbi), p(&dbs), p(&cand), "--l", p(&pairs), "--m", p(&pairs)]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["counterexample"]["clause"], "live-fwd clause 2a");
    assert_eq!(v["counterexample"]["step"], serde_json::json!(["{}|{}", "request(q)", "{}|{}"]));
    assert!(String::from_utf8_lossy(&out.stderr).contains("live-fwd clause 2a"));

    let out = liveref(&["check-sim", "fwd", p(&dbi), p(&dbs), p(&cand)]);
    assert_eq!(out.status.code(), Some(0));
    let out = liveref(&["trace-inclusion", "live", p(&dbi), p(&dbs), "--l", p(&pairs), "--m", p(&pairs)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["trace"], "(request(q))^w");
}

#[test]
fn bsim1_manual_obligation_is_conditional_and_bounds_are_unknown() {
    let (a, b, cand) = (corpus("bsim1_a.json"), corpus("bsim1_b.json"), corpus("bsim1_cand.json"));
    let (l, m) = (corpus("bsim1_a_pairs.json"), corpus("bsim1_b_pairs.json"));
    let out = liveref(&["check-live-sim", "bwd", p(&a), p(&b), p(&cand), "--l", p(&l), "--m", p(&m)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = liveref(&["check-live-sim", "fwd", p(&a), p(&b), p(&cand), "--l", p(&l), "--m", p(&m)]);
    assert_eq!(out.status.code(), Some(1));
    let (dbs, pairs) = (corpus("dbs.json"), corpus("db_pairs.json"));
    let out = liveref(&["trace-inclusion", "live", p(&dbs), p(&dbs), "--l", p(&pairs), "--m", p(&pairs), "--bounds", "0"]);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
}

#[test]
fn chain_lattice_certifies_and_emits_the_derived_pair() {
    let out = liveref(&["lattice-certify", p(&corpus("chain.json")), p(&corpus("chain_lattice.json")), "--l", p(&corpus("chain_pairs.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["derived"]["red"], serde_json::json!(["s0"]));
    assert_eq!(v["derived"]["green"], serde_json::json!(["s2"]));
    let out = liveref(&["lattice-check", p(&corpus("chain.json")), p(&corpus("chain_lattice.json"))]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn derived_pair_round_trips_through_closure_member() {
    let out = liveref(&["lattice-certify", p(&corpus("chain.json")), p(&corpus("chain_lattice.json")), "--l", p(&corpus("chain_pairs.json"))]);
    let derived = json(&out)["derived"].clone();
    let query = tmp("derived.json", &serde_json::json!({ "pairs": [derived] }).to_string());
    let out = liveref(&["closure-member", p(&corpus("chain.json")), p(&query), "--l", p(&corpus("chain_pairs.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pairs"][0]["status"], "derived");
}

#[test]
fn emitted_lassos_and_correspondences_revalidate() {
    let (dbs, cand, pairs) = (corpus("dbs.json"), corpus("db_cand.json"), corpus("db_pairs.json"));
    let out = liveref(&["emptiness", p(&dbs), "--l", p(&pairs)]);
    assert_eq!(out.status.code(), Some(0));
    let w = tmp("witness.json", &json(&out)["witness"]["lasso"].to_string());
    let out = liveref(&["correspondence", "fwd", p(&dbs), p(&dbs), p(&cand), "--l", p(&pairs), "--m", p(&pairs), "--lasso", p(&w)]);
    assert_eq!(out.status.code(), Some(0));

    let out = liveref(&["correspondence", "bwd", p(&dbs), p(&dbs), p(&cand), "--l", p(&pairs), "--m", p(&pairs)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(!v["correspondences"].as_array().unwrap().is_empty());
    let saved = tmp("corr.json", &v.to_string());
    let out = liveref(&["correspondence", "bwd", p(&dbs), p(&dbs), p(&cand), "--l", p(&pairs), "--m", p(&pairs), "--check", p(&saved)]);
    assert_eq!(out.status.code(), Some(0));

    // A tampered mapping is rejected.
    let mut bad = v.clone();
    bad["correspondences"][0]["mapping"]["table"][1] = serde_json::json!(0);
    let saved = tmp("corr_bad.json", &bad.to_string());
    let out = liveref(&["correspondence", "bwd", p(&dbs), p(&dbs), p(&cand), "--l", p(&pairs), "--m", p(&pairs), "--check", p(&saved)]);
    assert_eq!(out.status.code(), Some(1));

    let out = liveref(&["lassos", p(&corpus("t1.json"))]);
    let v = json(&out);
    assert_eq!(v["lassos"].as_array().unwrap().len(), 1);
    assert_eq!(v["lassos"][0]["trace"], "<a>");
}

#[test]
fn esds_run_pipes_into_the_monitor() {
    let cfg = esds_data("esds_small.json");
    let run = liveref(&["esds-run", p(&cfg), "--seed", "7"]);
    assert_eq!(run.status.code(), Some(0));
    let again = liveref(&["esds-run", p(&cfg), "--seed", "7"]);
    assert_eq!(run.stdout, again.stdout);
    let other = liveref(&["esds-run", p(&cfg), "--seed", "8"]);
    assert_ne!(run.stdout, other.stdout);

    let mon = liveref_stdin(&["esds-monitor", "--family", "M-I"], &run.stdout);
    assert_eq!(mon.status.code(), Some(0));
    let v = json(&mon);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 12);
    assert!(v["pairs"].as_array().unwrap().iter().all(|s| s["status"] != "outstanding"));

    let f = liveref_stdin(&["esds-check-f"], &run.stdout);
    assert_eq!(f.status.code(), Some(0));
    assert_eq!(json(&f)["validated"], json(&f)["transitions"]);
    let f = liveref_stdin(&["esds-check-f", "-", "--mutation", "drop-add-constraints"], &run.stdout);
    assert_eq!(f.status.code(), Some(1));
    assert_eq!(json(&f)["counterexample"]["clause"], "live-fwd clause 2b");

    let log = tmp("run.log", &String::from_utf8(run.stdout.clone()).unwrap());
    for lat in ["lattice_req.json", "lattice_stab.json"] {
        let out = liveref(&["lattice-check", p(&esds_data(lat)), "--sample-log", p(&log)]);
        assert_eq!(out.status.code(), Some(0), "{lat}");
    }
}

#[test]
fn esds_lossy_and_spec_runs() {
    let cfg = esds_data("esds_small.json");
    let run = liveref(&["esds-run", p(&cfg), "--lossy", "0", "--bounds", "2000"]);
    assert_eq!(run.status.code(), Some(3));
    let mon = liveref_stdin(&["esds-monitor", "--family", "impl"], &run.stdout);
    assert_eq!(mon.status.code(), Some(1));

    let run = liveref(&["esds-run", p(&cfg), "--system", "esds-ii", "--bounds", "200"]);
    let g = liveref_stdin(&["esds-check-g"], &run.stdout);
    assert_eq!(g.status.code(), Some(0));
    assert_eq!(json(&g)["validated"], 200);
    let wrong = liveref_stdin(&["esds-check-f"], &run.stdout);
    assert_eq!(wrong.status.code(), Some(64));
}

#[test]
fn tampered_log_is_rejected() {
    let run = liveref(&["esds-run", p(&esds_data("esds_small.json")), "--bounds", "30"]);
    let text = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let cut: String = lines.iter().enumerate().filter(|(i, _)| *i != 5).map(|(_, l)| format!("{l}\n")).collect();
    let out = liveref_stdin(&["esds-monitor"], cut.as_bytes());
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("replay"));
}

#[test]
fn malformed_input_exits_64_naming_the_field() {
    let bad = tmp("bad.json", r#"{"states":["s0"],"start":["s0"],"steps":[["s0","a"]]}"#);
    let out = liveref(&["validate", p(&bad)]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("steps[0]"));

    let invalid = tmp("invalid.json", r#"{"states":["s0"],"start":[],"steps":[]}"#);
    let out = liveref(&["validate", p(&invalid)]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["valid"], false);

    let out = liveref(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn encodings_emit_loadable_automata() {
    let out = liveref(&["leadsto", p(&corpus("t1.json")), "--p", "s0", "--q", "s1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let auto = tmp("leadsto.json", &v["automaton"].to_string());
    let pairs = tmp("leadsto_pairs.json", &v["pairs"].to_string());
    let out = liveref(&["closure-member", p(&auto), p(&pairs)]);
    assert_eq!(out.status.code(), Some(0), "s0 leads to s1 in T1");

    let out = liveref(&["forestify", p(&corpus("cy3.json")), "--bounds", "2"]);
    let forest = tmp("forest.json", &json(&out)["automaton"].to_string());
    let out = liveref(&["reachable", p(&forest)]);
    assert_eq!(json(&out)["states"], serde_json::json!(["s0", "s0 t s1", "s0 t s1 t s2"]));
    assert_eq!(liveref(&["validate", p(&forest)]).status.code(), Some(0));
}

#[test]
fn machine_closure_and_reachability() {
    let out = liveref(&["machine-closure", p(&corpus("dbi.json")), "--l", p(&corpus("db_pairs.json"))]);
    assert_eq!(out.status.code(), Some(0));
    let out = liveref(&["reachable", p(&corpus("dbs.json")), "--bounds", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["partial"], true);
}
