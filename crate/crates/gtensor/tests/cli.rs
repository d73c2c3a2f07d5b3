//! CLI smoke tests driving the compiled binary end to end.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gtensor"))
}

fn run_ok(args: &[&str]) -> String {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

#[test]
fn graph_gen_info_round_trip() {
    let dir = tempdir();
    let path = dir.join("k4.graph");
    run_ok(&["graph", "gen", "clique", "4", "--out", path.to_str().unwrap()]);
    let info = run_ok(&["graph", "info", path.to_str().unwrap()]);
    assert!(info.contains("vertices 4"), "{info}");
    assert!(info.contains("edges 6"), "{info}");
}

#[test]
fn tensor_and_circuit_pipeline() {
    let dir = tempdir();
    let graph = dir.join("c4.graph");
    let tensor = dir.join("c4.tensor");
    let circuit = dir.join("c4.circuit");
    run_ok(&["graph", "gen", "cycle", "4", "--out", graph.to_str().unwrap()]);
    run_ok(&[
        "tensor",
        "graph",
        "--graph",
        graph.to_str().unwrap(),
        "--n",
        "2",
        "--out",
        tensor.to_str().unwrap(),
    ]);
    run_ok(&[
        "circuit",
        "build",
        "treedec",
        "--graph",
        graph.to_str().unwrap(),
        "--n",
        "2",
        "--out",
        circuit.to_str().unwrap(),
    ]);
    let check = run_ok(&[
        "circuit",
        "check",
        "--circuit",
        circuit.to_str().unwrap(),
        "--tensor",
        tensor.to_str().unwrap(),
        "--batches",
        "5",
    ]);
    assert!(check.contains("match"), "{check}");
}

#[test]
fn bound_command_reports_derivation() {
    let text = run_ok(&["bound", "--d", "4", "--method", "treewidth"]);
    assert!(text.contains("5/2"), "{text}");
    let json = run_ok(&["--format", "json", "bound", "--d", "4", "--method", "rank"]);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["command"], "bound");
    assert!(value["omega_table"].as_str().unwrap().contains("tau 4"));
    // identical inputs reproduce identical numeric payloads
    let again = run_ok(&["--format", "json", "bound", "--d", "4", "--method", "rank"]);
    let v2: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(value["result"], v2["result"]);
}

#[test]
fn laser_commands() {
    let text = run_ok(&["laser", "tau-k4", "--q", "7", "--gamma", "0.0"]);
    assert!(text.contains("0.772942"), "{text}");
    let sweep = run_ok(&["laser", "sweep", "--sweep", "120"]);
    assert!(sweep.contains("pass"), "{sweep}");
}

#[test]
fn reduce_permanent_roundtrip() {
    let dir = tempdir();
    let m = dir.join("m.txt");
    std::fs::write(&m, "1 2\n3 4\n").unwrap();
    let out = run_ok(&["reduce", "permanent", "--matrix", m.to_str().unwrap()]);
    assert!(out.contains("permanent = 10"), "{out}");
}

#[test]
fn custom_omega_table_flows_through_config() {
    let dir = tempdir();
    let table = dir.join("omega.table");
    // a different square exponent changes the d=3 rank bound
    std::fs::write(&table, "omega 1/2 2.046681\nomega 1/1 2.372865\nomega 2/1 3.256689\ntau 4 0.772318\n").unwrap();
    let config = dir.join("config.json");
    std::fs::write(
        &config,
        format!("{{\"omega_table_path\": {:?}}}", table.to_str().unwrap()),
    )
    .unwrap();
    let out = run_ok(&[
        "--config",
        config.to_str().unwrap(),
        "bound",
        "--d",
        "3",
        "--method",
        "rank",
    ]);
    // 2/3 * 2.372865 = 1.581910
    assert!(out.contains("1.581910"), "{out}");
    let out = run_ok(&["bound", "--d", "3", "--method", "rank"]);
    assert!(out.contains("1.583652"), "{out}");
}

#[test]
fn usage_errors_exit_two() {
    let out = bin().args(["bound", "--d", "4", "--method", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["definitely-not-a-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tw_falls_back_to_bounds_on_large_graphs() {
    let dir = tempdir();
    let graph = dir.join("grid56.graph");
    run_ok(&["graph", "gen", "grid", "5", "6", "--out", graph.to_str().unwrap()]);
    let out = run_ok(&["tw", "--graph", graph.to_str().unwrap()]);
    assert!(out.contains("Interval"), "{out}");
}

#[test]
fn tw_emits_pace_format() {
    let dir = tempdir();
    let graph = dir.join("k4.graph");
    run_ok(&["graph", "gen", "clique", "4", "--out", graph.to_str().unwrap()]);
    let out = run_ok(&["tw", "--graph", graph.to_str().unwrap()]);
    assert!(out.contains("s td"), "{out}");
    let line = run_ok(&["tw", "--graph", graph.to_str().unwrap(), "--line"]);
    assert!(line.contains("Exact") && line.contains('4'), "{line}");
}

fn tempdir() -> std::path::PathBuf {
    let base = std::env::temp_dir().join(format!(
        "gtensor-cli-test-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    if !Path::new(&base).exists() {
        std::fs::create_dir_all(&base).unwrap();
    }
    base
}
