//! End-to-end CLI checks: artifact round-trips, exit-code contract,
//! help coverage, and rejection of malformed input.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_etgraph"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_error_json(out: &Output, expected_kind: &str) {
    let err = stderr(out);
    let line = err.lines().last().unwrap_or("");
    let parsed: serde_json::Value =
        serde_json::from_str(line).unwrap_or_else(|_| panic!("stderr is not JSON: {err}"));
    assert_eq!(parsed["error"]["kind"], expected_kind, "{err}");
    assert!(parsed["error"]["message"].is_string());
}

fn write_graph(dir: &Path) -> String {
    let path = dir.join("graph.json");
    let out = run(&[
        "graph", "--kind", "regular", "--V", "12", "--v", "4", "--seed", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path.to_str().unwrap().to_owned()
}

#[test]
fn artifacts_round_trip_through_consumers() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path());

    let spectrum = run(&["graph-spectrum", "--graph", &graph]);
    assert!(spectrum.status.success());
    assert!(stdout(&spectrum).starts_with("index,mu"));

    let quantized = run(&[
        "quantize", "--graph", &graph, "--family", "fourier", "--emit", "U", "--seed", "5",
    ]);
    assert!(quantized.status.success());
    let value: serde_json::Value = serde_json::from_str(&stdout(&quantized)).unwrap();
    assert_eq!(value["operator"], "U");
    assert_eq!(value["dim"], 48);

    let gaps = run(&["gaps", "--graph", &graph]);
    assert!(gaps.status.success());
    assert!(stdout(&gaps).starts_with("family,r,gap,condition_flags"));
    assert_eq!(stdout(&gaps).lines().count(), 4);

    let orbits = run(&["orbits", "--graph", &graph, "--nmax", "4"]);
    assert!(orbits.status.success());
    assert!(stdout(&orbits).lines().nth(2).unwrap().starts_with("2,0"));

    let bass = run(&["bass-check", "--graph", &graph, "--samples", "5"]);
    assert!(bass.status.success());
    for line in stdout(&bass).lines().skip(1) {
        let residual: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(residual <= 1e-8);
    }

    let both = run(&["spectrum", "--graph", &graph, "--r", "fourier", "--method", "both"]);
    assert!(both.status.success());
    let text = stdout(&both);
    assert!(text.contains(",theorem"));
    assert!(text.contains(",direct"));
}

#[test]
fn construct_emits_each_family() {
    for args in [
        vec!["construct", "--family", "neumann", "--dim", "7"],
        vec!["construct", "--family", "fourier", "--dim", "6"],
        vec!["construct", "--family", "et-hadamard", "--dim", "12"],
        vec!["construct", "--family", "et-character", "--prime", "13"],
        vec!["construct", "--family", "et-five"],
        vec!["construct", "--family", "et-search", "--dim", "4", "--seed", "2"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}: {}", stderr(&out));
        let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert!(value["dim"].as_u64().unwrap() >= 4 || args[2] == "neumann" || args[2] == "fourier");
        assert!(value["matrix"].is_object(), "{args:?}");
    }
}

#[test]
fn validation_failures_exit_2_with_json() {
    let dir = tempfile::tempdir().unwrap();

    // Inadmissible construction order.
    let out = run(&["construct", "--family", "et-hadamard", "--dim", "6"]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_json(&out, "validation");

    // Malformed graph JSON.
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"vertex_count\": 3, \"edges\": [[0,").unwrap();
    let out = run(&["gaps", "--graph", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_json(&out, "validation");

    // Empty graph rejected by the stats pipeline.
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, "{\"vertex_count\": 0, \"edges\": []}").unwrap();
    let out = run(&[
        "stats", "--graph", empty.to_str().unwrap(), "--family", "et-five", "--realizations",
        "2", "--seed", "1", "--out", dir.path().join("st").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_json(&out, "validation");

    // A numeric r has no matrices behind it, so the direct route refuses.
    let graph = write_graph(dir.path());
    let out = run(&["spectrum", "--graph", &graph, "--r", "0.25", "--method", "direct"]);
    assert_eq!(out.status.code(), Some(2));
    assert_error_json(&out, "validation");

    // Missing required flag and unknown flag are usage errors.
    let out = run(&["quantize", "--graph", &graph, "--emit", "U"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["gaps", "--graph", &graph, "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn nonconvergence_exits_3_and_still_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&[
        "search", "--dim", "3", "--seed", "1", "--max-iters", "300", "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_error_json(&out, "numerical");
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(value["converged"], false);
    let residual = value["residual"].as_f64().unwrap();
    assert!((residual - (1.5f64).sqrt()).abs() <= 1e-6);
}

#[test]
fn help_documents_every_flag() {
    let subcommands: [(&str, &[&str]); 10] = [
        ("construct", &["--family", "--dim", "--prime", "--char-index", "--seed", "--max-iters", "--out"]),
        ("graph", &["--kind", "--V", "--v", "--seed", "--out"]),
        ("graph-spectrum", &["--graph", "--out"]),
        ("quantize", &["--graph", "--family", "--emit", "--seed", "--out"]),
        ("bass-check", &["--graph", "--samples", "--out"]),
        ("spectrum", &["--graph", "--r", "--method", "--out"]),
        ("gaps", &["--graph", "--out"]),
        ("orbits", &["--graph", "--nmax", "--out"]),
        ("stats", &["--graph", "--family", "--realizations", "--seed", "--emit", "--out", "--jobs", "--bins", "--smax", "--lmax"]),
        ("search", &["--dim", "--seed", "--max-iters", "--out"]),
    ];
    for (name, flags) in subcommands {
        let out = run(&[name, "--help"]);
        assert!(out.status.success(), "{name} --help");
        let text = stdout(&out);
        for flag in flags {
            assert!(text.contains(flag), "{name} --help misses {flag}");
        }
    }
}
