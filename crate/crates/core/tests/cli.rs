//! End-to-end checks of the command-line interface: exit codes, JSON error
//! payloads, and emitted files.

use std::process::Command;

fn icnsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_icnsim"))
}

#[test]
fn topo_stats_reports_summary_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("net.txt");
    std::fs::write(&topo, "# tiny net\n0 1\n1 2\n2 3\n1 3\n").unwrap();
    let csv_path = dir.path().join("centrality.csv");
    let output = icnsim()
        .arg("topo-stats")
        .arg(&topo)
        .arg("--csv")
        .arg(&csv_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(summary["nodes"], 4);
    assert_eq!(summary["edges"], 4);
    assert_eq!(summary["connected"], true);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.starts_with("node,degree,betweenness\n"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn run_writes_reports_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    std::fs::write(
        &spec_path,
        r#"{
            "topology": {"edges": [[0,1],[1,2],[2,3],[3,4],[4,5]]},
            "workload": {
                "n_objects": 20,
                "popularity": {"zipf": {"exponent": 1.0}},
                "size": {"fixed": {"bytes": 100}},
                "n_requests": 300
            },
            "roles": {"n_servers": 1, "client_fraction": 0.4},
            "strategies": [{"placement": "lce"}, {"placement": "cachedbit", "search_radius": 1}],
            "cache": {"fraction_of_catalog": 0.1},
            "repetitions": 3,
            "base_seed": 5
        }"#,
    )
    .unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let output = icnsim().arg("run").arg(&spec_path).arg("--out").arg(out).output().unwrap();
        assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("BHR"));
        assert!(stdout.contains("FPR"));
    }
    for name in ["aggregate.json", "runs.csv", "resolved_config.json", "fig_byte_hit_rate.csv"] {
        let a = std::fs::read(out_a.join(name)).unwrap();
        let b = std::fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} not reproducible");
    }
    // The resolved config spells out every default.
    let resolved: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_a.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["warmup_fraction"], 0.25);
    assert_eq!(resolved["confidence"], 0.95);
    assert_eq!(resolved["miss_cost"], "actual");
    assert_eq!(resolved["roles"]["edge_degree_threshold"], 2);

    // Comparing the emitted report against itself round-trips.
    let output = icnsim()
        .arg("compare")
        .arg(out_a.join("aggregate.json"))
        .arg(out_b.join("aggregate.json"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("lce@A"));
    assert!(stdout.contains("lce@B"));
}

#[test]
fn failures_emit_machine_readable_json() {
    let output = icnsim().arg("run").arg("/nonexistent/spec.json").output().unwrap();
    assert!(!output.status.success());
    assert_eq!(output.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "io");
    assert!(err["error"]["message"].is_string());

    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("bad.txt");
    std::fs::write(&topo, "0 0\n").unwrap();
    let output = icnsim().arg("topo-stats").arg(&topo).output().unwrap();
    assert!(!output.status.success());
    let err: serde_json::Value = serde_json::from_slice(&output.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
    assert!(err["error"]["message"].as_str().unwrap().contains("line 1"));
}

#[test]
fn gen_workload_emits_catalog_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("net.txt");
    std::fs::write(&topo, "0 1\n1 2\n2 3\n").unwrap();
    let catalog_path = dir.path().join("catalog.csv");
    let trace_path = dir.path().join("trace.csv");
    let output = icnsim()
        .args(["gen-workload", "--objects", "10", "--zipf", "1.0", "--size-fixed", "100"])
        .args(["--seed", "3", "--requests", "50"])
        .arg("--topology")
        .arg(&topo)
        .arg("--catalog-out")
        .arg(&catalog_path)
        .arg("--trace-out")
        .arg(&trace_path)
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    let catalog = std::fs::read_to_string(&catalog_path).unwrap();
    assert!(catalog.starts_with("object,size,weight\n"));
    assert_eq!(catalog.lines().count(), 11);
    let trace = std::fs::read_to_string(&trace_path).unwrap();
    assert!(trace.starts_with("seq,client,object\n"));
    assert_eq!(trace.lines().count(), 51);
}
