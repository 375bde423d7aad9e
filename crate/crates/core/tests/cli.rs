use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn smoothlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smoothlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[test]
fn gen_then_dynamics_then_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = smoothlab(&["gen", "--sizes", "30,8", "--factor", "1.5", "--feature-dim", "4", "--seed", "3", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let edges = format!("{d}/graph.edges");
    let feats = format!("{d}/features.csv");
    let run = format!("{d}/run");
    let out = smoothlab(&[
        "dynamics", "--graph", &edges, "--features", &feats, "--model", "gcn-b", "--depth", "30",
        "--bias", "0.1", "--snapshots", "0,30", "--svg", "--out", &run,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = data_rows(&Path::new(&run).join("trace.csv"));
    assert_eq!(trace[0], "layer,d_m,envelope");
    assert_eq!(trace.len(), 32);
    for row in &trace[1..] {
        let cols: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(cols[1] <= cols[2] + 1e-7, "trace above envelope: {row}");
    }
    let snap = data_rows(&Path::new(&run).join("snapshot_30.csv"));
    assert_eq!(snap[0], "node_id,x,y,degree,component");
    assert_eq!(snap.len(), 39);
    assert!(Path::new(&run).join("snapshot_0.svg").exists());

    let bounds = format!("{d}/bounds");
    let out = smoothlab(&["bounds", "--graph", &edges, "--p", "0,0.5,0.9", "--out", &bounds]);
    assert!(out.status.success());
    let rows = data_rows(&Path::new(&bounds).join("bounds.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.ends_with(",true")));
}

#[test]
fn dropedge_dynamics_flags() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = smoothlab(&["dynamics", "--depth", "20", "--p", "0.5", "--layerwise", "--seed", "4", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(text.lines().next().unwrap().contains("p=0.5 layerwise=true"));
}

#[test]
fn check_suites_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    let out = smoothlab(&["check", "theorem4", "--p", "0", "--trials", "20", "--seed", "1", "--out", d]);
    assert!(out.status.success());
    let csv = data_rows(&dir.path().join("theorem4.csv"));
    assert!(csv[1..].iter().all(|r| r.ends_with(",true")));

    let out = smoothlab(&["check", "lemma1", "--trials", "1000", "--seed", "1", "--out", d]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("lemma1 cases=4000 violations=0"), "{stdout}");

    let out = smoothlab(&["check", "theorem5", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let out = smoothlab(&["check", "lemma1", "--p", "0.5", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn model_flag_validation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    // alpha is not a parameter of plain GCN
    let out = smoothlab(&["dynamics", "--model", "gcn", "--alpha", "0.3", "--depth", "3", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let out = smoothlab(&["dynamics", "--model", "resgcn", "--alpha", "1.5", "--depth", "3", "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    let out = smoothlab(&["dynamics", "--model", "appnp", "--beta", "0.3", "--depth", "3", "--relu", "--out", d]);
    assert!(out.status.success());
}

#[test]
fn gen_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = smoothlab(&["gen", "--sizes", "20,5", "--seed", "9", "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
    }
    for f in ["graph.edges", "features.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}
