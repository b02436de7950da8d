use std::path::Path;
use std::process::{Command, Output};

fn gifs_lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gifs-lab"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_then_witness_then_certify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gifs_lab(d, &["build-balanced", "--q", "2", "--profile", "2,2,8", "--out", "tree.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&d.join("tree.report.json"));
    assert_eq!(report["passed"], true);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
    assert!(d.join("tree.svg").exists());

    assert_eq!(code(&gifs_lab(d, &["verify", "--tree", "tree.json"])), 0);

    assert_eq!(code(&gifs_lab(d, &["witness", "--tree", "tree.json", "--out", "sys.json"])), 0);
    let sys = json(&d.join("sys.json"));
    assert_eq!(sys["maps"].as_array().unwrap().len(), 2);
    assert!(sys["maps"].as_array().unwrap().iter().all(|m| m["declared_bound"] == 0.5));

    assert_eq!(code(&gifs_lab(d, &["certify", "--system", "sys.json"])), 0);
    let cert = json(&d.join("certificate.json"));
    assert_eq!(cert["passed"], true);
}

#[test]
fn invalid_parameters_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gifs_lab(d, &["build-balanced", "--q", "1.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2"));
    let o = gifs_lab(d, &["build-balanced", "--profile", "2,1,8"]);
    assert_eq!(code(&o), 2);
    assert!(!d.join("tree.json").exists());
    assert_eq!(code(&gifs_lab(d, &["verify", "--tree", "missing.json"])), 2);
    assert_eq!(code(&gifs_lab(d, &["no-such-command"])), 2);
    assert_eq!(code(&gifs_lab(d, &["--help"])), 0);
}

#[test]
fn tampered_declared_bound_fails_certification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gifs_lab(d, &["build-balanced"]);
    gifs_lab(d, &["witness", "--tree", "tree.json", "--out", "sys.json"]);
    let text = std::fs::read_to_string(d.join("sys.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["maps"][0]["declared_bound"] = serde_json::json!(0.3);
    std::fs::write(d.join("bad.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = gifs_lab(d, &["certify", "--system", "bad.json", "--report", "bad.report.json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&d.join("bad.report.json"))["passed"], false);
}

#[test]
fn outputs_are_deterministic() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            for args in [
                &["build-balanced"][..],
                &["witness", "--tree", "tree.json", "--out", "sys.json"],
                &["attractor", "--system", "sys.json", "--svg", "trace.svg"],
                &["certify", "--system", "sys.json"],
                &["extend", "--system", "sys.json", "--dim", "2", "--samples", "500", "--seed", "3"],
                &["appendix-demo", "--n", "5,10", "--report", "app.json"],
            ] {
                assert_eq!(code(&gifs_lab(d, args)), 0, "{args:?}");
            }
            [
                "tree.json",
                "tree.report.json",
                "tree.svg",
                "sys.json",
                "attractor.json",
                "attractor.report.json",
                "trace.csv",
                "trace.svg",
                "certificate.json",
                "extended.json",
                "extended.report.json",
                "appendix.csv",
                "appendix.svg",
                "app.json",
            ]
            .map(|f| std::fs::read(d.join(f)).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn appendix_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&gifs_lab(d, &["appendix-demo", "--n", "5"])), 0);
    let csv = std::fs::read_to_string(d.join("appendix.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 5.0);
    assert!((row[1] - 0.2236).abs() < 1e-3);
    assert_eq!(row[2], 1.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("run.toml"), "[build-balanced]\nq = 3.0\nout = \"from_file.json\"\n").unwrap();
    assert_eq!(code(&gifs_lab(d, &["--config", "run.toml", "build-balanced", "--q", "2.5"])), 0);
    let report = json(&d.join("from_file.report.json"));
    assert_eq!(report["config"]["q"], 2.5);
    assert_eq!(report["q"], 2.5);
    std::fs::write(d.join("bad.toml"), "[build-balanced]\nqq = 3.0\n").unwrap();
    assert_eq!(code(&gifs_lab(d, &["--config", "bad.toml", "build-balanced"])), 2);
}

#[test]
fn union_refine_premeasure_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gifs_lab(d, &["build-balanced"]);
    assert_eq!(code(&gifs_lab(d, &["refine", "--tree", "tree.json", "--r", "0.3"])), 0);
    assert_eq!(json(&d.join("refined.json"))["maps"].as_array().unwrap().len(), 4);
    assert_eq!(code(&gifs_lab(d, &["union", "--tree", "tree.json", "--points", "5"])), 0);
    assert_eq!(code(&gifs_lab(d, &["certify", "--system", "union.json"])), 0);
    assert_eq!(code(&gifs_lab(d, &["attractor", "--system", "union.json"])), 0);
    assert_eq!(json(&d.join("attractor.json"))["points"].as_array().unwrap().len(), 33);
    let o = gifs_lab(
        d,
        &["premeasure", "--cantor", "6", "--gauge", "t^0.6309297535714574", "--delta", "0.01", "--report", "pm.json"],
    );
    assert_eq!(code(&o), 0);
    let v = json(&d.join("pm.json"))["cover"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-9);
    assert_eq!(
        code(&gifs_lab(d, &["export", "--system", "union.json", "--csv", "k.csv", "--json", "t.json", "--svg", "k.svg"])),
        0
    );
    assert_eq!(std::fs::read_to_string(d.join("k.csv")).unwrap().lines().count(), 33);
}
