use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gaussmap(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaussmap"));
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn hyperboloid_full_passes_every_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        gaussmap(&["analyze", "--config", "builtin:hyperboloid-full", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(dir.path());
    let names: Vec<&str> = r["analyses"].as_array().unwrap().iter().map(|a| a["analysis"].as_str().unwrap()).collect();
    assert_eq!(names, ["fundamental_forms", "codazzi", "energy_variation", "reconstruct", "legendre", "theorem_check"]);
    for f in ["figure.svg", "finiteness.csv", "metric.csv", "timings.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert_eq!(r["config"]["tolerances"]["holonomy"], 1e-6);
    assert_eq!(r["seed"], r["config"]["seed"]);
}

#[test]
fn affine_theorem_check_exits_one_and_cites_pinching() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaussmap(&["theorem", "--config", "builtin:affine-theorem", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("curvature not pinched negative"));
    assert!(std::fs::read_to_string(dir.path().join("report.json"))
        .unwrap()
        .contains("curvature not pinched negative"));
}

#[test]
fn negative_extent_exits_two_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"surface": {"family": "hyperboloid"}, "chart": {"extent": -1.0, "spacing": 0.05}}"#)
        .unwrap();
    let out_dir = dir.path().join("out");
    let out = gaussmap(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chart.extent"));
    assert!(!out_dir.exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, r#"{"surface": {"family": "hyperboloid"}, "chrat": {}}"#).unwrap();
    let p = cfg.to_str().unwrap();
    assert_eq!(gaussmap(&["analyze", "--config", p], &[]).status.code(), Some(2));
    assert_eq!(gaussmap(&["analyze", "--config", "builtin:nope"], &[]).status.code(), Some(2));
    assert_eq!(gaussmap(&["analyze", "--config", "/does/not/exist.json"], &[]).status.code(), Some(2));
    assert_eq!(gaussmap(&["analyze"], &[]).status.code(), Some(2));
    let bad_threads = gaussmap(&["analyze", "--config", "builtin:hyperboloid-bump"], &[("TOOL_THREADS", "zero")]);
    assert_eq!(bad_threads.status.code(), Some(2));
}

#[test]
fn reports_are_byte_identical_and_order_flag_applies() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, order: &str| {
        let d = dir.path().join(name);
        let out = gaussmap(
            &[
                "analyze",
                "--config",
                "builtin:hyperboloid-bump",
                "--out",
                d.to_str().unwrap(),
                "--order",
                order,
                "--seed",
                "11",
            ],
            &[("TOOL_THREADS", "1")],
        );
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(d.join("report.json")).unwrap()
    };
    let (a, b) = (run("a", "4"), run("b", "4"));
    assert_eq!(a, b);
    let r: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(r["config"]["order"], 4);
    assert_eq!(r["seed"], 11);
}

#[test]
fn sampled_surface_runs_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("u,v,value\n");
    for j in 0..=40 {
        for i in 0..=40 {
            let (u, v) = (-1.0 + 0.05 * i as f64, -1.0 + 0.05 * j as f64);
            csv.push_str(&format!("{u},{v},{}\n", (1.0 + u * u + v * v).sqrt()));
        }
    }
    std::fs::write(dir.path().join("f.csv"), csv).unwrap();
    let cfg = dir.path().join("s.json");
    std::fs::write(
        &cfg,
        r#"{"name": "sampled", "surface": {"family": "sampled", "path": "f.csv"},
            "chart": {"extent": 0.8, "spacing": 0.05},
            "analyses": {"fundamental_forms": true, "codazzi": false, "energy_variation": true, "reconstruct": false}}"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = gaussmap(&["analyze", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()], &[]);
    assert_ne!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out_dir);
    assert_eq!(r["analyses"][0]["metrics"]["spacelike"]["pass"], true);
    assert_eq!(r["analyses"][1]["pass"], true);

    std::fs::write(
        &cfg,
        r#"{"surface": {"family": "sampled", "path": "f.csv"}, "chart": {"extent": 2.0, "spacing": 0.05}}"#,
    )
    .unwrap();
    assert_eq!(gaussmap(&["analyze", "--config", cfg.to_str().unwrap()], &[]).status.code(), Some(2));
}

#[test]
fn figure_subcommand_draws_the_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let out = gaussmap(&["figure", "--config", "builtin:three-point", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let svg = std::fs::read_to_string(dir.path().join("figure.svg")).unwrap();
    assert_eq!(svg.matches("<path").count(), 3);
}
