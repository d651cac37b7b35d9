use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ncfa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncfa")).args(args).output().expect("spawn ncfa")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn irreps_json_lists_su2_weights() {
    let v = json_stdout(&ncfa(&["irreps", "--group", "su2", "--max-norm", "2"]));
    assert_eq!(v["count"], 5);
    let dims: Vec<u64> = v["irreps"].as_array().unwrap().iter().map(|i| i["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, [1, 2, 3, 4, 5]);
    assert_eq!(v["irreps"][4]["casimir"], 6.0);
    assert_eq!(v["manifest"]["group"], "su2");
}

#[test]
fn irreps_csv_writes_manifest_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("irreps.csv");
    let res = ncfa(&["irreps", "--group", "torus:2", "--max-norm", "1", "--format", "csv", "--out", path(&out)]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("lambda,dim,casimir,norm"));
    assert_eq!(lines.count(), 5);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("irreps.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["manifest"]["group"], "torus:2");
}

#[test]
fn laplace_is_square_integrable_but_not_smooth() {
    let m = r#"{"group":"su2","family":"laplace","t":1,"beta":1}"#;
    let v = json_stdout(&ncfa(&["diagnose", "--measure", m, "--report", "smooth"]));
    assert_eq!(v["result"]["verdict"], "not_smooth");
    let v = json_stdout(&ncfa(&["diagnose", "--measure", m, "--report", "l2", "--mode", "numeric"]));
    assert_eq!(v["result"]["verdict"], "converges");
}

#[test]
fn trace_report_reads_t_from_brownian() {
    let m = r#"{"group":"su2","family":"brownian","t":0.25}"#;
    let v = json_stdout(&ncfa(&["diagnose", "--measure", m, "--report", "trace"]));
    let r = &v["result"];
    let (a, b) = (r["trace_spectral"].as_f64().unwrap(), r["density_at_e"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-10 * a);
    assert_eq!(r["t"], 0.25);
}

#[test]
fn verify_quick_passes() {
    let v = json_stdout(&ncfa(&["verify", "--quick"]));
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

fn strip_timestamp(v: &mut Value) {
    v["manifest"].as_object_mut().unwrap().remove("timestamp");
}

#[test]
fn repeated_runs_are_identical() {
    let m = r#"{"group":"su2","family":"stable","t":1,"b":1,"alpha":0.5}"#;
    let args = ["diagnose", "--measure", m, "--report", "supersmooth"];
    let (mut a, mut b) = (json_stdout(&ncfa(&args)), json_stdout(&ncfa(&args)));
    strip_timestamp(&mut a);
    strip_timestamp(&mut b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn sampling_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let m = r#"{"group":"su2","family":"brownian","t":0.1}"#;
    let mut bytes = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("s{threads}.bin"));
        let res = Command::new(env!("CARGO_BIN_EXE_ncfa"))
            .env("NCFA_THREADS", threads)
            .args(["sample", "--measure", m, "--count", "10000", "--seed", "9", "--out", path(&out)])
            .output()
            .unwrap();
        assert!(res.status.success());
        bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sample_then_transform_matches_multiplier() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("haar.bin");
    let res = ncfa(&["sample", "--measure", "haar", "--group", "su2", "--n", "40000", "--seed", "3", "--out", path(&bin)]);
    let summary = json_stdout(&res);
    assert_eq!(summary["count"], 40000);
    let v = json_stdout(&ncfa(&["transform", "--samples", path(&bin), "--max-norm", "1.5"]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 4);
    assert_eq!(entries[0]["block"]["scalar"][0], 1.0);
    for e in &entries[1..] {
        let re = e["block"]["scalar"][0].as_f64().unwrap();
        assert!(re.abs() < 5.0 / 200.0, "haar coefficient {re}");
    }
    assert_eq!(v["manifest"]["seed"], 3);
}

#[test]
fn transform_then_synth_recovers_density() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("c.json");
    let m = r#"{"group":"su2","family":"brownian","t":0.5}"#;
    assert!(ncfa(&["transform", "--measure", m, "--out", path(&coeffs)]).status.success());
    let res = ncfa(&["synth", "--coeffs", path(&coeffs), "--grid", "9"]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|&(_, f)| f > 0.0));
    let v = json_stdout(&ncfa(&["diagnose", "--measure", m, "--report", "trace"]));
    let at_e = v["result"]["density_at_e"].as_f64().unwrap();
    assert!((rows[0].1 - at_e).abs() < 1e-9 * at_e);
}

#[test]
fn deconv_writes_report_and_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"group":"su2","signal":{"group":"su2","family":"brownian","t":0.1},
            "noise":{"group":"su2","family":"brownian","t":0.05},
            "n_values":[500,2000],"cutoff_rule":{"fixed":4.0},"eval_grid":64,"seed":11}"#,
    )
    .unwrap();
    let dens = dir.path().join("est.csv");
    let v = json_stdout(&ncfa(&["deconv", "--config", path(&cfg), "--emit-density", path(&dens)]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["manifest"]["seed"], 11);
    let text = std::fs::read_to_string(&dens).unwrap();
    assert!(text.starts_with("theta,f_est,f_true\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(ncfa(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ncfa(&["irreps"]).status.code(), Some(2));
}

#[test]
fn invalid_measure_reports_json_error() {
    let res = ncfa(&["transform", "--measure", r#"{"group":"su2","family":"gaussian","sigma2":-1}"#]);
    assert_eq!(res.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid-argument");
    assert!(err["error"]["message"].as_str().unwrap().contains("variance"));
}

#[test]
fn unsupported_group_is_reported() {
    let m = r#"{"group":"torus:2","family":"brownian","t":0.1}"#;
    let res = ncfa(&["sample", "--measure", m, "--count", "3", "--out", "/dev/null"]);
    assert_eq!(res.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "unsupported");
}
