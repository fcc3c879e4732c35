use std::path::Path;
use std::process::{Command, Output};

fn lrp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrp")).args(args).arg("--out").arg(dir).env_remove("LRP_SEED").output().unwrap()
}

fn manifest(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = String::from_utf8(out.stdout.clone()).unwrap();
    serde_json::from_str(&std::fs::read_to_string(path.trim()).unwrap()).unwrap()
}

fn artifact(dir: &Path, m: &serde_json::Value, suffix: &str) -> String {
    let name = m["artifacts"].as_array().unwrap().iter().find(|a| a.as_str().unwrap().ends_with(suffix)).unwrap();
    std::fs::read_to_string(dir.join(name.as_str().unwrap())).unwrap()
}

#[test]
fn sample_emits_one_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrp(dir.path(), &["sample", "--beta", "1", "--n", "8", "--replicas", "1"]);
    let m = manifest(&out);
    let text = artifact(dir.path(), &m, "windows.jsonl");
    assert_eq!(text.lines().count(), 1);
    let w: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(w["lo"], -256);
    assert_eq!(w["hi"], 256);
    assert!(m["git_describe"].is_string());
    assert!(m["wall_time_secs"].as_f64().unwrap() >= 0.0);
}

#[test]
fn scan_is_byte_identical_across_runs_and_threads() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["scan-point", "--beta", "0.5,2", "--n-min", "3", "--n-max", "6", "--replicas", "20", "--seed", "9"];
    let ma = manifest(&lrp(a.path(), &[&args[..], &["--threads", "1"]].concat()));
    let mb = manifest(&lrp(b.path(), &[&args[..], &["--threads", "3"]].concat()));
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    for suffix in ["replicas.csv", "summary.csv", "plot.svg"] {
        assert_eq!(artifact(a.path(), &ma, suffix), artifact(b.path(), &mb, suffix));
    }
    let summary = artifact(a.path(), &ma, "summary.csv");
    assert_eq!(summary.lines().count(), 1 + 2 * 4);
    assert_eq!(ma["summary"].as_array().unwrap().len(), 2);
    let run_id = ma["run_id"].as_str().unwrap();
    assert!(ma["artifacts"].as_array().unwrap().iter().all(|x| x.as_str().unwrap().contains(run_id)));
}

#[test]
fn fit_and_plot_read_scan_output() {
    let dir = tempfile::tempdir().unwrap();
    let m =
        manifest(&lrp(dir.path(), &["scan-box", "--beta", "1", "--n-min", "3", "--n-max", "6", "--replicas", "15"]));
    let names: Vec<String> =
        m["artifacts"].as_array().unwrap().iter().map(|a| a.as_str().unwrap().to_string()).collect();
    let replicas = dir.path().join(names.iter().find(|n| n.ends_with("replicas.csv")).unwrap());
    let summary = dir.path().join(names.iter().find(|n| n.ends_with("summary.csv")).unwrap());
    let f = manifest(&lrp(dir.path(), &["fit", "--input", replicas.to_str().unwrap()]));
    assert_eq!(f["summary"][0]["kind"], "box");
    assert!(f["summary"][0]["fit"]["delta"].is_number());
    let p = manifest(&lrp(dir.path(), &["plot", "--input", summary.to_str().unwrap()]));
    assert!(artifact(dir.path(), &p, "plot.svg").starts_with("<svg"));
}

#[test]
fn quantiles_feed_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--beta", "1", "--replicas", "100", "--seed", "4"];
    let q = manifest(&lrp(dir.path(), &[&["quantiles", "--n-min", "1", "--n-max", "10"][..], &common].concat()));
    let table = dir.path().join(
        q["artifacts"]
            .as_array()
            .unwrap()
            .iter()
            .find(|a| a.as_str().unwrap().ends_with("quantiles.json"))
            .unwrap()
            .as_str()
            .unwrap(),
    );
    let r = manifest(&lrp(
        dir.path(),
        &[&["recursion", "--n-min", "9", "--n-max", "10", "--quantiles", table.to_str().unwrap()][..], &common]
            .concat(),
    ));
    let csv = artifact(dir.path(), &r, "recursion.csv");
    assert!(csv.lines().nth(1).unwrap().ends_with("vacuous"));
    // a table covering too few scales is a dependency failure
    let bad = lrp(
        dir.path(),
        &[&["recursion", "--n-min", "9", "--n-max", "12", "--quantiles", table.to_str().unwrap()][..], &common]
            .concat(),
    );
    assert_eq!(bad.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(err["error"], "dependency");
}

#[test]
fn small_campaigns_run() {
    let dir = tempfile::tempdir().unwrap();
    let g =
        manifest(&lrp(dir.path(), &["goodpairs", "--beta", "1", "--n-min", "2", "--n-max", "3", "--replicas", "200"]));
    assert!(g["summary"]["max_abs_z"].is_number());
    let f =
        manifest(&lrp(dir.path(), &["firework", "--beta", "1", "--r-min", "2", "--r-max", "5", "--replicas", "500"]));
    assert_eq!(f["summary"][0]["containment_violations"], 0);
    let d = manifest(&lrp(dir.path(), &["dominance", "--beta", "1", "--n", "4", "--replicas", "40"]));
    assert_eq!(d["summary"][0]["report"]["coupling_violations"], 0);
    let b =
        manifest(&lrp(dir.path(), &["baseline", "--beta", "0.5", "--n-min", "3", "--n-max", "6", "--replicas", "20"]));
    assert!(b["summary"][0]["slope"]["slope"].is_number());
    let r = manifest(&lrp(dir.path(), &["resist", "--beta", "2", "--n", "5", "--stat", "tilde", "--replicas", "10"]));
    assert_eq!(artifact(dir.path(), &r, "replicas.csv").lines().count(), 11);
}

#[test]
fn invalid_configuration_exits_with_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["scan-point", "--beta", "-1"][..],
        &["scan-point", "--n-min", "9", "--n-max", "3"],
        &["recursion", "--big-m", "1.5"],
        &["quantiles", "--replicas", "10", "--n-max", "6"],
        &["no-such-command"],
    ] {
        let out = lrp(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"], "usage");
    }
}

#[test]
fn precedence_file_env_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"seed": 1, "replicas": 7, "n_max": 9}"#).unwrap();
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_lrp"));
        c.args(["sample", "--print-config", "--config", cfg.to_str().unwrap()]);
        if let Some(s) = flag {
            c.args(["--seed", s]);
        }
        c.env_remove("LRP_SEED");
        if let Some(e) = env {
            c.env("LRP_SEED", e);
        }
        let v: serde_json::Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        (v["seed"].as_u64().unwrap(), v["replicas"].as_u64().unwrap())
    };
    assert_eq!(run(None, None), (1, 7));
    assert_eq!(run(Some("2"), None), (2, 7));
    assert_eq!(run(Some("2"), Some("3")), (3, 7));
}
