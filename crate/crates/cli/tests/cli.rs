use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn phinet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phinet"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn karate(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/karate").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phinet(dir.path(), &["infer"]).status.code(), Some(1));
    assert_eq!(phinet(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(phinet(dir.path(), &["--help"]).status.code(), Some(0));
    let edges = karate("edges.csv");
    let out = phinet(
        dir.path(),
        &["evaluate", "--graph", s(&edges), "--labels", "x.csv", "--relation", "ordered:2"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_and_malformed_input_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phinet(dir.path(), &["ingest", "--graph", "nope.csv"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.csv"), "source,target,weight\na,b,many\n").unwrap();
    let out = phinet(dir.path(), &["ingest", "--graph", "bad.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn model_and_numeric_errors() {
    let dir = tempfile::tempdir().unwrap();
    let edges = karate("edges.csv");
    std::fs::write(dir.path().join("friends.csv"), "source,target,relation\n1,2,1\n1,3,1\n2,3,1\n").unwrap();
    let out = phinet(
        dir.path(),
        &["fit", "--graph", s(&edges), "--labels", "friends.csv", "--negatives", "labeled"],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let out = phinet(dir.path(), &["infer", "--graph", s(&edges), "--coeffs", "nan,-1,0"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn default_coefficients_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let edges = karate("edges.csv");
    let out = phinet(dir.path(), &["infer", "--graph", s(&edges), "--default-coeffs", "--out", "kc.csv"]);
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("kc.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["coefficients"]["a"], 1.0);
    assert_eq!(meta["coefficients"]["b"], -1.0);
    assert_eq!(meta["dyads"], 561);
    assert_eq!(meta["manifest"], "kc.csv.manifest.json");

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("kc.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "infer");
    assert!(manifest["outputs"]["kc.csv"].is_string());
    assert!(manifest["outputs"]["kc.csv.meta.json"].is_string());
    assert_eq!(manifest["inputs"].as_object().unwrap().len(), 1);

    let csv = std::fs::read_to_string(dir.path().join("kc.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("source,target,phi,sign"));
    assert_eq!(csv.lines().count(), 562);
}

#[test]
fn stdout_matches_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let edges = karate("edges.csv");
    let out = phinet(dir.path(), &["marginals", "--graph", s(&edges)]);
    assert!(out.status.success());
    let file = phinet(dir.path(), &["marginals", "--graph", s(&edges), "--out", "m.csv"]);
    assert!(file.status.success());
    assert_eq!(out.stdout, std::fs::read(dir.path().join("m.csv")).unwrap());
    let header = String::from_utf8_lossy(&out.stdout).lines().next().unwrap().to_owned();
    assert_eq!(header, "source,target,A,Xi,p_under,p_eq,p_over");
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let edges = karate("edges.csv");
    let rel = karate("faction_relations.csv");
    let args = ["compare", "--graph", s(&edges), "--labels", s(&rel), "--negatives", "labeled", "--format", "json"];
    let one = phinet(dir.path(), &[&["--threads", "1"], &args[..]].concat());
    let many = phinet(dir.path(), &[&["--threads", "4"], &args[..]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, many.stdout);
    let cmp: serde_json::Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(cmp["methods"].as_array().unwrap().len(), 3);
}

#[test]
fn simulated_data_flows_through_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("synth.json"),
        r#"{"nodes": 30, "groups": 3, "p_within_positive": 0.5, "p_cross_negative": 0.5,
            "activity_mu": 0.0, "activity_sigma": 0.5, "interactions": 2000,
            "beta_positive": 3.0, "beta_negative": 0.3, "surveyed_fraction": 0.8, "seed": 1}"#,
    )
    .unwrap();
    assert!(phinet(dir.path(), &["simulate", "--config", "synth.json", "--out-dir", "sim"]).status.success());
    let out = phinet(
        dir.path(),
        &["evaluate", "--graph", "sim/edges.csv", "--labels", "sim/relations.csv", "--folds", "3", "--format", "csv"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("method,sensitivity"));
    assert!(phinet(dir.path(), &["infer", "--graph", "sim/edges.csv", "--out", "signed.csv"]).status.success());
    let out = phinet(
        dir.path(),
        &["triads", "--signed", "signed.csv", "--attributes", "sim/groups.csv", "--group-by", "group", "--format", "json"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let reports: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 3);
}

#[test]
fn bad_synth_config_is_a_model_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("synth.json"),
        r#"{"nodes": 30, "groups": 3, "p_within_positive": 0.5, "p_cross_negative": 0.5,
            "activity_mu": 0.0, "activity_sigma": 0.5, "interactions": 2000,
            "beta_positive": 0.5, "beta_negative": 0.3, "surveyed_fraction": 0.8, "seed": 1}"#,
    )
    .unwrap();
    let out = phinet(dir.path(), &["simulate", "--config", "synth.json", "--out-dir", "sim"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("sim/edges.csv").exists());
}
