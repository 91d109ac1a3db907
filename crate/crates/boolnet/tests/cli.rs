//! End-to-end checks of the CLI binary and its file formats.

use std::process::Command;

fn boolnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boolnet"))
}

#[test]
fn generate_minfs_train_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("cpar4.txt");

    let out = boolnet()
        .args(["generate", "--kind", "cpar", "--n", "4", "--out"])
        .arg(&data)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("4 4\n"));
    assert_eq!(text.lines().count(), 17);

    let out = boolnet().args(["minfs", "--data"]).arg(&data).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["order"], serde_json::json!([0, 1, 2, 3]));
    assert_eq!(report["nestedness"], serde_json::json!(1.0));

    let net_path = dir.path().join("net.txt");
    let out = boolnet()
        .args(["train", "--data"])
        .arg(&data)
        .args(["--loss", "llh", "--gates", "84", "--history", "250", "--seed", "5", "--network-out"])
        .arg(&net_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let result: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["reached_zero"], serde_json::json!(true));

    // The emitted network must parse and actually compute the function.
    let net = boolnet::NetworkStructure::read_file(&net_path).unwrap();
    let ds = boolnet::Dataset::read_file(&data).unwrap();
    let outputs = boolnet::evaluate(&net, ds.inputs()).unwrap();
    assert_eq!(&outputs, ds.targets());
}

#[test]
fn pairs_subcommand_reports_removed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.txt");
    std::fs::write(&series, "0010\n1010\n1110\n0010\n").unwrap();
    let out_path = dir.path().join("pairs.txt");
    let out = boolnet()
        .args(["pairs", "--in"])
        .arg(&series)
        .arg("--out")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["examples"], serde_json::json!(3));
    assert_eq!(report["removed_constant_targets"], serde_json::json!([2, 3]));
    let ds = boolnet::Dataset::read_file(&out_path).unwrap();
    assert_eq!((ds.n_features(), ds.n_targets()), (4, 2));
}

#[test]
fn malformed_inputs_fail_with_useful_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 1\n01x\n").unwrap();
    let out = boolnet().args(["train", "--data"]).arg(&bad).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");

    let out = boolnet()
        .args(["generate", "--kind", "nope", "--n", "3", "--out", "x.txt"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
