use std::path::PathBuf;
use std::process::{Command, Output};

fn tce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tce"))
        .args(args)
        .output()
        .expect("spawn tce")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tce-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn orbit_is_deterministic() {
    let a = tce(&["orbit", "--samples", "4", "--seed", "7"]);
    let b = tce(&["orbit", "--samples", "4", "--seed", "7"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("point_id,t,re,im"));
    assert!(lines.count() > 0);
}

#[test]
fn unknown_config_field_exits_2() {
    let path = scratch("bad.json");
    std::fs::write(&path, r#"{"bogus": 1}"#).unwrap();
    let out = tce(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn malformed_config_exits_2() {
    let path = scratch("broken.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(
        tce(&["orbit", "--config", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn golden_partition_lists_seven_atoms_and_two_pieces() {
    let path = scratch("partition.json");
    let out = tce(&["partition", "--max-w", "6", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["golden"], true);
    assert_eq!(doc["atoms"].as_array().unwrap().len(), 7);
    assert_eq!(doc["extra"].as_array().unwrap().len(), 2);
}

#[test]
fn return_rows_agree() {
    let out = tce(&["return", "--samples", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.ends_with(",true")), "{text}");
}

#[test]
fn renorm_reports_each_step() {
    let out = tce(&["renorm", "--depth", "2", "--samples", "8"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["certified_depth"], 2);
    assert_eq!(doc["conjugacy"].as_array().unwrap().len(), 2);
    assert_eq!(doc["pass"], true);
}
