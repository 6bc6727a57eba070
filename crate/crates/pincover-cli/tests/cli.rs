use std::process::{Command, Output};

use serde_json::Value;

fn pincover(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pincover")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = pincover(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

#[test]
fn projective_plane_counts() {
    assert_eq!(json(&["descend", "rp2", "--kind", "pin-"])["results"]["count"], 2);
    assert_eq!(json(&["descend", "rp2", "--kind", "pin+"])["results"]["count"], 0);
}

#[test]
fn klein_bottle_homology() {
    let h1 = &json(&["homology", "k2"])["results"]["h1"];
    assert_eq!(h1["free"], 1);
    assert_eq!(h1["torsion"], serde_json::json!([2]));
}

#[test]
fn obstructions_and_covermaps() {
    let r = json(&["obstructions", "k2"]);
    assert_eq!(r["results"]["count_pin_plus"], 4);
    let m = json(&["covermaps", "k2"]);
    assert_eq!(m["results"]["push_z"], serde_json::json!([[2, 0], [0, 1]]));
    assert_eq!(m["results"]["splitting_holds"], true);
}

#[test]
fn structures_listing() {
    let r = json(&["structures", "t2", "--kind", "pin-"]);
    assert_eq!(r["results"].as_array().unwrap().len(), 4);
    assert_eq!(pincover(&["structures", "k2", "--kind", "pin-"]).status.code(), Some(2));
}

#[test]
fn output_is_byte_identical() {
    for args in [&["moebius"][..], &["pinors", "check", "moebius", "--structure", "2", "--kind", "pin-", "--sign", "-"]]
    {
        assert_eq!(pincover(args).stdout, pincover(args).stdout);
    }
}

#[test]
fn pinor_check_certifies() {
    let r = json(&["pinors", "check", "k2", "--structure", "0", "--kind", "pin+", "--sign", "+", "--grid", "8"]);
    assert_eq!(r["results"]["passed"], true);
    let r = json(&["pinors", "check", "k2", "--structure", "1", "--kind", "pin+", "--sign", "+"]);
    assert_eq!(r["results"]["invariant_fields"], false);
}

#[test]
fn exit_codes() {
    assert_eq!(pincover(&["homology", "nowhere"]).status.code(), Some(2));
    assert_eq!(pincover(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        pincover(&["pinors", "check", "t2", "--structure", "0", "--kind", "pin+", "--sign", "+"]).status.code(),
        Some(2)
    );
    let v = pincover(&["verify", "--grid", "8"]);
    assert_eq!(v.status.code(), Some(0));
    let v = pincover(&["verify", "--tolerance", "0"]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn csv_and_table_formats() {
    let out = pincover(&["--format", "csv", "surfaces"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,label,word,euler_characteristic"));
    assert!(text.lines().any(|l| l.starts_with("k2,K2,abab⁻¹,0,false")));
    let out = pincover(&["--format", "table", "homology", "t2"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("h1.free"));
}
