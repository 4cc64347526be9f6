use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn rgw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgw")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok(args: &[&str]) -> Value {
    let out = rgw(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema"], "rgw/1");
    v
}

#[test]
fn minimal_tree_dimension() {
    let v = ok(&["dim", "--tree", &fixture("minimal.json"), "--palette", &fixture("palette.json"), "--n", "2"]);
    // One D-vertex of valency 2 with zero Chern number: 2(n-1) + 4 - 6 + 2 = 2
    // before dividing by the rescaling of its single level.
    assert_eq!((v["sum"].as_i64(), v["quotient"].as_i64(), v["closed_form"].as_i64()), (Some(2), Some(0), Some(0)));
}

#[test]
fn single_strip_dimension_is_zero() {
    let v = ok(&["dim", "--tree", &fixture("single_strip.json"), "--palette", &fixture("ribbon_palette.json"), "--n", "3"]);
    assert_eq!((v["sum"].as_i64(), v["closed_form"].as_i64()), (Some(0), Some(0)));
}

#[test]
fn gluing_one_level_each_gives_three() {
    let v = ok(&["glue", "--left", &fixture("glue_left.json"), "--right", &fixture("glue_right.json")]);
    let mut hs: Vec<i64> = v["results"].as_array().unwrap().iter().map(|r| r["h"].as_i64().unwrap()).collect();
    hs.sort();
    assert_eq!(hs, [0, 0, 1]);
    let v = ok(&["glue", "--left", &fixture("glue_left.json"), "--right", &fixture("glue_right_two_levels.json")]);
    assert_eq!(v["count"], 5);
}

#[test]
fn forgetting_a_mark_on_a_constant_disc() {
    let v = ok(&["forget", "--tree", &fixture("four_disc.json"), "--mark", "3"]);
    assert_eq!((v["case"].as_i64(), v["k"].as_i64()), (Some(3), Some(3)));
}

#[test]
fn obstructed_counts_fail_with_exact_audit() {
    let out = rgw(&["floer", "--counts", &fixture("counts_obstructed.json"), "--palette", &fixture("counts_obstructed_palette.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["audit"]["expected"], "3");
    assert_eq!(v["audit"]["scalar"], "3");
    assert_eq!(v["audit"]["passed"], true);
}

#[test]
fn unobstructed_counts_have_homology() {
    let v = ok(&["floer", "--counts", &fixture("counts_unobstructed.json"), "--palette", &fixture("counts_unobstructed_palette.json")]);
    assert_eq!(v["audit"]["scalar"], "0");
    let h = &v["homology"];
    assert!(h["rank"].as_u64().unwrap() <= h["generators"].as_u64().unwrap());
    assert_eq!(h["rank_bound_ok"], true);
}

#[test]
fn circle_page_table() {
    let v = ok(&["ss", "--complex", &fixture("circle.json")]);
    let one_one = serde_json::json!({ "0": 1, "1": 1 });
    assert_eq!(v["pages"][0]["page"], 2);
    assert_eq!(v["pages"][0]["dims"], one_one);
    assert_eq!(v["e_infinity"], one_one);
    let v = ok(&["ss", "--complex", &fixture("sphere_with_pair.json"), "--fringe", "kernel"]);
    assert_eq!(v["total_homology"], 2);
}

#[test]
fn gapped_homology() {
    // ∂y = T^{1/2} x, z free: one free summand and one torsion summand.
    let v = ok(&["homology", "--complex", &fixture("gapped.json")]);
    assert_eq!(v["betti"], 1);
    assert_eq!(v["torsion"], serde_json::json!(["1/2"]));
    let v = ok(&["homology", "--complex", &fixture("gapped.json"), "--energy-cut", "1/4"]);
    assert_eq!(v["betti"], 3);
}

#[test]
fn closure_and_boundary_of_a_breaking_strip() {
    let args = ["--tree", &fixture("broken_strip.json"), "--palette", &fixture("ribbon_palette.json")];
    let v = ok(&[&["closure"], &args[..]].concat());
    assert_eq!(v["count"], 2);
    let v = ok(&[&["boundary"], &args[..]].concat());
    assert_eq!(v["faces"][0]["kind"], 1);
    let out = rgw(&[&["boundary", "--dot"], &args[..]].concat());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("digraph faces"));
}

#[test]
fn shrink_and_enumerate() {
    let v = ok(&["shrink", "--tree", &fixture("five_vertex.json")]);
    assert_eq!(v["count"], 3);
    let v = ok(&["shrink", "--tree", &fixture("five_vertex.json"), "--level", "3"]);
    assert_eq!(v["count"], 1);
    let v = ok(&["enum", "--palette", &fixture("palette.json"), "--alpha", "A2+A1", "--m=-2,-1"]);
    let keys: std::collections::BTreeSet<&str> = v["trees"].as_array().unwrap().iter().map(|t| t["key"].as_str().unwrap()).collect();
    assert_eq!(keys.len(), v["count"].as_u64().unwrap() as usize);
    assert!(!keys.is_empty());
}

#[test]
fn validation_failures_exit_one() {
    let v = ok(&["validate", "--palette", &fixture("ribbon_palette.json"), "--tree", &fixture("decorated_strip.json")]);
    assert_eq!(v["ok"], true);
    let dir = std::env::temp_dir().join(format!("rgw-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad_palette.json");
    // A strip class must carry a Maslov index.
    std::fs::write(&bad, r#"{"classes":[{"id":"s","space":"STRIP(p,q)","pair_D":0,"c1_X":0,"area":"1"}]}"#).unwrap();
    let out = rgw(&["validate", "--palette", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rgw(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rgw(&["dim"]).status.code(), Some(2));
    assert_eq!(rgw(&["dim", "--tree", "/nonexistent/tree.json"]).status.code(), Some(2));
    let dir = std::env::temp_dir().join(format!("rgw-cli-usage-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let garbage = dir.join("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    let out = rgw(&["dim", "--tree", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let diagnostic: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diagnostic["ok"], false);
}

#[test]
fn selftest_is_deterministic() {
    let a = rgw(&["selftest", "--seed", "42"]);
    let b = rgw(&["selftest", "--seed", "42"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["suites"].as_array().unwrap().iter().all(|s| s["failures"].as_array().unwrap().is_empty()));
}
