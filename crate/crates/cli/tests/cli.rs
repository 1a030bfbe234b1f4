use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use fkgrad::{extract_chain, parse_urdf, FkEngine};
use serde_json::Value;

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str, contents: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

fn fkgrad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkgrad"))
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

const SINGLE_JOINT: &str = r#"<robot name="single">
  <link name="base"/><link name="arm"/><link name="tip"/>
  <joint name="yaw" type="revolute">
    <parent link="base"/><child link="arm"/><axis xyz="0 0 1"/>
    <limit lower="-3" upper="3" effort="1" velocity="1"/>
  </joint>
  <joint name="tip_mount" type="fixed">
    <parent link="arm"/><child link="tip"/><origin xyz="1 0 0"/>
  </joint>
</robot>"#;

#[test]
fn two_link_planar_reaches_known_point() {
    let out = fkgrad(&["fk", &data("urdf/two_r.urdf"), "--base", "base", "--end", "tip", "--configs", &data("configs/two_r.csv")]);
    let doc = json(&out);
    assert_eq!(doc["command"], "fk");
    assert_eq!(doc["chain"]["m"], 2);
    let pose = floats(&doc["results"][0]["pose"]);
    for (got, want) in pose[..3].iter().zip([0.0, 2.0, 0.0]) {
        assert!((got - want).abs() < 1e-9, "{pose:?}");
    }
    assert_eq!(doc["results"].as_array().unwrap().len(), 3);
}

#[test]
fn json_and_csv_configuration_files_agree() {
    let chain = ["--base", "base", "--end", "tip", "--no-timing"];
    let urdf = data("urdf/two_r.urdf");
    let a = json(&fkgrad(&[&["fk", &urdf, "--configs", &data("configs/two_r.json")][..], &chain].concat()));
    let b = json(&fkgrad(&[&["fk", &urdf, "--configs", &data("configs/two_r.csv")][..], &chain].concat()));
    assert_eq!(a["results"][0], b["results"][0]);
    assert_eq!(a["results"][1], b["results"][1]);
}

#[test]
fn fixed_only_chain_is_constant() {
    let urdf = data("urdf/fixed_only.urdf");
    let doc = json(&fkgrad(&["fk", &urdf, "--base", "base", "--end", "sensor", "--random", "4", "--no-timing"]));
    assert_eq!(doc["chain"]["m"], 0);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 4);
    assert!(results.iter().all(|r| r["transform"] == results[0]["transform"]));
    let t = floats(&results[0]["transform"]);
    assert!((t[3] - 0.05).abs() < 1e-12 && (t[11] - 0.2).abs() < 1e-12);
}

#[test]
fn intermediates_list_one_frame_per_joint() {
    let doc = json(&fkgrad(&[
        "fk", &data("urdf/two_r.urdf"), "--base", "base", "--end", "tip", "--random", "2", "--intermediates",
    ]));
    assert_eq!(doc["chain"]["n"], 3);
    for r in doc["results"].as_array().unwrap() {
        let frames = r["intermediates"].as_array().unwrap();
        assert_eq!(frames.len(), 3);
        assert_eq!(frames[2], r["transform"]);
    }
}

#[test]
fn csv_output_has_pose_columns() {
    let out = fkgrad(&[
        "fk", &data("urdf/two_r.urdf"), "--base", "base", "--end", "tip", "--configs", &data("configs/two_r.csv"), "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "index,x,y,z,alpha,beta,gamma,degenerate");
    assert_eq!(lines.count(), 3);
}

#[test]
fn jacobian_of_fixed_chain_has_no_columns() {
    let doc = json(&fkgrad(&["jacobian", &data("urdf/fixed_only.urdf"), "--base", "base", "--end", "sensor", "--random", "1"]));
    let jac = &doc["results"][0]["jacobian"];
    assert_eq!((jac["rows"].as_u64(), jac["cols"].as_u64()), (Some(6), Some(0)));
    assert!(jac["data"].as_array().unwrap().is_empty());
}

#[test]
fn single_revolute_column_matches_closed_form() {
    let urdf = scratch("single.urdf", SINGLE_JOINT);
    let theta = 0.7f64;
    let configs = scratch("single.json", &format!("[[{theta}]]"));
    let doc = json(&fkgrad(&["jacobian", &urdf, "--base", "base", "--end", "tip", "--configs", &configs]));
    let col = floats(&doc["results"][0]["jacobian"]["data"]);
    let expected = [-theta.sin(), theta.cos(), 0.0, 0.0, 0.0, 1.0];
    for (got, want) in col.iter().zip(expected) {
        assert!((got - want).abs() < 1e-12, "{col:?}");
    }
}

#[test]
fn jacobian_output_is_bit_equal_to_library() {
    let path = data("urdf/arm4.urdf");
    let thetas = [0.3, -0.4, 1.1, 2.0, -1.2, 0.5, 0.1, -0.9];
    let configs = scratch("arm4_two.json", &serde_json::to_string(&[&thetas[..4], &thetas[4..]]).unwrap());
    let doc = json(&fkgrad(&["jacobian", &path, "--base", "link0", "--end", "tool", "--configs", &configs]));

    let model = parse_urdf(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let engine = FkEngine::new(extract_chain(&model, "link0", "tool").unwrap(), 2).unwrap();
    let expected = engine.pose_jacobians(&thetas).unwrap();
    for (k, jac) in expected.iter().enumerate() {
        let got = floats(&doc["results"][k]["jacobian"]["data"]);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&got), bits(jac.as_slice()));
    }
}

#[test]
fn identify_converges_and_reports_budget_exhaustion() {
    let urdf = data("urdf/arm4.urdf");
    let out = fkgrad(&["identify", &urdf, &data("identify_arm4.json"), "--no-timing"]);
    let doc = json(&out);
    assert_eq!(doc["results"]["status"], "converged");
    assert!(floats(&doc["results"]["param_error"]).iter().all(|e| *e < 1e-3));

    let tight = scratch(
        "identify_tight.json",
        r#"{"target_link":"tool","base":"link0","end":"tool","max_steps":5}"#,
    );
    let out = fkgrad(&["identify", &urdf, &tight]);
    assert_eq!(out.status.code(), Some(5));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["results"]["status"], "budget_exhausted");
    assert_eq!(doc["results"]["steps"], 5);
}

#[test]
fn bench_single_size_is_quick() {
    let start = Instant::now();
    let doc = json(&fkgrad(&[
        "bench", &data("urdf/arm4.urdf"), "--base", "link0", "--end", "tool", "--batch-sizes", "1", "--seconds", "0.1",
    ]));
    assert!(start.elapsed().as_secs_f64() < 2.0);
    let rows = doc["results"]["measurements"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["batch_size"], 1);
    assert!(rows[0]["iterations"].as_u64().unwrap() >= 10);
}

#[test]
fn validate_lists_structure_and_rejects_bad_files() {
    let doc = json(&fkgrad(&["validate", &data("urdf/humanoid_torso.urdf")]));
    let ends: Vec<&str> = doc["results"]["leaf_chains"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["end"].as_str().unwrap())
        .collect();
    assert_eq!(ends, ["head", "l_hand", "r_hand"]);

    let out = fkgrad(&["validate", &data("urdf/joint_follows_joint.urdf")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("j2"));
}

#[test]
fn exit_codes_follow_error_class() {
    let two_r = data("urdf/two_r.urdf");
    let missing = fkgrad(&["validate", "/nonexistent/robot.urdf"]);
    assert_eq!(missing.status.code(), Some(1));

    let usage = fkgrad(&["fk", &two_r, "--base", "base", "--end", "tip"]);
    assert_eq!(usage.status.code(), Some(2));

    let chain = fkgrad(&["fk", &two_r, "--base", "base", "--end", "nowhere", "--random", "1"]);
    assert_eq!(chain.status.code(), Some(3));

    let wide = scratch("wide.csv", "1,2,3\n");
    let shape = fkgrad(&["fk", &two_r, "--base", "base", "--end", "tip", "--configs", &wide]);
    assert_eq!(shape.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&shape.stderr).starts_with("error: "));
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["fk", &data("urdf/arm4.urdf"), "--base", "link0", "--end", "tool", "--random", "300", "--no-timing"];
    let one = Command::new(env!("CARGO_BIN_EXE_fkgrad")).args(args).env("FKGRAD_THREADS", "1").output().unwrap();
    let two = Command::new(env!("CARGO_BIN_EXE_fkgrad")).args(args).env("FKGRAD_THREADS", "2").output().unwrap();
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_fkgrad")).args(args).env("FKGRAD_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
