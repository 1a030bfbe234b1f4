use std::path::PathBuf;
use std::time::Instant;

use fkgrad::synth::serial_arm;
use fkgrad::urdf::UrdfError;
use fkgrad::{extract_chain, parse_urdf, to_urdf, FkEngine, JointType};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/urdf")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(name)).unwrap()
}

#[test]
fn valid_corpus_round_trips() {
    let mut seen = 0;
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let Ok(model) = parse_urdf(&text) else { continue };
        let back = parse_urdf(&to_urdf(&model)).unwrap();
        assert!(model.structurally_equal(&back, 1e-12), "{}", path.display());
        seen += 1;
    }
    assert!(seen >= 5);
}

#[test]
fn joint_follows_joint_names_the_offender() {
    match parse_urdf(&read("joint_follows_joint.urdf")) {
        Err(e @ UrdfError::JointFollowsJoint { .. }) => assert!(e.to_string().contains("j2")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn branching_tree_lists_every_leaf_chain() {
    let model = parse_urdf(&read("humanoid_torso.urdf")).unwrap();
    let leaves: Vec<String> = model
        .leaf_chains()
        .iter()
        .map(|c| c.end_link().to_string())
        .collect();
    assert_eq!(leaves, ["head", "l_hand", "r_hand"]);
    let dofs: Vec<usize> = model.leaf_chains().iter().map(|c| c.m()).collect();
    assert_eq!(dofs, [2, 5, 4]);
}

#[test]
fn mobile_manipulator_has_every_joint_type() {
    let model = parse_urdf(&read("mobile_manipulator.urdf")).unwrap();
    for kind in JointType::ALL {
        assert!(model.joints().iter().any(|j| j.joint_type == kind), "{kind}");
    }
    let chain = extract_chain(&model, "world", "gripper").unwrap();
    assert_eq!((chain.n(), chain.m()), (5, 11));
}

#[test]
fn engine_construction_is_cheap() {
    let chain = extract_chain(&serial_arm(4), "link0", "tool").unwrap();
    let _ = FkEngine::new(chain.clone(), 1024).unwrap();
    let start = Instant::now();
    let engine = FkEngine::new(chain, 1024).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(engine.index_matrix().len(), 4096);
    assert!(elapsed.as_secs_f64() < 0.010, "{elapsed:?}");
}
