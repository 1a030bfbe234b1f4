//! Synthetic robot models for tests and benchmarks.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::urdf::{Joint, JointLimits, JointType, KinematicChain, Link, RobotModel};

fn random_axis<R: Rng>(rng: &mut R) -> [f64; 3] {
    if rng.gen_bool(0.5) {
        let mut a = [0.0; 3];
        a[rng.gen_range(0..3)] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        return a;
    }
    loop {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 {
            return v.map(|x| x / n);
        }
    }
}

fn random_joint<R: Rng>(rng: &mut R, name: String, parent: &str, child: &str, kind: JointType) -> Joint {
    let limits = match kind {
        JointType::Revolute => {
            let lo = rng.gen_range(-PI..0.0);
            Some(JointLimits { lower: lo, upper: rng.gen_range(0.0..PI) })
        }
        JointType::Prismatic => Some(JointLimits { lower: -0.5, upper: rng.gen_range(0.1..1.0) }),
        _ => None,
    };
    Joint {
        name,
        joint_type: kind,
        parent_link: parent.to_string(),
        child_link: child.to_string(),
        origin_xyz: std::array::from_fn(|_| rng.gen_range(-1.0..1.0)),
        origin_rpy: std::array::from_fn(|_| rng.gen_range(-PI..PI)),
        axis: if kind.uses_axis() { random_axis(rng) } else { [1.0, 0.0, 0.0] },
        limits,
        origin_hint: None,
    }
}

/// Random tree of depth at most `max_depth` (≥ 6) whose deepest path
/// contains every joint type. Side branches hang off random links.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize, branches: usize) -> RobotModel {
    assert!(max_depth >= JointType::ALL.len(), "depth must fit every joint type");
    let depth = rng.gen_range(JointType::ALL.len()..=max_depth);
    let mut kinds = JointType::ALL.to_vec();
    while kinds.len() < depth {
        kinds.push(*JointType::ALL.choose(rng).unwrap());
    }
    kinds.shuffle(rng);

    let mut links = vec![Link { name: "base".into() }];
    let mut depth_of = vec![0usize];
    let mut joints = Vec::new();
    for (i, kind) in kinds.into_iter().enumerate() {
        let child = format!("l{}", i + 1);
        joints.push(random_joint(rng, format!("j{}", i + 1), &links[i].name, &child, kind));
        links.push(Link { name: child });
        depth_of.push(i + 1);
    }
    for bi in 0..branches {
        let mut parent = rng.gen_range(0..links.len());
        let mut k = 0;
        while depth_of[parent] < max_depth && (k == 0 || rng.gen_bool(0.5)) {
            let child = format!("b{bi}_{k}");
            let kind = *JointType::ALL.choose(rng).unwrap();
            let parent_name = links[parent].name.clone();
            joints.push(random_joint(rng, format!("bj{bi}_{k}"), &parent_name, &child, kind));
            links.push(Link { name: child });
            depth_of.push(depth_of[parent] + 1);
            parent = links.len() - 1;
            k += 1;
        }
    }
    RobotModel::new("random".into(), links, joints).expect("generated tree is valid")
}

/// Serial arm `link0 … link{dof}` of revolute joints cycling through the z,
/// y, y, x axes, with a fixed `tool` frame at the tip.
pub fn serial_arm(dof: usize) -> RobotModel {
    const AXES: [[f64; 3]; 4] = [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]];
    let mut links: Vec<Link> = (0..=dof).map(|i| Link { name: format!("link{i}") }).collect();
    links.push(Link { name: "tool".into() });
    let mut joints: Vec<Joint> = (0..dof)
        .map(|i| Joint {
            name: format!("joint{}", i + 1),
            joint_type: JointType::Revolute,
            parent_link: format!("link{i}"),
            child_link: format!("link{}", i + 1),
            origin_xyz: if i == 0 { [0.0, 0.0, 0.3] } else { [0.0, 0.0, 0.25] },
            origin_rpy: [0.0; 3],
            axis: AXES[i % 4],
            limits: Some(JointLimits { lower: -PI, upper: PI }),
            origin_hint: None,
        })
        .collect();
    joints.push(Joint {
        name: "tool_mount".into(),
        joint_type: JointType::Fixed,
        parent_link: format!("link{dof}"),
        child_link: "tool".into(),
        origin_xyz: [0.1, 0.0, 0.05],
        origin_rpy: [0.0; 3],
        axis: [1.0, 0.0, 0.0],
        limits: None,
        origin_hint: None,
    });
    RobotModel::new(format!("arm{dof}"), links, joints).expect("serial arm is valid")
}

/// `count` configurations for `chain`, uniform within limits or `[−π, π)`.
pub fn random_configurations<R: Rng>(rng: &mut R, chain: &KinematicChain, count: usize) -> Vec<f64> {
    let ranges: Vec<(f64, f64)> = chain
        .dof_limits()
        .into_iter()
        .map(|l| l.unwrap_or((-PI, PI)))
        .collect();
    let mut out = Vec::with_capacity(count * ranges.len());
    for _ in 0..count {
        for &(lo, hi) in &ranges {
            out.push(if lo < hi { rng.gen_range(lo..hi) } else { lo });
        }
    }
    out
}
