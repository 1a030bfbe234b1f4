//! Naive sequential forward kinematics.
//!
//! A textbook, one-configuration-at-a-time implementation used as an
//! independent oracle for the batched engine and as the per-sample baseline
//! in throughput measurements. It walks the robot model by link name on
//! every call, builds heap-allocated 4×4 matrices, rotates about arbitrary
//! axes with Rodrigues' formula and composes elementary rotations one by
//! one. It shares no code with [`crate::kinematics`] beyond the model types.

use crate::urdf::{ChainError, Joint, JointType, RobotModel};

pub type Matrix = Vec<Vec<f64>>;

pub fn identity() -> Matrix {
    (0..4)
        .map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let mut out = vec![vec![0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn translation(x: f64, y: f64, z: f64) -> Matrix {
    let mut m = identity();
    m[0][3] = x;
    m[1][3] = y;
    m[2][3] = z;
    m
}

/// Rotation by `angle` about unit `axis` (Rodrigues).
fn axis_angle(axis: [f64; 3], angle: f64) -> Matrix {
    let (s, c) = (angle.sin(), angle.cos());
    let t = 1.0 - c;
    let [x, y, z] = axis;
    vec![
        vec![t * x * x + c, t * x * y - s * z, t * x * z + s * y, 0.0],
        vec![t * x * y + s * z, t * y * y + c, t * y * z - s * x, 0.0],
        vec![t * x * z - s * y, t * y * z + s * x, t * z * z + c, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ]
}

/// Translation followed by extrinsic x, y, z rotations, built factor by factor.
fn xyz_rpy(xyz: [f64; 3], rpy: [f64; 3]) -> Matrix {
    let rx = axis_angle([1.0, 0.0, 0.0], rpy[0]);
    let ry = axis_angle([0.0, 1.0, 0.0], rpy[1]);
    let rz = axis_angle([0.0, 0.0, 1.0], rpy[2]);
    let rot = matmul(&rz, &matmul(&ry, &rx));
    matmul(&translation(xyz[0], xyz[1], xyz[2]), &rot)
}

fn joint_motion(joint: &Joint, q: &[f64]) -> Matrix {
    let a = joint.axis;
    match joint.joint_type {
        JointType::Fixed => identity(),
        JointType::Revolute | JointType::Continuous => axis_angle(a, q[0]),
        JointType::Prismatic => translation(a[0] * q[0], a[1] * q[0], a[2] * q[0]),
        JointType::Planar => {
            let (u, v) = joint.planar_basis();
            translation(
                u[0] * q[0] + v[0] * q[1],
                u[1] * q[0] + v[1] * q[1],
                u[2] * q[0] + v[2] * q[1],
            )
        }
        JointType::Floating => xyz_rpy([q[0], q[1], q[2]], [q[3], q[4], q[5]]),
    }
}

/// Joint path from `base` down to `end`, found by walking up from `end`.
fn path(model: &RobotModel, base: &str, end: &str) -> Result<Vec<Joint>, ChainError> {
    for l in [base, end] {
        if !model.links().iter().any(|k| k.name == l) {
            return Err(ChainError::UnknownLink(l.to_string()));
        }
    }
    let mut joints = Vec::new();
    let mut cursor = end.to_string();
    while cursor != base {
        let joint = model
            .joints()
            .iter()
            .find(|j| j.child_link == cursor)
            .ok_or_else(|| ChainError::NotReachable {
                base: base.to_string(),
                end: end.to_string(),
            })?;
        cursor = joint.parent_link.clone();
        joints.push(joint.clone());
    }
    joints.reverse();
    Ok(joints)
}

/// Cumulative transforms (base to each joint's child) for one configuration.
pub fn forward_all(
    model: &RobotModel,
    base: &str,
    end: &str,
    theta: &[f64],
) -> Result<Vec<Matrix>, ChainError> {
    let joints = path(model, base, end)?;
    let needed: usize = joints.iter().map(|j| j.joint_type.dof()).sum();
    assert_eq!(theta.len(), needed, "configuration width does not match chain");
    let mut out = Vec::with_capacity(joints.len());
    let mut acc = identity();
    let mut offset = 0;
    for joint in &joints {
        let dof = joint.joint_type.dof();
        let origin = xyz_rpy(joint.origin_xyz, joint.origin_rpy);
        let motion = joint_motion(joint, &theta[offset..offset + dof]);
        offset += dof;
        acc = matmul(&acc, &matmul(&origin, &motion));
        out.push(acc.clone());
    }
    Ok(out)
}

/// Final transform for one configuration.
pub fn forward(
    model: &RobotModel,
    base: &str,
    end: &str,
    theta: &[f64],
) -> Result<Matrix, ChainError> {
    Ok(forward_all(model, base, end, theta)?
        .pop()
        .unwrap_or_else(identity))
}

/// Row-major flattening, for comparison with `Transform4::to_row_major`.
pub fn flatten(m: &Matrix) -> [f64; 16] {
    let mut out = [0.0; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[i * 4 + j] = m[i][j];
        }
    }
    out
}
