//! Batched, differentiable forward kinematics for URDF robots.
//!
//! The pipeline: parse a URDF into a [`RobotModel`], extract a
//! [`KinematicChain`] between two links, build an [`FkEngine`] for a fixed
//! batch size, then evaluate end transforms for flattened joint
//! configurations. Every stage is generic over [`Real`], so the same engine
//! runs on `f64`, `f32` or forward-mode duals for Jacobians.

pub mod autodiff;
pub mod identify;
pub mod kinematics;
pub mod metrics;
pub mod reference;
pub mod scalar;
pub mod synth;
pub mod transforms;
pub mod urdf;

pub use autodiff::{
    batch_jacobian, finite_difference_jacobian, jacobian, AutodiffError, Dual, JacobianMatrix,
    Tangent,
};
pub use identify::{
    make_generator, run_identification, IdentificationReport, IdentifyConfig, IdentifyError,
    IdentifyStatus, InitMode, OptimizerKind, ParamEstimator, SampleGenerator,
};
pub use kinematics::{FkEngine, FkError, FkOutput, IndexMatrix, IndexRow, JointParamBatch, TransformBatch};
pub use metrics::{
    phi2_loss, phi3_loss, phi4_loss, phi5_loss, rotation_with_rmse, MetricError,
};
pub use scalar::Real;
pub use transforms::{
    pose_from_transform, quaternion_from_rotation, sixdof_to_transform, PoseRPY, Quaternion,
    SixDofParams, Transform4, TransformError,
};
pub use urdf::{
    extract_chain, parse_urdf, substitute_link_with_joint, to_urdf, ChainError, Joint,
    JointType, KinematicChain, Link, RobotModel, UrdfError,
};
