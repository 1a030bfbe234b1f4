//! Batched forward kinematics.
//!
//! Every joint is modelled as a partially parameterised six-DoF joint. A
//! batch of flat joint values `Θ` (length `b·m`) is scattered through a fixed
//! [`IndexMatrix`] into a zero `(b × n × 6)` parameter tensor `Q`. Each cell
//! of `Q` becomes a joint transform, each joint transform is paired with the
//! precomputed static link transform of its segment, and the per-segment
//! products are scan-composed along the chain.
//!
//! Joints whose axis is not a coordinate axis are conjugated into a canonical
//! slot: with `A = [u v a]` (see [`planar_basis`]), a rotation about `a` is
//! `A · Rz(θ) · Aᵀ`. `A` is folded into the static link transform and `Aᵀ`
//! is applied as a static post-transform of the segment, so the `Q` pipeline
//! stays a pure scatter.
//!
//! Batch elements never interact. Large batches are processed in tiles, in
//! parallel where threads are available; results do not depend on tiling.

use rayon::prelude::*;
use thiserror::Error;

use crate::autodiff::{batch_jacobian, AutodiffError, JacobianMatrix};
use crate::scalar::Real;
use crate::transforms::{
    compose, pose_from_transform, sixdof_to_transform, transpose, Mat3, PoseRPY, SixDofParams,
    Transform4,
};
use crate::urdf::{planar_basis, JointType, KinematicChain};

/// Configurations processed per tile in [`FkEngine::forward`].
const TILE: usize = 64;

const AXIS_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FkError {
    #[error("batch size must be at least 1")]
    InvalidBatchSize,
    #[error("expected {expected} joint values ({batch} x {dof}), got {got}")]
    ShapeMismatch {
        expected: usize,
        batch: usize,
        dof: usize,
        got: usize,
    },
    #[error("joint value {index} is not finite")]
    NonFinite { index: usize },
    #[error("parameter tensor has shape ({batch} x {joints}), engine expects ({eb} x {ej})")]
    TensorShape {
        batch: usize,
        joints: usize,
        eb: usize,
        ej: usize,
    },
    #[error(transparent)]
    Autodiff(#[from] AutodiffError),
}

/// Parameter slot within a six-DoF row: `x, y, z, α, β, γ`.
pub type Slot = usize;

/// One row `(c, d, e)` of the index matrix, plus the sign folded in for
/// joints whose axis points along a negative coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexRow {
    pub batch: usize,
    pub joint: usize,
    pub slot: Slot,
    pub negate: bool,
}

/// Maps each entry of `Θ` to a cell of `Q`. Rows are ordered like `Θ`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexMatrix {
    rows: Vec<IndexRow>,
}

impl IndexMatrix {
    pub fn rows(&self) -> &[IndexRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Dense `(b × n × 6)` joint parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct JointParamBatch<S = f64> {
    batch: usize,
    joints: usize,
    data: Vec<SixDofParams<S>>,
}

impl<S: Real> JointParamBatch<S> {
    pub fn zeros(batch: usize, joints: usize) -> Self {
        Self {
            batch,
            joints,
            data: vec![SixDofParams::zero(); batch * joints],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.batch, self.joints)
    }

    pub fn get(&self, k: usize, i: usize) -> &SixDofParams<S> {
        &self.data[k * self.joints + i]
    }

    pub fn get_mut(&mut self, k: usize, i: usize) -> &mut SixDofParams<S> {
        &mut self.data[k * self.joints + i]
    }

    pub fn cells(&self) -> &[SixDofParams<S>] {
        &self.data
    }
}

/// `(b × n)` grid of transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformBatch<S = f64> {
    batch: usize,
    n: usize,
    data: Vec<Transform4<S>>,
}

impl<S: Real> TransformBatch<S> {
    pub fn from_vec(batch: usize, n: usize, data: Vec<Transform4<S>>) -> Self {
        assert_eq!(data.len(), batch * n, "transform batch shape mismatch");
        Self { batch, n, data }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.batch, self.n)
    }

    pub fn get(&self, k: usize, i: usize) -> &Transform4<S> {
        &self.data[k * self.n + i]
    }

    /// Transforms of batch element `k`, in chain order.
    pub fn element(&self, k: usize) -> &[Transform4<S>] {
        &self.data[k * self.n..(k + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[Transform4<S>] {
        &self.data
    }

    /// Last transform of every element; identity for an empty chain.
    pub fn finals(&self) -> Vec<Transform4<S>> {
        (0..self.batch)
            .map(|k| {
                self.element(k)
                    .last()
                    .copied()
                    .unwrap_or_else(Transform4::identity)
            })
            .collect()
    }
}

/// Result of [`FkEngine::forward_with`].
#[derive(Clone, Debug, PartialEq)]
pub enum FkOutput<S = f64> {
    /// `(b)` final transforms.
    Final(Vec<Transform4<S>>),
    /// `(b × n)` cumulative transforms.
    Intermediates(TransformBatch<S>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct DofSlot {
    joint: usize,
    slot: Slot,
    negate: bool,
}

#[derive(Clone, Debug)]
struct Segment {
    link: Transform4,
    post: Option<Transform4>,
}

fn scan_in_place<S: Real>(data: &mut [Transform4<S>], n: usize) {
    if n > 0 {
        for element in data.chunks_mut(n) {
            for i in 1..n {
                element[i] = compose(&element[i - 1], &element[i]);
            }
        }
    }
}

fn coordinate_axis(v: [f64; 3]) -> Option<(usize, bool)> {
    let i = (0..3).find(|&i| (v[i].abs() - 1.0).abs() < AXIS_EPS)?;
    let others_zero = (0..3).filter(|&j| j != i).all(|j| v[j].abs() < AXIS_EPS);
    others_zero.then_some((i, v[i] < 0.0))
}

/// `[u v a]` as columns.
fn alignment(axis: [f64; 3]) -> Mat3<f64> {
    let (u, v) = planar_basis(axis);
    [
        [u[0], v[0], axis[0]],
        [u[1], v[1], axis[1]],
        [u[2], v[2], axis[2]],
    ]
}

/// Immutable batched FK evaluator for one chain and batch size.
#[derive(Clone, Debug)]
pub struct FkEngine {
    chain: KinematicChain,
    batch_size: usize,
    segments: Vec<Segment>,
    dof_slots: Vec<DofSlot>,
    index: IndexMatrix,
}

impl FkEngine {
    pub fn new(chain: KinematicChain, batch_size: usize) -> Result<Self, FkError> {
        if batch_size == 0 {
            return Err(FkError::InvalidBatchSize);
        }
        let mut segments = Vec::with_capacity(chain.n());
        let mut dof_slots = Vec::with_capacity(chain.m());
        for (ji, joint) in chain.joints().enumerate() {
            let origin = joint.origin_transform();
            let mut push = |slot, negate| dof_slots.push(DofSlot { joint: ji, slot, negate });
            let align: Option<Mat3<f64>> = match joint.joint_type {
                JointType::Fixed => None,
                JointType::Floating => {
                    (0..6).for_each(|s| push(s, false));
                    None
                }
                JointType::Revolute | JointType::Continuous => match coordinate_axis(joint.axis) {
                    Some((i, neg)) => {
                        push(3 + i, neg);
                        None
                    }
                    None => {
                        push(5, false);
                        Some(alignment(joint.axis))
                    }
                },
                JointType::Prismatic => match coordinate_axis(joint.axis) {
                    Some((i, neg)) => {
                        push(i, neg);
                        None
                    }
                    None => {
                        push(2, false);
                        Some(alignment(joint.axis))
                    }
                },
                JointType::Planar => {
                    let (u, v) = joint.planar_basis();
                    match (coordinate_axis(u), coordinate_axis(v)) {
                        (Some((iu, nu)), Some((iv, nv))) => {
                            push(iu, nu);
                            push(iv, nv);
                            None
                        }
                        _ => {
                            push(0, false);
                            push(1, false);
                            Some(alignment(joint.axis))
                        }
                    }
                }
            };
            let segment = match align {
                None => Segment {
                    link: origin,
                    post: None,
                },
                Some(a) => Segment {
                    link: compose(&origin, &Transform4::from_rotation(a)),
                    post: Some(Transform4::from_rotation(transpose(&a))),
                },
            };
            segments.push(segment);
        }

        let rows = (0..batch_size)
            .flat_map(|batch| {
                dof_slots.iter().map(move |d| IndexRow {
                    batch,
                    joint: d.joint,
                    slot: d.slot,
                    negate: d.negate,
                })
            })
            .collect();

        Ok(Self {
            chain,
            batch_size,
            segments,
            dof_slots,
            index: IndexMatrix { rows },
        })
    }

    pub fn chain(&self) -> &KinematicChain {
        &self.chain
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn n(&self) -> usize {
        self.segments.len()
    }

    pub fn m(&self) -> usize {
        self.dof_slots.len()
    }

    pub fn index_matrix(&self) -> &IndexMatrix {
        &self.index
    }

    /// Static link transforms `𝔗^L`, one per segment (shared by the batch).
    pub fn link_transforms(&self) -> Vec<Transform4> {
        self.segments.iter().map(|s| s.link).collect()
    }

    /// Static post-transforms of segments with a non-coordinate joint axis.
    pub fn post_transforms(&self) -> Vec<Option<Transform4>> {
        self.segments.iter().map(|s| s.post).collect()
    }

    fn check_thetas<S: Real>(&self, thetas: &[S]) -> Result<(), FkError> {
        let expected = self.batch_size * self.m();
        if thetas.len() != expected {
            return Err(FkError::ShapeMismatch {
                expected,
                batch: self.batch_size,
                dof: self.m(),
                got: thetas.len(),
            });
        }
        if let Some(index) = thetas.iter().position(|t| !t.value().is_finite()) {
            return Err(FkError::NonFinite { index });
        }
        Ok(())
    }

    fn check_shape(&self, batch: usize, joints: usize) -> Result<(), FkError> {
        if batch != self.batch_size || joints != self.n() {
            return Err(FkError::TensorShape {
                batch,
                joints,
                eb: self.batch_size,
                ej: self.n(),
            });
        }
        Ok(())
    }

    /// Scatters `Θ` into a fresh zero `Q`.
    pub fn scatter_thetas<S: Real>(&self, thetas: &[S]) -> Result<JointParamBatch<S>, FkError> {
        self.check_thetas(thetas)?;
        Ok(self.scatter_rows(thetas, &self.index.rows, 0, self.batch_size))
    }

    fn scatter_rows<S: Real>(
        &self,
        thetas: &[S],
        rows: &[IndexRow],
        first_batch: usize,
        batch: usize,
    ) -> JointParamBatch<S> {
        let mut q = JointParamBatch::zeros(batch, self.n());
        for (row, &theta) in rows.iter().zip(thetas) {
            let v = if row.negate { -theta } else { theta };
            q.get_mut(row.batch - first_batch, row.joint).0[row.slot] = v;
        }
        q
    }

    /// `𝔗^J`: one transform per cell of `Q`.
    pub fn joint_transforms<S: Real>(q: &JointParamBatch<S>) -> TransformBatch<S> {
        TransformBatch {
            batch: q.batch,
            n: q.joints,
            data: q.data.iter().map(sixdof_to_transform).collect(),
        }
    }

    /// `𝔗^LJ`: link transform times joint transform, slice-wise.
    pub fn combine_link_joint<S: Real>(
        &self,
        joints: &TransformBatch<S>,
    ) -> Result<TransformBatch<S>, FkError> {
        self.check_shape(joints.batch, joints.n)?;
        Ok(self.combine_unchecked(joints))
    }

    fn combine_unchecked<S: Real>(&self, joints: &TransformBatch<S>) -> TransformBatch<S> {
        let links: Vec<(Transform4<S>, Option<Transform4<S>>)> = self
            .segments
            .iter()
            .map(|s| (s.link.lift(), s.post.map(|p| p.lift())))
            .collect();
        let n = joints.n;
        let data = joints
            .data
            .iter()
            .enumerate()
            .map(|(idx, tj)| {
                let (link, post) = &links[idx % n];
                let lj = compose(link, tj);
                match post {
                    Some(p) => compose(&lj, p),
                    None => lj,
                }
            })
            .collect();
        TransformBatch {
            batch: joints.batch,
            n,
            data,
        }
    }

    /// `𝔗′`: inclusive cumulative product along the chain axis.
    pub fn scan_compose<S: Real>(combined: &TransformBatch<S>) -> TransformBatch<S> {
        let mut data = combined.data.clone();
        let n = combined.n;
        scan_in_place(&mut data, n);
        TransformBatch {
            batch: combined.batch,
            n,
            data,
        }
    }

    /// Runs the pipeline for batch elements `[first, first + count)`.
    fn run_tile<S: Real>(&self, thetas: &[S], first: usize, count: usize) -> TransformBatch<S> {
        let m = self.m();
        let rows = &self.index.rows[first * m..(first + count) * m];
        let local = &thetas[first * m..(first + count) * m];
        let q = self.scatter_rows(local, rows, first, count);
        let tj = Self::joint_transforms(&q);
        let mut tlj = self.combine_unchecked(&tj);
        scan_in_place(&mut tlj.data, tlj.n);
        tlj
    }

    fn tiles(&self) -> Vec<(usize, usize)> {
        (0..self.batch_size)
            .step_by(TILE)
            .map(|first| (first, TILE.min(self.batch_size - first)))
            .collect()
    }

    /// Final transform `T_{0:n}` for every configuration.
    pub fn forward<S: Real>(&self, thetas: &[S]) -> Result<Vec<Transform4<S>>, FkError> {
        self.check_thetas(thetas)?;
        let n = self.n();
        let mut out = vec![Transform4::identity(); self.batch_size];
        let fill = |(t, chunk): (usize, &mut [Transform4<S>])| {
            if n == 0 {
                return;
            }
            let tile = self.run_tile(thetas, t * TILE, chunk.len());
            for (o, element) in chunk.iter_mut().zip(tile.data.chunks(n)) {
                *o = element[n - 1];
            }
        };
        if self.batch_size > TILE {
            out.par_chunks_mut(TILE).enumerate().for_each(fill);
        } else {
            out.chunks_mut(TILE).enumerate().for_each(fill);
        }
        Ok(out)
    }

    /// All cumulative transforms `𝔗′`.
    pub fn forward_intermediates<S: Real>(
        &self,
        thetas: &[S],
    ) -> Result<TransformBatch<S>, FkError> {
        self.check_thetas(thetas)?;
        let tiles = self.tiles();
        let eval = |&(first, count): &(usize, usize)| self.run_tile(thetas, first, count).data;
        let parts: Vec<Vec<Transform4<S>>> = if tiles.len() > 1 {
            tiles.par_iter().map(eval).collect()
        } else {
            tiles.iter().map(eval).collect()
        };
        Ok(TransformBatch {
            batch: self.batch_size,
            n: self.n(),
            data: parts.concat(),
        })
    }

    pub fn forward_with<S: Real>(
        &self,
        thetas: &[S],
        want_intermediates: bool,
    ) -> Result<FkOutput<S>, FkError> {
        if want_intermediates {
            self.forward_intermediates(thetas).map(FkOutput::Intermediates)
        } else {
            self.forward(thetas).map(FkOutput::Final)
        }
    }

    /// End-effector poses `[x, y, z, α, β, γ]`.
    pub fn poses<S: Real>(&self, thetas: &[S]) -> Result<Vec<PoseRPY<S>>, FkError> {
        Ok(self
            .forward(thetas)?
            .iter()
            .map(pose_from_transform)
            .collect())
    }

    /// `6 × m` pose Jacobian for every configuration.
    pub fn pose_jacobians(&self, thetas: &[f64]) -> Result<Vec<JacobianMatrix>, FkError> {
        self.check_thetas(thetas)?;
        let f = |v: &[crate::autodiff::Tangent]| {
            self.forward(v)
                .expect("shape validated")
                .iter()
                .flat_map(|t| pose_from_transform(t).to_array())
                .collect::<Vec<_>>()
        };
        Ok(batch_jacobian(f, thetas, self.batch_size)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::urdf::{extract_chain, parse_urdf};
    use std::f64::consts::FRAC_PI_2;

    fn chain_of(xml: &str, base: &str, end: &str) -> KinematicChain {
        extract_chain(&parse_urdf(xml).unwrap(), base, end).unwrap()
    }

    const THREE_REVOLUTE: &str = r#"<robot name="r">
      <link name="link0"/><link name="link1"/><link name="link2"/><link name="link3"/>
      <joint name="j1" type="revolute"><parent link="link0"/><child link="link1"/>
        <origin xyz="0 0 0.3"/><axis xyz="0 0 1"/></joint>
      <joint name="j2" type="revolute"><parent link="link1"/><child link="link2"/>
        <origin xyz="0.5 0 0"/><axis xyz="0 -1 0"/></joint>
      <joint name="j3" type="revolute"><parent link="link2"/><child link="link3"/>
        <origin xyz="0.4 0 0" rpy="0.2 0 0"/><axis xyz="1 0 0"/></joint>
    </robot>"#;

    const PLANAR_2R: &str = r#"<robot name="p">
      <link name="base"/><link name="l1"/><link name="tip"/>
      <joint name="s" type="revolute"><parent link="base"/><child link="l1"/><axis xyz="0 0 1"/></joint>
      <joint name="e" type="revolute"><parent link="l1"/><child link="tip"/>
        <origin xyz="1 0 0"/><axis xyz="0 0 1"/></joint>
    </robot>"#;

    const FIXED_ONLY: &str = r#"<robot name="f">
      <link name="a"/><link name="b"/><link name="c"/><link name="d"/>
      <joint name="ab" type="fixed"><parent link="a"/><child link="b"/><origin xyz="1 0 0"/></joint>
      <joint name="bc" type="fixed"><parent link="b"/><child link="c"/><origin xyz="0 1 0" rpy="0 0 1.5707963267948966"/></joint>
      <joint name="cd" type="fixed"><parent link="c"/><child link="d"/><origin xyz="0 0 1"/></joint>
    </robot>"#;

    #[test]
    fn fixed_chain_has_no_dof() {
        let c = chain_of(FIXED_ONLY, "a", "d");
        let e = FkEngine::new(c.clone(), 2).unwrap();
        assert_eq!((e.n(), e.m()), (3, 0));
        let out = e.forward::<f64>(&[]).unwrap();
        let expected = c
            .joints()
            .fold(Transform4::identity(), |acc, j| compose(&acc, &j.origin_transform()));
        assert_eq!(out, vec![expected; 2]);
        let q = e.scatter_thetas::<f64>(&[]).unwrap();
        assert!(q.cells().iter().all(|p| p.0 == [0.0; 6]));
    }

    #[test]
    fn three_revolute_engine_shape() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 2).unwrap();
        assert_eq!((e.batch_size(), e.n(), e.m()), (2, 3, 3));
        assert_eq!(e.index_matrix().len(), 6);
    }

    #[test]
    fn zero_batch_is_rejected() {
        assert_eq!(
            FkEngine::new(chain_of(PLANAR_2R, "base", "tip"), 0).unwrap_err(),
            FkError::InvalidBatchSize
        );
    }

    #[test]
    fn single_revolute_scatter() {
        let e = FkEngine::new(chain_of(PLANAR_2R, "base", "l1"), 1).unwrap();
        let q = e.scatter_thetas(&[0.7]).unwrap();
        assert_eq!(q.get(0, 0).0, [0.0, 0.0, 0.0, 0.0, 0.0, 0.7]);
    }

    #[test]
    fn scatter_matches_naive_loop() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 2).unwrap();
        let thetas = [1.0, 2.0, 3.0, 3.0, 4.0, 6.0];
        let q = e.scatter_thetas(&thetas).unwrap();
        // z axis -> gamma, -y axis -> -beta, x axis -> alpha
        let mut expected = [[[0.0; 6]; 3]; 2];
        for k in 0..2 {
            expected[k][0][5] = thetas[3 * k];
            expected[k][1][4] = -thetas[3 * k + 1];
            expected[k][2][3] = thetas[3 * k + 2];
        }
        for k in 0..2 {
            for i in 0..3 {
                assert_eq!(q.get(k, i).0, expected[k][i]);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 2).unwrap();
        assert!(matches!(
            e.forward(&[0.0; 5]),
            Err(FkError::ShapeMismatch { expected: 6, got: 5, .. })
        ));
        assert_eq!(
            e.forward(&[0.0, 0.0, f64::NAN, 0.0, 0.0, 0.0]).unwrap_err(),
            FkError::NonFinite { index: 2 }
        );
        let wrong = TransformBatch::<f64>::from_vec(1, 3, vec![Transform4::identity(); 3]);
        assert!(e.combine_link_joint(&wrong).is_err());
    }

    #[test]
    fn joint_transform_stage() {
        let mut q = JointParamBatch::<f64>::zeros(1, 2);
        let tj = FkEngine::joint_transforms(&q);
        assert!(tj.as_slice().iter().all(|t| *t == Transform4::identity()));
        q.get_mut(0, 1).0[1] = 0.25;
        let tj = FkEngine::joint_transforms(&q);
        assert_eq!(*tj.get(0, 1), Transform4::from_translation(0.0, 0.25, 0.0));
    }

    #[test]
    fn combine_with_identity_joints_gives_links() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 2).unwrap();
        let ident = TransformBatch::from_vec(2, 3, vec![Transform4::identity(); 6]);
        let c = e.combine_link_joint(&ident).unwrap();
        for k in 0..2 {
            assert_eq!(c.element(k), e.link_transforms().as_slice());
        }
    }

    #[test]
    fn scan_of_single_segment_is_itself() {
        let t = sixdof_to_transform(&SixDofParams([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]));
        let b = TransformBatch::from_vec(2, 1, vec![t, t]);
        assert_eq!(FkEngine::scan_compose(&b), b);
        let ident = TransformBatch::from_vec(1, 4, vec![Transform4::<f64>::identity(); 4]);
        assert_eq!(FkEngine::scan_compose(&ident), ident);
    }

    #[test]
    fn planar_two_link_closed_form() {
        let e = FkEngine::new(chain_of(PLANAR_2R, "base", "tip"), 1).unwrap();
        let t = e.forward(&[FRAC_PI_2, 0.0]).unwrap()[0];
        // tip frame sits at the elbow: (cos θ1, sin θ1, 0)
        assert!((t.translation[0]).abs() < 1e-15);
        assert!((t.translation[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_thetas_give_static_product() {
        let c = chain_of(THREE_REVOLUTE, "link0", "link3");
        let e = FkEngine::new(c.clone(), 1).unwrap();
        let expected = c
            .joints()
            .fold(Transform4::identity(), |acc, j| compose(&acc, &j.origin_transform()));
        assert!(e.forward(&[0.0; 3]).unwrap()[0].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn intermediates_have_one_transform_per_joint() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 2).unwrap();
        let thetas = [1.0, 2.0, 3.0, 3.0, 4.0, 6.0];
        let all = e.forward_intermediates(&thetas).unwrap();
        assert_eq!(all.shape(), (2, 3));
        assert_eq!(all.finals(), e.forward(&thetas).unwrap());
        match e.forward_with(&thetas, false).unwrap() {
            FkOutput::Final(v) => assert_eq!(v.len(), 2),
            FkOutput::Intermediates(_) => panic!("expected finals"),
        }
    }

    #[test]
    fn one_joint_position_jacobian() {
        let e = FkEngine::new(chain_of(PLANAR_2R, "base", "tip"), 1).unwrap();
        // second joint is at the tip frame origin, so only the first moves it
        let j = &e.pose_jacobians(&[0.0, 0.0]).unwrap()[0];
        assert_eq!(j.shape(), (6, 2));
        assert!((j.get(0, 0)).abs() < 1e-15);
        assert!((j.get(1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(j.get(2, 0), 0.0);
        assert_eq!(j.get(5, 0), 1.0);
        assert_eq!(j.get(5, 1), 1.0);
    }

    #[test]
    fn single_precision_path_runs() {
        let e = FkEngine::new(chain_of(THREE_REVOLUTE, "link0", "link3"), 1).unwrap();
        let a = e.forward(&[0.3f64, -0.2, 0.9]).unwrap()[0];
        let b = e.forward(&[0.3f32, -0.2, 0.9]).unwrap()[0];
        assert!(a.max_abs_diff(&b.values()) < 1e-9 * f32::tolerance_scale() * 10.0);
    }
}
