//! Kinematic model identification.
//!
//! A link whose geometry is uncertain is replaced by a floating joint (see
//! [`substitute_link_with_joint`]). Its six parameters are then fitted by
//! gradient descent so that the substituted chain reproduces end-effector
//! poses generated by the reference model.
//!
//! The per-configuration loss is `‖p − p̂‖² + λ·‖I − R R̂ᵀ‖²_F`, averaged over
//! the batch. Gradients with respect to the six parameters come from
//! forward-mode duals of width six.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autodiff::Dual;
use crate::kinematics::{FkEngine, FkError};
use crate::metrics::phi5_squared;
use crate::scalar::Real;
use crate::transforms::{pose_from_transform, SixDofParams, Transform4};
use crate::urdf::{extract_chain, substitute_link_with_joint, ChainError, KinematicChain, RobotModel};

type Grad = Dual<6>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentifyError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Fk(#[from] FkError),
    #[error("link `{0}` is not on the chain being identified")]
    TargetNotInChain(String),
    #[error("{0} must be positive")]
    InvalidConfig(&'static str),
    #[error("expected {expected} target poses, got {got}")]
    TargetCount { expected: usize, got: usize },
    #[error("loss became non-finite at parameters {params:?}")]
    NonFiniteLoss { params: [f64; 6] },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// All six parameters start at zero.
    #[default]
    Zero,
    /// Start from the link geometry recorded in the model.
    Urdf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    #[default]
    GradientDescent,
    Adam,
}

fn default_batch_size() -> usize {
    10
}
fn default_learning_rate() -> f64 {
    1e-2
}
fn default_max_steps() -> usize {
    5000
}
fn default_epsilon() -> f64 {
    1e-8
}
fn default_grad_epsilon() -> f64 {
    1e-10
}
fn default_num_configurations() -> usize {
    1
}
fn default_rotation_weight() -> f64 {
    1.0
}

/// Identification settings, as read from the JSON config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentifyConfig {
    pub target_link: String,
    pub base: String,
    pub end: String,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    /// Loss threshold for convergence.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_num_configurations")]
    pub num_configurations: usize,
    #[serde(default)]
    pub init: InitMode,
    #[serde(default)]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_rotation_weight")]
    pub rotation_weight: f64,
    /// Gradient-norm threshold for convergence.
    #[serde(default = "default_grad_epsilon")]
    pub grad_epsilon: f64,
}

impl IdentifyConfig {
    pub fn new(target_link: &str, base: &str, end: &str) -> Self {
        Self {
            target_link: target_link.to_string(),
            base: base.to_string(),
            end: end.to_string(),
            batch_size: default_batch_size(),
            learning_rate: default_learning_rate(),
            max_steps: default_max_steps(),
            epsilon: default_epsilon(),
            seed: 0,
            num_configurations: default_num_configurations(),
            init: InitMode::Zero,
            optimizer: OptimizerKind::GradientDescent,
            rotation_weight: default_rotation_weight(),
            grad_epsilon: default_grad_epsilon(),
        }
    }
}

/// Deterministic stream of joint configurations and their ground-truth poses.
#[derive(Clone, Debug)]
pub struct SampleGenerator {
    engine: FkEngine,
    ranges: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
}

impl SampleGenerator {
    pub fn chain(&self) -> &KinematicChain {
        self.engine.chain()
    }

    pub fn batch_size(&self) -> usize {
        self.engine.batch_size()
    }

    /// Sampling interval of each DoF: URDF limits, else `[−π, π)`.
    pub fn ranges(&self) -> &[(f64, f64)] {
        &self.ranges
    }

    /// `count` fresh configurations, flattened.
    pub fn sample(&mut self, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count * self.ranges.len());
        for _ in 0..count {
            for &(lo, hi) in &self.ranges {
                out.push(if lo < hi { self.rng.gen_range(lo..hi) } else { lo });
            }
        }
        out
    }

    /// One batch of configurations.
    pub fn joint_samples(&mut self) -> Vec<f64> {
        self.sample(self.batch_size())
    }

    /// Ground-truth end transforms for a full batch.
    pub fn poses(&self, thetas: &[f64]) -> Result<Vec<Transform4>, FkError> {
        self.engine.forward(thetas)
    }

    /// Next batch of `(configurations, ground-truth transforms)`.
    pub fn next_batch(&mut self) -> (Vec<f64>, Vec<Transform4>) {
        let thetas = self.joint_samples();
        let poses = self.poses(&thetas).expect("sampled batch has engine shape");
        (thetas, poses)
    }
}

pub fn make_generator(
    model: &RobotModel,
    base: &str,
    end: &str,
    batch_size: usize,
    rng_seed: u64,
) -> Result<SampleGenerator, IdentifyError> {
    let chain = extract_chain(model, base, end)?;
    let ranges = chain
        .dof_limits()
        .into_iter()
        .map(|l| l.unwrap_or((-PI, PI)))
        .collect();
    Ok(SampleGenerator {
        engine: FkEngine::new(chain, batch_size)?,
        ranges,
        rng: ChaCha8Rng::seed_from_u64(rng_seed),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// Loss after the update.
    pub loss: f64,
    /// Norm of the gradient that drove the update.
    pub grad_norm: f64,
}

#[derive(Clone, Debug)]
struct AdamState {
    m: [f64; 6],
    v: [f64; 6],
}

/// Gradient-based fit of the six parameters of a substituted joint.
#[derive(Clone, Debug)]
pub struct ParamEstimator {
    engine: FkEngine,
    /// Substituted-chain joint index of the floating joint.
    target: usize,
    /// DoF offset and count of every joint in the original chain.
    original_layout: Vec<(usize, usize)>,
    original_m: usize,
    params: SixDofParams,
    learning_rate: f64,
    rotation_weight: f64,
    optimizer: OptimizerKind,
    adam: AdamState,
    steps: usize,
}

impl ParamEstimator {
    /// `original` is the chain the configurations refer to; `substituted` the
    /// same path in the model returned by [`substitute_link_with_joint`].
    pub fn new(
        original: &KinematicChain,
        substituted: KinematicChain,
        target_link: &str,
        batch_size: usize,
        initial: SixDofParams,
    ) -> Result<Self, IdentifyError> {
        let target = substituted
            .joints()
            .position(|j| j.child_link == target_link)
            .ok_or_else(|| IdentifyError::TargetNotInChain(target_link.to_string()))?;
        let original_layout = original
            .dof_offsets()
            .into_iter()
            .zip(original.joints().map(|j| j.dof()))
            .collect();
        Ok(Self {
            engine: FkEngine::new(substituted, batch_size)?,
            target,
            original_layout,
            original_m: original.m(),
            params: initial,
            learning_rate: default_learning_rate(),
            rotation_weight: 1.0,
            optimizer: OptimizerKind::GradientDescent,
            adam: AdamState {
                m: [0.0; 6],
                v: [0.0; 6],
            },
            steps: 0,
        })
    }

    pub fn with_learning_rate(mut self, lr: f64) -> Self {
        self.learning_rate = lr;
        self
    }

    pub fn with_rotation_weight(mut self, w: f64) -> Self {
        self.rotation_weight = w;
        self
    }

    pub fn with_optimizer(mut self, kind: OptimizerKind) -> Self {
        self.optimizer = kind;
        self
    }

    pub fn params(&self) -> SixDofParams {
        self.params
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn engine(&self) -> &FkEngine {
        &self.engine
    }

    /// Interleaves the six parameters into original-chain configurations.
    pub fn expand<S: Real>(&self, thetas: &[f64], params: &[S; 6]) -> Vec<S> {
        let b = self.engine.batch_size();
        let mut out = Vec::with_capacity(b * self.engine.m());
        for config in thetas.chunks(self.original_m.max(1)).take(b) {
            for (ji, &(offset, dof)) in self.original_layout.iter().enumerate() {
                if ji == self.target {
                    out.extend_from_slice(params);
                } else {
                    out.extend(config[offset..offset + dof].iter().map(|&v| S::from_f64(v)));
                }
            }
        }
        if self.original_m == 0 && out.is_empty() {
            for _ in 0..b {
                out.extend_from_slice(params);
            }
        }
        out
    }

    fn check(&self, thetas: &[f64], targets: &[Transform4]) -> Result<(), IdentifyError> {
        let b = self.engine.batch_size();
        if thetas.len() != b * self.original_m {
            return Err(FkError::ShapeMismatch {
                expected: b * self.original_m,
                batch: b,
                dof: self.original_m,
                got: thetas.len(),
            }
            .into());
        }
        if targets.len() != b {
            return Err(IdentifyError::TargetCount {
                expected: b,
                got: targets.len(),
            });
        }
        Ok(())
    }

    fn loss_of<S: Real>(
        &self,
        thetas: &[f64],
        targets: &[Transform4],
        params: &[S; 6],
    ) -> Result<S, IdentifyError> {
        let out = self.engine.forward(&self.expand(thetas, params))?;
        let weight = S::from_f64(self.rotation_weight);
        let mut total = S::zero();
        for (t, target) in out.iter().zip(targets) {
            let goal = target.lift::<S>();
            let mut sq = S::zero();
            for i in 0..3 {
                let d = t.translation[i] - goal.translation[i];
                sq += d * d;
            }
            total += sq + weight * phi5_squared(t, &goal);
        }
        Ok(total / S::from_f64(targets.len() as f64))
    }

    /// Loss and its gradient at the current parameters.
    pub fn loss_and_gradient(
        &self,
        thetas: &[f64],
        targets: &[Transform4],
    ) -> Result<(f64, [f64; 6]), IdentifyError> {
        self.check(thetas, targets)?;
        let seeded: [Grad; 6] = std::array::from_fn(|i| {
            Grad::variable(self.params.0[i], i).expect("six tangent slots")
        });
        let loss = self.loss_of(thetas, targets, &seeded)?;
        if !loss.is_finite() {
            return Err(IdentifyError::NonFiniteLoss {
                params: self.params.0,
            });
        }
        Ok((loss.value, loss.tangent))
    }

    /// Loss at arbitrary parameters, without derivatives.
    pub fn loss_at(
        &self,
        thetas: &[f64],
        targets: &[Transform4],
        params: &SixDofParams,
    ) -> Result<f64, IdentifyError> {
        self.check(thetas, targets)?;
        self.loss_of(thetas, targets, &params.0)
    }

    /// One optimizer update.
    pub fn step(&mut self, thetas: &[f64], targets: &[Transform4]) -> Result<StepReport, IdentifyError> {
        let (_, grad) = self.loss_and_gradient(thetas, targets)?;
        let grad_norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        self.steps += 1;
        match self.optimizer {
            OptimizerKind::GradientDescent => {
                for (p, g) in self.params.0.iter_mut().zip(grad) {
                    *p -= self.learning_rate * g;
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2, eps) = (0.9, 0.999, 1e-12);
                let t = self.steps as i32;
                for i in 0..6 {
                    self.adam.m[i] = b1 * self.adam.m[i] + (1.0 - b1) * grad[i];
                    self.adam.v[i] = b2 * self.adam.v[i] + (1.0 - b2) * grad[i] * grad[i];
                    let m_hat = self.adam.m[i] / (1.0 - b1.powi(t));
                    let v_hat = self.adam.v[i] / (1.0 - b2.powi(t));
                    self.params.0[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
        let loss = self.loss_at(thetas, targets, &self.params)?;
        if !loss.is_finite() {
            return Err(IdentifyError::NonFiniteLoss {
                params: self.params.0,
            });
        }
        Ok(StepReport { loss, grad_norm })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentifyStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationReport {
    pub status: IdentifyStatus,
    pub estimated: SixDofParams,
    /// Link geometry of the reference model.
    pub ground_truth: SixDofParams,
    pub steps: usize,
    pub final_loss: f64,
    /// Largest absolute pose difference per axis `[x, y, z, α, β, γ]` over
    /// every configuration used in the fit.
    pub pose_error: [f64; 6],
    /// `|estimated − ground_truth|` per parameter.
    pub param_error: [f64; 6],
    pub loss_history: Vec<f64>,
}

impl IdentificationReport {
    pub fn converged(&self) -> bool {
        self.status == IdentifyStatus::Converged
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Per-axis absolute pose difference; angle differences are wrapped.
pub fn pose_difference(a: &Transform4, b: &Transform4) -> [f64; 6] {
    let pa = pose_from_transform(a).to_array();
    let pb = pose_from_transform(b).to_array();
    std::array::from_fn(|i| {
        let d = pa[i] - pb[i];
        if i < 3 {
            d.abs()
        } else {
            wrap_angle(d).abs()
        }
    })
}

/// Substitutes `target_link`, then fits its parameters against poses from
/// `model`.
pub fn run_identification(
    model: &RobotModel,
    config: &IdentifyConfig,
) -> Result<IdentificationReport, IdentifyError> {
    if config.batch_size == 0 {
        return Err(IdentifyError::InvalidConfig("batch_size"));
    }
    if config.num_configurations == 0 {
        return Err(IdentifyError::InvalidConfig("num_configurations"));
    }
    let substituted_model = substitute_link_with_joint(model, &config.target_link)?;
    let original = extract_chain(model, &config.base, &config.end)?;
    let substituted = extract_chain(&substituted_model, &config.base, &config.end)?;
    let hint = substituted_model
        .parent_joint(&config.target_link)
        .and_then(|j| j.origin_hint)
        .expect("substitution records the original origin");
    let initial = match config.init {
        InitMode::Zero => SixDofParams::zero(),
        InitMode::Urdf => hint,
    };

    let mut generator = make_generator(
        model,
        &config.base,
        &config.end,
        config.num_configurations,
        config.seed,
    )?;
    let pool = generator.sample(config.num_configurations);
    let pool_targets = generator.poses(&pool)?;
    let m = original.m();

    let batch = config.batch_size;
    let mut estimator = ParamEstimator::new(&original, substituted, &config.target_link, batch, initial)?
        .with_learning_rate(config.learning_rate)
        .with_rotation_weight(config.rotation_weight)
        .with_optimizer(config.optimizer);

    let batch_at = |step: usize| -> (Vec<f64>, Vec<Transform4>) {
        let mut thetas = Vec::with_capacity(batch * m);
        let mut targets = Vec::with_capacity(batch);
        for i in 0..batch {
            let c = (step * batch + i) % config.num_configurations;
            thetas.extend_from_slice(&pool[c * m..(c + 1) * m]);
            targets.push(pool_targets[c]);
        }
        (thetas, targets)
    };

    let mut history = Vec::new();
    let (thetas, targets) = batch_at(0);
    let mut loss = estimator.loss_at(&thetas, &targets, &estimator.params())?;
    let mut status = IdentifyStatus::BudgetExhausted;
    if loss < config.epsilon {
        status = IdentifyStatus::Converged;
    } else {
        for step in 0..config.max_steps {
            let (thetas, targets) = batch_at(step);
            let report = estimator.step(&thetas, &targets)?;
            loss = report.loss;
            history.push(loss);
            if loss < config.epsilon || report.grad_norm < config.grad_epsilon {
                status = IdentifyStatus::Converged;
                break;
            }
        }
    }

    // Evaluate on the whole pool.
    let eval = ParamEstimator::new(
        &original,
        estimator.engine().chain().clone(),
        &config.target_link,
        config.num_configurations,
        estimator.params(),
    )?;
    let fitted = eval
        .engine()
        .forward(&eval.expand(&pool, &estimator.params().0))?;
    let mut pose_error = [0.0f64; 6];
    for (a, b) in fitted.iter().zip(&pool_targets) {
        for (acc, d) in pose_error.iter_mut().zip(pose_difference(a, b)) {
            *acc = acc.max(d);
        }
    }
    let estimated = estimator.params();
    let param_error = std::array::from_fn(|i| (estimated.0[i] - hint.0[i]).abs());

    Ok(IdentificationReport {
        status,
        estimated,
        ground_truth: hint,
        steps: estimator.steps(),
        final_loss: loss,
        pose_error,
        param_error,
        loss_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::finite_difference_jacobian;
    use crate::urdf::parse_urdf;

    pub(crate) fn four_segment(tool_xyz: &str, tool_rpy: &str) -> String {
        format!(
            r#"<robot name="arm4">
          <link name="link0"/><link name="link1"/><link name="link2"/><link name="link3"/><link name="tool"/>
          <joint name="j1" type="revolute"><parent link="link0"/><child link="link1"/>
            <origin xyz="0 0 0.4"/><axis xyz="0 0 1"/><limit lower="-3" upper="3"/></joint>
          <joint name="j2" type="revolute"><parent link="link1"/><child link="link2"/>
            <origin xyz="0 0 0.3"/><axis xyz="0 1 0"/><limit lower="-2" upper="2"/></joint>
          <joint name="j3" type="revolute"><parent link="link2"/><child link="link3"/>
            <origin xyz="0.5 0 0"/><axis xyz="0 1 0"/><limit lower="-2" upper="2"/></joint>
          <joint name="tool_mount" type="fixed"><parent link="link3"/><child link="tool"/>
            <origin xyz="{tool_xyz}" rpy="{tool_rpy}"/></joint>
        </robot>"#
        )
    }

    fn estimator_for(model: &RobotModel, batch: usize, init: SixDofParams) -> ParamEstimator {
        let sub = substitute_link_with_joint(model, "tool").unwrap();
        let original = extract_chain(model, "link0", "tool").unwrap();
        let substituted = extract_chain(&sub, "link0", "tool").unwrap();
        ParamEstimator::new(&original, substituted, "tool", batch, init).unwrap()
    }

    #[test]
    fn generator_is_deterministic_and_respects_limits() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0")).unwrap();
        let mut a = make_generator(&model, "link0", "tool", 8, 7).unwrap();
        let mut b = make_generator(&model, "link0", "tool", 8, 7).unwrap();
        let (ta, pa) = a.next_batch();
        let (tb, pb) = b.next_batch();
        assert_eq!(ta, tb);
        assert_eq!(pa, pb);
        for config in ta.chunks(3) {
            assert!((-3.0..3.0).contains(&config[0]));
            assert!((-2.0..2.0).contains(&config[1]));
            assert!((-2.0..2.0).contains(&config[2]));
        }
        let mut c = make_generator(&model, "link0", "tool", 8, 8).unwrap();
        assert_ne!(c.joint_samples(), ta);
    }

    #[test]
    fn generated_poses_match_sequential_oracle() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0.1 0 0.3")).unwrap();
        let mut g = make_generator(&model, "link0", "tool", 16, 3).unwrap();
        let (thetas, poses) = g.next_batch();
        for (config, pose) in thetas.chunks(3).zip(&poses) {
            let naive = crate::reference::forward(&model, "link0", "tool", config).unwrap();
            let flat = crate::reference::flatten(&naive);
            let diff = pose
                .to_row_major()
                .iter()
                .zip(flat)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn ground_truth_is_a_fixed_point() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0.7")).unwrap();
        let truth = SixDofParams([1.0, 0.5, 0.25, 0.0, 0.0, 0.7]);
        let mut est = estimator_for(&model, 4, truth);
        let mut g = make_generator(&model, "link0", "tool", 4, 1).unwrap();
        let (thetas, targets) = g.next_batch();
        let r = est.step(&thetas, &targets).unwrap();
        assert!(r.loss < 1e-20);
        for (a, b) in est.params().0.iter().zip(truth.0) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_learning_rate_keeps_loss_constant() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0")).unwrap();
        let mut est = estimator_for(&model, 4, SixDofParams::zero()).with_learning_rate(0.0);
        let mut g = make_generator(&model, "link0", "tool", 4, 1).unwrap();
        let (thetas, targets) = g.next_batch();
        let first = est.step(&thetas, &targets).unwrap().loss;
        for _ in 0..5 {
            assert_eq!(est.step(&thetas, &targets).unwrap().loss, first);
        }
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let model = parse_urdf(&four_segment("0.3 0 0.1", "0 0 0.785")).unwrap();
        let start = SixDofParams([0.1, -0.2, 0.05, 0.3, -0.1, 0.2]);
        let est = estimator_for(&model, 5, start);
        let mut g = make_generator(&model, "link0", "tool", 5, 11).unwrap();
        let (thetas, targets) = g.next_batch();
        let (_, grad) = est.loss_and_gradient(&thetas, &targets).unwrap();
        let fd = finite_difference_jacobian(
            |p| {
                vec![est
                    .loss_at(&thetas, &targets, &SixDofParams(p.try_into().unwrap()))
                    .unwrap()]
            },
            &start.0,
            1e-6,
        );
        for i in 0..6 {
            let (a, b) = (grad[i], fd.get(0, i));
            assert!((a - b).abs() <= (1e-5 * a.abs().max(b.abs())).max(1e-8), "{i}: {a} vs {b}");
        }
    }

    #[test]
    fn shape_errors_are_reported() {
        let model = parse_urdf(&four_segment("1 0 0", "0 0 0")).unwrap();
        let mut est = estimator_for(&model, 2, SixDofParams::zero());
        assert!(matches!(
            est.step(&[0.0; 5], &[Transform4::identity(); 2]),
            Err(IdentifyError::Fk(FkError::ShapeMismatch { .. }))
        ));
        assert!(matches!(
            est.step(&[0.0; 6], &[Transform4::identity(); 1]),
            Err(IdentifyError::TargetCount { .. })
        ));
    }

    #[test]
    fn target_off_chain_is_rejected() {
        let model = parse_urdf(&four_segment("1 0 0", "0 0 0")).unwrap();
        let sub = substitute_link_with_joint(&model, "tool").unwrap();
        let original = extract_chain(&model, "link0", "link2").unwrap();
        let substituted = extract_chain(&sub, "link0", "link2").unwrap();
        assert!(matches!(
            ParamEstimator::new(&original, substituted, "tool", 1, SixDofParams::zero()),
            Err(IdentifyError::TargetNotInChain(_))
        ));
    }

    #[test]
    fn correct_model_converges_immediately() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0")).unwrap();
        let mut cfg = IdentifyConfig::new("tool", "link0", "tool");
        cfg.init = InitMode::Urdf;
        let r = run_identification(&model, &cfg).unwrap();
        assert!(r.converged());
        assert!(r.steps <= 100);
    }

    #[test]
    fn translation_link_from_zero() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0")).unwrap();
        let cfg = IdentifyConfig::new("tool", "link0", "tool");
        let r = run_identification(&model, &cfg).unwrap();
        assert!(r.converged(), "{:?}", r.final_loss);
        assert!(r.steps <= 3000, "{} steps", r.steps);
        assert!(r.pose_error.iter().all(|e| *e < 1e-4), "{:?}", r.pose_error);
        // median over successive 100-step windows never rises
        let medians: Vec<f64> = r
            .loss_history
            .chunks(100)
            .map(|w| {
                let mut w = w.to_vec();
                w.sort_by(f64::total_cmp);
                w[w.len() / 2]
            })
            .collect();
        assert!(medians.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn rotated_link_parameters_recovered_from_many_configurations() {
        let model = parse_urdf(&four_segment("0.3 0 0.1", "0 0 0.7853981633974483")).unwrap();
        let mut cfg = IdentifyConfig::new("tool", "link0", "tool");
        cfg.num_configurations = 20;
        let r = run_identification(&model, &cfg).unwrap();
        assert!(r.param_error.iter().all(|e| *e < 1e-3), "{:?} after {} steps", r.param_error, r.steps);
        assert!(r.pose_error.iter().all(|e| *e < 1e-3), "{:?}", r.pose_error);
    }

    #[test]
    fn adam_variant_also_converges() {
        let model = parse_urdf(&four_segment("1 0.5 0.25", "0 0 0")).unwrap();
        let mut cfg = IdentifyConfig::new("tool", "link0", "tool");
        cfg.optimizer = OptimizerKind::Adam;
        cfg.learning_rate = 1e-2;
        cfg.epsilon = 1e-8;
        let r = run_identification(&model, &cfg).unwrap();
        assert!(r.pose_error.iter().all(|e| *e < 1e-3), "{:?}", r.pose_error);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let model = parse_urdf(&four_segment("0.3 0 0.1", "0 0 0.785")).unwrap();
        let mut cfg = IdentifyConfig::new("tool", "link0", "tool");
        cfg.num_configurations = 12;
        cfg.max_steps = 200;
        let a = run_identification(&model, &cfg).unwrap();
        let b = run_identification(&model, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: IdentifyConfig =
            serde_json::from_str(r#"{"target_link":"tool","base":"link0","end":"tool"}"#).unwrap();
        assert_eq!(cfg, IdentifyConfig::new("tool", "link0", "tool"));
        let cfg: IdentifyConfig = serde_json::from_str(
            r#"{"target_link":"t","base":"b","end":"e","init":"urdf","optimizer":"adam"}"#,
        )
        .unwrap();
        assert_eq!(cfg.init, InitMode::Urdf);
        assert_eq!(cfg.optimizer, OptimizerKind::Adam);
    }
}
