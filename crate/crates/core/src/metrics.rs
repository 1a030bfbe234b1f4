//! Rotation distances between batches of homogeneous transforms.
//!
//! Five distances, all translation-blind:
//!
//! | name                  | formula                              | range      |
//! |-----------------------|--------------------------------------|------------|
//! | [`rotation_with_rmse`]| `‖(α,β,γ) − (α̂,β̂,γ̂)‖`               | `[0, ∞)`   |
//! | [`phi2_loss`]         | `min(‖q − q̂‖, ‖q + q̂‖)`              | `[0, √2]`  |
//! | [`phi3_loss`]         | `arccos |q·q̂|`                       | `[0, π/2]` |
//! | [`phi4_loss`]         | `1 − |q·q̂|`                          | `[0, 1]`   |
//! | [`phi5_loss`]         | `‖I − R R̂ᵀ‖_F`                      | `[0, 2√2]` |
//!
//! Φ₃ and Φ₄ use the absolute quaternion inner product (not the norm of the
//! difference), which is what gives them the stated ranges.
//!
//! Φ₁ inherits the Euler extraction of [`pose_from_transform`], including its
//! ±π wrap: `rot_z(π − ε)` and `rot_z(−π + ε)` are `2π − 2ε` apart. At gimbal
//! lock the extraction pins α to zero and the result is flagged.

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::scalar::Real;
use crate::transforms::{
    mat_mul, pose_from_transform, quaternion_from_rotation_unchecked, transpose, Quaternion,
    Transform4,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("batch sizes differ: {0} vs {1}")]
    BatchMismatch(usize, usize),
}

/// Φ₁ value plus the gimbal-lock flag of either extraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EulerDistance<S> {
    pub value: S,
    pub degenerate: bool,
}

/// Pins a value in `[1, 1 + δ]` to exactly 1 while keeping its tangent.
fn clamp_unit<S: Real>(x: S) -> S {
    let v = x.value();
    if v > 1.0 {
        x - S::from_f64(v - 1.0)
    } else {
        x
    }
}

fn norm4<S: Real>(a: [S; 4]) -> S {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt()
}

fn quat<S: Real>(t: &Transform4<S>) -> Quaternion<S> {
    quaternion_from_rotation_unchecked(&t.rotation)
}

pub fn phi1<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> EulerDistance<S> {
    let a = pose_from_transform(t);
    let b = pose_from_transform(t_hat);
    let (da, db, dg) = (a.alpha - b.alpha, a.beta - b.beta, a.gamma - b.gamma);
    EulerDistance {
        value: (da * da + db * db + dg * dg).sqrt(),
        degenerate: a.degenerate || b.degenerate,
    }
}

pub fn phi2_quat<S: Real>(q: &Quaternion<S>, q_hat: &Quaternion<S>) -> S {
    let (a, b) = (q.to_array(), q_hat.to_array());
    let minus = norm4([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]);
    let plus = norm4([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    minus.min(plus).min(S::from_f64(SQRT_2))
}

/// `arccos |q·q̂|`, evaluated as `2·atan2(‖q − s q̂‖, ‖q + s q̂‖)` with
/// `s = sign(q·q̂)`; identical for unit quaternions and exact at `q = q̂`.
pub fn phi3_quat<S: Real>(q: &Quaternion<S>, q_hat: &Quaternion<S>) -> S {
    let s = if q.dot(q_hat).value() < 0.0 { -1.0 } else { 1.0 };
    let (a, b) = (q.to_array(), q_hat.to_array().map(|v| v * S::from_f64(s)));
    let minus = norm4([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]);
    let plus = norm4([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
    S::from_f64(2.0) * minus.atan2(plus)
}

/// Direct `arccos` form of Φ₃ with the argument clamped to `[0, 1]`.
pub fn phi3_quat_acos<S: Real>(q: &Quaternion<S>, q_hat: &Quaternion<S>) -> S {
    clamp_unit(q.dot(q_hat).abs()).acos()
}

pub fn phi4_quat<S: Real>(q: &Quaternion<S>, q_hat: &Quaternion<S>) -> S {
    S::one() - clamp_unit(q.dot(q_hat).abs())
}

pub fn phi2<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> S {
    phi2_quat(&quat(t), &quat(t_hat))
}

pub fn phi3<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> S {
    phi3_quat(&quat(t), &quat(t_hat))
}

pub fn phi4<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> S {
    phi4_quat(&quat(t), &quat(t_hat))
}

/// Squared Frobenius deviation `‖I − R R̂ᵀ‖²_F`; smooth everywhere.
pub fn phi5_squared<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> S {
    let m = mat_mul(&t.rotation, &transpose(&t_hat.rotation));
    let mut acc = S::zero();
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let d = if i == j { S::one() - *v } else { -*v };
            acc += d * d;
        }
    }
    acc
}

pub fn phi5<S: Real>(t: &Transform4<S>, t_hat: &Transform4<S>) -> S {
    phi5_squared(t, t_hat)
        .sqrt()
        .min(S::from_f64(2.0 * SQRT_2))
}

fn batched<S: Real, T>(
    t: &[Transform4<S>],
    t_hat: &[Transform4<S>],
    f: impl Fn(&Transform4<S>, &Transform4<S>) -> T,
) -> Result<Vec<T>, MetricError> {
    if t.len() != t_hat.len() {
        return Err(MetricError::BatchMismatch(t.len(), t_hat.len()));
    }
    Ok(t.iter().zip(t_hat).map(|(a, b)| f(a, b)).collect())
}

/// Φ₁ per batch element, with gimbal-lock flags.
pub fn rotation_with_rmse_flagged<S: Real>(
    t: &[Transform4<S>],
    t_hat: &[Transform4<S>],
) -> Result<Vec<EulerDistance<S>>, MetricError> {
    batched(t, t_hat, phi1)
}

/// Φ₁ per batch element.
pub fn rotation_with_rmse<S: Real>(
    t: &[Transform4<S>],
    t_hat: &[Transform4<S>],
) -> Result<Vec<S>, MetricError> {
    batched(t, t_hat, |a, b| phi1(a, b).value)
}

pub fn phi2_loss<S: Real>(t: &[Transform4<S>], t_hat: &[Transform4<S>]) -> Result<Vec<S>, MetricError> {
    batched(t, t_hat, phi2)
}

pub fn phi3_loss<S: Real>(t: &[Transform4<S>], t_hat: &[Transform4<S>]) -> Result<Vec<S>, MetricError> {
    batched(t, t_hat, phi3)
}

pub fn phi4_loss<S: Real>(t: &[Transform4<S>], t_hat: &[Transform4<S>]) -> Result<Vec<S>, MetricError> {
    batched(t, t_hat, phi4)
}

pub fn phi5_loss<S: Real>(t: &[Transform4<S>], t_hat: &[Transform4<S>]) -> Result<Vec<S>, MetricError> {
    batched(t, t_hat, phi5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{rot_x, rot_z, rpy_to_rotation};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn r(m: crate::transforms::Mat3<f64>) -> Transform4 {
        Transform4::from_rotation(m)
    }

    #[test]
    fn identical_inputs_are_zero() {
        let t = r(rpy_to_rotation(0.3, -0.4, 2.0));
        assert_eq!(phi1(&t, &t).value, 0.0);
        assert!(phi2(&t, &t) < 1e-12);
        assert_eq!(phi3(&t, &t), 0.0);
        assert!(phi4(&t, &t).abs() < 1e-12);
        assert!(phi5(&t, &t) < 1e-12);
    }

    #[test]
    fn single_axis_euler_difference() {
        let d = phi1(&r(rot_x(0.3)), &Transform4::identity());
        assert!((d.value - 0.3).abs() < 1e-15);
        assert!(!d.degenerate);
    }

    #[test]
    fn euler_distance_wraps_at_pi() {
        let eps = 1e-3;
        let d = phi1(&r(rot_z(PI - eps)), &r(rot_z(-PI + eps))).value;
        assert!((d - (2.0 * PI - 2.0 * eps)).abs() < 1e-12);
    }

    #[test]
    fn gimbal_lock_is_flagged() {
        let t = r(rpy_to_rotation(0.2, FRAC_PI_2, 0.1));
        assert!(phi1(&t, &Transform4::identity()).degenerate);
    }

    #[test]
    fn half_turn_hits_range_maxima() {
        let a = Transform4::identity();
        let b = r(rot_z(PI));
        assert!((phi2(&a, &b) - SQRT_2).abs() < 1e-12);
        assert!((phi3(&a, &b) - FRAC_PI_2).abs() < 1e-12);
        assert!((phi4(&a, &b) - 1.0).abs() < 1e-12);
        assert!((phi5(&a, &b) - 2.0 * SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn quaternion_sign_is_irrelevant() {
        let q = quat(&r(rpy_to_rotation(0.3, -0.4, 2.0)));
        let p = quat(&r(rpy_to_rotation(-1.0, 0.2, 0.1)));
        assert_eq!(phi2_quat(&q, &-q), 0.0);
        assert_eq!(phi3_quat(&q, &-q), 0.0);
        assert_eq!(phi4_quat(&q, &-q), phi4_quat(&q, &q));
        assert_eq!(phi2_quat(&q, &p), phi2_quat(&q, &-p));
        assert_eq!(phi3_quat(&q, &p), phi3_quat(&q, &-p));
        assert_eq!(phi4_quat(&q, &p), phi4_quat(&q, &-p));
    }

    #[test]
    fn atan2_and_acos_forms_agree() {
        let q = quat(&r(rpy_to_rotation(0.3, -0.4, 2.0)));
        let p = quat(&r(rpy_to_rotation(-1.0, 0.2, 0.1)));
        assert!((phi3_quat(&q, &p) - phi3_quat_acos(&q, &p)).abs() < 1e-12);
    }

    #[test]
    fn phi4_grows_with_angle() {
        let id = Transform4::identity();
        let mut prev = -1.0;
        for i in 0..=100 {
            let v = phi4(&id, &r(rot_z(PI * i as f64 / 100.0)));
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn batched_usage() {
        let t = vec![Transform4::identity(), r(rot_x(0.5))];
        let target = vec![r(rot_x(0.5)), r(rot_x(0.5))];
        let e = phi5_loss(&t, &target).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e[0] > 0.0 && e[1] < 1e-15);
        assert_eq!(
            phi2_loss(&t, &target[..1]),
            Err(MetricError::BatchMismatch(2, 1))
        );
    }

    #[test]
    fn translation_is_ignored() {
        let a = r(rot_x(0.5));
        let mut b = a;
        b.translation = [4.0, -2.0, 1.0];
        assert_eq!(phi2(&a, &b), phi2(&a, &a));
        assert_eq!(phi5(&a, &b), phi5(&a, &a));
    }
}
