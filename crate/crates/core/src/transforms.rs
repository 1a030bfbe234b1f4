//! Rotations and homogeneous transforms.
//!
//! Euler angles follow the URDF `rpy` convention: extrinsic rotations about
//! x, then y, then z, i.e. `R = Rz(γ) · Ry(β) · Rx(α)`.

use std::ops::Mul;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub type Mat3<S> = [[S; 3]; 3];

/// Gimbal-lock threshold on `cos β` used by [`pose_from_transform`].
pub const GIMBAL_EPS: f64 = 1e-6;

/// Orthonormality tolerance accepted by [`quaternion_from_rotation`].
pub const ORTHONORMAL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("rotation is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
}

/// Parameters `[x, y, z, α, β, γ]` of a six-degree-of-freedom joint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SixDofParams<S = f64>(pub [S; 6]);

impl<S: Real> SixDofParams<S> {
    pub fn zero() -> Self {
        Self([S::zero(); 6])
    }

    pub fn from_xyz_rpy(xyz: [S; 3], rpy: [S; 3]) -> Self {
        Self([xyz[0], xyz[1], xyz[2], rpy[0], rpy[1], rpy[2]])
    }

    pub fn xyz(&self) -> [S; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn rpy(&self) -> [S; 3] {
        [self.0[3], self.0[4], self.0[5]]
    }
}

impl SixDofParams<f64> {
    pub fn lift<T: Real>(&self) -> SixDofParams<T> {
        SixDofParams(self.0.map(T::from_f64))
    }
}

/// Homogeneous 4×4 transform. The bottom row `(0, 0, 0, 1)` is implicit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform4<S = f64> {
    pub rotation: Mat3<S>,
    pub translation: [S; 3],
}

impl<S: Real> Default for Transform4<S> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<S: Real> Transform4<S> {
    pub fn identity() -> Self {
        Self {
            rotation: identity3(),
            translation: [S::zero(); 3],
        }
    }

    pub fn new(rotation: Mat3<S>, translation: [S; 3]) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(x: S, y: S, z: S) -> Self {
        Self {
            rotation: identity3(),
            translation: [x, y, z],
        }
    }

    pub fn from_rotation(rotation: Mat3<S>) -> Self {
        Self {
            rotation,
            translation: [S::zero(); 3],
        }
    }

    /// Row-major 4×4 entries, bottom row included.
    pub fn to_row_major(&self) -> [S; 16] {
        let r = &self.rotation;
        let t = &self.translation;
        let (o, l) = (S::zero(), S::one());
        [
            r[0][0], r[0][1], r[0][2], t[0], //
            r[1][0], r[1][1], r[1][2], t[1], //
            r[2][0], r[2][1], r[2][2], t[2], //
            o, o, o, l,
        ]
    }

    /// Builds a transform from 16 row-major entries; the bottom row is
    /// discarded.
    pub fn from_row_major(m: &[S; 16]) -> Self {
        Self {
            rotation: [
                [m[0], m[1], m[2]],
                [m[4], m[5], m[6]],
                [m[8], m[9], m[10]],
            ],
            translation: [m[3], m[7], m[11]],
        }
    }

    /// Rigid inverse `[Rᵀ, -Rᵀp]`.
    pub fn inverse(&self) -> Self {
        let rt = transpose(&self.rotation);
        let p = mat_vec(&rt, &self.translation);
        Self {
            rotation: rt,
            translation: [-p[0], -p[1], -p[2]],
        }
    }

    pub fn transform_point(&self, p: [S; 3]) -> [S; 3] {
        let q = mat_vec(&self.rotation, &p);
        [
            q[0] + self.translation[0],
            q[1] + self.translation[1],
            q[2] + self.translation[2],
        ]
    }

    pub fn map<T: Real>(&self, f: impl Fn(S) -> T) -> Transform4<T> {
        Transform4 {
            rotation: self.rotation.map(|row| row.map(&f)),
            translation: self.translation.map(&f),
        }
    }

    /// Primal values as an `f64` transform.
    pub fn values(&self) -> Transform4<f64> {
        self.map(|v| v.value())
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.iter().flatten().all(|v| v.is_finite())
            && self.translation.iter().all(|v| v.is_finite())
    }
}

impl Transform4<f64> {
    pub fn lift<T: Real>(&self) -> Transform4<T> {
        self.map(T::from_f64)
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Transform4<f64>) -> f64 {
        self.to_row_major()
            .iter()
            .zip(other.to_row_major().iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `‖RᵀR − I‖_∞` and `det R`.
    pub fn orthonormality(&self) -> (f64, f64) {
        (orthonormality_error(&self.rotation), det3(&self.rotation))
    }
}

impl<S: Real> Mul for Transform4<S> {
    type Output = Transform4<S>;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        compose(&self, &rhs)
    }
}

/// Matrix product `a · b`.
#[inline]
pub fn compose<S: Real>(a: &Transform4<S>, b: &Transform4<S>) -> Transform4<S> {
    let rotation = mat_mul(&a.rotation, &b.rotation);
    let p = mat_vec(&a.rotation, &b.translation);
    Transform4 {
        rotation,
        translation: [
            p[0] + a.translation[0],
            p[1] + a.translation[1],
            p[2] + a.translation[2],
        ],
    }
}

pub fn identity3<S: Real>() -> Mat3<S> {
    let (o, l) = (S::zero(), S::one());
    [[l, o, o], [o, l, o], [o, o, l]]
}

#[inline]
pub fn mat_mul<S: Real>(a: &Mat3<S>, b: &Mat3<S>) -> Mat3<S> {
    let mut out = [[S::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

#[inline]
pub fn mat_vec<S: Real>(a: &Mat3<S>, v: &[S; 3]) -> [S; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn transpose<S: Real>(a: &Mat3<S>) -> Mat3<S> {
    [
        [a[0][0], a[1][0], a[2][0]],
        [a[0][1], a[1][1], a[2][1]],
        [a[0][2], a[1][2], a[2][2]],
    ]
}

pub fn det3<S: Real>(a: &Mat3<S>) -> S {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

/// `‖RᵀR − I‖_∞` (largest absolute entry).
pub fn orthonormality_error<S: Real>(r: &Mat3<S>) -> f64 {
    let rtr = mat_mul(&transpose(r), r);
    let mut worst: f64 = 0.0;
    for (i, row) in rtr.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v.value() - target).abs());
        }
    }
    worst
}

pub fn rot_x<S: Real>(alpha: S) -> Mat3<S> {
    let (s, c) = alpha.sin_cos();
    let (o, l) = (S::zero(), S::one());
    [[l, o, o], [o, c, -s], [o, s, c]]
}

pub fn rot_y<S: Real>(beta: S) -> Mat3<S> {
    let (s, c) = beta.sin_cos();
    let (o, l) = (S::zero(), S::one());
    [[c, o, s], [o, l, o], [-s, o, c]]
}

pub fn rot_z<S: Real>(gamma: S) -> Mat3<S> {
    let (s, c) = gamma.sin_cos();
    let (o, l) = (S::zero(), S::one());
    [[c, -s, o], [s, c, o], [o, o, l]]
}

/// `Rz(γ) · Ry(β) · Rx(α)`, expanded.
#[inline]
pub fn rpy_to_rotation<S: Real>(alpha: S, beta: S, gamma: S) -> Mat3<S> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    let sb_sa = sb * sa;
    let sb_ca = sb * ca;
    [
        [cg * cb, cg * sb_sa - sg * ca, cg * sb_ca + sg * sa],
        [sg * cb, sg * sb_sa + cg * ca, sg * sb_ca - cg * sa],
        [-sb, cb * sa, cb * ca],
    ]
}

#[inline]
pub fn sixdof_to_transform<S: Real>(p: &SixDofParams<S>) -> Transform4<S> {
    let q = &p.0;
    Transform4 {
        rotation: rpy_to_rotation(q[3], q[4], q[5]),
        translation: [q[0], q[1], q[2]],
    }
}

/// Position plus extrinsic xyz Euler angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoseRPY<S = f64> {
    pub x: S,
    pub y: S,
    pub z: S,
    pub alpha: S,
    pub beta: S,
    pub gamma: S,
    /// Set when `|cos β| ≤ GIMBAL_EPS`; α is then pinned to zero.
    pub degenerate: bool,
}

impl<S: Real> PoseRPY<S> {
    /// `[x, y, z, α, β, γ]`.
    pub fn to_array(&self) -> [S; 6] {
        [self.x, self.y, self.z, self.alpha, self.beta, self.gamma]
    }

    pub fn to_params(&self) -> SixDofParams<S> {
        SixDofParams(self.to_array())
    }
}

/// Inverts [`sixdof_to_transform`] away from gimbal lock.
pub fn pose_from_transform<S: Real>(t: &Transform4<S>) -> PoseRPY<S> {
    let r = &t.rotation;
    let cos_beta = (r[0][0] * r[0][0] + r[1][0] * r[1][0]).sqrt();
    let beta = (-r[2][0]).atan2(cos_beta);
    let degenerate = cos_beta.value() <= GIMBAL_EPS;
    let (alpha, gamma) = if degenerate {
        (S::zero(), (-r[0][1]).atan2(r[1][1]))
    } else {
        (r[2][1].atan2(r[2][2]), r[1][0].atan2(r[0][0]))
    };
    PoseRPY {
        x: t.translation[0],
        y: t.translation[1],
        z: t.translation[2],
        alpha,
        beta,
        gamma,
        degenerate,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<S = f64> {
    pub w: S,
    pub x: S,
    pub y: S,
    pub z: S,
}

impl<S: Real> Quaternion<S> {
    pub fn identity() -> Self {
        Self {
            w: S::one(),
            x: S::zero(),
            y: S::zero(),
            z: S::zero(),
        }
    }

    pub fn dot(&self, o: &Self) -> S {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> S {
        self.dot(self).sqrt()
    }

    pub fn to_array(&self) -> [S; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn to_rotation(&self) -> Mat3<S> {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let two = S::from_f64(2.0);
        let l = S::one();
        [
            [
                l - two * (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                l - two * (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                l - two * (x * x + y * y),
            ],
        ]
    }
}

impl<S: Real> std::ops::Neg for Quaternion<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            w: -self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Unit quaternion with `w ≥ 0`, or an error if `r` is not a rotation.
pub fn quaternion_from_rotation<S: Real>(r: &Mat3<S>) -> Result<Quaternion<S>, TransformError> {
    let deviation = orthonormality_error(r).max((det3(r).value() - 1.0).abs());
    if !(deviation <= ORTHONORMAL_TOL) {
        return Err(TransformError::NotOrthonormal { deviation });
    }
    Ok(quaternion_from_rotation_unchecked(r))
}

/// Four-branch extraction; the branch is selected by the largest of the
/// trace and the three diagonal entries. No orthonormality check.
pub fn quaternion_from_rotation_unchecked<S: Real>(r: &Mat3<S>) -> Quaternion<S> {
    let one = S::one();
    let two = S::from_f64(2.0);
    let quarter = S::from_f64(0.25);
    let (r00, r11, r22) = (r[0][0], r[1][1], r[2][2]);
    let trace = r00 + r11 + r22;

    let candidates = [trace.value(), r00.value(), r11.value(), r22.value()];
    let branch = (1..4).fold(0, |best, i| {
        if candidates[i] > candidates[best] {
            i
        } else {
            best
        }
    });

    let q = match branch {
        0 => {
            let s = (one + trace).sqrt() * two;
            Quaternion {
                w: quarter * s,
                x: (r[2][1] - r[1][2]) / s,
                y: (r[0][2] - r[2][0]) / s,
                z: (r[1][0] - r[0][1]) / s,
            }
        }
        1 => {
            let s = (one + r00 - r11 - r22).sqrt() * two;
            Quaternion {
                w: (r[2][1] - r[1][2]) / s,
                x: quarter * s,
                y: (r[0][1] + r[1][0]) / s,
                z: (r[0][2] + r[2][0]) / s,
            }
        }
        2 => {
            let s = (one + r11 - r00 - r22).sqrt() * two;
            Quaternion {
                w: (r[0][2] - r[2][0]) / s,
                x: (r[0][1] + r[1][0]) / s,
                y: quarter * s,
                z: (r[1][2] + r[2][1]) / s,
            }
        }
        _ => {
            let s = (one + r22 - r00 - r11).sqrt() * two;
            Quaternion {
                w: (r[1][0] - r[0][1]) / s,
                x: (r[0][2] + r[2][0]) / s,
                y: (r[1][2] + r[2][1]) / s,
                z: quarter * s,
            }
        }
    };
    if q.w.value() < 0.0 {
        -q
    } else {
        q
    }
}
