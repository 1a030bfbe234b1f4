//! Forward-mode automatic differentiation.
//!
//! [`Dual<N>`] carries a primal value and a fixed-width tangent vector. The FK
//! pipeline is generic over [`Real`], so evaluating it on duals yields exact
//! derivatives alongside the values. Jacobians wider than the tangent width are
//! assembled in chunks of [`TANGENT_WIDTH`] columns.
//!
//! Non-smooth primitives follow fixed conventions:
//!
//! * `abs` at zero takes the derivative of the positive branch (`+1`).
//! * `min`/`max` on ties select the first argument, derivative included.
//! * `sqrt` at zero and `acos` at `±1` have unbounded slopes; the slope factor is
//!   clamped to [`MAX_SLOPE`] in magnitude so optimisation loops stay finite.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

use crate::scalar::Real;

/// Tangent width used by [`jacobian`] and [`batch_jacobian`].
pub const TANGENT_WIDTH: usize = 8;

/// Largest slope factor propagated through `sqrt` and `acos` near their
/// singular points.
pub const MAX_SLOPE: f64 = 1e8;

/// Dual number used by the Jacobian drivers.
pub type Tangent = Dual<TANGENT_WIDTH>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutodiffError {
    #[error("seed index {index} out of range for tangent width {width}")]
    SeedOutOfRange { index: usize, width: usize },
    #[error("non-finite value in output row {row}")]
    NonFinite { row: usize },
    #[error("input of length {len} cannot be split into {batch} batch elements")]
    BatchShape { len: usize, batch: usize },
    #[error("output of length {len} cannot be split into {batch} batch elements")]
    OutputShape { len: usize, batch: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub tangent: [f64; N],
}

impl<const N: usize> Dual<N> {
    #[inline]
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            tangent: [0.0; N],
        }
    }

    /// Independent variable seeded on tangent slot `index`.
    pub fn variable(value: f64, index: usize) -> Result<Self, AutodiffError> {
        if index >= N {
            return Err(AutodiffError::SeedOutOfRange { index, width: N });
        }
        let mut tangent = [0.0; N];
        tangent[index] = 1.0;
        Ok(Self { value, tangent })
    }

    #[inline]
    pub fn derivative(&self, index: usize) -> f64 {
        self.tangent[index]
    }

    /// Applies a unary function with primal `value` and slope `slope`.
    #[inline]
    fn chain(self, value: f64, slope: f64) -> Self {
        let mut tangent = self.tangent;
        for t in &mut tangent {
            *t *= slope;
        }
        Self { value, tangent }
    }
}

/// Lifts a real into the dual domain, optionally seeding tangent slot `seed`.
pub fn lift<const N: usize>(x: f64, seed: Option<usize>) -> Result<Dual<N>, AutodiffError> {
    match seed {
        None => Ok(Dual::constant(x)),
        Some(i) => Dual::variable(x, i),
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for (a, b) in self.tangent.iter_mut().zip(rhs.tangent) {
            *a += b;
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, rhs: Self) -> Self {
        self.value -= rhs.value;
        for (a, b) in self.tangent.iter_mut().zip(rhs.tangent) {
            *a -= b;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut tangent = [0.0; N];
        for (i, t) in tangent.iter_mut().enumerate() {
            *t = self.tangent[i] * rhs.value + self.value * rhs.tangent[i];
        }
        Self {
            value: self.value * rhs.value,
            tangent,
        }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let value = self.value / rhs.value;
        let inv = 1.0 / rhs.value;
        let mut tangent = [0.0; N];
        for (i, t) in tangent.iter_mut().enumerate() {
            *t = (self.tangent[i] - value * rhs.tangent[i]) * inv;
        }
        Self { value, tangent }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self.chain(-self.value, -1.0)
    }
}

impl<const N: usize> AddAssign for Dual<N> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const N: usize> SubAssign for Dual<N> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const N: usize> MulAssign for Dual<N> {
    #[inline]
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

fn clamp_slope(s: f64) -> f64 {
    if s.is_nan() {
        MAX_SLOPE
    } else {
        s.clamp(-MAX_SLOPE, MAX_SLOPE)
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    #[inline]
    fn value(self) -> f64 {
        self.value
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s)
    }
    #[inline]
    fn sin_cos(self) -> (Self, Self) {
        let (s, c) = self.value.sin_cos();
        (self.chain(s, c), self.chain(c, -s))
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, clamp_slope(0.5 / r))
    }
    fn acos(self) -> Self {
        let slope = -1.0 / (1.0 - self.value * self.value).sqrt();
        let slope = if slope.is_nan() { -MAX_SLOPE } else { clamp_slope(slope) };
        self.chain(self.value.acos(), slope)
    }
    fn atan2(self, x: Self) -> Self {
        let value = self.value.atan2(x.value);
        let denom = x.value * x.value + self.value * self.value;
        let mut tangent = [0.0; N];
        if denom > 0.0 {
            for (i, t) in tangent.iter_mut().enumerate() {
                *t = (x.value * self.tangent[i] - self.value * x.tangent[i]) / denom;
            }
        }
        Self { value, tangent }
    }
    #[inline]
    fn abs(self) -> Self {
        if self.value >= 0.0 {
            self
        } else {
            -self
        }
    }
    fn is_finite(self) -> bool {
        self.value.is_finite() && self.tangent.iter().all(|t| t.is_finite())
    }
}

/// Dense row-major Jacobian `J[i][j] = ∂f_i/∂x_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobianMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl JacobianMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "jacobian data does not match shape");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &JacobianMatrix) -> JacobianMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = JacobianMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    /// Worst entry-wise error against `reference`, scaled so that values
    /// `<= 1` mean `|a - b| <= max(rel * max(|a|, |b|), abs_floor)`.
    pub fn scaled_error(&self, reference: &JacobianMatrix, rel: f64, abs_floor: f64) -> f64 {
        assert_eq!(self.shape(), reference.shape(), "jacobian shapes differ");
        self.data
            .iter()
            .zip(&reference.data)
            .map(|(a, b)| {
                let tol = (rel * a.abs().max(b.abs())).max(abs_floor);
                (a - b).abs() / tol
            })
            .fold(0.0, f64::max)
    }

    /// Largest relative error `|a - b| / max(|a|, |b|)` over entries whose
    /// absolute error exceeds `abs_floor`.
    pub fn max_relative_error(&self, reference: &JacobianMatrix, abs_floor: f64) -> f64 {
        assert_eq!(self.shape(), reference.shape(), "jacobian shapes differ");
        self.data
            .iter()
            .zip(&reference.data)
            .filter(|(a, b)| (*a - *b).abs() > abs_floor)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }
}

fn check_finite(out: &[Tangent]) -> Result<(), AutodiffError> {
    match out.iter().position(|v| !v.is_finite()) {
        Some(row) => Err(AutodiffError::NonFinite { row }),
        None => Ok(()),
    }
}

/// Jacobian of `f` at `x`, evaluated in forward mode in chunks of
/// [`TANGENT_WIDTH`] input columns.
pub fn jacobian<F>(f: F, x: &[f64]) -> Result<JacobianMatrix, AutodiffError>
where
    F: Fn(&[Tangent]) -> Vec<Tangent>,
{
    let m = x.len();
    let mut inputs: Vec<Tangent> = x.iter().map(|&v| Tangent::constant(v)).collect();
    if m == 0 {
        let out = f(&inputs);
        check_finite(&out)?;
        return Ok(JacobianMatrix::zeros(out.len(), 0));
    }

    let mut jac: Option<JacobianMatrix> = None;
    for start in (0..m).step_by(TANGENT_WIDTH) {
        let end = (start + TANGENT_WIDTH).min(m);
        for (j, input) in inputs.iter_mut().enumerate() {
            input.tangent = [0.0; TANGENT_WIDTH];
            if (start..end).contains(&j) {
                input.tangent[j - start] = 1.0;
            }
        }
        let out = f(&inputs);
        check_finite(&out)?;
        let jac = jac.get_or_insert_with(|| JacobianMatrix::zeros(out.len(), m));
        for (row, v) in out.iter().enumerate() {
            for col in start..end {
                jac.set(row, col, v.tangent[col - start]);
            }
        }
    }
    Ok(jac.expect("at least one pass"))
}

/// Per-element Jacobians of a batched map.
///
/// `thetas` holds `batch` configurations laid out contiguously; `f` maps them
/// to `batch` contiguous output blocks of equal size. Output block `k` must
/// depend only on configuration `k`, so every configuration is seeded on the
/// same tangent slots and a single pass fills all blocks at once.
pub fn batch_jacobian<F>(
    f: F,
    thetas: &[f64],
    batch: usize,
) -> Result<Vec<JacobianMatrix>, AutodiffError>
where
    F: Fn(&[Tangent]) -> Vec<Tangent>,
{
    if batch == 0 || thetas.len() % batch != 0 {
        return Err(AutodiffError::BatchShape {
            len: thetas.len(),
            batch,
        });
    }
    let m = thetas.len() / batch;
    let mut inputs: Vec<Tangent> = thetas.iter().map(|&v| Tangent::constant(v)).collect();
    let mut jacs: Vec<JacobianMatrix> = Vec::new();
    let mut start = 0;
    loop {
        let end = (start + TANGENT_WIDTH).min(m);
        for (idx, input) in inputs.iter_mut().enumerate() {
            let j = idx % m.max(1);
            input.tangent = [0.0; TANGENT_WIDTH];
            if (start..end).contains(&j) {
                input.tangent[j - start] = 1.0;
            }
        }
        let out = f(&inputs);
        check_finite(&out)?;
        if out.len() % batch != 0 {
            return Err(AutodiffError::OutputShape {
                len: out.len(),
                batch,
            });
        }
        let p = out.len() / batch;
        if jacs.is_empty() {
            jacs = vec![JacobianMatrix::zeros(p, m); batch];
        }
        for (k, jac) in jacs.iter_mut().enumerate() {
            for row in 0..p {
                let v = &out[k * p + row];
                for col in start..end {
                    jac.set(row, col, v.tangent[col - start]);
                }
            }
        }
        start = end;
        if start >= m {
            break;
        }
    }
    Ok(jacs)
}

/// Central finite-difference Jacobian with step `h`.
pub fn finite_difference_jacobian<F>(f: F, x: &[f64], h: f64) -> JacobianMatrix
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let p = f(x).len();
    let mut jac = JacobianMatrix::zeros(p, x.len());
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let plus = f(&probe);
        probe[j] = x[j] - h;
        let minus = f(&probe);
        probe[j] = x[j];
        for i in 0..p {
            jac.set(i, j, (plus[i] - minus[i]) / (2.0 * h));
        }
    }
    jac
}
