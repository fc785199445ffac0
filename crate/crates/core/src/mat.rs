//! Fixed-capacity dense matrices for the 2×2 and 3×3 per-frequency algebra.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A point or vector in ℝⁿ, padded to [`MAX_DIM`] with zeros.
pub type Vec3 = [f64; MAX_DIM];
/// A complex n-vector, padded to [`MAX_DIM`].
pub type CVec3 = [Complex64; MAX_DIM];

pub const CZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const CVEC_ZERO: CVec3 = [CZERO; MAX_DIM];

/// Scalars usable as matrix entries.
pub trait Scalar:
    Copy + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + fmt::Debug
{
    fn abs_sqr(self) -> f64;
    fn is_finite_value(self) -> bool;
}

impl Scalar for f64 {
    fn abs_sqr(self) -> f64 {
        self * self
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
}

impl Scalar for Complex64 {
    fn abs_sqr(self) -> f64 {
        self.norm_sqr()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Row-major n×n matrix with n ≤ 3.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat<T> {
    n: usize,
    a: [T; MAX_DIM * MAX_DIM],
}

pub type RMat = Mat<f64>;
pub type CMat = Mat<Complex64>;

impl<T: Scalar> Mat<T> {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_DIM, "matrix dimension {n} exceeds {MAX_DIM}");
        Mat {
            n,
            a: [T::zero(); MAX_DIM * MAX_DIM],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * MAX_DIM + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diag(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    /// Builds from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "ragged rows");
            rows[i][j]
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.a[i * MAX_DIM + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.a[i * MAX_DIM + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.n, rhs.n);
        Self::from_fn(self.n, |i, j| {
            (0..self.n).fold(T::zero(), |acc, k| acc + self.get(i, k) * rhs.get(k, j))
        })
    }

    #[inline]
    pub fn mul_vec(&self, v: &[T; MAX_DIM]) -> [T; MAX_DIM] {
        let mut out = [T::zero(); MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = T::zero();
            for (k, vk) in v.iter().enumerate().take(self.n) {
                acc = acc + self.get(i, k) * *vk;
            }
            *o = acc;
        }
        out
    }

    /// `selfᵗ v`.
    #[inline]
    pub fn tmul_vec(&self, v: &[T; MAX_DIM]) -> [T; MAX_DIM] {
        let mut out = [T::zero(); MAX_DIM];
        for (j, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = T::zero();
            for (k, vk) in v.iter().enumerate().take(self.n) {
                acc = acc + self.get(k, j) * *vk;
            }
            *o = acc;
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.get(i, j).abs_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j).is_finite_value()))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

impl<T: Scalar> Add for Mat<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl<T: Scalar> Sub for Mat<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

impl<T: Scalar> Mul for Mat<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.matmul(&rhs)
    }
}

impl RMat {
    pub fn to_complex(&self) -> CMat {
        CMat::from_fn(self.n, |i, j| Complex64::new(self.get(i, j), 0.0))
    }

    /// Real outer product `u vᵗ`.
    pub fn outer(n: usize, u: &Vec3, v: &Vec3) -> Self {
        Self::from_fn(n, |i, j| u[i] * v[j])
    }

    /// Determinant (n ≤ 3).
    pub fn det(&self) -> f64 {
        match self.n {
            0 => 1.0,
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                let g = |i, j| self.get(i, j);
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                    - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
        }
    }

    /// Applies the real matrix to a complex vector.
    #[inline]
    pub fn mul_cvec(&self, v: &CVec3) -> CVec3 {
        let mut out = CVEC_ZERO;
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = CZERO;
            for (k, vk) in v.iter().enumerate().take(self.n) {
                acc += *vk * self.get(i, k);
            }
            *o = acc;
        }
        out
    }

    #[inline]
    pub fn tmul_cvec(&self, v: &CVec3) -> CVec3 {
        let mut out = CVEC_ZERO;
        for (j, o) in out.iter_mut().enumerate().take(self.n) {
            let mut acc = CZERO;
            for (k, vk) in v.iter().enumerate().take(self.n) {
                acc += *vk * self.get(k, j);
            }
            *o = acc;
        }
        out
    }
}

impl CMat {
    /// Complex determinant (n ≤ 3).
    pub fn det(&self) -> Complex64 {
        let g = |i, j| self.get(i, j);
        match self.n {
            0 => Complex64::one(),
            1 => g(0, 0),
            2 => g(0, 0) * g(1, 1) - g(0, 1) * g(1, 0),
            _ => {
                g(0, 0) * (g(1, 1) * g(2, 2) - g(1, 2) * g(2, 1))
                    - g(0, 1) * (g(1, 0) * g(2, 2) - g(1, 2) * g(2, 0))
                    + g(0, 2) * (g(1, 0) * g(2, 1) - g(1, 1) * g(2, 0))
            }
        }
    }

    /// Inverse by the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<CMat> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let g = |i, j| self.get(i, j);
        let adj = match self.n {
            1 => CMat::from_diag(&[Complex64::one()]),
            2 => CMat::from_rows(&[&[g(1, 1), -g(0, 1)], &[-g(1, 0), g(0, 0)]]),
            _ => CMat::from_fn(3, |i, j| {
                // cofactor of (j, i)
                let (r0, r1) = match j {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let (c0, c1) = match i {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let minor = g(r0, c0) * g(r1, c1) - g(r0, c1) * g(r1, c0);
                if (i + j) % 2 == 0 {
                    minor
                } else {
                    -minor
                }
            }),
        };
        Some(adj.scale(Complex64::one() / d))
    }
}

impl<T: Scalar> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<T>> = (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect();
        f.debug_struct("Mat").field("n", &self.n).field("rows", &rows).finish()
    }
}

pub fn dot(n: usize, a: &Vec3, b: &Vec3) -> f64 {
    (0..n).map(|i| a[i] * b[i]).sum()
}

pub fn norm(n: usize, a: &Vec3) -> f64 {
    dot(n, a, a).sqrt()
}

/// Copies a slice of length ≤ 3 into a padded [`Vec3`].
pub fn vec3(v: &[f64]) -> Vec3 {
    let mut out = [0.0; MAX_DIM];
    out[..v.len()].copy_from_slice(v);
    out
}
