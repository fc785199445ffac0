//! The Lamé symbol `L_z(ξ) = (μ|ξ|² − z)I + (λ+μ)ξξᵗ`, its diagonalization
//! by the pole rotations, the Leray projectors, and a Jacobi eigensolver
//! used as an independent oracle.

use num_complex::Complex64;

use crate::angular::{rotation_field_at, RotationSample, SignBranch};
use crate::error::{Error, Result};
use crate::grid::LameParams;
use crate::mat::{dot, vec3, CMat, RMat, Vec3};

pub fn lame_symbol_at(xi: &[f64], params: &LameParams, z: Complex64) -> CMat {
    let n = xi.len();
    let x = vec3(xi);
    let r2 = dot(n, &x, &x);
    let coupling = params.lambda() + params.mu();
    CMat::from_fn(n, |i, j| {
        let diag = if i == j {
            Complex64::new(params.mu() * r2, 0.0) - z
        } else {
            Complex64::new(0.0, 0.0)
        };
        diag + coupling * x[i] * x[j]
    })
}

/// Real symbol `L(ξ)` (`z = 0`).
pub fn lame_symbol_real(xi: &[f64], params: &LameParams) -> RMat {
    let n = xi.len();
    let x = vec3(xi);
    let r2 = dot(n, &x, &x);
    let coupling = params.lambda() + params.mu();
    RMat::from_fn(n, |i, j| {
        let d = if i == j { params.mu() * r2 } else { 0.0 };
        d + coupling * x[i] * x[j]
    })
}

/// `Λ(ξ) = diag((λ+2μ)|ξ|², μ|ξ|², …)`, P-wave entry first.
pub fn diagonal_symbol(n: usize, xi_norm: f64, params: &LameParams) -> Vec<f64> {
    let r2 = xi_norm * xi_norm;
    (0..n)
        .map(|k| if k == 0 { params.p_modulus() * r2 } else { params.mu() * r2 })
        .collect()
}

/// `√Λ(ξ) = diag(√(λ+2μ)|ξ|, √μ|ξ|, …)`.
pub fn sqrt_diagonal_symbol(n: usize, xi_norm: f64, params: &LameParams) -> Vec<f64> {
    let speeds = params.speeds();
    (0..n).map(|k| speeds[k] * xi_norm).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalization {
    pub rotation: RotationSample,
    pub eigenvalues: Vec<f64>,
    /// `‖RΛRᵗ − L(ξ)‖_F / ‖L(ξ)‖_F`.
    pub residual: f64,
}

impl Diagonalization {
    pub fn reconstruct(&self) -> RMat {
        let r = self.rotation.rotation;
        r * RMat::from_diag(&self.eigenvalues) * r.transpose()
    }
}

pub fn diagonalize_at(xi: &[f64], sign: SignBranch, params: &LameParams) -> Result<Diagonalization> {
    let rotation = rotation_field_at(xi, sign)?;
    let n = xi.len();
    let x = vec3(xi);
    let eigenvalues = diagonal_symbol(n, dot(n, &x, &x).sqrt(), params);
    let l = lame_symbol_real(xi, params);
    let r = rotation.rotation;
    let rec = r * RMat::from_diag(&eigenvalues) * r.transpose();
    let residual = (rec - l).frobenius() / l.frobenius();
    Ok(Diagonalization {
        rotation,
        eigenvalues,
        residual,
    })
}

/// `R√ΛRᵗ` at `ξ` together with its factors.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtSymbol {
    pub rotation: RMat,
    pub sqrt_eigenvalues: Vec<f64>,
}

impl SqrtSymbol {
    pub fn matrix(&self) -> RMat {
        self.rotation * RMat::from_diag(&self.sqrt_eigenvalues) * self.rotation.transpose()
    }
}

/// Square root of the symbol; `ξ = 0` gives the zero matrix.
pub fn sqrt_symbol_at(xi: &[f64], sign: SignBranch, params: &LameParams) -> Result<SqrtSymbol> {
    let n = xi.len();
    let x = vec3(xi);
    let len = dot(n, &x, &x).sqrt();
    if len == 0.0 {
        return Ok(SqrtSymbol {
            rotation: RMat::identity(n),
            sqrt_eigenvalues: vec![0.0; n],
        });
    }
    let rotation = rotation_field_at(xi, sign)?.rotation;
    Ok(SqrtSymbol {
        rotation,
        sqrt_eigenvalues: sqrt_diagonal_symbol(n, len, params),
    })
}

/// `(P_P, P_S) = (ξξᵗ/|ξ|², I − ξξᵗ/|ξ|²)`.
pub fn leray_projectors_at(xi: &[f64]) -> Result<(RMat, RMat)> {
    let n = xi.len();
    let x = vec3(xi);
    let r2 = dot(n, &x, &x);
    if r2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let pp = RMat::from_fn(n, |i, j| x[i] * x[j] / r2);
    Ok((pp, RMat::identity(n) - pp))
}

/// Leray projectors of a padded vector (hot-loop form; `ξ ≠ 0`).
#[inline]
pub fn leray_pressure(n: usize, xi: &Vec3) -> RMat {
    let r2 = dot(n, xi, xi);
    RMat::from_fn(n, |i, j| xi[i] * xi[j] / r2)
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi sweeps.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricEigen {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
}

/// Cyclic Jacobi iteration until the off-diagonal Frobenius mass is at most
/// `1e−14·‖M‖_F`. `m` is row-major `n×n`.
pub fn brute_eig_oracle(m: &[f64], n: usize) -> Result<SymmetricEigen> {
    if m.len() != n * n {
        return Err(Error::BadLength {
            expected: n * n,
            found: m.len(),
        });
    }
    let fro = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((m[i * n + j] - m[j * n + i]).abs());
        }
    }
    if asym > 1e-12 * fro.max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = m.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let target = 1e-14 * fro;
    for _sweep in 0..100 {
        if off(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                // stable rotation (c, s) zeroing a[p][q]
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    Ok(SymmetricEigen {
        eigenvalues: order.iter().map(|&i| a[i * n + i]).collect(),
        eigenvectors: order
            .iter()
            .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
            .collect(),
    })
}

/// Flattens a small matrix to row-major storage.
pub fn to_row_major(m: &RMat) -> Vec<f64> {
    let n = m.dim();
    (0..n).flat_map(|i| (0..n).map(move |j| m.get(i, j))).collect()
}
