//! Dense real matrix exponential by scaling and squaring with the
//! degree-13 Padé approximant.

use std::ops::{Add, Mul, Sub};

/// Small dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        DenseMatrix {
            n,
            a: (0..n * n).map(|k| f(k / n, k % n)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseMatrix {
            n: self.n,
            a: self.a.iter().map(|v| v * s).collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|k| self.get(i, k) * v[k]).sum())
            .collect()
    }

    /// Solves `self · X = rhs` by LU with partial pivoting.
    pub fn solve(&self, rhs: &DenseMatrix) -> Option<DenseMatrix> {
        let n = self.n;
        let mut lu = self.a.clone();
        let mut x = rhs.a.clone();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| lu[i * n + col].abs().total_cmp(&lu[j * n + col].abs()))?;
            if lu[piv * n + col] == 0.0 {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    lu.swap(piv * n + k, col * n + k);
                    x.swap(piv * n + k, col * n + k);
                }
            }
            let d = lu[col * n + col];
            for row in col + 1..n {
                let f = lu[row * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for k in col..n {
                    lu[row * n + k] -= f * lu[col * n + k];
                }
                for k in 0..n {
                    x[row * n + k] -= f * x[col * n + k];
                }
            }
        }
        for col in (0..n).rev() {
            let d = lu[col * n + col];
            for k in 0..n {
                x[col * n + k] /= d;
            }
            for row in 0..col {
                let f = lu[row * n + col];
                for k in 0..n {
                    x[row * n + k] -= f * x[col * n + k];
                }
            }
        }
        Some(DenseMatrix { n, a: x })
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            n: self.n,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect(),
        }
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix {
            n: self.n,
            a: self.a.iter().zip(&rhs.a).map(|(x, y)| x - y).collect(),
        }
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.a[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += a * rhs.a[k * n + j];
                }
            }
        }
        out
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `e^A`.
pub fn expm(a: &DenseMatrix) -> DenseMatrix {
    let n = a.dim();
    let norm = a.norm1();
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a.scale(2f64.powi(-s));
    let b = &PADE13;
    let id = DenseMatrix::identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> DenseMatrix {
        let t = &(&a6.scale(c6) + &a4.scale(c4)) + &a2.scale(c2);
        if c0 == 0.0 {
            t
        } else {
            &t + &id.scale(c0)
        }
    };
    let u_inner = &(&a6 * &lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = &a * &u_inner;
    let v = &(&a6 * &lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);
    let mut r = (&v - &u)
        .solve(&(&v + &u))
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
        a.a.iter().zip(&b.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_and_diagonal() {
        assert_eq!(expm(&DenseMatrix::zeros(3)), DenseMatrix::identity(3));
        let d = DenseMatrix::from_fn(3, |i, j| if i == j { [1.0, -2.0, 0.5][i] } else { 0.0 });
        let e = expm(&d);
        for i in 0..3 {
            assert!((e.get(i, i) - d.get(i, i).exp()).abs() < 1e-14 * e.get(i, i).abs().max(1.0));
        }
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, 1], [−w², 0]] t) for an oscillator of frequency w
        let (w, t) = (3.7, 11.3);
        let a = DenseMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => t,
            (1, 0) => -w * w * t,
            _ => 0.0,
        });
        let e = expm(&a);
        let want = DenseMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => (w * t).cos(),
            (0, 1) => (w * t).sin() / w,
            _ => -w * (w * t).sin(),
        });
        assert!(max_diff(&e, &want) < 1e-12);
    }

    #[test]
    fn lu_solve() {
        let m = DenseMatrix::from_fn(3, |i, j| [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]][i][j]);
        let x = m.solve(&DenseMatrix::identity(3)).unwrap();
        assert!(max_diff(&(&m * &x), &DenseMatrix::identity(3)) < 1e-15);
    }
}
