//! Hemisphere caps, pole rotations and the angular partition of unity.
//!
//! The cap `S_±` is `{ω ∈ S^{n−1} : ω·(±e₁) ≥ −1/√2}`. On it, `ρ_±(ω)` is the
//! rotation in the plane `span{e₁, ω}` that carries `±e₁` to `ω` and fixes
//! the orthogonal complement, so `ρ_±(ω)ᵗ ω = ±e₁`. The rotation field is
//! `R_±(ξ) = ρ_±(ξ/|ξ|)`.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::{dot, norm, vec3, RMat, Vec3, MAX_DIM};
use crate::profile::flat_bump;
use crate::report::{EstimateReport, Verdict};

/// Lower bound of `ω·(±e₁)` on the caps `S_±`.
pub const CAP_BOUND: f64 = -FRAC_1_SQRT_2;

const UNIT_TOL: f64 = 1e-10;
const POLE_GUARD: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignBranch {
    Plus,
    Minus,
}

impl SignBranch {
    pub const BOTH: [SignBranch; 2] = [SignBranch::Plus, SignBranch::Minus];

    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            SignBranch::Plus => 1.0,
            SignBranch::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SignBranch::Plus => "plus",
            SignBranch::Minus => "minus",
        }
    }

    /// `±e₁` in dimension `n`.
    pub fn pole(self) -> Vec3 {
        let mut p = [0.0; MAX_DIM];
        p[0] = self.sign();
        p
    }
}

/// `ρ_sign(ω)` without domain checks. `omega` must be unit and inside the cap.
#[inline]
pub fn pole_rotation(n: usize, omega: &Vec3, sign: SignBranch) -> RMat {
    let s = sign.sign();
    let c = s * omega[0];
    if 1.0 - c < POLE_GUARD {
        return RMat::identity(n);
    }
    // b = ω − c·a, with a = s·e₁; |b| = sin θ
    let mut b = *omega;
    b[0] -= c * s;
    let sin = norm(n, &b);
    if sin == 0.0 {
        // only reachable at ω = −a, which lies outside the cap
        return RMat::identity(n);
    }
    for v in b.iter_mut().take(n) {
        *v /= sin;
    }
    let a = sign.pole();
    // I + (cos θ − 1)(a aᵗ + b bᵗ) + sin θ (b aᵗ − a bᵗ)
    RMat::from_fn(n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id + (c - 1.0) * (a[i] * a[j] + b[i] * b[j]) + sin * (b[i] * a[j] - a[i] * b[j])
    })
}

fn check_unit(omega: &[f64]) -> Result<Vec3> {
    let n = omega.len();
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let w = vec3(omega);
    let len = norm(n, &w);
    if (len - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(len));
    }
    Ok(w)
}

fn check_cap(omega: &Vec3, sign: SignBranch) -> Result<()> {
    let d = sign.sign() * omega[0];
    if d < CAP_BOUND - 1e-12 {
        return Err(Error::OutsideBranch {
            branch: sign.name(),
            dot: d,
        });
    }
    Ok(())
}

/// The rotation `ρ_sign(ω)` with `ρᵗω = ±e₁`, fixing `span{e₁, ω}^⊥`.
pub fn rotation_to_pole(omega: &[f64], sign: SignBranch) -> Result<RMat> {
    let w = check_unit(omega)?;
    check_cap(&w, sign)?;
    Ok(pole_rotation(omega.len(), &w, sign))
}

/// `R_±(ξ)` evaluated at a nonzero frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationSample {
    pub xi: Vec3,
    pub dim: usize,
    pub sign: SignBranch,
    pub rotation: RMat,
}

pub fn rotation_field_at(xi: &[f64], sign: SignBranch) -> Result<RotationSample> {
    let n = xi.len();
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let x = vec3(xi);
    let len = norm(n, &x);
    if len == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let mut w = x;
    for v in w.iter_mut().take(n) {
        *v /= len;
    }
    check_cap(&w, sign)?;
    Ok(RotationSample {
        xi: x,
        dim: n,
        sign,
        rotation: pole_rotation(n, &w, sign),
    })
}

/// Smooth partition `{φ₊, φ₋}` of the sphere with `φ_±(ω) = χ(±ω·e₁)`,
/// `χ(s) = G((s + a_t)/(2a_t))`, `G` the `exp(−1/x)` smooth step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularPartition {
    half_width: f64,
}

impl Default for AngularPartition {
    fn default() -> Self {
        AngularPartition { half_width: 0.5 }
    }
}

impl AngularPartition {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width < FRAC_1_SQRT_2) {
            return Err(Error::InvalidParameter(format!(
                "transition half-width {half_width} outside (0, 1/sqrt 2)"
            )));
        }
        Ok(AngularPartition { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `(φ₊, φ₋)` as functions of `s = ω·e₁`.
    #[inline]
    pub fn weights(&self, s: f64) -> (f64, f64) {
        let x = (s + self.half_width) / (2.0 * self.half_width);
        let a = flat_bump(x);
        let b = flat_bump(1.0 - x);
        if a == 0.0 {
            (0.0, 1.0)
        } else if b == 0.0 {
            (1.0, 0.0)
        } else {
            let t = a + b;
            (a / t, b / t)
        }
    }

    #[inline]
    pub fn weight(&self, s: f64, sign: SignBranch) -> f64 {
        let (p, m) = self.weights(s);
        match sign {
            SignBranch::Plus => p,
            SignBranch::Minus => m,
        }
    }

    pub fn phi(&self, omega: &[f64], sign: SignBranch) -> Result<f64> {
        let w = check_unit(omega)?;
        Ok(self.weight(w[0], sign))
    }

    /// Whether `ω` (with `s = ω·e₁`) lies in the closed support of `φ_sign`.
    pub fn in_support(&self, s: f64, sign: SignBranch) -> bool {
        sign.sign() * s >= -self.half_width
    }
}

/// Multi-indices `α` with `|α| = order` in dimension `n`.
fn multi_indices(n: usize, order: usize) -> Vec<[usize; MAX_DIM]> {
    let mut out = Vec::new();
    match order {
        0 => out.push([0; MAX_DIM]),
        1 => {
            for i in 0..n {
                let mut a = [0; MAX_DIM];
                a[i] = 1;
                out.push(a);
            }
        }
        _ => {
            for i in 0..n {
                for j in i..n {
                    let mut a = [0; MAX_DIM];
                    a[i] += 1;
                    a[j] += 1;
                    out.push(a);
                }
            }
        }
    }
    out
}

fn rotation_at(n: usize, xi: &Vec3, sign: SignBranch) -> RMat {
    let len = norm(n, xi);
    let mut w = *xi;
    for v in w.iter_mut().take(n) {
        *v /= len;
    }
    pole_rotation(n, &w, sign)
}

/// Central finite-difference `∂^α R(ξ)` with step `h`.
fn fd_derivative(n: usize, xi: &Vec3, sign: SignBranch, alpha: &[usize; MAX_DIM], h: f64) -> RMat {
    let shifted = |d: &[(usize, f64)]| {
        let mut x = *xi;
        for &(axis, amount) in d {
            x[axis] += amount;
        }
        rotation_at(n, &x, sign)
    };
    let axes: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, alpha[i])).collect();
    match axes.as_slice() {
        [] => rotation_at(n, xi, sign),
        [i] => (shifted(&[(*i, h)]) - shifted(&[(*i, -h)])).scale(1.0 / (2.0 * h)),
        [i, j] if i == j => {
            (shifted(&[(*i, h)]) - rotation_at(n, xi, sign).scale(2.0) + shifted(&[(*i, -h)]))
                .scale(1.0 / (h * h))
        }
        [i, j] => (shifted(&[(*i, h), (*j, h)]) - shifted(&[(*i, h), (*j, -h)])
            - shifted(&[(*i, -h), (*j, h)])
            + shifted(&[(*i, -h), (*j, -h)]))
        .scale(1.0 / (4.0 * h * h)),
        _ => unreachable!("orders above 2 are rejected"),
    }
}

fn max_entry(m: &RMat) -> f64 {
    let n = m.dim();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m.get(i, j).abs())
        .fold(0.0, f64::max)
}

/// Parameters for [`sample_mikhlin`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MikhlinSampling {
    pub dim: usize,
    pub sign: SignBranch,
    pub max_order: usize,
    pub annuli: Vec<f64>,
    pub samples_per_annulus: usize,
    pub seed: u64,
}

/// Ratio of per-order sups across annuli allowed for a pass.
pub const MIKHLIN_STABILITY: f64 = 1.5;

/// Samples `|ξ|^{|α|} |∂^α r_jk(ξ)|` over directions in `supp φ_sign` and
/// dyadic annuli. The same directions are reused on every annulus.
pub fn sample_mikhlin(cfg: &MikhlinSampling, partition: &AngularPartition) -> Result<EstimateReport> {
    let n = cfg.dim;
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if cfg.max_order > 2 {
        return Err(Error::InvalidParameter(format!(
            "max_order {} exceeds 2",
            cfg.max_order
        )));
    }
    if cfg.annuli.is_empty() || cfg.samples_per_annulus == 0 {
        return Err(Error::Empty("annuli or samples"));
    }
    for &rho in &cfg.annuli {
        let h = 1e-4 * rho;
        if !(rho.is_finite() && rho > 0.0 && h > 0.0 && h.is_normal()) {
            return Err(Error::InvalidParameter(format!("degenerate step for annulus {rho}")));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dirs = Vec::with_capacity(cfg.samples_per_annulus);
    while dirs.len() < cfg.samples_per_annulus {
        let mut w = [0.0; MAX_DIM];
        for v in w.iter_mut().take(n) {
            *v = rng.sample(StandardNormal);
        }
        let len = norm(n, &w);
        if len < 1e-8 {
            continue;
        }
        for v in w.iter_mut().take(n) {
            *v /= len;
        }
        if partition.in_support(w[0], cfg.sign) {
            dirs.push(w);
        }
    }

    let mut report = EstimateReport::new("mikhlin");
    report
        .param("dim", n)
        .param("sign", cfg.sign.name())
        .param("max_order", cfg.max_order)
        .param("samples_per_annulus", cfg.samples_per_annulus)
        .param("seed", cfg.seed)
        .param("transition_half_width", partition.half_width());

    let mut ok = true;
    for order in 0..=cfg.max_order {
        let alphas = multi_indices(n, order);
        let mut sups = Vec::with_capacity(cfg.annuli.len());
        for &rho in &cfg.annuli {
            let h = 1e-4 * rho;
            let mut sup = 0.0f64;
            for w in &dirs {
                let xi: Vec3 = std::array::from_fn(|i| w[i] * rho);
                for alpha in &alphas {
                    let d = fd_derivative(n, &xi, cfg.sign, alpha, h);
                    sup = sup.max(rho.powi(order as i32) * max_entry(&d));
                }
            }
            report.push(format!("order={order}"), rho, sup);
            sups.push(sup);
        }
        let hi = sups.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
        let ratio = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
        report.stat(&format!("sup_order{order}"), hi);
        report.stat(&format!("ratio_order{order}"), ratio);
        ok &= hi.is_finite() && ratio <= MIKHLIN_STABILITY;
        if order == 0 {
            ok &= hi <= 1.0 + 1e-6;
        }
    }
    report.verdict = Verdict::from_bool(ok);
    Ok(report)
}

/// `ω·e₁` for a nonzero frequency (used by multiplier code).
#[inline]
pub fn axial_cosine(n: usize, xi: &Vec3) -> f64 {
    xi[0] / norm(n, xi)
}

/// Angle between two nonzero vectors.
pub fn angle_between(n: usize, a: &Vec3, b: &Vec3) -> f64 {
    let c = dot(n, a, b) / (norm(n, a) * norm(n, b));
    c.clamp(-1.0, 1.0).acos()
}
