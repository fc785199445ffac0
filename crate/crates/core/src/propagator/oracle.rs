//! Reference solutions that avoid the rotation machinery entirely: the
//! Leray (Helmholtz) split into P and S scalar waves, the exact matrix
//! exponential of the per-mode first-order system, and the closed-form
//! driven oscillator.

use num_complex::Complex64;

use super::expm::{expm, DenseMatrix};
use super::{sin_over, CauchyData};
use crate::error::Result;
use crate::grid::{LameParams, Space, VectorField};
use crate::mat::{dot, CVec3, Vec3, CVEC_ZERO};
use crate::symbol::lame_symbol_real;

/// `(cos(κt), sin(κt)/κ)` for `κ² ≥ 0`, hyperbolic analogues otherwise.
fn oscillator(kappa2: f64, t: f64) -> (f64, f64) {
    if kappa2 >= 0.0 {
        let k = kappa2.sqrt();
        ((k * t).cos(), sin_over(t, k))
    } else {
        let k = (-kappa2).sqrt();
        ((k * t).cosh(), (k * t).sinh() / k)
    }
}

/// Per-mode solution of `u'' + (L(ξ) + shift·I)u = 0` through the Leray split.
fn leray_mode(n: usize, xi: &Vec3, f: &CVec3, g: &CVec3, t: f64, params: &LameParams, shift: f64) -> CVec3 {
    let r2 = dot(n, xi, xi);
    let mut out = CVEC_ZERO;
    if r2 == 0.0 {
        let (c, s) = oscillator(shift, t);
        for k in 0..n {
            out[k] = f[k] * c + g[k] * s;
        }
        return out;
    }
    let proj = |v: &CVec3| -> (CVec3, CVec3) {
        let mut dotv = Complex64::new(0.0, 0.0);
        for k in 0..n {
            dotv += v[k] * xi[k];
        }
        let mut p = CVEC_ZERO;
        let mut s = CVEC_ZERO;
        for k in 0..n {
            p[k] = dotv * (xi[k] / r2);
            s[k] = v[k] - p[k];
        }
        (p, s)
    };
    let (fp, fs) = proj(f);
    let (gp, gs) = proj(g);
    let (cp, sp) = oscillator(params.p_modulus() * r2 + shift, t);
    let (cs, ss) = oscillator(params.mu() * r2 + shift, t);
    for k in 0..n {
        out[k] = fp[k] * cp + gp[k] * sp + fs[k] * cs + gs[k] * ss;
    }
    out
}

fn map_modes<F>(data: &CauchyData, f: F) -> Result<VectorField>
where
    F: Fn(&Vec3, &CVec3, &CVec3) -> CVec3 + Sync + Send,
{
    data.f.check_compatible(&data.g)?;
    let hat = data.to_frequency();
    let grid = *hat.f.grid();
    let out = VectorField::from_site_fn(grid, Space::Frequency, |site| {
        f(
            &grid.frequency_of_site(site),
            &hat.f.site_vector(site),
            &hat.g.site_vector(site),
        )
    });
    Ok(out.into_space(data.f.space()))
}

/// Homogeneous solution at time `t` via the Leray split; P part at speed
/// `c_p`, S part at speed `c_s`.
pub fn helmholtz_oracle(data: &CauchyData, t: f64, params: &LameParams) -> Result<VectorField> {
    shifted_oracle(data, t, params, 0.0)
}

/// Solution of `∂ₜ²u − Δ*u + c·u = 0` (constant scalar potential `c·I`).
pub fn shifted_oracle(data: &CauchyData, t: f64, params: &LameParams, shift: f64) -> Result<VectorField> {
    let n = data.grid().dim();
    map_modes(data, |xi, f, g| leray_mode(n, xi, f, g, t, params, shift))
}

/// `e^{it√L(D)} f` via the Leray split.
pub fn helmholtz_halfwave_oracle(f: &VectorField, t: f64, params: &LameParams) -> Result<VectorField> {
    let grid = *f.grid();
    let n = grid.dim();
    let hat = f.to_frequency();
    let out = VectorField::from_site_fn(grid, Space::Frequency, |site| {
        let xi = grid.frequency_of_site(site);
        let v = hat.site_vector(site);
        let r2 = dot(n, &xi, &xi);
        if r2 == 0.0 {
            return v;
        }
        let len = r2.sqrt();
        let ep = Complex64::from_polar(1.0, t * params.c_p() * len);
        let es = Complex64::from_polar(1.0, t * params.c_s() * len);
        let mut d = Complex64::new(0.0, 0.0);
        for k in 0..n {
            d += v[k] * xi[k];
        }
        let mut out = CVEC_ZERO;
        for k in 0..n {
            let p = d * (xi[k] / r2);
            out[k] = p * ep + (v[k] - p) * es;
        }
        out
    });
    Ok(out.into_space(f.space()))
}

/// Evolves `(û, ∂ₜû)` at a single frequency by `exp(t·[[0, I], [−L(ξ), 0]])`.
pub fn evolve_mode(u0: &CVec3, v0: &CVec3, xi: &[f64], t: f64, params: &LameParams) -> (CVec3, CVec3) {
    let n = xi.len();
    let l = lame_symbol_real(xi, params);
    let a = DenseMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
        (true, false) if j - n == i => t,
        (false, true) => -t * l.get(i - n, j),
        _ => 0.0,
    });
    let e = expm(&a);
    let mut u = CVEC_ZERO;
    let mut v = CVEC_ZERO;
    for i in 0..2 * n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += u0[j] * e.get(i, j) + v0[j] * e.get(i, j + n);
        }
        if i < n {
            u[i] = acc;
        } else {
            v[i - n] = acc;
        }
    }
    (u, v)
}

/// Frequency-space amplitude `û(t, ξ_k)` of the mode `k` (signed multi-index).
pub fn matrix_exp_oracle(data: &CauchyData, t: f64, params: &LameParams, mode: &[i64]) -> Result<CVec3> {
    data.f.check_compatible(&data.g)?;
    let hat = data.to_frequency();
    let grid = *hat.f.grid();
    let site = grid.site_of_mode(mode);
    let xi = grid.frequency_at(mode);
    let (u, _) = evolve_mode(
        &hat.f.site_vector(site),
        &hat.g.site_vector(site),
        &xi[..grid.dim()],
        t,
        params,
    );
    Ok(u)
}

/// [`matrix_exp_oracle`] applied at every lattice mode and summed back.
pub fn matrix_exp_field_oracle(data: &CauchyData, t: f64, params: &LameParams) -> Result<VectorField> {
    let n = data.grid().dim();
    map_modes(data, |xi, f, g| evolve_mode(f, g, &xi[..n], t, params).0)
}

/// Response at time `t` of `u'' + κ²u = e^{iωs}`, `u(0) = u'(0) = 0`
/// (requires `κ ≠ ω`).
pub fn driven_mode_oracle(kappa: f64, omega: f64, t: f64) -> Complex64 {
    let num = Complex64::from_polar(1.0, omega * t)
        - Complex64::new((kappa * t).cos(), 0.0)
        - Complex64::new(0.0, omega * sin_over(t, kappa));
    num / (kappa * kappa - omega * omega)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_oracle_time_zero_and_eigenmode() {
        let p = LameParams::new(0.3, 1.7).unwrap();
        let xi = [1.5, -0.5, 2.0];
        let u0 = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 1.0)];
        let v0 = [Complex64::new(0.2, 0.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)];
        let (u, v) = evolve_mode(&u0, &v0, &xi, 0.0, &p);
        assert_eq!((u, v), (u0, v0));
        // P eigenvector ξ/|ξ|
        let len = (xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let e: CVec3 = std::array::from_fn(|k| Complex64::new(xi[k] / len, 0.0));
        let t = 2.3;
        let (u, _) = evolve_mode(&e, &CVEC_ZERO, &xi, t, &p);
        let c = (p.c_p() * len * t).cos();
        for k in 0..3 {
            assert!((u[k] - e[k] * c).norm() < 1e-12);
        }
    }

    #[test]
    fn mode_oracle_composes() {
        let p = LameParams::new(1.0, 1.0).unwrap();
        let xi = [0.7, 1.1];
        let u0 = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), CVEC_ZERO[0]];
        let v0 = [Complex64::new(0.0, 0.5), Complex64::new(-1.0, 0.0), CVEC_ZERO[0]];
        let (t1, t2) = (0.9, 2.6);
        let (ua, va) = evolve_mode(&u0, &v0, &xi, t1, &p);
        let (ub, _) = evolve_mode(&ua, &va, &xi, t2, &p);
        let (uc, _) = evolve_mode(&u0, &v0, &xi, t1 + t2, &p);
        for k in 0..2 {
            assert!((ub[k] - uc[k]).norm() < 1e-11);
        }
    }

    #[test]
    fn driven_oscillator_solves_ode() {
        let (k, w) = (2.0, 0.7);
        let h = 1e-3;
        let t = 1.9;
        let u = |t| driven_mode_oracle(k, w, t);
        let second = (u(t + h) - u(t) * 2.0 + u(t - h)) / (h * h);
        let res = second + u(t) * (k * k) - Complex64::from_polar(1.0, w * t);
        assert!(res.norm() < 1e-5);
        assert!(u(0.0).norm() < 1e-15);
    }
}
