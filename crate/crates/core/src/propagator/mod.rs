//! Evolution operators built from the diagonalized symbol.
//!
//! Every operator here is a spectral function `m(√L(ξ))` applied as
//! `Σ± φ±(ξ/|ξ|) R±(ξ) m(√Λ(ξ)) R±(ξ)ᵗ`, with the per-site frame
//! `(|ξ|, φ±, R±)` cached once per grid when it fits in memory.

mod duhamel;
mod expm;
mod oracle;
mod perturbed;

pub use duhamel::{duhamel, duhamel_series, quadrature_weights, TimeSeries};
pub use expm::{expm, DenseMatrix};
pub use oracle::{
    driven_mode_oracle, evolve_mode, helmholtz_halfwave_oracle, helmholtz_oracle, matrix_exp_field_oracle,
    matrix_exp_oracle, shifted_oracle,
};
pub use perturbed::{solve_perturbed, PerturbedSolution, PotentialField};

use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::angular::{pole_rotation, AngularPartition, SignBranch};
use crate::error::{Error, Result};
use crate::grid::{Grid, LameParams, Space, VectorField};
use crate::mat::{norm, CMat, CVec3, RMat, CVEC_ZERO, CZERO};
use crate::par;
use crate::profile::annulus_profile;

/// Grids with at most this many sites keep their frames in memory.
pub const FRAME_CACHE_LIMIT: usize = 1 << 18;

const SITES_PER_TASK: usize = 512;

/// Per-frequency data shared by every multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub xi_norm: f64,
    /// `(φ₊, φ₋)`; at `ξ = 0` this is `(1, 0)`.
    pub weights: [f64; 2],
    /// `(R₊, R₋)`; a branch with zero weight holds the identity.
    pub rotations: [RMat; 2],
}

impl Frame {
    pub fn at(n: usize, xi: &crate::mat::Vec3, partition: &AngularPartition) -> Frame {
        let len = norm(n, xi);
        if len == 0.0 {
            return Frame {
                xi_norm: 0.0,
                weights: [1.0, 0.0],
                rotations: [RMat::identity(n); 2],
            };
        }
        let mut omega = *xi;
        omega.iter_mut().take(n).for_each(|v| *v /= len);
        let (wp, wm) = partition.weights(omega[0]);
        let rot = |w: f64, sign| {
            if w > 0.0 {
                pole_rotation(n, &omega, sign)
            } else {
                RMat::identity(n)
            }
        };
        Frame {
            xi_norm: len,
            weights: [wp, wm],
            rotations: [rot(wp, SignBranch::Plus), rot(wm, SignBranch::Minus)],
        }
    }

    /// `Σ± φ± R± diag(d_P, d_S, …) R±ᵗ v`.
    #[inline]
    pub fn apply(&self, n: usize, v: &CVec3, d: [Complex64; 2]) -> CVec3 {
        let mut out = CVEC_ZERO;
        for b in 0..2 {
            let w = self.weights[b];
            if w == 0.0 {
                continue;
            }
            let r = &self.rotations[b];
            let mut y = r.tmul_cvec(v);
            y[0] *= d[0] * w;
            for yk in y.iter_mut().take(n).skip(1) {
                *yk *= d[1] * w;
            }
            let z = r.mul_cvec(&y);
            for k in 0..n {
                out[k] += z[k];
            }
        }
        out
    }

    /// `apply(v, d) + apply(w, e)` with one pass over each rotation.
    #[inline]
    pub fn apply_pair(&self, n: usize, v: &CVec3, d: [Complex64; 2], w: &CVec3, e: [Complex64; 2]) -> CVec3 {
        let mut out = CVEC_ZERO;
        for b in 0..2 {
            let wt = self.weights[b];
            if wt == 0.0 {
                continue;
            }
            let r = &self.rotations[b];
            let mut y = r.tmul_cvec(v);
            let x = r.tmul_cvec(w);
            y[0] = (y[0] * d[0] + x[0] * e[0]) * wt;
            for k in 1..n {
                y[k] = (y[k] * d[1] + x[k] * e[1]) * wt;
            }
            let z = r.mul_cvec(&y);
            for k in 0..n {
                out[k] += z[k];
            }
        }
        out
    }
}

/// Cauchy data `(u(0), ∂ₜu(0)) = (f, g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub f: VectorField,
    pub g: VectorField,
}

impl CauchyData {
    pub fn new(f: VectorField, g: VectorField) -> Result<Self> {
        f.check_compatible(&g)?;
        Ok(CauchyData { f, g })
    }

    /// `(f, 0)`.
    pub fn displacement(f: VectorField) -> Self {
        let g = VectorField::zeros(*f.grid(), f.space());
        CauchyData { f, g }
    }

    /// `(0, g)`.
    pub fn velocity(g: VectorField) -> Self {
        let f = VectorField::zeros(*g.grid(), g.space());
        CauchyData { f, g }
    }

    pub fn grid(&self) -> &Grid {
        self.f.grid()
    }

    pub fn to_frequency(&self) -> CauchyData {
        CauchyData {
            f: self.f.to_frequency(),
            g: self.g.to_frequency(),
        }
    }
}

/// `sin(t s)/s`, with the limit `t` at `s = 0`.
#[inline]
pub fn sin_over(t: f64, s: f64) -> f64 {
    let x = t * s;
    if x.abs() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / s
    }
}

/// `(cos(ts), sin_over(t, s))` from one `sin_cos`.
#[inline]
fn cos_sin_over(t: f64, s: f64) -> (f64, f64) {
    let x = t * s;
    let (sn, cs) = x.sin_cos();
    let so = if x.abs() < 1e-4 { t * (1.0 - x * x / 6.0) } else { sn / s };
    (cs, so)
}

/// Multiplier engine bound to a grid and a set of Lamé constants.
#[derive(Clone, Debug)]
pub struct Propagator {
    grid: Grid,
    params: LameParams,
    partition: AngularPartition,
    frames: Option<Vec<Frame>>,
}

impl Propagator {
    pub fn new(grid: Grid, params: LameParams) -> Self {
        Self::with_partition(grid, params, AngularPartition::default())
    }

    pub fn with_partition(grid: Grid, params: LameParams, partition: AngularPartition) -> Self {
        let n = grid.dim();
        let frames = (grid.sites() <= FRAME_CACHE_LIMIT).then(|| {
            par::map_range(grid.sites(), |s| {
                Frame::at(n, &grid.frequency_of_site(s), &partition)
            })
        });
        Propagator {
            grid,
            params,
            partition,
            frames,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &LameParams {
        &self.params
    }

    pub fn partition(&self) -> &AngularPartition {
        &self.partition
    }

    pub fn is_cached(&self) -> bool {
        self.frames.is_some()
    }

    #[inline]
    pub fn frame(&self, site: usize) -> Frame {
        match &self.frames {
            Some(f) => f[site],
            None => Frame::at(self.grid.dim(), &self.grid.frequency_of_site(site), &self.partition),
        }
    }

    /// `(c_p|ξ|, c_s|ξ|)`.
    #[inline]
    pub fn sqrt_eigenvalues(&self, xi_norm: f64) -> [f64; 2] {
        [self.params.c_p() * xi_norm, self.params.c_s() * xi_norm]
    }

    /// Visits every site with its frame, writing the `n` output values.
    pub(crate) fn for_each_site<F>(&self, out: &mut [Complex64], f: F)
    where
        F: Fn(usize, &Frame, &mut [Complex64]) + Sync + Send,
    {
        let n = self.grid.dim();
        par::for_each_chunk_mut(out, n * SITES_PER_TASK, |task, chunk| {
            for (k, vals) in chunk.chunks_mut(n).enumerate() {
                let site = task * SITES_PER_TASK + k;
                match &self.frames {
                    Some(frames) => f(site, &frames[site], vals),
                    None => f(site, &self.frame(site), vals),
                }
            }
        });
    }

    /// Applies `m(√L)` to frequency-space values, `m` given per sqrt-eigenvalue.
    pub fn apply_function_hat<M>(&self, hat: &[Complex64], m: M) -> Vec<Complex64>
    where
        M: Fn(f64) -> Complex64 + Sync + Send,
    {
        let n = self.grid.dim();
        let mut out = vec![CZERO; hat.len()];
        self.for_each_site(&mut out, |site, frame, vals| {
            let mut v = CVEC_ZERO;
            v[..n].copy_from_slice(&hat[site * n..site * n + n]);
            let s = self.sqrt_eigenvalues(frame.xi_norm);
            let r = frame.apply(n, &v, [m(s[0]), m(s[1])]);
            vals.copy_from_slice(&r[..n]);
        });
        out
    }

    /// Applies `m(√L)`; the result lives in the same space as `f`.
    pub fn apply_function<M>(&self, f: &VectorField, m: M) -> Result<VectorField>
    where
        M: Fn(f64) -> Complex64 + Sync + Send,
    {
        self.grid.ensure_same(f.grid())?;
        let hat = f.to_frequency();
        let out = VectorField::from_values(self.grid, Space::Frequency, self.apply_function_hat(hat.values(), m))?;
        Ok(out.into_space(f.space()))
    }

    /// `e^{it√L(D)} f`.
    pub fn halfwave(&self, f: &VectorField, t: f64) -> Result<VectorField> {
        self.apply_function(f, |s| Complex64::from_polar(1.0, t * s))
    }

    /// `cos(t√L(D)) f`.
    pub fn cos_prop(&self, f: &VectorField, t: f64) -> Result<VectorField> {
        self.apply_function(f, |s| Complex64::new((t * s).cos(), 0.0))
    }

    /// `sin(t√L(D))√L(D)^{−1} g`, regularized as `t·sinc(t√L)`.
    pub fn sin_prop(&self, g: &VectorField, t: f64) -> Result<VectorField> {
        self.apply_function(g, |s| Complex64::new(sin_over(t, s), 0.0))
    }

    /// `√L(D) f`.
    pub fn sqrt_apply(&self, f: &VectorField) -> Result<VectorField> {
        self.apply_function(f, |s| Complex64::new(s, 0.0))
    }

    fn combine_hat<A, B>(&self, f: &[Complex64], g: &[Complex64], mf: A, mg: B) -> Vec<Complex64>
    where
        A: Fn(f64) -> Complex64 + Sync + Send,
        B: Fn(f64) -> Complex64 + Sync + Send,
    {
        let mut out = vec![CZERO; f.len()];
        self.combine_hat_into(f, g, mf, mg, &mut out);
        out
    }

    fn combine_hat_into<A, B>(&self, f: &[Complex64], g: &[Complex64], mf: A, mg: B, out: &mut [Complex64])
    where
        A: Fn(f64) -> Complex64 + Sync + Send,
        B: Fn(f64) -> Complex64 + Sync + Send,
    {
        let n = self.grid.dim();
        self.for_each_site(out, |site, frame, vals| {
            let s = self.sqrt_eigenvalues(frame.xi_norm);
            let mut vf = CVEC_ZERO;
            let mut vg = CVEC_ZERO;
            vf[..n].copy_from_slice(&f[site * n..site * n + n]);
            vg[..n].copy_from_slice(&g[site * n..site * n + n]);
            let a = frame.apply_pair(n, &vf, [mf(s[0]), mf(s[1])], &vg, [mg(s[0]), mg(s[1])]);
            vals.copy_from_slice(&a[..n]);
        });
    }

    fn check_data(&self, data: &CauchyData) -> Result<()> {
        self.grid.ensure_same(data.grid())?;
        data.f.check_compatible(&data.g)
    }

    /// `u(t) = cos(t√L) f + sin(t√L)√L^{−1} g`, in the space of `data.f`.
    pub fn solve_homogeneous(&self, data: &CauchyData, t: f64) -> Result<VectorField> {
        self.check_data(data)?;
        let hat = data.to_frequency();
        let out = self.combine_hat(
            hat.f.values(),
            hat.g.values(),
            |s| Complex64::new((t * s).cos(), 0.0),
            |s| Complex64::new(sin_over(t, s), 0.0),
        );
        Ok(VectorField::from_values(self.grid, Space::Frequency, out)?.into_space(data.f.space()))
    }

    /// `∂ₜu(t) = −√L sin(t√L) f + cos(t√L) g`, computed per mode.
    pub fn velocity(&self, data: &CauchyData, t: f64) -> Result<VectorField> {
        self.check_data(data)?;
        let hat = data.to_frequency();
        let out = self.combine_hat(
            hat.f.values(),
            hat.g.values(),
            |s| Complex64::new(-s * (t * s).sin(), 0.0),
            |s| Complex64::new((t * s).cos(), 0.0),
        );
        Ok(VectorField::from_values(self.grid, Space::Frequency, out)?.into_space(data.f.space()))
    }

    /// `E(t) = ‖∂ₜu‖²_{L²} + ‖√L(D)u‖²_{L²}`.
    pub fn energy(&self, data: &CauchyData, t: f64) -> Result<f64> {
        let hat = data.to_frequency();
        let u = self.solve_homogeneous(&hat, t)?;
        let v = self.velocity(&hat, t)?;
        let su = self.sqrt_apply(&u)?;
        Ok(v.l2_norm().powi(2) + su.l2_norm().powi(2))
    }

    /// Physical-space snapshots `u(t_k)`.
    pub fn evolve_series(&self, data: &CauchyData, times: &[f64]) -> Result<Vec<VectorField>> {
        let mut out = Vec::with_capacity(times.len());
        self.evolve_each(data, times, |_, u| {
            out.push(u.clone());
            Ok(())
        })?;
        Ok(out)
    }

    /// Visits the physical-space snapshots `u(t_k)` in order, reusing one
    /// buffer. The branch coordinates `φ±R±ᵗ f̂`, `φ±R±ᵗ ĝ` are computed once,
    /// so each time costs one rotation per branch and one inverse FFT.
    pub fn evolve_each<F>(&self, data: &CauchyData, times: &[f64], mut visit: F) -> Result<()>
    where
        F: FnMut(usize, &VectorField) -> Result<()>,
    {
        self.check_data(data)?;
        let n = self.grid.dim();
        let hat = data.to_frequency();
        let (f, g) = (hat.f.values(), hat.g.values());
        let mut coords = vec![[[CVEC_ZERO; 2]; 2]; self.grid.sites()];
        par::for_each_chunk_mut(&mut coords, SITES_PER_TASK, |task, chunk| {
            for (k, c) in chunk.iter_mut().enumerate() {
                let site = task * SITES_PER_TASK + k;
                let frame = self.frame(site);
                let mut vf = CVEC_ZERO;
                let mut vg = CVEC_ZERO;
                vf[..n].copy_from_slice(&f[site * n..site * n + n]);
                vg[..n].copy_from_slice(&g[site * n..site * n + n]);
                for b in 0..2 {
                    let w = frame.weights[b];
                    if w == 0.0 {
                        continue;
                    }
                    let r = &frame.rotations[b];
                    c[b][0] = r.tmul_cvec(&vf).map(|v| v * w);
                    c[b][1] = r.tmul_cvec(&vg).map(|v| v * w);
                }
            }
        });
        let mut buf = VectorField::zeros(self.grid, Space::Frequency);
        for (k, &t) in times.iter().enumerate() {
            buf.relabel(Space::Frequency);
            self.for_each_site(buf.values_mut(), |site, frame, vals| {
                let s = self.sqrt_eigenvalues(frame.xi_norm);
                let (c0, s0) = cos_sin_over(t, s[0]);
                let (c1, s1) = cos_sin_over(t, s[1]);
                let c = &coords[site];
                let mut out = CVEC_ZERO;
                for b in 0..2 {
                    if frame.weights[b] == 0.0 {
                        continue;
                    }
                    let mut y = CVEC_ZERO;
                    y[0] = c[b][0][0] * c0 + c[b][1][0] * s0;
                    for m in 1..n {
                        y[m] = c[b][0][m] * c1 + c[b][1][m] * s1;
                    }
                    let z = frame.rotations[b].mul_cvec(&y);
                    for m in 0..n {
                        out[m] += z[m];
                    }
                }
                vals.copy_from_slice(&out[..n]);
            });
            buf.transform_to(Space::Physical);
            visit(k, &buf)?;
        }
        Ok(())
    }
}

/// Convenience wrappers building a one-shot [`Propagator`].
pub fn halfwave(f: &VectorField, t: f64, params: &LameParams) -> Result<VectorField> {
    Propagator::new(*f.grid(), *params).halfwave(f, t)
}

pub fn cos_prop(f: &VectorField, t: f64, params: &LameParams) -> Result<VectorField> {
    Propagator::new(*f.grid(), *params).cos_prop(f, t)
}

pub fn sin_prop(g: &VectorField, t: f64, params: &LameParams) -> Result<VectorField> {
    Propagator::new(*g.grid(), *params).sin_prop(g, t)
}

pub fn solve_homogeneous(data: &CauchyData, t: f64, params: &LameParams) -> Result<VectorField> {
    Propagator::new(*data.grid(), *params).solve_homogeneous(data, t)
}

/// Dyadic localizer `f̂ ↦ β(2^{−j}|ξ|) f̂`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrequencyLocalizer {
    pub scale: i32,
}

impl FrequencyLocalizer {
    pub fn new(scale: i32) -> Self {
        FrequencyLocalizer { scale }
    }

    #[inline]
    pub fn multiplier(&self, xi_norm: f64) -> f64 {
        annulus_profile(xi_norm * 2f64.powi(-self.scale))
    }

    /// Result is returned in the space of `f`.
    pub fn apply(&self, f: &VectorField) -> VectorField {
        let grid = *f.grid();
        let n = grid.dim();
        let mut hat = f.to_frequency();
        par::for_each_chunk_mut(hat.values_mut(), n * SITES_PER_TASK, |task, chunk| {
            for (k, vals) in chunk.chunks_mut(n).enumerate() {
                let site = task * SITES_PER_TASK + k;
                let m = self.multiplier(norm(n, &grid.frequency_of_site(site)));
                vals.iter_mut().for_each(|v| *v *= m);
            }
        });
        hat.into_space(f.space())
    }
}

pub fn frequency_localize(f: &VectorField, j: i32) -> VectorField {
    FrequencyLocalizer::new(j).apply(f)
}

/// Pointwise `m(ξ)·f̂(ξ)` on a frequency-space field. `m` is not evaluated at
/// `ξ = 0`; that value is `at_zero` (zero when `None`).
pub fn apply_matrix_multiplier<M>(f: &VectorField, m: M, at_zero: Option<CMat>) -> Result<VectorField>
where
    M: Fn(&crate::mat::Vec3) -> CMat + Sync + Send,
{
    f.require_space(Space::Frequency)?;
    let grid = *f.grid();
    let n = grid.dim();
    let zero = at_zero.unwrap_or_else(|| CMat::zeros(n));
    let bad = AtomicUsize::new(usize::MAX);
    let mut out = f.clone();
    par::for_each_chunk_mut(out.values_mut(), n * SITES_PER_TASK, |task, chunk| {
        for (k, vals) in chunk.chunks_mut(n).enumerate() {
            let site = task * SITES_PER_TASK + k;
            let mat = if site == 0 {
                zero
            } else {
                m(&grid.frequency_of_site(site))
            };
            if !mat.is_finite() {
                bad.fetch_min(site, Ordering::Relaxed);
                continue;
            }
            let mut v = CVEC_ZERO;
            v[..n].copy_from_slice(vals);
            let r = mat.mul_vec(&v);
            vals.copy_from_slice(&r[..n]);
        }
    });
    match bad.into_inner() {
        usize::MAX => Ok(out),
        site => Err(Error::NonFiniteMultiplier(site)),
    }
}

/// Latest time `(L/2 − r₀ − margin)/c_p` before waves leaving a ball of
/// radius `r₀` about the box center reach the opposite face.
pub fn wraparound_time(grid: &Grid, params: &LameParams, radius: f64, margin: f64) -> f64 {
    (grid.length() / 2.0 - radius - margin) / params.c_p()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::Vec3;

    fn grid2() -> Grid {
        Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn plane_wave(grid: Grid, k: [i64; 3], amp: [f64; 3]) -> VectorField {
        let xi = grid.frequency_at(&k);
        VectorField::from_fn(grid, move |x: &Vec3| {
            let ph = Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
            [ph * amp[0], ph * amp[1], ph * amp[2]]
        })
    }

    #[test]
    fn time_zero_is_identity() {
        let g = grid2();
        let p = LameParams::new(0.5, 1.0).unwrap();
        let prop = Propagator::new(g, p);
        let f = VectorField::from_fn(g, |x| {
            [Complex64::new(x[0].sin(), x[1]), Complex64::new((2.0 * x[1]).cos(), 0.0), CZERO]
        });
        assert!(prop.halfwave(&f, 0.0).unwrap().relative_diff(&f).unwrap() < 1e-14);
        assert!(prop.cos_prop(&f, 0.0).unwrap().relative_diff(&f).unwrap() < 1e-14);
        assert!(prop.sin_prop(&f, 0.0).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn p_polarized_mode_gets_p_phase() {
        let g = grid2();
        let p = LameParams::new(0.5, 1.0).unwrap();
        let k = [2, 1, 0];
        let xi = g.frequency_at(&k);
        let len = norm(2, &xi);
        let f = plane_wave(g, k, [xi[0] / len, xi[1] / len, 0.0]);
        let t = 0.7;
        let want = f.scaled(Complex64::from_polar(1.0, t * p.c_p() * len));
        assert!(halfwave(&f, t, &p).unwrap().relative_diff(&want).unwrap() < 1e-13);
    }

    #[test]
    fn s_polarized_velocity_data() {
        let g = Grid::new(3, 8, 2.0 * std::f64::consts::PI).unwrap();
        let p = LameParams::new(2.0, 0.5).unwrap();
        let k = [-1, 2, 1];
        let xi = g.frequency_at(&k);
        let len = norm(3, &xi);
        // (0, 1, −2) is orthogonal to (−1, 2, 1)
        let gf = plane_wave(g, k, [0.0, 1.0, -2.0]);
        let t = 1.3;
        let cs = p.c_s() * len;
        let want = gf.scaled(Complex64::new((t * cs).sin() / cs, 0.0));
        assert!(sin_prop(&gf, t, &p).unwrap().relative_diff(&want).unwrap() < 1e-13);
    }

    #[test]
    fn zero_mode_sin_limit() {
        let g = grid2();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let c = VectorField::from_fn(g, |_| [Complex64::new(1.0, 0.5), Complex64::new(-2.0, 0.0), CZERO]);
        let out = sin_prop(&c, 2.5, &p).unwrap();
        assert!(out.relative_diff(&c.scaled(Complex64::new(2.5, 0.0))).unwrap() < 1e-14);
    }

    #[test]
    fn localizer_examples() {
        let g = Grid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        // |ξ| = 3 lies in [2, 8] for j = 2
        let inside = plane_wave(g, [3, 0, 0], [1.0, 0.0, 0.0]);
        assert!(frequency_localize(&inside, 2).relative_diff(&inside).unwrap() < 1e-14);
        let outside = plane_wave(g, [20, 0, 0], [1.0, 1.0, 0.0]);
        assert!(frequency_localize(&outside, 2).max_abs() < 1e-14);
        let loc = FrequencyLocalizer::new(0);
        let vals: Vec<f64> = [0.25, 0.5, 2.0, 4.0].iter().map(|&t| loc.multiplier(t)).collect();
        assert_eq!(vals, vec![0.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn matrix_multiplier_examples() {
        let g = grid2();
        let f = VectorField::from_fn(g, |x| {
            [Complex64::new(x[0].cos(), 0.2), Complex64::new(x[1].sin() * x[0], 0.0), CZERO]
        })
        .to_frequency();
        let id = apply_matrix_multiplier(&f, |_| CMat::identity(2), Some(CMat::identity(2))).unwrap();
        assert_eq!(id, f);
        let part = AngularPartition::default();
        let weighted = |sign: SignBranch| {
            move |xi: &Vec3| {
                let s = xi[0] / norm(2, xi);
                CMat::identity(2).scale(Complex64::new(part.weight(s, sign), 0.0))
            }
        };
        let a = apply_matrix_multiplier(&f, weighted(SignBranch::Plus), Some(CMat::identity(2))).unwrap();
        let b = apply_matrix_multiplier(&f, weighted(SignBranch::Minus), None).unwrap();
        assert!(a.add(&b).unwrap().relative_diff(&f).unwrap() < 1e-15);
        let k = [1, -3, 0];
        let xi0 = g.frequency_at(&k);
        let grad = plane_wave(g, k, [xi0[0], xi0[1], 0.0]).to_frequency();
        let leray = |xi: &Vec3| crate::symbol::leray_pressure(2, xi).to_complex();
        let out = apply_matrix_multiplier(&grad, leray, None).unwrap();
        assert!(out.relative_diff(&grad).unwrap() < 1e-14);
        let nan = apply_matrix_multiplier(&f, |_| CMat::identity(2).scale(Complex64::new(f64::NAN, 0.0)), None);
        assert!(matches!(nan, Err(Error::NonFiniteMultiplier(1))));
        assert!(apply_matrix_multiplier(&f.to_physical(), |_| CMat::identity(2), None).is_err());
    }

    #[test]
    fn cached_and_uncached_frames_agree() {
        let g = Grid::new(3, 8, 3.0).unwrap();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let prop = Propagator::new(g, p);
        assert!(prop.is_cached());
        let part = AngularPartition::default();
        for site in [0, 5, 77, 300, 511] {
            assert_eq!(prop.frame(site), Frame::at(3, &g.frequency_of_site(site), &part));
        }
    }
}
