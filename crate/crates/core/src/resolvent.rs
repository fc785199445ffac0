//! The space-time multiplier `((−τ² + iaτ − z)I + L(ξ))⁻¹` of
//! `(∂ₜ² − Δ* + a∂ₜ − z)⁻¹` on a periodic space-time box, and sweeps of the
//! Sobolev quotient `‖u‖_{Lᵠ}/‖F‖_{Lᵖ}` over `(a, z)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::grid::{Grid, LameParams, Space};
use crate::mat::{norm, CMat, CVec3, Vec3, CVEC_ZERO, CZERO, MAX_DIM};
use crate::norms;
use crate::par;
use crate::propagator::{Frame, Propagator};
use crate::report::{EstimateReport, Verdict};
use crate::symbol::lame_symbol_at;

/// Spatial grid times a periodic time axis of `M` points over `[0, T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    space: Grid,
    time_points: usize,
    time_length: f64,
}

impl SpaceTimeGrid {
    pub fn new(space: Grid, time_points: usize, time_length: f64) -> Result<Self> {
        if time_points < 8 || !time_points.is_power_of_two() {
            return Err(Error::InvalidPoints(time_points));
        }
        if !(time_length > 0.0 && time_length.is_finite()) {
            return Err(Error::InvalidLength(time_length));
        }
        Ok(SpaceTimeGrid {
            space,
            time_points,
            time_length,
        })
    }

    pub fn space(&self) -> &Grid {
        &self.space
    }

    pub fn time_points(&self) -> usize {
        self.time_points
    }

    pub fn time_length(&self) -> f64 {
        self.time_length
    }

    pub fn time_step(&self) -> f64 {
        self.time_length / self.time_points as f64
    }

    /// Number of space-time sites `M·Nⁿ`.
    pub fn sites(&self) -> usize {
        self.time_points * self.space.sites()
    }

    pub fn cell_volume(&self) -> f64 {
        self.time_step() * self.space.cell_volume()
    }

    /// Signed time-frequency index for storage index `i`.
    pub fn signed_time_mode(&self, i: usize) -> i64 {
        let m = self.time_points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// `τ = (2π/T)·k`.
    pub fn tau(&self, i: usize) -> f64 {
        2.0 * PI / self.time_length * self.signed_time_mode(i) as f64
    }

    fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.time_points];
        d.extend(self.space.dims());
        d
    }
}

/// An n-component complex field on a [`SpaceTimeGrid`], time-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField {
    grid: SpaceTimeGrid,
    space: Space,
    values: Vec<Complex64>,
}

impl SpaceTimeField {
    pub fn zeros(grid: SpaceTimeGrid, space: Space) -> Self {
        SpaceTimeField {
            grid,
            space,
            values: vec![CZERO; grid.sites() * grid.space.dim()],
        }
    }

    /// Samples `f(t, x)` at `t_i = i·T/M` and the spatial sites.
    pub fn from_fn<F>(grid: SpaceTimeGrid, f: F) -> Self
    where
        F: Fn(f64, &Vec3) -> CVec3 + Sync + Send,
    {
        let n = grid.space.dim();
        let s = grid.space.sites();
        let dt = grid.time_step();
        let mut out = Self::zeros(grid, Space::Physical);
        par::for_each_chunk_mut(&mut out.values, n * s, |it, chunk| {
            let t = it as f64 * dt;
            for (site, vals) in chunk.chunks_mut(n).enumerate() {
                let v = f(t, &grid.space.position_of_site(site));
                vals.copy_from_slice(&v[..n]);
            }
        });
        out
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn transformed(&self, dir: Direction) -> SpaceTimeField {
        let mut values = self.values.clone();
        fft::transform(&mut values, &self.grid.dims(), self.grid.space.dim(), dir);
        SpaceTimeField {
            grid: self.grid,
            space: match dir {
                Direction::Forward => Space::Frequency,
                Direction::Inverse => Space::Physical,
            },
            values,
        }
    }

    pub fn to_frequency(&self) -> SpaceTimeField {
        match self.space {
            Space::Frequency => self.clone(),
            Space::Physical => self.transformed(Direction::Forward),
        }
    }

    pub fn to_physical(&self) -> SpaceTimeField {
        match self.space {
            Space::Physical => self.clone(),
            Space::Frequency => self.transformed(Direction::Inverse),
        }
    }

    pub fn scaled(&self, c: Complex64) -> SpaceTimeField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// `‖a − b‖/‖b‖` over the stored values.
    pub fn relative_diff(&self, other: &SpaceTimeField) -> Result<f64> {
        if self.grid != other.grid || self.space != other.space {
            return Err(Error::GridMismatch("space-time fields differ in grid or space".into()));
        }
        let num: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = other.values.iter().map(|v| v.norm_sqr()).sum();
        Ok(if den == 0.0 { num.sqrt() } else { (num / den).sqrt() })
    }

    /// Space-time `Lᵖ` norm with the vector convention of
    /// [`norms::lr_norm`] and cell weight `(T/M)(L/N)ⁿ`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(format!("p = {p} must lie in [1, inf]")));
        }
        let phys = self.to_physical();
        if p.is_infinite() {
            return Ok(norms::max_abs(&phys.values));
        }
        Ok((self.grid.cell_volume() * norms::power_sum(&phys.values, p)).powf(1.0 / p))
    }

    /// Removes the space-time mean (the `(τ, ξ) = (0, 0)` coefficient).
    pub fn without_mean(&self) -> SpaceTimeField {
        let mut hat = self.to_frequency();
        let n = self.grid.space.dim();
        hat.values[..n].iter_mut().for_each(|v| *v = CZERO);
        match self.space {
            Space::Physical => hat.to_physical(),
            Space::Frequency => hat,
        }
    }

    /// `(τ, ξ)` value at frequency-storage index `(it, site)`.
    pub fn mode_vector(&self, it: usize, site: usize) -> CVec3 {
        let n = self.grid.space.dim();
        let base = (it * self.grid.space.sites() + site) * n;
        let mut v = CVEC_ZERO;
        v[..n].copy_from_slice(&self.values[base..base + n]);
        v
    }
}

/// Damping/absorption `a` and spectral parameter `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventParams {
    pub a: Complex64,
    pub z: Complex64,
}

impl ResolventParams {
    pub fn new(a: Complex64, z: Complex64) -> Self {
        ResolventParams { a, z }
    }

    /// `−τ² + iaτ − z`.
    #[inline]
    pub fn shift(&self, tau: f64) -> Complex64 {
        Complex64::new(-tau * tau, 0.0) + Complex64::i() * self.a * tau - self.z
    }
}

/// `min_e |−τ² + iaτ − z + e|` over the two eigenvalue branches at `|ξ|`.
pub fn symbol_distance(tau: f64, xi_norm: f64, params: &LameParams, rp: &ResolventParams) -> f64 {
    let w = rp.shift(tau);
    let r2 = xi_norm * xi_norm;
    (w + params.p_modulus() * r2).norm().min((w + params.mu() * r2).norm())
}

/// Default floor `1e−3 ·` the largest lattice eigenvalue `(λ+2μ)|ξ|²_max`.
pub fn default_floor(grid: &Grid, params: &LameParams) -> f64 {
    let kmax = grid.nyquist();
    1e-3 * params.p_modulus() * kmax * kmax * grid.dim() as f64
}

fn inverse_factors(tau: f64, xi_norm: f64, params: &LameParams, rp: &ResolventParams) -> [Complex64; 2] {
    let w = rp.shift(tau);
    let r2 = xi_norm * xi_norm;
    [
        Complex64::new(1.0, 0.0) / (w + params.p_modulus() * r2),
        Complex64::new(1.0, 0.0) / (w + params.mu() * r2),
    ]
}

fn frame_to_matrix(n: usize, frame: &Frame, d: [Complex64; 2]) -> CMat {
    let mut m = CMat::zeros(n);
    for j in 0..n {
        let mut e = CVEC_ZERO;
        e[j] = Complex64::new(1.0, 0.0);
        let col = frame.apply(n, &e, d);
        for i in 0..n {
            m.set(i, j, col[i]);
        }
    }
    m
}

/// `((−τ² + iaτ − z)I + L(ξ))⁻¹` through the diagonalization; scalar at `ξ = 0`.
pub fn resolvent_multiplier_at(
    tau: f64,
    xi: &[f64],
    params: &LameParams,
    rp: &ResolventParams,
    floor: f64,
) -> Result<CMat> {
    let n = xi.len();
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let x = crate::mat::vec3(xi);
    let len = norm(n, &x);
    let distance = symbol_distance(tau, len, params, rp);
    if distance < floor {
        return Err(Error::SingularityFloor {
            floor,
            distance,
            tau,
            xi: xi.to_vec(),
        });
    }
    let frame = Frame::at(n, &x, &Default::default());
    Ok(frame_to_matrix(n, &frame, inverse_factors(tau, len, params, rp)))
}

/// Applies the resolvent multiplier or the operator symbol on a lattice.
#[derive(Clone, Debug)]
pub struct Resolvent {
    grid: SpaceTimeGrid,
    prop: Propagator,
}

impl Resolvent {
    pub fn new(grid: SpaceTimeGrid, params: LameParams) -> Self {
        Resolvent {
            grid,
            prop: Propagator::new(grid.space, params),
        }
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn params(&self) -> &LameParams {
        self.prop.params()
    }

    /// Smallest symbol distance over the lattice and where it occurs.
    pub fn lattice_distance(&self, rp: &ResolventParams) -> (f64, f64, Vec3) {
        let s = self.grid.space.sites();
        let best = par::map_range(self.grid.time_points, |it| {
            let tau = self.grid.tau(it);
            let mut best = (f64::INFINITY, 0);
            for site in 0..s {
                let d = symbol_distance(tau, self.prop.frame(site).xi_norm, self.params(), rp);
                if d < best.0 {
                    best = (d, site);
                }
            }
            (best.0, it, best.1)
        });
        let (d, it, site) = best
            .into_iter()
            .fold((f64::INFINITY, 0, 0), |a, b| if b.0 < a.0 { b } else { a });
        (d, self.grid.tau(it), self.grid.space.frequency_of_site(site))
    }

    pub fn check_floor(&self, rp: &ResolventParams, floor: f64) -> Result<()> {
        let (distance, tau, xi) = self.lattice_distance(rp);
        if distance < floor {
            return Err(Error::SingularityFloor {
                floor,
                distance,
                tau,
                xi: xi[..self.grid.space.dim()].to_vec(),
            });
        }
        Ok(())
    }

    /// `max ‖M(τ, ξ)·S(τ, ξ) − I‖_F` over the lattice, `M` the multiplier built
    /// from the diagonalization and `S` the operator symbol.
    pub fn identity_residual(&self, rp: &ResolventParams) -> f64 {
        let n = self.grid.space.dim();
        let space = self.grid.space;
        let params = *self.params();
        let identity = CMat::identity(n);
        let per_time = par::map_range(self.grid.time_points, |it| {
            let tau = self.grid.tau(it);
            let w = rp.shift(tau);
            let mut worst = 0.0f64;
            for site in 0..space.sites() {
                let frame = self.prop.frame(site);
                let m = frame_to_matrix(n, &frame, inverse_factors(tau, frame.xi_norm, &params, rp));
                let xi = space.frequency_of_site(site);
                let s = lame_symbol_at(&xi[..n], &params, -w);
                worst = worst.max((m.matmul(&s) - identity).frobenius());
            }
            worst
        });
        per_time.into_iter().fold(0.0, f64::max)
    }

    fn map_modes<M>(&self, f: &SpaceTimeField, m: M) -> Result<SpaceTimeField>
    where
        M: Fn(f64, &Frame, &CVec3) -> CVec3 + Sync + Send,
    {
        if f.grid != self.grid {
            return Err(Error::GridMismatch("field and resolvent grids differ".into()));
        }
        let n = self.grid.space.dim();
        let s = self.grid.space.sites();
        let mut hat = f.to_frequency();
        par::for_each_chunk_mut(&mut hat.values, n * s, |it, chunk| {
            let tau = self.grid.tau(it);
            for (site, vals) in chunk.chunks_mut(n).enumerate() {
                let frame = self.prop.frame(site);
                let mut v = CVEC_ZERO;
                v[..n].copy_from_slice(vals);
                let out = m(tau, &frame, &v);
                vals.copy_from_slice(&out[..n]);
            }
        });
        Ok(match f.space {
            Space::Physical => hat.to_physical(),
            Space::Frequency => hat,
        })
    }

    /// `u = F⁻¹{((−τ² + iaτ − z)I + L(ξ))⁻¹ F̂}`; the floor must hold lattice-wide.
    pub fn apply(&self, f: &SpaceTimeField, rp: &ResolventParams, floor: f64) -> Result<SpaceTimeField> {
        self.check_floor(rp, floor)?;
        let n = self.grid.space.dim();
        let params = *self.params();
        self.map_modes(f, |tau, frame, v| {
            frame.apply(n, v, inverse_factors(tau, frame.xi_norm, &params, rp))
        })
    }

    /// `(∂ₜ² − Δ* + a∂ₜ − z)u` via its symbol, without diagonalization.
    pub fn apply_operator(&self, u: &SpaceTimeField, rp: &ResolventParams) -> Result<SpaceTimeField> {
        let n = self.grid.space.dim();
        let params = *self.params();
        let space = self.grid.space;
        let s = space.sites();
        if u.grid != self.grid {
            return Err(Error::GridMismatch("field and resolvent grids differ".into()));
        }
        let mut hat = u.to_frequency();
        par::for_each_chunk_mut(&mut hat.values, n * s, |it, chunk| {
            let tau = self.grid.tau(it);
            let w = rp.shift(tau);
            for (site, vals) in chunk.chunks_mut(n).enumerate() {
                let xi = space.frequency_of_site(site);
                let m = lame_symbol_at(&xi[..n], &params, -w);
                let mut v = CVEC_ZERO;
                v[..n].copy_from_slice(vals);
                let out = m.mul_vec(&v);
                vals.copy_from_slice(&out[..n]);
            }
        });
        Ok(match u.space {
            Space::Physical => hat.to_physical(),
            Space::Frequency => hat,
        })
    }
}

pub fn apply_resolvent(
    f: &SpaceTimeField,
    params: &LameParams,
    rp: &ResolventParams,
    floor: f64,
) -> Result<SpaceTimeField> {
    Resolvent::new(f.grid, *params).apply(f, rp, floor)
}

/// `1/p − 1/q = 2/(n+1)` and `2n(n+1)/(n²+4n−1) < p < 2n/(n+1)`.
pub fn admissible_pq(p: f64, q: f64, n: usize) -> bool {
    if !(p > 1.0 && p.is_finite() && q > 1.0 && q.is_finite()) {
        return false;
    }
    let nf = n as f64;
    let gap = (1.0 / p - 1.0 / q - 2.0 / (nf + 1.0)).abs() <= 1e-12;
    let lower = 2.0 * nf * (nf + 1.0) / (nf * nf + 4.0 * nf - 1.0);
    let upper = 2.0 * nf / (nf + 1.0);
    gap && p > lower && p < upper
}

/// Gaussian space-time wave packet centered at `(t0, x0)` with widths
/// `(width_t, width_x)`, carrier `(ω, k)` and polarization `pol`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePacket {
    pub t0: f64,
    pub x0: Vec3,
    pub width_t: f64,
    pub width_x: f64,
    pub omega: f64,
    pub k: Vec3,
    pub polarization: Vec3,
}

impl SpaceTimePacket {
    pub fn sample(&self, grid: SpaceTimeGrid) -> SpaceTimeField {
        let space = grid.space;
        let n = space.dim();
        let period = grid.time_length;
        let p = *self;
        SpaceTimeField::from_fn(grid, move |t, x| {
            let mut dt = t - p.t0;
            dt -= period * (dt / period).round();
            let d = space.periodic_displacement(x, &p.x0);
            let r2: f64 = d[..n].iter().map(|v| v * v).sum();
            let env = (-(dt * dt) / (2.0 * p.width_t * p.width_t) - r2 / (2.0 * p.width_x * p.width_x)).exp();
            let phase: f64 = p.omega * dt + (0..n).map(|a| p.k[a] * d[a]).sum::<f64>();
            let c = Complex64::from_polar(env, phase);
            let mut v = CVEC_ZERO;
            for a in 0..n {
                v[a] = c * p.polarization[a];
            }
            v
        })
    }
}

/// Real `z₀` placing the largest coefficient of `f̂` (at some `(τ, ξ ≠ 0)`)
/// exactly on the characteristic variety of its dominant branch, `a = 0`.
pub fn resonant_parameter(f: &SpaceTimeField, params: &LameParams) -> Result<ResolventParams> {
    let hat = f.to_frequency();
    let grid = f.grid;
    let space = grid.space;
    let n = space.dim();
    let s = space.sites();
    let mut best = (0.0, 0, 0);
    for it in 0..grid.time_points {
        for site in 1..s {
            let m: f64 = hat.mode_vector(it, site).iter().map(|v| v.norm_sqr()).sum();
            if m > best.0 {
                best = (m, it, site);
            }
        }
    }
    if best.0 == 0.0 {
        return Err(Error::Empty("field with nonzero frequency content"));
    }
    let (_, it, site) = best;
    let xi = space.frequency_of_site(site);
    let len = norm(n, &xi);
    let v = hat.mode_vector(it, site);
    let along: Complex64 = (0..n).map(|a| v[a] * (xi[a] / len)).sum();
    let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
    let modulus = if along.norm_sqr() >= 0.5 * total {
        params.p_modulus()
    } else {
        params.mu()
    };
    let tau = grid.tau(it);
    Ok(ResolventParams::new(CZERO, Complex64::new(modulus * len * len - tau * tau, 0.0)))
}

/// Shared core of the quotient sweeps: per `rp`, the maximum over fields of
/// `‖u‖_{Lᵠ}/‖F‖_{Lᵖ}`.
fn quotient_sweep(
    engine: &Resolvent,
    fields: &[SpaceTimeField],
    sweep: &[(ResolventParams, f64)],
    p: f64,
    q: f64,
    report: &mut EstimateReport,
) -> Result<Vec<Option<f64>>> {
    let denominators: Vec<f64> = fields.iter().map(|f| f.lp_norm(p)).collect::<Result<_>>()?;
    let hats: Vec<SpaceTimeField> = fields.iter().map(|f| f.to_frequency()).collect();
    let mut per_rp = Vec::with_capacity(sweep.len());
    for (idx, (rp, floor)) in sweep.iter().enumerate() {
        if let Err(e) = engine.check_floor(rp, *floor) {
            report.note(format!("sweep point {idx} (a = {}, z = {}) skipped: {e}", rp.a, rp.z));
            per_rp.push(None);
            continue;
        }
        let mut best = 0.0f64;
        for (fi, (hat, den)) in hats.iter().zip(&denominators).enumerate() {
            if *den == 0.0 {
                continue;
            }
            let u = engine.apply(hat, rp, *floor)?;
            let quotient = u.lp_norm(q)? / den;
            report.push(
                format!("quotient a={} z={} field={fi}", rp.a, rp.z),
                rp.z.norm().log10(),
                quotient,
            );
            best = best.max(quotient);
        }
        report.push(format!("max a={} z={}", rp.a, rp.z), rp.z.norm().log10(), best);
        per_rp.push(Some(best));
    }
    Ok(per_rp)
}

/// Uniform Sobolev quotient sweep; `(p, q)` must be admissible. Each sweep
/// point carries its own floor. Stats: `max_quotient`, `min_quotient`
/// (over per-point maxima), `variation`, `skipped`.
pub fn sobolev_quotient_sweep(
    fields: &[SpaceTimeField],
    sweep: &[(ResolventParams, f64)],
    p: f64,
    q: f64,
    params: &LameParams,
) -> Result<EstimateReport> {
    let first = fields.first().ok_or(Error::Empty("test fields"))?;
    let n = first.grid.space.dim();
    if !admissible_pq(p, q, n) {
        return Err(Error::InvalidExponent(format!("(p, q) = ({p}, {q}) is not admissible for n = {n}")));
    }
    let engine = Resolvent::new(first.grid, *params);
    let mut report = EstimateReport::new("resolvent-sweep");
    report.param("p", p).param("q", q).param("n", n);
    let per_rp = quotient_sweep(&engine, fields, sweep, p, q, &mut report)?;
    let vals: Vec<f64> = per_rp.iter().flatten().copied().collect();
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    report.stat("max_quotient", max);
    report.stat("min_quotient", min);
    report.stat("variation", max / min);
    report.stat("skipped", (per_rp.len() - vals.len()) as f64);
    report.verdict = Verdict::from_bool(!vals.is_empty() && vals.iter().all(|v| v.is_finite()));
    Ok(report)
}

/// Quotients at `z = z₀ + iδ` for each `δ` (floor `δ/2`), any `(p, q)`.
/// Stat `growth` is the quotient at the smallest `δ` over the largest.
pub fn divergence_probe(
    fields: &[SpaceTimeField],
    base: ResolventParams,
    deltas: &[f64],
    p: f64,
    q: f64,
    params: &LameParams,
) -> Result<EstimateReport> {
    let first = fields.first().ok_or(Error::Empty("test fields"))?;
    if deltas.is_empty() {
        return Err(Error::Empty("probe offsets"));
    }
    let engine = Resolvent::new(first.grid, *params);
    let mut report = EstimateReport::new("resolvent-probe");
    report
        .param("p", p)
        .param("q", q)
        .param("z0", base.z)
        .param("a", base.a);
    let sweep: Vec<(ResolventParams, f64)> = deltas
        .iter()
        .map(|&d| (ResolventParams::new(base.a, base.z + Complex64::new(0.0, d)), d / 2.0))
        .collect();
    let per = quotient_sweep(&engine, fields, &sweep, p, q, &mut report)?;
    let mut pairs: Vec<(f64, f64)> = deltas
        .iter()
        .zip(&per)
        .filter_map(|(&d, v)| v.map(|v| (d, v)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let (Some(small), Some(large)) = (pairs.first(), pairs.last()) {
        report.stat("growth", small.1 / large.1);
        report.stat("delta_ratio", large.0 / small.0);
    }
    report.verdict = Verdict::from_bool(!pairs.is_empty());
    Ok(report)
}
