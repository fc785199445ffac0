//! Periodic lattice, DFT conventions, vector fields and Lamé constants.
//!
//! # Conventions
//!
//! * Sites are indexed row-major over the multi-index `(j_0, …, j_{n-1})`,
//!   last axis fastest; site `j` sits at `x_j = j · L/N`.
//! * Field storage is site-major, component-minor: value `(site, c)` lives at
//!   `site * n + c`.
//! * Frequency storage uses FFT wrap order. Storage index `i` along an axis
//!   carries the signed wave number `k = i` for `i < N/2` and `k = i − N`
//!   otherwise, and the frequency `ξ = (2π/L)·k`.
//! * [`dft_forward`] computes `f̂(ξ) = Σ_x f(x) e^{−i x·ξ}` (no scaling);
//!   [`dft_inverse`] computes `f(x) = N^{−n} Σ_ξ f̂(ξ) e^{i x·ξ}`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{self, Direction};
use crate::mat::{CVec3, Vec3, CVEC_ZERO, CZERO, MAX_DIM};
use crate::par;

/// Periodic box `[0, L)ⁿ` sampled with `N` points per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidPoints(points));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidLength(length));
        }
        Ok(Grid {
            dim,
            points,
            length,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn points(&self) -> usize {
        self.points
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    /// Riemann-sum weight `(L/N)ⁿ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Lattice frequency spacing `2π/L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Largest `|ξ|` along an axis (the Nyquist magnitude).
    pub fn nyquist(&self) -> f64 {
        self.frequency_step() * (self.points / 2) as f64
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.points; self.dim]
    }

    #[inline]
    pub fn multi_index(&self, site: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        let mut s = site;
        for a in (0..self.dim).rev() {
            idx[a] = s % self.points;
            s /= self.points;
        }
        idx
    }

    #[inline]
    pub fn site_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.points + i % self.points)
    }

    /// Signed wave number for storage index `i`.
    #[inline]
    pub fn signed_mode(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Signed multi-index `k ∈ [−N/2, N/2)ⁿ` of a frequency-storage site.
    pub fn wave_number(&self, site: usize) -> [i64; MAX_DIM] {
        let idx = self.multi_index(site);
        let mut k = [0; MAX_DIM];
        for a in 0..self.dim {
            k[a] = self.signed_mode(idx[a]);
        }
        k
    }

    /// `ξ_k = (2π/L)·k` for a signed multi-index.
    pub fn frequency_at(&self, k: &[i64]) -> Vec3 {
        let step = self.frequency_step();
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = step * k[a] as f64;
        }
        xi
    }

    /// Frequency-storage site holding the signed multi-index `k` (taken mod N).
    pub fn site_of_mode(&self, k: &[i64]) -> usize {
        let n = self.points as i64;
        let idx: Vec<usize> = k[..self.dim]
            .iter()
            .map(|&ka| ka.rem_euclid(n) as usize)
            .collect();
        self.site_index(&idx)
    }

    #[inline]
    pub fn frequency_of_site(&self, site: usize) -> Vec3 {
        let step = self.frequency_step();
        let idx = self.multi_index(site);
        let mut xi = [0.0; MAX_DIM];
        for a in 0..self.dim {
            xi[a] = step * self.signed_mode(idx[a]) as f64;
        }
        xi
    }

    #[inline]
    pub fn position_of_site(&self, site: usize) -> Vec3 {
        let h = self.spacing();
        let idx = self.multi_index(site);
        let mut x = [0.0; MAX_DIM];
        for a in 0..self.dim {
            x[a] = h * idx[a] as f64;
        }
        x
    }

    /// Box center `(L/2, …, L/2)`.
    pub fn center(&self) -> Vec3 {
        let mut c = [0.0; MAX_DIM];
        c[..self.dim].fill(self.length / 2.0);
        c
    }

    /// Minimal-image displacement `x − y` on the torus.
    pub fn periodic_displacement(&self, x: &Vec3, y: &Vec3) -> Vec3 {
        let mut d = [0.0; MAX_DIM];
        for a in 0..self.dim {
            let mut v = x[a] - y[a];
            v -= self.length * (v / self.length).round();
            d[a] = v;
        }
        d
    }

    pub fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Whether field values are samples in `x` or DFT coefficients in `ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Physical,
    Frequency,
}

impl Space {
    pub fn name(self) -> &'static str {
        match self {
            Space::Physical => "physical",
            Space::Frequency => "frequency",
        }
    }
}

/// An n-component complex field on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    grid: Grid,
    space: Space,
    values: Vec<Complex64>,
}

impl VectorField {
    pub fn zeros(grid: Grid, space: Space) -> Self {
        VectorField {
            grid,
            space,
            values: vec![CZERO; grid.sites() * grid.dim()],
        }
    }

    pub fn from_values(grid: Grid, space: Space, values: Vec<Complex64>) -> Result<Self> {
        let expected = grid.sites() * grid.dim();
        if values.len() != expected {
            return Err(Error::BadLength {
                expected,
                found: values.len(),
            });
        }
        Ok(VectorField {
            grid,
            space,
            values,
        })
    }

    /// Samples `f(x)` at every site (physical space).
    pub fn from_fn<F>(grid: Grid, f: F) -> Self
    where
        F: Fn(&Vec3) -> CVec3 + Sync + Send,
    {
        Self::from_site_fn(grid, Space::Physical, |site| f(&grid.position_of_site(site)))
    }

    /// Fills each site from `f(site)`.
    pub fn from_site_fn<F>(grid: Grid, space: Space, f: F) -> Self
    where
        F: Fn(usize) -> CVec3 + Sync + Send,
    {
        let n = grid.dim();
        let mut field = Self::zeros(grid, space);
        par::for_each_chunk_mut(&mut field.values, n * 1024, |chunk_idx, chunk| {
            for (k, site_vals) in chunk.chunks_mut(n).enumerate() {
                let v = f(chunk_idx * 1024 + k);
                site_vals.copy_from_slice(&v[..n]);
            }
        });
        field
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn space(&self) -> Space {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    #[inline]
    pub fn site_vector(&self, site: usize) -> CVec3 {
        let n = self.grid.dim();
        let mut v = CVEC_ZERO;
        v[..n].copy_from_slice(&self.values[site * n..site * n + n]);
        v
    }

    pub fn set_site_vector(&mut self, site: usize, v: &CVec3) {
        let n = self.grid.dim();
        self.values[site * n..site * n + n].copy_from_slice(&v[..n]);
    }

    pub fn require_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::WrongSpace {
                expected: expected.name(),
                found: self.space.name(),
            })
        }
    }

    /// Returns the field in frequency space (transforming if needed).
    pub fn to_frequency(&self) -> VectorField {
        match self.space {
            Space::Frequency => self.clone(),
            Space::Physical => transform_field(self, Direction::Forward),
        }
    }

    /// Returns the field in physical space (transforming if needed).
    pub fn to_physical(&self) -> VectorField {
        match self.space {
            Space::Physical => self.clone(),
            Space::Frequency => transform_field(self, Direction::Inverse),
        }
    }

    /// Transforms into `space`.
    pub fn into_space(mut self, space: Space) -> VectorField {
        self.transform_to(space);
        self
    }

    /// Reinterprets the values as living in `space`, for buffers about to be
    /// overwritten.
    pub(crate) fn relabel(&mut self, space: Space) {
        self.space = space;
    }

    /// Transforms into `space` in place.
    pub fn transform_to(&mut self, space: Space) {
        if self.space == space {
            return;
        }
        let dir = match space {
            Space::Frequency => Direction::Forward,
            Space::Physical => Direction::Inverse,
        };
        fft::transform(&mut self.values, &self.grid.dims(), self.grid.dim(), dir);
        self.space = space;
    }

    pub fn scaled(&self, s: Complex64) -> VectorField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: Complex64, other: &VectorField) -> Result<VectorField> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (o, b) in out.values.iter_mut().zip(&other.values) {
            *o += a * b;
        }
        Ok(out)
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn check_compatible(&self, other: &VectorField) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.space != other.space {
            return Err(Error::WrongSpace {
                expected: self.space.name(),
                found: other.space.name(),
            });
        }
        Ok(())
    }

    /// `Σ |v|²` over all stored values (no quadrature weight).
    pub fn sum_sq(&self) -> f64 {
        let vals = &self.values;
        par::sum_chunks(vals.len(), par::REDUCE_CHUNK, |r| {
            vals[r].iter().map(|v| v.norm_sqr()).sum()
        })
    }

    /// Physical-space L² norm `((L/N)ⁿ Σ_x |f(x)|²)^{1/2}`, evaluated in
    /// whichever space the field lives in (Parseval in frequency space).
    pub fn l2_norm(&self) -> f64 {
        let s = self.sum_sq();
        let scale = match self.space {
            Space::Physical => self.grid.cell_volume(),
            Space::Frequency => self.grid.cell_volume() / self.grid.sites() as f64,
        };
        (s * scale).sqrt()
    }

    /// `‖self − other‖ / ‖other‖` in the stored representation.
    pub fn relative_diff(&self, other: &VectorField) -> Result<f64> {
        self.check_compatible(other)?;
        let a = &self.values;
        let b = &other.values;
        let num = par::sum_chunks(a.len(), par::REDUCE_CHUNK, |r| {
            r.map(|i| (a[i] - b[i]).norm_sqr()).sum()
        });
        let den = other.sum_sq();
        Ok(if den == 0.0 {
            num.sqrt()
        } else {
            (num / den).sqrt()
        })
    }

    pub fn max_abs(&self) -> f64 {
        let vals = &self.values;
        par::max_chunks(vals.len(), par::REDUCE_CHUNK, |r| {
            vals[r].iter().map(|v| v.norm()).fold(0.0, f64::max)
        })
        .max(0.0)
    }
}

fn transform_field(f: &VectorField, dir: Direction) -> VectorField {
    let mut values = f.values.clone();
    fft::transform(&mut values, &f.grid.dims(), f.grid.dim(), dir);
    VectorField {
        grid: f.grid,
        space: match dir {
            Direction::Forward => Space::Frequency,
            Direction::Inverse => Space::Physical,
        },
        values,
    }
}

/// Component-wise forward DFT with kernel `e^{−i x·ξ}`, unnormalized.
pub fn dft_forward(f: &VectorField) -> Result<VectorField> {
    f.require_space(Space::Physical)?;
    Ok(transform_field(f, Direction::Forward))
}

/// Inverse of [`dft_forward`]; carries the `N^{−n}` factor.
pub fn dft_inverse(f: &VectorField) -> Result<VectorField> {
    f.require_space(Space::Frequency)?;
    Ok(transform_field(f, Direction::Inverse))
}

/// Lamé constants with the ellipticity gate `μ > 0`, `λ + 2μ > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLame")]
pub struct LameParams {
    lambda: f64,
    mu: f64,
}

#[derive(Deserialize)]
struct RawLame {
    lambda: f64,
    mu: f64,
}

impl TryFrom<RawLame> for LameParams {
    type Error = Error;
    fn try_from(r: RawLame) -> Result<Self> {
        LameParams::new(r.lambda, r.mu)
    }
}

impl LameParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let p_modulus = lambda + 2.0 * mu;
        if !(mu > 0.0 && p_modulus > 0.0 && lambda.is_finite() && mu.is_finite()) {
            return Err(Error::NotElliptic { mu, p_modulus });
        }
        Ok(LameParams { lambda, mu })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `λ + 2μ`.
    pub fn p_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    /// Pressure-wave speed `√(λ+2μ)`.
    pub fn c_p(&self) -> f64 {
        self.p_modulus().sqrt()
    }

    /// Shear-wave speed `√μ`.
    pub fn c_s(&self) -> f64 {
        self.mu.sqrt()
    }

    /// Wave speeds in eigenvalue order: `[c_p, c_s, c_s]`.
    pub fn speeds(&self) -> [f64; MAX_DIM] {
        [self.c_p(), self.c_s(), self.c_s()]
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"LAMEFLD1";

/// Writes `LAMEFLD1 | u32 n | u32 N | u32 space (0 physical, 1 frequency) |
/// f64 L | n·Nⁿ × (f64 re, f64 im)`, all little-endian.
pub fn write_snapshot<W: Write>(f: &VectorField, mut w: W) -> Result<()> {
    let g = f.grid();
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&(g.points() as u32).to_le_bytes())?;
    let flag: u32 = match f.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    };
    w.write_all(&flag.to_le_bytes())?;
    w.write_all(&g.length().to_le_bytes())?;
    let mut buf = Vec::with_capacity(f.values.len() * 16);
    for v in &f.values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut r: R) -> Result<VectorField> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut R| -> Result<u32> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let dim = read_u32(&mut r)? as usize;
    let points = read_u32(&mut r)? as usize;
    let space = match read_u32(&mut r)? {
        0 => Space::Physical,
        1 => Space::Frequency,
        other => return Err(Error::Snapshot(format!("unknown space flag {other}"))),
    };
    let mut f64buf = [0u8; 8];
    r.read_exact(&mut f64buf)?;
    let length = f64::from_le_bytes(f64buf);
    let grid = Grid::new(dim, points, length)?;
    let count = grid.sites() * dim;
    let mut raw = vec![0u8; count * 16];
    r.read_exact(&mut raw)?;
    let values = raw
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Snapshot("trailing bytes".into()));
    }
    VectorField::from_values(grid, space, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: Grid, space: Space, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..grid.sites() * grid.dim())
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        VectorField::from_values(grid, space, vals).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(matches!(Grid::new(4, 8, 1.0), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(Grid::new(2, 12, 1.0), Err(Error::InvalidPoints(12))));
        assert!(matches!(Grid::new(2, 4, 1.0), Err(Error::InvalidPoints(4))));
        assert!(matches!(Grid::new(3, 8, 0.0), Err(Error::InvalidLength(_))));
        assert!(Grid::new(3, 8, -1.0).is_err());
    }

    #[test]
    fn frequency_convention_instances() {
        let g = Grid::new(2, 8, 2.0 * PI).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.signed_mode(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        let xi = g.frequency_at(&[-4, 3]);
        assert!((xi[0] + 4.0).abs() < 1e-15 && (xi[1] - 3.0).abs() < 1e-15);

        let g3 = Grid::new(3, 128, 64.0).unwrap();
        assert!((g3.frequency_step() - 2.0 * PI / 64.0).abs() < 1e-16);
        let site = g3.site_of_mode(&[-1, 5, -64]);
        assert_eq!(g3.wave_number(site), [-1, 5, -64]);
    }

    #[test]
    fn constant_and_single_mode_transforms() {
        let g = Grid::new(2, 8, 3.0).unwrap();
        let c = Complex64::new(0.5, -2.0);
        let f = VectorField::from_fn(g, |_| [c, c * 2.0, CZERO]);
        let fh = dft_forward(&f).unwrap();
        let nn = g.sites() as f64;
        assert!((fh.site_vector(0)[0] - c * nn).norm() < 1e-12);
        assert!((fh.site_vector(0)[1] - c * 2.0 * nn).norm() < 1e-12);
        for s in 1..g.sites() {
            assert!(fh.site_vector(s)[0].norm() < 1e-12);
        }

        let k0 = [2i64, -3];
        let xi0 = g.frequency_at(&k0);
        let mode = VectorField::from_fn(g, |x| {
            let ph = Complex64::from_polar(1.0, x[0] * xi0[0] + x[1] * xi0[1]);
            [ph, CZERO, CZERO]
        });
        let mh = dft_forward(&mode).unwrap();
        let s0 = g.site_of_mode(&k0);
        assert!((mh.site_vector(s0)[0] - Complex64::new(nn, 0.0)).norm() < 1e-10);
        assert!(mh.values().iter().enumerate().all(|(i, v)| i == s0 * 2 || v.norm() < 1e-10));
    }

    #[test]
    fn inverse_of_delta_and_zero() {
        let g = Grid::new(3, 8, 1.0).unwrap();
        let mut d = VectorField::zeros(g, Space::Frequency);
        d.set_site_vector(0, &[Complex64::new(g.sites() as f64, 0.0); 3]);
        let x = dft_inverse(&d).unwrap();
        assert!(x.values().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-13));
        let z = dft_inverse(&VectorField::zeros(g, Space::Frequency)).unwrap();
        assert!(z.values().iter().all(|v| *v == CZERO));
        assert!(matches!(dft_inverse(&x), Err(Error::WrongSpace { .. })));
        assert!(matches!(dft_forward(&d), Err(Error::WrongSpace { .. })));
    }

    #[test]
    fn round_trips_and_parseval() {
        for (dim, n) in [(2, 32), (3, 16)] {
            let g = Grid::new(dim, n, 7.0).unwrap();
            let f = random_field(g, Space::Physical, 11);
            let back = dft_inverse(&dft_forward(&f).unwrap()).unwrap();
            assert!(back.relative_diff(&f).unwrap() < 1e-12);
            let fh = random_field(g, Space::Frequency, 12);
            let back = dft_forward(&dft_inverse(&fh).unwrap()).unwrap();
            assert!(back.relative_diff(&fh).unwrap() < 1e-12);

            let spec = dft_forward(&f).unwrap();
            let lhs = f.sum_sq();
            let rhs = spec.sum_sq() / g.sites() as f64;
            assert!((lhs - rhs).abs() / lhs < 1e-10);
            assert!((f.l2_norm() - spec.l2_norm()).abs() / f.l2_norm() < 1e-12);
        }
    }

    #[test]
    fn transform_is_linear() {
        let g = Grid::new(2, 16, 1.0).unwrap();
        let a = random_field(g, Space::Physical, 1);
        let b = random_field(g, Space::Physical, 2);
        let s = Complex64::new(0.3, -1.7);
        let lhs = dft_forward(&a.axpy(s, &b).unwrap()).unwrap();
        let rhs = dft_forward(&a).unwrap().axpy(s, &dft_forward(&b).unwrap()).unwrap();
        assert!(lhs.relative_diff(&rhs).unwrap() < 1e-13);
    }

    #[test]
    fn lame_params_gate() {
        assert!(LameParams::new(1.0, 1.0).is_ok());
        assert!(LameParams::new(-1.5, 1.0).is_ok());
        assert!(LameParams::new(-2.5, 1.0).is_err());
        assert!(LameParams::new(1.0, 0.0).is_err());
        let p = LameParams::new(2.0, 0.25).unwrap();
        assert!((p.c_p() - 2.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.c_s(), 0.5);
        let bad: std::result::Result<LameParams, _> = serde_json::from_str(r#"{"lambda":1.0,"mu":-1.0}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn snapshot_round_trip_and_layout() {
        let g = Grid::new(2, 8, 2.5).unwrap();
        let f = random_field(g, Space::Frequency, 3);
        let mut bytes = Vec::new();
        write_snapshot(&f, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 8 + 12 + 8 + g.sites() * 2 * 16);
        assert_eq!(&bytes[..8], b"LAMEFLD1");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 2);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 8);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), 1);
        assert_eq!(f64::from_le_bytes(bytes[20..28].try_into().unwrap()), 2.5);
        // first value: site 0, component 0, re then im
        let re = f64::from_le_bytes(bytes[28..36].try_into().unwrap());
        assert_eq!(re, f.values()[0].re);
        let back = read_snapshot(bytes.as_slice()).unwrap();
        assert_eq!(back, f);
        bytes[0] = b'X';
        assert!(read_snapshot(bytes.as_slice()).is_err());
    }
}
