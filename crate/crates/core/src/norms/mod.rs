//! Vector Lebesgue, mixed, Sobolev and weighted norms, all as Riemann sums
//! with the cell weight `(L/N)ⁿ`, plus exponent bookkeeping.

mod exponents;
mod fefferman_phong;

pub use exponents::{
    check_inhomogeneous_conditions, classify_pair, conjugate, is_acceptable, is_admissible, is_sharp_admissible,
    perturbed_regularity, strichartz_regularity, ExponentTuple, InhomogeneousCheck, InhomogeneousFailure,
    PairClass,
};
pub use fefferman_phong::{dyadic_radii, fp_norm_estimate, FpEstimate};

use crate::error::{Error, Result};
use crate::grid::{Grid, Space, VectorField};
use crate::mat::norm;
use crate::par;

/// Relative size below which `f̂(0)` counts as zero.
pub const MEAN_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_exponent(name: &str, r: f64) -> Result<()> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::InvalidExponent(format!("{name} = {r} must lie in [1, inf]")));
    }
    Ok(())
}

/// `(Σ_j |x|ʳ summed over values)` with the deterministic chunked reducer.
pub(crate) fn power_sum(values: &[num_complex::Complex64], r: f64) -> f64 {
    par::sum_chunks(values.len(), par::REDUCE_CHUNK, |range| {
        let vals = &values[range];
        if r == 2.0 {
            vals.iter().map(|v| v.norm_sqr()).sum()
        } else if r == 1.0 {
            vals.iter().map(|v| v.norm()).sum()
        } else if r == 4.0 {
            vals.iter().map(|v| v.norm_sqr() * v.norm_sqr()).sum()
        } else {
            vals.iter().map(|v| v.norm().powf(r)).sum()
        }
    })
}

pub(crate) fn max_abs(values: &[num_complex::Complex64]) -> f64 {
    par::max_chunks(values.len(), par::REDUCE_CHUNK, |range| {
        values[range].iter().map(|v| v.norm()).fold(0.0, f64::max)
    })
    .max(0.0)
}

/// `(Σ_j ‖f_j‖ʳ_{Lʳ})^{1/r}` for `r < ∞`; `max_j sup_x |f_j(x)|` for `r = ∞`.
pub fn lr_norm(f: &VectorField, r: f64) -> Result<f64> {
    check_exponent("r", r)?;
    f.require_space(Space::Physical)?;
    if r.is_infinite() {
        return Ok(max_abs(f.values()));
    }
    Ok((f.grid().cell_volume() * power_sum(f.values(), r)).powf(1.0 / r))
}

/// `‖ ‖u(t)‖_{Lʳ} ‖_{Lᵠ_t}` as a Riemann sum with weight `dt` per sample;
/// `q = ∞` takes the maximum. Frequency-space samples are transformed.
pub fn mixed_norm(u: &[VectorField], q: f64, r: f64, dt: f64) -> Result<f64> {
    check_exponent("q", q)?;
    check_exponent("r", r)?;
    if u.is_empty() {
        return Err(Error::Empty("time series"));
    }
    if !(dt > 0.0) {
        return Err(Error::TimeMesh(format!("step {dt} must be positive")));
    }
    let inner: Vec<f64> = u
        .iter()
        .map(|f| match f.space() {
            Space::Physical => lr_norm(f, r),
            Space::Frequency => lr_norm(&f.to_physical(), r),
        })
        .collect::<Result<_>>()?;
    Ok(outer_norm(&inner, q, dt))
}

/// `Lᵠ` Riemann sum of per-time values.
pub fn outer_norm(inner: &[f64], q: f64, dt: f64) -> f64 {
    if q.is_infinite() {
        inner.iter().copied().fold(0.0, f64::max)
    } else {
        (dt * inner.iter().map(|v| v.powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// Scalar multiplier `|ξ|ˢ`, with value 1 at `ξ = 0` only for `s = 0`.
pub fn riesz_potential(f: &VectorField, s: f64) -> Result<VectorField> {
    let grid = *f.grid();
    let n = grid.dim();
    let mut hat = f.to_frequency();
    if s < 0.0 {
        let zero = norm_of_site(&hat, 0);
        let scale = max_abs(hat.values());
        if zero > MEAN_TOLERANCE * scale {
            return Err(Error::NonzeroMean(zero / scale));
        }
    }
    if s != 0.0 {
        par::for_each_chunk_mut(hat.values_mut(), n * 1024, |task, chunk| {
            for (k, vals) in chunk.chunks_mut(n).enumerate() {
                let site = task * 1024 + k;
                let len = norm(n, &grid.frequency_of_site(site));
                let m = if len == 0.0 { 0.0 } else { len.powf(s) };
                vals.iter_mut().for_each(|v| *v *= m);
            }
        });
    }
    Ok(hat.into_space(f.space()))
}

fn norm_of_site(f: &VectorField, site: usize) -> f64 {
    let n = f.grid().dim();
    f.values()[site * n..site * n + n]
        .iter()
        .map(|v| v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `‖|∇|ˢ f‖_{Lʳ}`. Negative orders require `f̂(0) = 0`.
pub fn sobolev_norm(f: &VectorField, s: f64, r: f64) -> Result<f64> {
    check_exponent("r", r)?;
    let d = riesz_potential(f, s)?;
    if r == 2.0 {
        return Ok(d.l2_norm());
    }
    lr_norm(&d.into_space(Space::Physical), r)
}

/// Nonnegative scalar samples on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightField {
    grid: Grid,
    values: Vec<f64>,
}

impl WeightField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::BadLength {
                expected: grid.sites(),
                found: values.len(),
            });
        }
        if let Some((site, &w)) = values.iter().enumerate().find(|(_, w)| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::NegativeWeight(w, site));
        }
        Ok(WeightField { grid, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `(Σ_t dt (L/N)ⁿ Σ_x w(x)|u(t,x)|²)^{1/2}`.
pub fn weighted_l2(u: &[VectorField], w: &WeightField, dt: f64) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::Empty("time series"));
    }
    let mut total = 0.0;
    for f in u {
        w.grid.ensure_same(f.grid())?;
        let phys = match f.space() {
            Space::Physical => std::borrow::Cow::Borrowed(f),
            Space::Frequency => std::borrow::Cow::Owned(f.to_physical()),
        };
        let n = f.grid().dim();
        let vals = phys.values();
        let weights = &w.values;
        total += par::sum_chunks(weights.len(), par::REDUCE_CHUNK, |range| {
            range
                .map(|site| {
                    let m: f64 = vals[site * n..site * n + n].iter().map(|v| v.norm_sqr()).sum();
                    weights[site] * m
                })
                .sum()
        });
    }
    Ok((total * dt * w.grid.cell_volume()).sqrt())
}
