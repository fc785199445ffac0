//! Sampled lower estimate of the Fefferman–Phong norm
//! `sup_B r^{2−n/p} (∫_B |V|ᵖ)^{1/p}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Vec3;
use crate::par;
use crate::propagator::PotentialField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FpEstimate {
    /// Maximum over the sampled balls; a lower bound for the true norm.
    pub value: f64,
    pub center: Vec3,
    pub radius: f64,
    /// Per-radius maxima over centers, aligned with the radii used.
    pub per_radius: Vec<(f64, f64)>,
}

/// `h·2ᵏ` for `k ≥ 1` up to `L/4`, `h` the grid spacing.
pub fn dyadic_radii(grid: &crate::grid::Grid) -> Vec<f64> {
    let mut r = 2.0 * grid.spacing();
    let mut out = Vec::new();
    while r <= grid.length() / 4.0 + 1e-12 {
        out.push(r);
        r *= 2.0;
    }
    out
}

/// Maximizes the ball quantity over `centers` lattice points (the site of
/// largest `|V|` first, then an evenly strided sample) and the given radii
/// (dyadic up to `L/4` when empty). Requires `1 ≤ p ≤ n/2`.
pub fn fp_norm_estimate(v: &PotentialField, p: f64, centers: usize, radii: &[f64]) -> Result<FpEstimate> {
    let grid = *v.grid();
    let n = grid.dim();
    if !(p >= 1.0 && p <= n as f64 / 2.0) {
        return Err(Error::InvalidExponent(format!("p = {p} outside [1, n/2] for n = {n}")));
    }
    let radii: Vec<f64> = if radii.is_empty() {
        dyadic_radii(&grid)
    } else {
        radii.to_vec()
    };
    if radii.iter().any(|&r| !(r > 0.0 && r <= grid.length() / 2.0)) {
        return Err(Error::InvalidParameter("radii must lie in (0, L/2]".into()));
    }
    let mag = v.magnitude();
    let powered: Vec<f64> = mag.iter().map(|m| m.powf(p)).collect();
    let sites = grid.sites();
    let peak = mag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &m)| if m > best.1 { (i, m) } else { best })
        .0;
    let count = centers.max(1);
    let stride = (sites / count).max(1);
    let mut center_sites = vec![peak];
    center_sites.extend((0..count - 1).map(|k| (k * stride + stride / 2) % sites));
    let cell = grid.cell_volume();
    // per center: ∫_B |V|^p for every radius
    let integrals: Vec<Vec<f64>> = center_sites
        .iter()
        .map(|&c| {
            let x0 = grid.position_of_site(c);
            let r2: Vec<f64> = radii.iter().map(|r| r * r).collect();
            let sums = par::map_range(sites.div_ceil(par::REDUCE_CHUNK), |chunk| {
                let mut acc = vec![0.0; r2.len()];
                let lo = chunk * par::REDUCE_CHUNK;
                for s in lo..(lo + par::REDUCE_CHUNK).min(sites) {
                    if powered[s] == 0.0 {
                        continue;
                    }
                    let d = grid.periodic_displacement(&grid.position_of_site(s), &x0);
                    let dist2: f64 = d[..n].iter().map(|v| v * v).sum();
                    for (a, &rr) in acc.iter_mut().zip(&r2) {
                        if dist2 < rr {
                            *a += powered[s];
                        }
                    }
                }
                acc
            });
            let mut total = vec![0.0; r2.len()];
            for part in sums {
                for (t, v) in total.iter_mut().zip(part) {
                    *t += v;
                }
            }
            total.into_iter().map(|t| t * cell).collect()
        })
        .collect();
    let mut best = FpEstimate {
        value: 0.0,
        center: grid.position_of_site(center_sites[0]),
        radius: radii[0],
        per_radius: Vec::new(),
    };
    for (ri, &r) in radii.iter().enumerate() {
        let mut best_r = 0.0f64;
        for (ci, &c) in center_sites.iter().enumerate() {
            let q = r.powf(2.0 - n as f64 / p) * integrals[ci][ri].powf(1.0 / p);
            if q > best.value {
                best.value = q;
                best.center = grid.position_of_site(c);
                best.radius = r;
            }
            best_r = best_r.max(q);
        }
        best.per_radius.push((r, best_r));
    }
    Ok(best)
}
