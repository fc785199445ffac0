//! Duhamel integrals `∫₀ᵗ sin((t−s)√L)√L^{−1} F(s) ds` by composite
//! Simpson quadrature on a uniform mesh.

use num_complex::Complex64;

use super::{sin_over, Propagator, SITES_PER_TASK};
use crate::error::{Error, Result};
use crate::grid::{Space, VectorField};
use crate::mat::{CVec3, CVEC_ZERO, CZERO};
use crate::par;

/// Fields sampled at `t_k = k·dt`, `k = 0, 1, …`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub dt: f64,
    pub fields: Vec<VectorField>,
}

impl TimeSeries {
    pub fn new(dt: f64, fields: Vec<VectorField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::TimeMesh(format!("step {dt} must be positive")));
        }
        let first = fields.first().ok_or(Error::Empty("time series"))?;
        for f in &fields[1..] {
            first.check_compatible(f)?;
        }
        Ok(TimeSeries { dt, fields })
    }

    /// Accepts explicit sample times; they must start at 0 and be uniform.
    pub fn from_samples(times: &[f64], fields: Vec<VectorField>) -> Result<Self> {
        if times.len() != fields.len() {
            return Err(Error::TimeMesh(format!(
                "{} times for {} fields",
                times.len(),
                fields.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::TimeMesh("need at least two samples".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::TimeMesh(format!("mesh starts at {} instead of 0", times[0])));
        }
        let dt = times[1] - times[0];
        for (k, &t) in times.iter().enumerate() {
            if (t - k as f64 * dt).abs() > 1e-9 * dt.max(t.abs()) {
                return Err(Error::TimeMesh(format!("non-uniform mesh at sample {k} (t = {t})")));
            }
        }
        Self::new(dt, fields)
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|k| k as f64 * self.dt).collect()
    }

    pub fn final_time(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn space(&self) -> Space {
        self.fields[0].space()
    }

    pub fn into_space(self, space: Space) -> TimeSeries {
        TimeSeries {
            dt: self.dt,
            fields: self.fields.into_iter().map(|f| f.into_space(space)).collect(),
        }
    }
}

/// Weights (in units of `dt`) for `∫₀^{m·dt}` over nodes `0, 1, …`.
///
/// Even `m`: composite Simpson. Odd `m ≥ 3`: Simpson followed by the 3/8
/// rule on the last three intervals. `m = 1`: the fourth-order one-interval
/// rule on nodes `0..=3`, `(9, 19, −5, 1)/24`.
pub fn quadrature_weights(m: usize) -> Vec<f64> {
    match m {
        0 => vec![0.0],
        1 => vec![9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0],
        _ => {
            let mut w = vec![0.0; m + 1];
            let simpson_end = if m % 2 == 0 { m } else { m - 3 };
            for i in (0..simpson_end).step_by(2) {
                w[i] += 1.0 / 3.0;
                w[i + 1] += 4.0 / 3.0;
                w[i + 2] += 1.0 / 3.0;
            }
            if m % 2 == 1 {
                for (k, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
                    w[m - 3 + k] += 3.0 / 8.0 * c;
                }
            }
            w
        }
    }
}

/// Lowest lag used by the one-interval rule (`t₁ − t₃`).
const MIN_LAG: i64 = -2;

/// Duhamel integrals at mesh indices `targets`, in the space of the forcing.
fn duhamel_at(prop: &Propagator, forcing: &TimeSeries, targets: &[usize]) -> Result<Vec<VectorField>> {
    let grid = *prop.grid();
    grid.ensure_same(forcing.fields[0].grid())?;
    let weights: Vec<Vec<f64>> = targets.iter().map(|&m| quadrature_weights(m)).collect();
    let nodes = weights.iter().map(Vec::len).max().unwrap_or(1);
    if nodes > forcing.len() {
        return Err(Error::TimeMesh(format!(
            "quadrature needs {nodes} samples, mesh has {}",
            forcing.len()
        )));
    }
    let max_target = targets.iter().copied().max().unwrap_or(0) as i64;
    let n = grid.dim();
    let dt = forcing.dt;
    let hats: Vec<VectorField> = forcing.fields[..nodes].iter().map(|f| f.to_frequency()).collect();
    let nt = targets.len();
    let mut buf = vec![CZERO; grid.sites() * nt * n];
    let lags = (max_target - MIN_LAG + 1) as usize;
    par::for_each_chunk_mut(&mut buf, SITES_PER_TASK * nt * n, |task, chunk| {
        let mut rotated = vec![CVEC_ZERO; nodes];
        let mut kernel = vec![[0.0f64; 2]; lags];
        for (k, site_out) in chunk.chunks_mut(nt * n).enumerate() {
            let site = task * SITES_PER_TASK + k;
            let frame = prop.frame(site);
            let s = prop.sqrt_eigenvalues(frame.xi_norm);
            for (li, kern) in kernel.iter_mut().enumerate() {
                let tau = (li as i64 + MIN_LAG) as f64 * dt;
                *kern = [sin_over(tau, s[0]), sin_over(tau, s[1])];
            }
            site_out.fill(CZERO);
            for b in 0..2 {
                let w = frame.weights[b];
                if w == 0.0 {
                    continue;
                }
                let r = &frame.rotations[b];
                for (node, y) in rotated.iter_mut().enumerate() {
                    *y = r.tmul_cvec(&hats[node].site_vector(site));
                }
                for (ti, (&m, wq)) in targets.iter().zip(&weights).enumerate() {
                    let mut acc: CVec3 = CVEC_ZERO;
                    for (node, &q) in wq.iter().enumerate() {
                        if q == 0.0 {
                            continue;
                        }
                        let kern = kernel[(m as i64 - node as i64 - MIN_LAG) as usize];
                        let y = &rotated[node];
                        acc[0] += y[0] * (q * kern[0]);
                        for j in 1..n {
                            acc[j] += y[j] * (q * kern[1]);
                        }
                    }
                    for v in acc.iter_mut().take(n) {
                        *v *= w * dt;
                    }
                    let z = r.mul_cvec(&acc);
                    let out = &mut site_out[ti * n..ti * n + n];
                    for j in 0..n {
                        out[j] += z[j];
                    }
                }
            }
        }
    });
    let space = forcing.space();
    Ok((0..nt)
        .map(|ti| {
            let f = VectorField::from_site_fn(grid, Space::Frequency, |site| {
                let mut v: CVec3 = [Complex64::new(0.0, 0.0); 3];
                let base = (site * nt + ti) * n;
                v[..n].copy_from_slice(&buf[base..base + n]);
                v
            });
            f.into_space(space)
        })
        .collect())
}

/// `∫₀ᵗ sin((t−s)√L)√L^{−1} F(s) ds` with zero Cauchy data. `t` must be a
/// mesh time of `forcing`.
pub fn duhamel(prop: &Propagator, forcing: &TimeSeries, t: f64) -> Result<VectorField> {
    if !(t >= 0.0) {
        return Err(Error::TimeMesh(format!("negative time {t}")));
    }
    let m = (t / forcing.dt).round();
    if (m * forcing.dt - t).abs() > 1e-9 * forcing.dt.max(t) {
        return Err(Error::TimeMesh(format!("t = {t} is not a multiple of dt = {}", forcing.dt)));
    }
    let m = m as usize;
    if m >= forcing.len() {
        return Err(Error::TimeMesh(format!(
            "mesh ends at {} before t = {t}",
            forcing.final_time()
        )));
    }
    Ok(duhamel_at(prop, forcing, &[m])?.remove(0))
}

/// Duhamel integrals at every mesh time (needs at least four samples).
pub fn duhamel_series(prop: &Propagator, forcing: &TimeSeries) -> Result<TimeSeries> {
    let targets: Vec<usize> = (0..forcing.len()).collect();
    let fields = duhamel_at(prop, forcing, &targets)?;
    Ok(TimeSeries {
        dt: forcing.dt,
        fields,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, LameParams};
    use crate::propagator::driven_mode_oracle;

    #[test]
    fn weights_integrate_cubics_exactly() {
        for m in 1..9 {
            let w = quadrature_weights(m);
            for p in 0..4 {
                let approx: f64 = w.iter().enumerate().map(|(k, c)| c * (k as f64).powi(p)).sum();
                let exact = (m as f64).powi(p + 1) / (p + 1) as f64;
                assert!((approx - exact).abs() < 1e-12 * exact.max(1.0), "m={m} p={p}");
            }
        }
    }

    fn driven(grid: Grid, p: &LameParams, k: [i64; 3], omega: f64, steps: usize, t: f64) -> f64 {
        let xi = grid.frequency_at(&k);
        let len = (xi.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let pol = [xi[0] / len, xi[1] / len, 0.0];
        let dt = t / steps as f64;
        let fields = (0..=steps)
            .map(|i| {
                let s = i as f64 * dt;
                VectorField::from_fn(grid, move |x| {
                    let ph = Complex64::from_polar(1.0, xi[0] * x[0] + xi[1] * x[1] + omega * s);
                    [ph * pol[0], ph * pol[1], ph * pol[2]]
                })
            })
            .collect();
        let series = TimeSeries::new(dt, fields).unwrap();
        let prop = Propagator::new(grid, *p);
        let u = duhamel(&prop, &series, t).unwrap();
        let amp = driven_mode_oracle(p.c_p() * len, omega, t);
        let want = series.fields[0].scaled(amp);
        u.sub(&want).unwrap().l2_norm() / want.l2_norm()
    }

    #[test]
    fn driven_mode_converges_at_fourth_order() {
        let grid = Grid::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let e1 = driven(grid, &p, [1, 1, 0], 0.8, 16, 4.0);
        let e2 = driven(grid, &p, [1, 1, 0], 0.8, 32, 4.0);
        let ratio = e1 / e2;
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}, errors {e1} {e2}");
    }

    #[test]
    fn zero_forcing_and_mesh_errors() {
        let grid = Grid::new(2, 8, 1.0).unwrap();
        let prop = Propagator::new(grid, LameParams::new(1.0, 1.0).unwrap());
        let z = VectorField::zeros(grid, Space::Physical);
        let series = TimeSeries::new(0.1, vec![z.clone(); 5]).unwrap();
        assert_eq!(duhamel(&prop, &series, 0.4).unwrap().max_abs(), 0.0);
        assert!(matches!(duhamel(&prop, &series, 0.5), Err(Error::TimeMesh(_))));
        assert!(matches!(duhamel(&prop, &series, 0.25), Err(Error::TimeMesh(_))));
        assert!(TimeSeries::from_samples(&[0.0, 0.1, 0.25], vec![z.clone(); 3]).is_err());
        assert!(TimeSeries::from_samples(&[0.0, 0.1, 0.2], vec![z; 3]).is_ok());
    }
}
