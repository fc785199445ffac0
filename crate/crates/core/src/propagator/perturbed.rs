//! Potentials and the Picard iteration for `∂ₜ²u − Δ*u + V(x)u = 0`.

use num_complex::Complex64;

use super::duhamel::{duhamel_series, TimeSeries};
use super::{CauchyData, Propagator};
use crate::error::{Error, Result};
use crate::grid::{Grid, Space, VectorField};
use crate::mat::{CMat, CVec3, Vec3};
use crate::par;

/// Per-site `n×n` complex potential `V(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    grid: Grid,
    values: Vec<CMat>,
}

impl PotentialField {
    pub fn from_values(grid: Grid, values: Vec<CMat>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::BadLength {
                expected: grid.sites(),
                found: values.len(),
            });
        }
        if let Some(site) = values.iter().position(|m| !m.is_finite() || m.dim() != grid.dim()) {
            return Err(Error::InvalidParameter(format!("potential is not finite at site {site}")));
        }
        Ok(PotentialField { grid, values })
    }

    pub fn from_fn<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&Vec3) -> CMat + Sync + Send,
    {
        let values = par::map_range(grid.sites(), |s| f(&grid.position_of_site(s)));
        Self::from_values(grid, values)
    }

    /// `v(x)·I`.
    pub fn scalar<F>(grid: Grid, f: F) -> Result<Self>
    where
        F: Fn(&Vec3) -> f64 + Sync + Send,
    {
        let n = grid.dim();
        Self::from_fn(grid, |x| CMat::identity(n).scale(Complex64::new(f(x), 0.0)))
    }

    pub fn zero(grid: Grid) -> Self {
        PotentialField {
            grid,
            values: vec![CMat::zeros(grid.dim()); grid.sites()],
        }
    }

    /// `c·(|x − x₀|² + ε²)^{−1}·I`, with `|x − x₀|` the periodic distance.
    pub fn regularized_inverse_square(grid: Grid, coupling: f64, center: Vec3, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!("epsilon {epsilon} must be positive")));
        }
        let n = grid.dim();
        Self::scalar(grid, |x| {
            let d = grid.periodic_displacement(x, &center);
            let r2: f64 = d[..n].iter().map(|v| v * v).sum();
            coupling / (r2 + epsilon * epsilon)
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        PotentialField {
            grid: self.grid,
            values: self.values.iter().map(|m| m.scale(Complex64::new(c, 0.0))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|m| m.frobenius() == 0.0)
    }

    /// Whether every `V(x)` is Hermitian.
    pub fn is_hermitian(&self) -> bool {
        let n = self.grid.dim();
        self.values.iter().all(|m| {
            (0..n).all(|i| (0..n).all(|j| (m.get(i, j) - m.get(j, i).conj()).norm() <= 1e-14 * m.frobenius()))
        })
    }

    /// Pointwise size `|V(x)| = ‖V(x)‖_F/√n`, so that `|v·I| = |v|`.
    pub fn magnitude(&self) -> Vec<f64> {
        let scale = 1.0 / (self.grid.dim() as f64).sqrt();
        self.values.iter().map(|m| m.frobenius() * scale).collect()
    }

    /// `V(x)·u(x)` on a physical-space field.
    pub fn apply(&self, u: &VectorField) -> Result<VectorField> {
        u.require_space(Space::Physical)?;
        self.grid.ensure_same(u.grid())?;
        Ok(VectorField::from_site_fn(self.grid, Space::Physical, |site| {
            let v: CVec3 = u.site_vector(site);
            self.values[site].mul_vec(&v)
        }))
    }
}

/// Result of the Picard iteration.
#[derive(Clone, Debug)]
pub struct PerturbedSolution {
    /// `u(t_k)` on the quadrature mesh, physical space.
    pub series: TimeSeries,
    /// Relative change `sup_k ‖u⁽ⁱ⁺¹⁾(t_k) − u⁽ⁱ⁾(t_k)‖/‖u⁽ⁱ⁺¹⁾(t_k)‖` per iteration.
    pub trace: Vec<f64>,
}

impl PerturbedSolution {
    pub fn final_field(&self) -> &VectorField {
        self.series.fields.last().expect("series is non-empty")
    }

    /// Geometric mean of successive residual ratios (ignoring exact zeros).
    pub fn contraction_ratio(&self) -> Option<f64> {
        let r: Vec<f64> = self
            .trace
            .windows(2)
            .filter(|w| w[0] > 0.0 && w[1] > 0.0)
            .map(|w| (w[1] / w[0]).ln())
            .collect();
        (!r.is_empty()).then(|| (r.iter().sum::<f64>() / r.len() as f64).exp())
    }
}

/// Picard iteration `u⁽ᵏ⁺¹⁾ = u_free + Duhamel(−V·u⁽ᵏ⁾)` on the mesh
/// `t_k = k·t/m`, `m = max(4, round(t/dt))`, starting from the free solution.
pub fn solve_perturbed(
    prop: &Propagator,
    data: &CauchyData,
    potential: &PotentialField,
    t: f64,
    dt: f64,
    max_iter: usize,
    tol: f64,
) -> Result<PerturbedSolution> {
    if !(t > 0.0 && dt > 0.0) {
        return Err(Error::TimeMesh(format!("need t > 0 and dt > 0 (t = {t}, dt = {dt})")));
    }
    prop.grid().ensure_same(potential.grid())?;
    let steps = ((t / dt).round() as usize).max(4);
    let h = t / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    let free = prop.evolve_series(data, &times)?;
    let mut current = free.clone();
    let mut trace = Vec::new();
    for _ in 0..max_iter.max(1) {
        let forcing: Vec<VectorField> = current
            .iter()
            .map(|u| Ok(potential.apply(u)?.scaled(Complex64::new(-1.0, 0.0))))
            .collect::<Result<_>>()?;
        let integral = duhamel_series(prop, &TimeSeries::new(h, forcing)?)?;
        let next: Vec<VectorField> = free
            .iter()
            .zip(&integral.fields)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        let mut residual = 0.0f64;
        for (a, b) in next.iter().zip(&current) {
            let den = a.l2_norm();
            let num = a.sub(b)?.l2_norm();
            let r = if den > 0.0 { num / den } else { num };
            residual = residual.max(r);
        }
        trace.push(residual);
        current = next;
        if residual <= tol {
            return Ok(PerturbedSolution {
                series: TimeSeries::new(h, current)?,
                trace,
            });
        }
        if !residual.is_finite() {
            break;
        }
    }
    Err(Error::NonConvergence { trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LameParams;
    use crate::propagator::shifted_oracle;

    fn data(grid: Grid) -> CauchyData {
        let f = VectorField::from_fn(grid, |x| {
            [
                Complex64::new(x[0].sin() * x[1].cos(), 0.0),
                Complex64::new((2.0 * x[1]).cos(), 0.3 * x[0].sin()),
                Complex64::new(0.0, 0.0),
            ]
        });
        let g = VectorField::from_fn(grid, |x| {
            [Complex64::new(0.5 * x[1].sin(), 0.0), Complex64::new(x[0].cos(), 0.0), Complex64::new(0.0, 0.0)]
        });
        CauchyData::new(f, g).unwrap()
    }

    #[test]
    fn zero_potential_reproduces_free_solution() {
        let grid = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let prop = Propagator::new(grid, p);
        let d = data(grid);
        let sol = solve_perturbed(&prop, &d, &PotentialField::zero(grid), 1.0, 0.1, 5, 1e-12).unwrap();
        assert_eq!(sol.trace, vec![0.0]);
        let free = prop.solve_homogeneous(&d, 1.0).unwrap();
        assert!(sol.final_field().relative_diff(&free).unwrap() < 1e-14);
    }

    #[test]
    fn constant_potential_matches_shifted_symbol() {
        let grid = Grid::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
        let p = LameParams::new(1.0, 1.0).unwrap();
        let prop = Propagator::new(grid, p);
        let d = data(grid);
        let c = 0.3;
        let v = PotentialField::scalar(grid, |_| c).unwrap();
        let sol = solve_perturbed(&prop, &d, &v, 1.0, 1.0 / 64.0, 60, 1e-13).unwrap();
        let want = shifted_oracle(&d, 1.0, &p, c).unwrap();
        let err = sol.final_field().relative_diff(&want).unwrap();
        assert!(err < 1e-7, "err {err}");
        let ratio = sol.contraction_ratio().unwrap();
        assert!(ratio < 0.9, "ratio {ratio}");
    }

    #[test]
    fn strong_potential_reports_divergence() {
        let grid = Grid::new(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        let prop = Propagator::new(grid, LameParams::new(1.0, 1.0).unwrap());
        let v = PotentialField::scalar(grid, |_| -400.0).unwrap();
        match solve_perturbed(&prop, &data(grid), &v, 2.0, 0.05, 6, 1e-12) {
            Err(Error::NonConvergence { trace }) => assert_eq!(trace.len(), 6),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn magnitude_of_scalar_potential() {
        let grid = Grid::new(3, 8, 1.0).unwrap();
        let v = PotentialField::scalar(grid, |x| -2.0 * x[0]).unwrap();
        let m = v.magnitude();
        for site in [0, 9, 100] {
            let x = grid.position_of_site(site);
            assert!((m[site] - 2.0 * x[0]).abs() < 1e-15);
        }
        assert!(v.is_hermitian());
    }
}
