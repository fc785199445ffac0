//! Weighted `L²(|V|)` quotients for the free flow and the Duhamel term, and
//! the Picard solve of the perturbed equation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::{envelope_localized_field, time_bump, trial_rng};
use super::{require, spread, GridSpec, Material, ORACLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::grid::{Grid, VectorField};
use crate::mat::{CMat, Vec3};
use crate::norms::{fp_norm_estimate, outer_norm, perturbed_regularity, sobolev_norm, weighted_l2, WeightField};
use crate::profile::smooth_step;
use crate::propagator::{duhamel_series, helmholtz_oracle, solve_perturbed, CauchyData, PotentialField, Propagator, TimeSeries};
use crate::report::{EstimateReport, Verdict};

/// Potentials centered at the box center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `c(|x − x₀|² + ε²)^{−1} I`.
    InverseSquare { coupling: f64, epsilon: f64 },
    /// `c·χ(|x − x₀|/R)·A` with a smooth cutoff `χ` and a fixed symmetric `A`.
    CompactMatrix { coupling: f64, radius: f64 },
    Zero,
}

impl PotentialSpec {
    pub fn build(&self, grid: Grid) -> Result<PotentialField> {
        let center = grid.center();
        match *self {
            PotentialSpec::InverseSquare { coupling, epsilon } => {
                PotentialField::regularized_inverse_square(grid, coupling, center, epsilon)
            }
            PotentialSpec::CompactMatrix { coupling, radius } => {
                if !(radius > 0.0) {
                    return Err(Error::Config("radius must be positive".into()));
                }
                let n = grid.dim();
                let a = CMat::from_fn(n, |i, j| {
                    let v = if i == j { 1.0 } else { 0.25 };
                    Complex64::new(v, 0.0)
                });
                PotentialField::from_fn(grid, move |x: &Vec3| {
                    let d = grid.periodic_displacement(x, &center);
                    let r = d[..n].iter().map(|v| v * v).sum::<f64>().sqrt();
                    a.scale(Complex64::new(coupling * smooth_step(2.0 * (1.0 - r / radius)), 0.0))
                })
            }
            PotentialSpec::Zero => Ok(PotentialField::zero(grid)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WeightedConfig {
    pub grid: GridSpec,
    pub material: Material,
    pub potential: PotentialSpec,
    /// Exponent of the ball norm, `(n−1)/2 < p ≤ n/2`.
    pub p: f64,
    pub fp_centers: usize,
    pub shell: i32,
    pub trials: usize,
    pub seed: u64,
    pub envelope_width: f64,
    pub time_window: f64,
    pub steps: usize,
    /// Exponents of the perturbed-solution quotient.
    #[serde(with = "super::exponent")]
    pub q: f64,
    #[serde(with = "super::exponent")]
    pub r: f64,
    pub picard_max_iter: usize,
    pub picard_tol: f64,
    /// Largest acceptable ratio of successive Picard residuals.
    pub contraction_max: f64,
    pub stability_max: f64,
}

impl Default for WeightedConfig {
    fn default() -> Self {
        WeightedConfig {
            grid: GridSpec {
                n: 3,
                points: 32,
                length: 16.0,
            },
            material: Material::default(),
            potential: PotentialSpec::InverseSquare {
                coupling: 0.05,
                epsilon: 1.0,
            },
            p: 1.25,
            fp_centers: 8,
            shell: 0,
            trials: 10,
            seed: 17,
            envelope_width: 2.0,
            time_window: 4.0,
            steps: 32,
            q: 4.0,
            r: 4.0,
            picard_max_iter: 40,
            picard_tol: 1e-10,
            contraction_max: 0.9,
            stability_max: 1.5,
        }
    }
}

impl WeightedConfig {
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.grid()?;
        self.material.params()?;
        let n = grid.dim() as f64;
        require(self.p > (n - 1.0) / 2.0 && self.p <= n / 2.0, || {
            format!("p = {} must lie in ((n-1)/2, n/2]", self.p)
        })?;
        require(self.trials >= 1, || "trials must be positive".into())?;
        require(self.picard_max_iter >= 1 && self.picard_tol > 0.0, || "bad Picard settings".into())?;
        super::strichartz::check_scales(&grid, &[self.shell], self.envelope_width, self.time_window, self.steps)?;
        self.potential.build(grid).map(|_| ())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn weighted_estimate_experiment(cfg: &WeightedConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let params = cfg.material.params()?;
    let n = grid.dim();
    let prop = Propagator::new(grid, params);
    let v = cfg.potential.build(grid)?;
    let magnitude = v.magnitude();
    let weight = WeightField::new(grid, magnitude.clone())?;
    // The forcing is `V·G`, which vanishes wherever `V` does, so `|V|⁻¹` may be
    // taken as 0 there.
    let inverse = WeightField::new(
        grid,
        magnitude.iter().map(|&m| if m > 0.0 { 1.0 / m } else { 0.0 }).collect(),
    )?;
    let fp = fp_norm_estimate(&v, cfg.p, cfg.fp_centers, &[])?;
    let sigma = perturbed_regularity(cfg.q, cfg.r, n);
    let center = grid.center();
    let dt = cfg.time_window / cfg.steps as f64;
    let times: Vec<f64> = (0..=cfg.steps).map(|k| k as f64 * dt).collect();

    let mut report = EstimateReport::new("perturbed");
    report
        .param("n", n)
        .param("p", cfg.p)
        .param("potential", serde_json::to_string(&cfg.potential)?)
        .param("sigma", sigma);
    report.stat("fp_norm", fp.value);
    report.stat("fp_radius", fp.radius);

    let mut quotients: [Vec<f64>; 4] = Default::default();
    let mut traces = Vec::new();
    let mut oracle = 0.0f64;
    let mut nonconverged = 0usize;
    for trial in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, trial as u64);
        let f = envelope_localized_field(&grid, cfg.shell, cfg.envelope_width, &center, &mut rng);
        let g = envelope_localized_field(&grid, cfg.shell, cfg.envelope_width, &center, &mut rng);
        let shape = envelope_localized_field(&grid, cfg.shell, cfg.envelope_width, &center, &mut rng);
        let data = CauchyData::new(f.clone(), g.clone())?;
        let f_half = sobolev_norm(&f, 0.5, 2.0)?;
        let g_half = sobolev_norm(&g, -0.5, 2.0)?;

        let cos = prop.evolve_series(&CauchyData::displacement(f.clone()), &times)?;
        let sin = prop.evolve_series(&CauchyData::velocity(g.clone()), &times)?;
        let q_cos = ratio(weighted_l2(&cos, &weight, dt)?, fp.value.sqrt() * f_half);
        let q_sin = ratio(weighted_l2(&sin, &weight, dt)?, fp.value.sqrt() * g_half);

        let shape = v.apply(&shape)?;
        let forcing: Vec<VectorField> = times
            .iter()
            .map(|&t| shape.scaled(Complex64::new(time_bump(t, cfg.time_window / 2.0), 0.0)))
            .collect();
        let duh = duhamel_series(&prop, &TimeSeries::new(dt, forcing.clone())?)?;
        let q_inho = ratio(
            weighted_l2(&duh.fields, &weight, dt)?,
            fp.value * weighted_l2(&forcing, &inverse, dt)?,
        );

        if trial == 0 {
            let want = helmholtz_oracle(&data, cfg.time_window, &params)?;
            let free = prop.solve_homogeneous(&data, cfg.time_window)?;
            oracle = oracle.max(free.relative_diff(&want)?);
        }

        let q_thm = match solve_perturbed(&prop, &data, &v, cfg.time_window, dt, cfg.picard_max_iter, cfg.picard_tol) {
            Ok(sol) => {
                let inner: Vec<f64> = sol
                    .series
                    .fields
                    .iter()
                    .map(|u| sobolev_norm(u, sigma, cfg.r))
                    .collect::<Result<_>>()?;
                if let Some(c) = sol.contraction_ratio() {
                    traces.push(c);
                }
                report.push(format!("picard_iterations trial={trial}"), trial as f64, sol.trace.len() as f64);
                outer_norm(&inner, cfg.q, dt) / (f_half + g_half)
            }
            Err(Error::NonConvergence { trace }) => {
                nonconverged += 1;
                report.note(format!(
                    "trial {trial}: Picard iteration did not converge (smallness violated?), trace {:?}",
                    trace
                ));
                f64::NAN
            }
            Err(e) => return Err(e),
        };
        for (k, (name, q)) in [("cos", q_cos), ("sin", q_sin), ("inho", q_inho), ("perturbed", q_thm)]
            .into_iter()
            .enumerate()
        {
            report.push(format!("{name} trial={trial}"), trial as f64, q);
            if q.is_finite() {
                quotients[k].push(q);
            }
        }
    }

    let mut ok = oracle <= ORACLE_TOLERANCE;
    for (k, name) in ["cos", "sin", "inho", "perturbed"].iter().enumerate() {
        if quotients[k].is_empty() {
            continue;
        }
        let (max, min, var) = spread(&quotients[k]);
        report.stat(&format!("{name}_max"), max);
        report.stat(&format!("{name}_min"), min);
        if max > 0.0 {
            report.stat(&format!("{name}_variation"), var);
            if k < 3 {
                ok &= var.is_finite() && var <= cfg.stability_max;
            }
        }
    }
    if !traces.is_empty() {
        let worst = traces.iter().copied().fold(0.0, f64::max);
        report.stat("picard_ratio_max", worst);
        ok &= worst < cfg.contraction_max;
    }
    ok &= nonconverged == 0;
    report.stat("picard_nonconverged", nonconverged as f64);
    report.stat("oracle_max_rel", oracle);
    if oracle > ORACLE_TOLERANCE {
        report.note(format!("oracle disagreement {oracle:e} exceeds {ORACLE_TOLERANCE:e}"));
    }
    if v.is_zero() {
        report.note("V = 0: weighted norms vanish and the quotients are recorded as 0");
    }
    report.verdict = Verdict::from_bool(ok);
    Ok(report)
}
