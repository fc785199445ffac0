//! Homogeneous evolution checks: half-wave unitarity, energy conservation and
//! the three-way agreement of the frame propagator, the Leray-split oracle and
//! per-mode matrix exponentials.

use serde::{Deserialize, Serialize};

use super::data::{envelope_localized_field, trial_rng};
use super::{require, GridSpec, Material};
use crate::error::Result;
use crate::grid::VectorField;
use crate::propagator::{helmholtz_oracle, matrix_exp_field_oracle, CauchyData, Propagator};
use crate::report::{EstimateReport, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropagateConfig {
    pub grid: GridSpec,
    pub material: Material,
    pub datasets: usize,
    pub seed: u64,
    pub shell: i32,
    pub envelope_width: f64,
    /// Unitarity and energy are sampled on `[0, t_max]`.
    pub t_max: f64,
    pub time_samples: usize,
    /// Time at which the three solvers are compared.
    pub oracle_time: f64,
    /// Number of data sets that also go through the oracles.
    pub oracle_datasets: usize,
    pub unitarity_tolerance: f64,
    pub energy_tolerance: f64,
    pub oracle_tolerance: f64,
}

impl Default for PropagateConfig {
    fn default() -> Self {
        PropagateConfig {
            grid: GridSpec {
                n: 2,
                points: 64,
                length: 16.0,
            },
            material: Material {
                lambda: 2.0,
                mu: 0.7,
            },
            datasets: 20,
            seed: 5,
            shell: 1,
            envelope_width: 2.0,
            t_max: 10.0,
            time_samples: 11,
            oracle_time: 2.5,
            oracle_datasets: 3,
            unitarity_tolerance: 1e-10,
            energy_tolerance: 1e-8,
            oracle_tolerance: 1e-9,
        }
    }
}

impl PropagateConfig {
    /// The oracle-triangle setting for `n = 3`.
    pub fn three_dimensional() -> Self {
        PropagateConfig {
            grid: GridSpec {
                n: 3,
                points: 32,
                length: 16.0,
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.grid()?;
        self.material.params()?;
        require(self.datasets >= 1, || "datasets must be positive".into())?;
        require(self.oracle_datasets <= self.datasets, || "oracle_datasets exceeds datasets".into())?;
        require(self.t_max > 0.0 && self.time_samples >= 2, || "need t_max > 0 and two or more samples".into())?;
        require(self.envelope_width > 0.0, || "envelope_width must be positive".into())?;
        super::strichartz::check_scales(&grid, &[self.shell], self.envelope_width, 1.0, 4)
    }

    fn data(&self, set: usize) -> Result<CauchyData> {
        let grid = self.grid.grid()?;
        let mut rng = trial_rng(self.seed, set as u64);
        let c = grid.center();
        let f = envelope_localized_field(&grid, self.shell, self.envelope_width, &c, &mut rng);
        let g = envelope_localized_field(&grid, self.shell, self.envelope_width, &c, &mut rng);
        CauchyData::new(f, g)
    }
}

/// `u(t_max)` for data set 0, the field the CLI stores as a snapshot.
pub fn propagate_final_field(cfg: &PropagateConfig) -> Result<VectorField> {
    cfg.validate()?;
    let prop = Propagator::new(cfg.grid.grid()?, cfg.material.params()?);
    prop.solve_homogeneous(&cfg.data(0)?, cfg.t_max)
}

pub fn propagation_experiment(cfg: &PropagateConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let params = cfg.material.params()?;
    let prop = Propagator::new(grid, params);
    let times: Vec<f64> = (0..cfg.time_samples)
        .map(|k| cfg.t_max * k as f64 / (cfg.time_samples - 1) as f64)
        .collect();

    let mut report = EstimateReport::new("propagate");
    report
        .param("n", grid.dim())
        .param("points", grid.points())
        .param("lambda", params.lambda())
        .param("mu", params.mu());
    let (mut unitarity, mut drift, mut oracle) = (0.0f64, 0.0f64, 0.0f64);
    for set in 0..cfg.datasets {
        let data = cfg.data(set)?;
        let f_norm = data.f.l2_norm();
        let e0 = prop.energy(&data, 0.0)?;
        for &t in &times {
            let ratio = prop.halfwave(&data.f, t)?.l2_norm() / f_norm;
            let e = prop.energy(&data, t)?;
            report.push(format!("halfwave set={set} t={t}"), t, ratio);
            report.push(format!("energy set={set} t={t}"), t, e / e0);
            unitarity = unitarity.max((ratio - 1.0).abs());
            drift = drift.max((e - e0).abs() / e0);
        }
        if set < cfg.oracle_datasets {
            let t = cfg.oracle_time;
            let ours = prop.solve_homogeneous(&data, t)?;
            let leray = helmholtz_oracle(&data, t, &params)?;
            let expm = matrix_exp_field_oracle(&data, t, &params)?;
            let worst = ours
                .relative_diff(&leray)?
                .max(ours.relative_diff(&expm)?)
                .max(leray.relative_diff(&expm)?);
            report.push(format!("triangle set={set}"), set as f64, worst);
            oracle = oracle.max(worst);
        }
    }
    report.stat("unitarity_max_dev", unitarity);
    report.stat("energy_max_drift", drift);
    report.stat("oracle_max_rel", oracle);
    report.verdict = Verdict::from_bool(
        unitarity <= cfg.unitarity_tolerance && drift <= cfg.energy_tolerance && oracle <= cfg.oracle_tolerance,
    );
    Ok(report)
}
