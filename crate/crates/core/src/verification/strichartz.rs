//! Homogeneous and inhomogeneous Strichartz quotients on random shell data.
//!
//! Shell `j` uses envelope width `σ₀2^{−j}` and time window `T₀2^{−j}`, so
//! the shells are rescaled copies of one another and the quotients, which
//! are scale invariant, should agree across shells.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::data::{envelope_localized_field, time_bump, trial_rng};
use super::{require, spread, GridSpec, Material, ORACLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::grid::{Grid, VectorField};
use crate::mat::CVEC_ZERO;
use crate::norms::{
    check_inhomogeneous_conditions, classify_pair, conjugate, lr_norm, mixed_norm, outer_norm, sobolev_norm, strichartz_regularity,
};
use crate::propagator::{
    driven_mode_oracle, duhamel, duhamel_series, helmholtz_oracle, CauchyData, Propagator, TimeSeries,
};
use crate::report::{EstimateReport, Verdict};

/// Slack allowed above 1 for the `(∞, 2)` quotient with `g = 0`.
pub const UNITARITY_SLACK: f64 = 1e-8;

// observed 0.024 (6 trials × shells 0–2)
const CEILING_3_4444: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrichartzConfig {
    pub grid: GridSpec,
    pub material: Material,
    #[serde(with = "super::exponent")]
    pub q: f64,
    #[serde(with = "super::exponent")]
    pub r: f64,
    pub shells: Vec<i32>,
    pub trials: usize,
    pub seed: u64,
    /// Envelope width at shell 0.
    pub envelope_width: f64,
    /// Time window at shell 0.
    pub time_window: f64,
    pub steps: usize,
    /// Draw a nonzero velocity `g`.
    pub with_velocity: bool,
    /// Quotient ceiling; `None` uses [`calibrated_ceiling`].
    pub ceiling: Option<f64>,
    pub shell_ratio_max: f64,
}

/// Ceilings calibrated on the default grid and data, about twice the
/// largest quotient observed over 20 trials × shells 0–2.
pub fn calibrated_ceiling(n: usize, q: f64, r: f64) -> Option<f64> {
    match (n, q, r) {
        // observed 0.125
        (3, q, r) if q == 4.0 && r == 4.0 => Some(0.25),
        // observed 1.0 (unitary when g = 0)
        (3, q, r) if q.is_infinite() && r == 2.0 => Some(2.0),
        _ => None,
    }
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            grid: GridSpec {
                n: 3,
                points: 64,
                length: 16.0,
            },
            material: Material::default(),
            q: 4.0,
            r: 4.0,
            shells: vec![0, 1, 2],
            trials: 20,
            seed: 11,
            envelope_width: 2.0,
            time_window: 4.0,
            steps: 32,
            with_velocity: true,
            ceiling: None,
            shell_ratio_max: 1.5,
        }
    }
}

pub(crate) fn check_scales(grid: &Grid, shells: &[i32], width: f64, window: f64, steps: usize) -> Result<()> {
    require(!shells.is_empty(), || "at least one shell".into())?;
    require(width > 0.0 && window > 0.0, || "envelope_width and time_window must be positive".into())?;
    require(steps >= 4, || "steps must be at least 4".into())?;
    let lowest = grid.frequency_step();
    for &j in shells {
        // the flat part [2^{j-1}, 2^{j+1}] of the annulus must be resolved
        let (lo, hi) = (2f64.powi(j - 1), 2f64.powi(j + 1));
        require(lo >= lowest && hi <= grid.nyquist(), || {
            format!(
                "shell {j} needs |xi| in [{lo}, {hi}] but the lattice resolves [{lowest}, {}]",
                grid.nyquist()
            )
        })?;
        let sigma = width * 2f64.powi(-j);
        require(6.0 * sigma <= grid.length(), || format!("envelope at shell {j} does not fit the box"))?;
    }
    Ok(())
}

impl StrichartzConfig {
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.grid()?;
        self.material.params()?;
        let class = classify_pair(self.q, self.r, grid.dim())?;
        if !class.is_admissible() {
            return Err(Error::InvalidExponent(format!(
                "(q, r) = ({}, {}) is {class}, not admissible for n = {}",
                self.q,
                self.r,
                grid.dim()
            )));
        }
        require(self.trials >= 1, || "trials must be positive".into())?;
        self.ceiling()?;
        check_scales(&grid, &self.shells, self.envelope_width, self.time_window, self.steps)
    }

    pub fn ceiling(&self) -> Result<f64> {
        self.ceiling
            .or_else(|| calibrated_ceiling(self.grid.n, self.q, self.r))
            .ok_or_else(|| {
                Error::Config(format!(
                    "no calibrated ceiling for n = {}, (q, r) = ({}, {}); set `ceiling`",
                    self.grid.n, self.q, self.r
                ))
            })
    }
}

fn shell_scale(j: i32) -> f64 {
    2f64.powi(-j)
}

pub fn strichartz_quotient_experiment(cfg: &StrichartzConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let params = cfg.material.params()?;
    let n = grid.dim();
    let prop = Propagator::new(grid, params);
    let s = strichartz_regularity(cfg.q, cfg.r, n);
    let center = grid.center();

    let mut report = EstimateReport::new("strichartz");
    report
        .param("n", n)
        .param("q", cfg.q)
        .param("r", cfg.r)
        .param("s", s)
        .param("with_velocity", cfg.with_velocity);
    let mut shell_max = Vec::new();
    let mut oracle = 0.0f64;
    for (si, &j) in cfg.shells.iter().enumerate() {
        let scale = shell_scale(j);
        let window = cfg.time_window * scale;
        let dt = window / cfg.steps as f64;
        let times: Vec<f64> = (0..=cfg.steps).map(|k| k as f64 * dt).collect();
        let mut best = 0.0f64;
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, (si * cfg.trials + trial) as u64);
            let width = cfg.envelope_width * scale;
            let f = envelope_localized_field(&grid, j, width, &center, &mut rng);
            let g = if cfg.with_velocity {
                envelope_localized_field(&grid, j, width, &center, &mut rng).scaled(Complex64::new(2f64.powi(j), 0.0))
            } else {
                VectorField::zeros(grid, f.space())
            };
            let data = CauchyData::new(f, g)?;
            let mut inner = Vec::with_capacity(times.len());
            let mut last = None;
            prop.evolve_each(&data, &times, |k, u| {
                inner.push(lr_norm(u, cfg.r)?);
                if trial == 0 && k == cfg.steps {
                    last = Some(u.clone());
                }
                Ok(())
            })?;
            let den = sobolev_norm(&data.f, s, 2.0)? + sobolev_norm(&data.g, s - 1.0, 2.0)?;
            let q = outer_norm(&inner, cfg.q, dt) / den;
            report.push(format!("shell={j} trial={trial}"), j as f64, q);
            best = best.max(q);
            if let Some(u) = last {
                let want = helmholtz_oracle(&data, window, &params)?;
                oracle = oracle.max(u.relative_diff(&want)?);
            }
        }
        report.stat(&format!("max_quotient_shell_{j}"), best);
        shell_max.push(best);
    }
    let (max, min, ratio) = spread(&shell_max);
    report.stat("max_quotient", max);
    report.stat("min_shell_max", min);
    report.stat("shell_ratio", ratio);
    report.stat("oracle_max_rel", oracle);
    let ceiling = cfg.ceiling()?;
    report.stat("ceiling", ceiling);
    let mut ok = max <= ceiling && ratio <= cfg.shell_ratio_max && oracle <= ORACLE_TOLERANCE;
    if cfg.q.is_infinite() && cfg.r == 2.0 && !cfg.with_velocity {
        report.stat("unitarity_excess", max - 1.0);
        ok &= max <= 1.0 + UNITARITY_SLACK;
    }
    if oracle > ORACLE_TOLERANCE {
        report.note(format!("oracle disagreement {oracle:e} exceeds {ORACLE_TOLERANCE:e}"));
    }
    report.verdict = Verdict::from_bool(ok);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InhomogeneousConfig {
    pub grid: GridSpec,
    pub material: Material,
    #[serde(with = "super::exponent")]
    pub q: f64,
    #[serde(with = "super::exponent")]
    pub r: f64,
    #[serde(with = "super::exponent")]
    pub q_tilde: f64,
    #[serde(with = "super::exponent")]
    pub r_tilde: f64,
    pub shells: Vec<i32>,
    pub trials: usize,
    pub seed: u64,
    pub envelope_width: f64,
    /// Observation window at shell 0; the forcing bump lasts half of it.
    pub time_window: f64,
    pub steps: usize,
    /// Quotient ceiling; `None` uses [`calibrated_inhomogeneous_ceiling`].
    pub ceiling: Option<f64>,
    pub shell_ratio_max: f64,
}

/// Calibrated like [`calibrated_ceiling`], keyed by `(n, q, r, q̃, r̃)`.
pub fn calibrated_inhomogeneous_ceiling(n: usize, q: f64, r: f64, q_tilde: f64, r_tilde: f64) -> Option<f64> {
    match (n, [q, r, q_tilde, r_tilde]) {
        (3, [4.0, 4.0, 4.0, 4.0]) => Some(CEILING_3_4444),
        _ => None,
    }
}

impl Default for InhomogeneousConfig {
    fn default() -> Self {
        InhomogeneousConfig {
            grid: GridSpec {
                n: 3,
                points: 64,
                length: 16.0,
            },
            material: Material::default(),
            q: 4.0,
            r: 4.0,
            q_tilde: 4.0,
            r_tilde: 4.0,
            shells: vec![0, 1, 2],
            trials: 6,
            seed: 13,
            envelope_width: 2.0,
            time_window: 4.0,
            steps: 32,
            ceiling: None,
            shell_ratio_max: 1.5,
        }
    }
}

impl InhomogeneousConfig {
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.grid()?;
        self.material.params()?;
        let check = check_inhomogeneous_conditions(self.q, self.r, self.q_tilde, self.r_tilde, grid.dim());
        if !check.passed {
            return Err(Error::Conditions(check.reasons));
        }
        require(self.trials >= 1, || "trials must be positive".into())?;
        self.ceiling()?;
        check_scales(&grid, &self.shells, self.envelope_width, self.time_window, self.steps)
    }

    pub fn ceiling(&self) -> Result<f64> {
        self.ceiling
            .or_else(|| calibrated_inhomogeneous_ceiling(self.grid.n, self.q, self.r, self.q_tilde, self.r_tilde))
            .ok_or_else(|| Error::Config("no calibrated ceiling for this tuple; set `ceiling`".into()))
    }
}

/// Relative error of the Duhamel quadrature against the driven-oscillator
/// closed form for a P-polarized time-harmonic mode on a small grid.
pub fn driven_mode_error(n: usize, params: &crate::grid::LameParams, steps: usize) -> Result<f64> {
    let grid = Grid::new(n, 8, 2.0 * std::f64::consts::PI)?;
    let prop = Propagator::new(grid, *params);
    let (omega, t) = (0.7, 1.0);
    let kappa = params.c_p();
    let mode = |amp: Complex64| {
        VectorField::from_fn(grid, move |x| {
            let mut v = CVEC_ZERO;
            v[0] = amp * Complex64::from_polar(1.0, x[0]);
            v
        })
    };
    let dt = t / steps as f64;
    let forcing = (0..=steps)
        .map(|k| mode(Complex64::from_polar(1.0, omega * k as f64 * dt)))
        .collect();
    let got = duhamel(&prop, &TimeSeries::new(dt, forcing)?, t)?;
    let want = mode(driven_mode_oracle(kappa, omega, t));
    got.relative_diff(&want)
}

pub(crate) fn driven_mode_check(n: usize, params: &crate::grid::LameParams) -> Result<f64> {
    driven_mode_error(n, params, 256)
}

/// Error ratio of the Duhamel quadrature under mesh halving, `steps → 2·steps`;
/// a fourth-order rule gives about 16.
pub fn duhamel_order_ratio(n: usize, params: &crate::grid::LameParams, steps: usize) -> Result<f64> {
    Ok(driven_mode_error(n, params, steps)? / driven_mode_error(n, params, 2 * steps)?)
}

pub fn inhomogeneous_quotient_experiment(cfg: &InhomogeneousConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let params = cfg.material.params()?;
    let n = grid.dim();
    let prop = Propagator::new(grid, params);
    let center = grid.center();
    let (qd, rd) = (conjugate(cfg.q_tilde), conjugate(cfg.r_tilde));

    let mut report = EstimateReport::new("inhomogeneous");
    report
        .param("n", n)
        .param("q", cfg.q)
        .param("r", cfg.r)
        .param("q_tilde", cfg.q_tilde)
        .param("r_tilde", cfg.r_tilde);
    let mut shell_max = Vec::new();
    let mut skipped = 0usize;
    for (si, &j) in cfg.shells.iter().enumerate() {
        let scale = shell_scale(j);
        let window = cfg.time_window * scale;
        let dt = window / cfg.steps as f64;
        let mut best = 0.0f64;
        for trial in 0..cfg.trials {
            let mut rng = trial_rng(cfg.seed, (si * cfg.trials + trial) as u64);
            let shape = envelope_localized_field(&grid, j, cfg.envelope_width * scale, &center, &mut rng);
            let forcing: Vec<VectorField> = (0..=cfg.steps)
                .map(|k| shape.scaled(Complex64::new(time_bump(k as f64 * dt, window / 2.0), 0.0)))
                .collect();
            let den = mixed_norm(&forcing, qd, rd, dt)?;
            if den == 0.0 {
                skipped += 1;
                continue;
            }
            let u = duhamel_series(&prop, &TimeSeries::new(dt, forcing)?)?;
            let q = mixed_norm(&u.fields, cfg.q, cfg.r, dt)? / den;
            report.push(format!("shell={j} trial={trial}"), j as f64, q);
            best = best.max(q);
        }
        report.stat(&format!("max_quotient_shell_{j}"), best);
        shell_max.push(best);
    }
    let (max, min, ratio) = spread(&shell_max);
    let oracle = driven_mode_check(n, &params)?;
    let order = duhamel_order_ratio(n, &params, 8)?;
    let ceiling = cfg.ceiling()?;
    report.stat("max_quotient", max);
    report.stat("ceiling", ceiling);
    report.stat("duhamel_order_ratio", order);
    report.stat("min_shell_max", min);
    report.stat("shell_ratio", ratio);
    report.stat("skipped", skipped as f64);
    report.stat("oracle_max_rel", oracle);
    if oracle > ORACLE_TOLERANCE {
        report.note(format!("oracle disagreement {oracle:e} exceeds {ORACLE_TOLERANCE:e}"));
    }
    report.verdict = Verdict::from_bool(
        max.is_finite() && max <= ceiling && ratio <= cfg.shell_ratio_max && oracle <= ORACLE_TOLERANCE,
    );
    Ok(report)
}
