//! Uniform resolvent sweep, lattice-wide multiplier identity and the
//! non-admissible divergence probe, as one experiment.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{require, GridSpec, Material, ORACLE_TOLERANCE};
use crate::error::Result;
use crate::grid::LameParams;
use crate::report::{EstimateReport, Verdict};
use crate::resolvent::{
    admissible_pq, divergence_probe, resonant_parameter, sobolev_quotient_sweep, Resolvent, ResolventParams,
    SpaceTimeField, SpaceTimeGrid, SpaceTimePacket,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResolventConfig {
    pub grid: GridSpec,
    pub time_points: usize,
    pub time_length: f64,
    pub material: Material,
    #[serde(with = "super::exponent")]
    pub p: f64,
    #[serde(with = "super::exponent")]
    pub q: f64,
    /// Carrier wave numbers of the test packets; each gives a P and an S packet.
    pub packet_wavenumbers: Vec<f64>,
    pub a_values: Vec<Complex64>,
    /// `log10 |z|` values.
    pub z_log_moduli: Vec<f64>,
    /// `arg z / π`, each in `(0, 1)` so that `Im z > 0`.
    pub z_args: Vec<f64>,
    /// Floor at each sweep point is this fraction of `Im z`.
    pub floor_fraction: f64,
    pub variation_max: f64,
    pub probe_field: usize,
    pub probe_deltas: Vec<f64>,
    #[serde(with = "super::exponent")]
    pub probe_p: f64,
    #[serde(with = "super::exponent")]
    pub probe_q: f64,
    pub probe_growth_min: f64,
    pub identity_tolerance: f64,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        ResolventConfig {
            grid: GridSpec {
                n: 2,
                points: 64,
                length: 6.0,
            },
            time_points: 64,
            // golden-ratio aspect: no lattice point lies exactly on the
            // characteristic variety
            time_length: 3.0 * (1.0 + 5f64.sqrt()),
            material: Material::default(),
            p: 1.2,
            q: 6.0,
            packet_wavenumbers: vec![1.5, 3.0, 6.0, 12.0, 18.0, 24.0],
            a_values: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 10.0)],
            z_log_moduli: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            z_args: vec![0.25, 0.5, 0.75],
            floor_fraction: 1e-3,
            variation_max: 10.0,
            probe_field: 0,
            probe_deltas: vec![1e-1, 1e-3],
            probe_p: 2.0,
            probe_q: 2.0,
            probe_growth_min: 10.0,
            identity_tolerance: 1e-12,
        }
    }
}

impl ResolventConfig {
    pub fn validate(&self) -> Result<()> {
        let st = self.space_time()?;
        self.material.params()?;
        require(admissible_pq(self.p, self.q, st.space().dim()), || {
            format!("(p, q) = ({}, {}) is not admissible", self.p, self.q)
        })?;
        require(!self.packet_wavenumbers.is_empty(), || "no test packets".into())?;
        require(self.packet_wavenumbers.iter().all(|&k| k > 0.0 && k < st.space().nyquist()), || {
            "packet wave numbers must lie in (0, Nyquist)".into()
        })?;
        require(!self.a_values.is_empty() && !self.z_log_moduli.is_empty(), || "empty sweep".into())?;
        require(self.z_args.iter().all(|&a| a > 0.0 && a < 1.0), || "z_args must lie in (0, 1)".into())?;
        require(self.floor_fraction > 0.0 && self.floor_fraction < 1.0, || "floor_fraction must lie in (0, 1)".into())?;
        require(self.probe_field < 2 * self.packet_wavenumbers.len(), || "probe_field out of range".into())?;
        require(self.probe_deltas.len() >= 2 && self.probe_deltas.iter().all(|&d| d > 0.0), || {
            "need two or more positive probe offsets".into()
        })
    }

    pub fn space_time(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::new(self.grid.grid()?, self.time_points, self.time_length)
    }

    pub fn sweep_points(&self) -> Vec<(ResolventParams, f64)> {
        let mut out = Vec::new();
        for &a in &self.a_values {
            for &e in &self.z_log_moduli {
                for &arg in &self.z_args {
                    let z = Complex64::from_polar(10f64.powf(e), arg * PI);
                    out.push((ResolventParams::new(a, z), self.floor_fraction * z.im));
                }
            }
        }
        out
    }
}

/// Mean-free space-time packets moving along `e₁` at the P and S speeds,
/// centered in the box, with widths `min(2.5/k, L/6)`.
pub(crate) fn test_packets(st: &SpaceTimeGrid, params: &LameParams, ks: &[f64]) -> Vec<SpaceTimeField> {
    let space = st.space();
    let l = space.length();
    let mut out = Vec::new();
    for &k in ks {
        for (pol, speed) in [([1.0, 0.0, 0.0], params.c_p()), ([0.0, 1.0, 0.0], params.c_s())] {
            let w = (2.5 / k).min(l / 6.0);
            let packet = SpaceTimePacket {
                t0: st.time_length() / 2.0,
                x0: space.center(),
                width_t: w / speed,
                width_x: w,
                omega: speed * k,
                k: [k, 0.0, 0.0],
                polarization: pol,
            };
            out.push(packet.sample(*st).without_mean());
        }
    }
    out
}

pub fn resolvent_experiment(cfg: &ResolventConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let st = cfg.space_time()?;
    let params = cfg.material.params()?;
    let fields = test_packets(&st, &params, &cfg.packet_wavenumbers);
    let sweep = cfg.sweep_points();

    let mut report = sobolev_quotient_sweep(&fields, &sweep, cfg.p, cfg.q, &params)?;
    report.id = "resolvent-sweep".into();
    report
        .param("time_points", st.time_points())
        .param("time_length", st.time_length())
        .param("length", st.space().length())
        .param("floor_fraction", cfg.floor_fraction);

    let engine = Resolvent::new(st, params);
    let mut identity = 0.0f64;
    for (rp, _) in &sweep {
        identity = identity.max(engine.identity_residual(rp));
    }
    report.stat("identity_residual", identity);

    let (rp0, floor0) = sweep[0];
    let u = engine.apply(&fields[0], &rp0, floor0)?;
    let round_trip = engine.apply_operator(&u, &rp0)?.relative_diff(&fields[0])?;
    report.stat("oracle_max_rel", round_trip);

    let base = resonant_parameter(&fields[cfg.probe_field], &params)?;
    let probe = divergence_probe(&fields, base, &cfg.probe_deltas, cfg.probe_p, cfg.probe_q, &params)?;
    for s in probe.samples_with_prefix("max") {
        report.push(format!("probe {}", s.descriptor), s.x, s.value);
    }
    let growth = probe.get_stat("growth").unwrap_or(f64::NAN);
    report.stat("probe_growth", growth);
    report.stat("probe_z0", base.z.re);

    let variation = report.get_stat("variation").unwrap_or(f64::INFINITY);
    let skipped = report.get_stat("skipped").unwrap_or(f64::INFINITY);
    report.verdict = Verdict::from_bool(
        report.verdict.passed()
            && skipped == 0.0
            && variation <= cfg.variation_max
            && identity <= cfg.identity_tolerance
            && round_trip <= ORACLE_TOLERANCE
            && growth >= cfg.probe_growth_min,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_runs() {
        let cfg = ResolventConfig {
            grid: GridSpec {
                n: 2,
                points: 16,
                length: 6.0,
            },
            time_points: 16,
            packet_wavenumbers: vec![2.0, 4.0],
            a_values: vec![Complex64::new(0.0, 0.0)],
            z_log_moduli: vec![-1.0, 1.0],
            z_args: vec![0.5],
            ..Default::default()
        };
        let rep = resolvent_experiment(&cfg).unwrap();
        assert!(rep.get_stat("identity_residual").unwrap() <= 1e-12);
        assert!(rep.get_stat("oracle_max_rel").unwrap() <= 1e-10);
        assert_eq!(rep.get_stat("skipped"), Some(0.0));
        assert!(rep.get_stat("probe_growth").unwrap() > 1.0);
        let bad = ResolventConfig {
            p: 2.0,
            q: 2.0,
            ..cfg
        };
        assert!(bad.validate().is_err());
    }
}
