//! Experiments that turn the estimates into measured quantities: unitarity
//! and oracle agreement of the free flow, decay fits,
//! Strichartz and inhomogeneous quotients, weighted quotients for perturbed
//! equations, lattice-wide diagonalization checks and resolvent sweeps.
//!
//! Every experiment runs an oracle path alongside at reduced sample count; a
//! relative disagreement above [`ORACLE_TOLERANCE`] fails the experiment.

mod data;
mod decay;
mod diag;
mod fit;
mod propagate;
mod strichartz;
mod sweep;
mod weighted;

pub use data::{envelope_localized_field, random_polarization, time_bump, trial_rng};
pub use decay::{dispersive_decay_experiment, DecayConfig};
pub use diag::{diagonalization_experiment, DiagConfig};
pub use fit::{fit_line, LinearFit};
pub use propagate::{propagate_final_field, propagation_experiment, PropagateConfig};
pub use strichartz::{
    calibrated_ceiling, calibrated_inhomogeneous_ceiling, driven_mode_error, duhamel_order_ratio,
    inhomogeneous_quotient_experiment, strichartz_quotient_experiment, InhomogeneousConfig, StrichartzConfig,
    UNITARITY_SLACK,
};
pub use sweep::{resolvent_experiment, ResolventConfig};
pub use weighted::{weighted_estimate_experiment, PotentialSpec, WeightedConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, LameParams};

/// Relative oracle disagreement that fails an experiment.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Dimension, points per axis and box length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub points: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.points, self.length)
    }
}

/// Lamé constants `(λ, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub lambda: f64,
    pub mu: f64,
}

impl Material {
    pub fn params(&self) -> Result<LameParams> {
        LameParams::new(self.lambda, self.mu)
    }
}

impl Default for Material {
    fn default() -> Self {
        Material { lambda: 1.0, mu: 1.0 }
    }
}

pub(crate) fn require(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(msg()))
    }
}

/// Max and min of a non-empty slice, and their ratio.
pub(crate) fn spread(values: &[f64]) -> (f64, f64, f64) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    (max, min, max / min)
}

/// Serde for Lebesgue exponents: finite values as numbers, `∞` as `"inf"`
/// (JSON has no infinity).
pub mod exponent {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(v) => Ok(v),
            Repr::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                _ => Err(serde::de::Error::custom(format!("`{t}` is not an exponent"))),
            },
        }
    }
}
