use rand::Rng;
use serde::{Deserialize, Serialize};

use super::data::trial_rng;
use super::{require, GridSpec};
use crate::angular::SignBranch;
use crate::error::{Error, Result};
use crate::grid::LameParams;
use crate::par;
use crate::report::{EstimateReport, Verdict};
use crate::symbol::{brute_eig_oracle, diagonalize_at, lame_symbol_real, to_row_major};

/// Lattice-wide check of `RΛRᵗ = L(ξ)` against the Jacobi oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiagConfig {
    pub grid: GridSpec,
    /// Number of random elliptic `(λ, μ)` pairs.
    pub materials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub eig_tolerance: f64,
}

impl Default for DiagConfig {
    fn default() -> Self {
        DiagConfig {
            grid: GridSpec {
                n: 2,
                points: 64,
                length: 2.0 * std::f64::consts::PI,
            },
            materials: 5,
            seed: 3,
            tolerance: 1e-12,
            eig_tolerance: 1e-11,
        }
    }
}

impl DiagConfig {
    pub fn validate(&self) -> Result<()> {
        self.grid.grid()?;
        require(self.materials >= 1, || "materials must be positive".into())?;
        require(self.tolerance > 0.0 && self.eig_tolerance > 0.0, || "tolerances must be positive".into())
    }
}

/// Random `(λ, μ)` with `μ ∈ [0.2, 3]` and `λ ∈ [−1.5μ, 5]`.
pub(crate) fn random_materials(count: usize, seed: u64) -> Result<Vec<LameParams>> {
    let mut rng = trial_rng(seed, 0);
    (0..count)
        .map(|_| {
            let mu = rng.random_range(0.2..3.0);
            let lambda = rng.random_range(-1.5 * mu..5.0);
            LameParams::new(lambda, mu)
        })
        .collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn diagonalization_experiment(cfg: &DiagConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let grid = cfg.grid.grid()?;
    let n = grid.dim();
    let mut report = EstimateReport::new("diag-check");
    report
        .param("n", n)
        .param("points", grid.points())
        .param("materials", cfg.materials);
    let mut worst_res = 0.0f64;
    let mut worst_eig = 0.0f64;
    let mut evaluated = 0usize;
    for (mi, params) in random_materials(cfg.materials, cfg.seed)?.iter().enumerate() {
        let per_site = par::map_range(grid.sites(), |site| -> Result<(f64, f64, usize)> {
            if site == 0 {
                return Ok((0.0, 0.0, 0));
            }
            let xi = grid.frequency_of_site(site);
            let xi = &xi[..n];
            let oracle = brute_eig_oracle(&to_row_major(&lame_symbol_real(xi, params)), n)?;
            let mut out = (0.0f64, 0.0f64, 0usize);
            for sign in [SignBranch::Plus, SignBranch::Minus] {
                let d = match diagonalize_at(xi, sign, params) {
                    Ok(d) => d,
                    Err(Error::OutsideBranch { .. }) => continue,
                    Err(e) => return Err(e),
                };
                let ours = sorted_desc(d.eigenvalues.clone());
                let scale = oracle.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let err = ours
                    .iter()
                    .zip(&oracle.eigenvalues)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                    / scale;
                out.0 = out.0.max(d.residual);
                out.1 = out.1.max(err);
                out.2 += 1;
            }
            Ok(out)
        });
        let mut res = 0.0f64;
        let mut eig = 0.0f64;
        for r in per_site {
            let (a, b, c) = r?;
            res = res.max(a);
            eig = eig.max(b);
            evaluated += c;
        }
        report.push(
            format!("lambda={} mu={} residual", params.lambda(), params.mu()),
            mi as f64,
            res,
        );
        report.push(
            format!("lambda={} mu={} eigenvalue_error", params.lambda(), params.mu()),
            mi as f64,
            eig,
        );
        worst_res = worst_res.max(res);
        worst_eig = worst_eig.max(eig);
    }
    report.stat("max_residual", worst_res);
    report.stat("max_eigenvalue_error", worst_eig);
    report.stat("evaluations", evaluated as f64);
    report.verdict = Verdict::from_bool(worst_res <= cfg.tolerance && worst_eig <= cfg.eig_tolerance && evaluated > 0);
    Ok(report)
}
