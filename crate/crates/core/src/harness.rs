//! Experiment configs, persistence and plot scripts.
//!
//! A config file is a JSON object with a `kind` tag, the experiment's own
//! fields, and an optional `output_dir`:
//!
//! ```json
//! { "kind": "decay-fit", "shell": 2, "output_dir": "out/decay" }
//! ```
//!
//! Every run writes `<id>.csv`, `<id>.summary.txt`, `<id>.report.json`,
//! `<id>.config.json` (the resolved config, enough to re-run) and
//! `<id>.gp` (a gnuplot script) into the output directory and nowhere else.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::report::{fmt_f64, EstimateReport};
use crate::verification::{
    diagonalization_experiment, dispersive_decay_experiment, inhomogeneous_quotient_experiment,
    propagation_experiment, resolvent_experiment, strichartz_quotient_experiment, weighted_estimate_experiment,
    DecayConfig, DiagConfig, InhomogeneousConfig, PropagateConfig, ResolventConfig, StrichartzConfig,
    WeightedConfig,
};

/// Environment variable that replaces the seed of any seeded experiment.
pub const SEED_ENV: &str = "LAME_SPECTRAL_SEED";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    DiagCheck(DiagConfig),
    Propagate(PropagateConfig),
    DecayFit(DecayConfig),
    Strichartz(StrichartzConfig),
    Inhomo(InhomogeneousConfig),
    Perturbed(WeightedConfig),
    ResolventSweep(ResolventConfig),
}

impl Experiment {
    /// The kind tag, which is also the CLI subcommand.
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::DiagCheck(_) => "diag-check",
            Experiment::Propagate(_) => "propagate",
            Experiment::DecayFit(_) => "decay-fit",
            Experiment::Strichartz(_) => "strichartz",
            Experiment::Inhomo(_) => "inhomo",
            Experiment::Perturbed(_) => "perturbed",
            Experiment::ResolventSweep(_) => "resolvent-sweep",
        }
    }

    /// Default config for a kind tag.
    pub fn default_for(kind: &str) -> Result<Experiment> {
        Ok(match kind {
            "diag-check" => Experiment::DiagCheck(Default::default()),
            "propagate" => Experiment::Propagate(Default::default()),
            "decay-fit" => Experiment::DecayFit(Default::default()),
            "strichartz" => Experiment::Strichartz(Default::default()),
            "inhomo" => Experiment::Inhomo(Default::default()),
            "perturbed" => Experiment::Perturbed(Default::default()),
            "resolvent-sweep" => Experiment::ResolventSweep(Default::default()),
            other => return Err(Error::Config(format!("unknown experiment kind `{other}`"))),
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Experiment::DiagCheck(c) => c.validate(),
            Experiment::Propagate(c) => c.validate(),
            Experiment::DecayFit(c) => c.validate(),
            Experiment::Strichartz(c) => c.validate(),
            Experiment::Inhomo(c) => c.validate(),
            Experiment::Perturbed(c) => c.validate(),
            Experiment::ResolventSweep(c) => c.validate(),
        }
    }

    /// `None` for experiments without random data.
    pub fn seed_mut(&mut self) -> Option<&mut u64> {
        match self {
            Experiment::DiagCheck(c) => Some(&mut c.seed),
            Experiment::Propagate(c) => Some(&mut c.seed),
            Experiment::DecayFit(c) => Some(&mut c.seed),
            Experiment::Strichartz(c) => Some(&mut c.seed),
            Experiment::Inhomo(c) => Some(&mut c.seed),
            Experiment::Perturbed(c) => Some(&mut c.seed),
            Experiment::ResolventSweep(_) => None,
        }
    }

    fn execute(&self) -> Result<EstimateReport> {
        match self {
            Experiment::DiagCheck(c) => diagonalization_experiment(c),
            Experiment::Propagate(c) => propagation_experiment(c),
            Experiment::DecayFit(c) => dispersive_decay_experiment(c),
            Experiment::Strichartz(c) => strichartz_quotient_experiment(c),
            Experiment::Inhomo(c) => inhomogeneous_quotient_experiment(c),
            Experiment::Perturbed(c) => weighted_estimate_experiment(c),
            Experiment::ResolventSweep(c) => resolvent_experiment(c),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            output_dir: default_output_dir(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Replaces the seed from [`SEED_ENV`] when it is set.
    pub fn apply_seed_override(&mut self) -> Result<()> {
        match std::env::var(SEED_ENV) {
            Ok(text) => {
                let seed = text
                    .trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("{SEED_ENV}={text:?} is not a u64")))?;
                if let Some(s) = self.experiment.seed_mut() {
                    *s = seed;
                }
                Ok(())
            }
            Err(std::env::VarError::NotPresent) => Ok(()),
            Err(e) => Err(Error::Config(format!("{SEED_ENV}: {e}"))),
        }
    }

    /// Experiment fields as JSON with sorted keys and shortest round-trip
    /// numbers. The output directory is not part of it.
    pub fn canonical_json(&self) -> Result<String> {
        // `serde_json::Value` keeps object keys in a BTreeMap
        let value = serde_json::to_value(&self.experiment)?;
        Ok(serde_json::to_string(&value)?)
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex encoded.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }

    /// Validates, runs and stamps the report with the config hash.
    pub fn run(&self) -> Result<EstimateReport> {
        self.experiment.validate()?;
        let mut report = self.experiment.execute()?;
        report.config_hash = self.hash()?;
        Ok(report)
    }

    /// Writes the report files into `output_dir`.
    pub fn write_outputs(&self, report: &EstimateReport) -> Result<Outputs> {
        let dir = &self.output_dir;
        fs::create_dir_all(dir)?;
        let id = &report.id;
        let out = Outputs {
            csv: dir.join(format!("{id}.csv")),
            summary: dir.join(format!("{id}.summary.txt")),
            report: dir.join(format!("{id}.report.json")),
            config: dir.join(format!("{id}.config.json")),
            plot: (report.samples.len() >= 2).then(|| dir.join(format!("{id}.gp"))),
        };
        report.write_csv(fs::File::create(&out.csv)?)?;
        fs::write(&out.summary, report.summary())?;
        fs::write(&out.report, serde_json::to_string_pretty(report)?)?;
        fs::write(&out.config, serde_json::to_string_pretty(self)?)?;
        if let Some(path) = &out.plot {
            let csv_name = format!("{id}.csv");
            fs::write(path, emit_plot_script(report, PlotStyle::Auto, &csv_name)?)?;
        }
        Ok(out)
    }
}

/// Paths written by [`ExperimentConfig::write_outputs`].
#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub csv: PathBuf,
    pub summary: PathBuf,
    pub report: PathBuf,
    pub config: PathBuf,
    /// Absent when the report has fewer than two samples.
    pub plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotStyle {
    /// Chosen from the report id.
    Auto,
    /// Log-log quotient against time with the fitted line and the reference
    /// slope `−(n−1)/2`.
    Decay,
    /// Quotient against `log10 |z|`.
    Sweep,
    /// Value against the sample abscissa.
    Scatter,
}

fn resolve_style(report: &EstimateReport, style: PlotStyle) -> PlotStyle {
    match (style, report.id.as_str()) {
        (PlotStyle::Auto, "decay-fit") => PlotStyle::Decay,
        (PlotStyle::Auto, "resolvent-sweep") => PlotStyle::Sweep,
        (PlotStyle::Auto, _) => PlotStyle::Scatter,
        (s, _) => s,
    }
}

/// A gnuplot script that plots `csv_name` (as written by
/// [`EstimateReport::write_csv`]) next to it.
pub fn emit_plot_script(report: &EstimateReport, style: PlotStyle, csv_name: &str) -> Result<String> {
    if report.samples.len() < 2 {
        return Err(Error::Empty("report samples (need at least 2)"));
    }
    let mut s = String::new();
    s.push_str(&format!("# {} ({})\n", report.id, report.config_hash));
    s.push_str("set datafile separator ','\nset key top right\nset grid\n");
    s.push_str(&format!("set title '{}'\n", report.id));
    match resolve_style(report, style) {
        PlotStyle::Decay => {
            let n: f64 = report
                .parameters
                .get("n")
                .and_then(|v| v.parse().ok())
                .unwrap_or(3.0);
            let slope = report.get_stat("slope").unwrap_or(f64::NAN);
            let intercept = report.get_stat("intercept").unwrap_or(f64::NAN);
            let target = -(n - 1.0) / 2.0;
            s.push_str("set logscale xy\nset xlabel 't'\nset ylabel 'sup|u(t)| / |f|_1'\n");
            s.push_str(&format!("fit_line(t) = exp({}) * t**({})\n", fmt_f64(intercept), fmt_f64(slope)));
            s.push_str(&format!("ref_line(t) = exp({}) * t**({})\n", fmt_f64(intercept), fmt_f64(target)));
            s.push_str(&format!(
                "plot '{csv_name}' every ::1 using 3:4 with points pt 7 title 'quotient', \\\n     \
                 fit_line(x) with lines title 'fit slope {}', \\\n     \
                 ref_line(x) with lines dt 2 title 'reference slope {}'\n",
                fmt_f64(slope),
                fmt_f64(target)
            ));
        }
        PlotStyle::Sweep => {
            s.push_str("set logscale y\nset xlabel 'log10 |z|'\nset ylabel 'quotient'\n");
            s.push_str(&format!(
                "plot '{csv_name}' every ::1 using 3:(strstrt(strcol(2), 'quotient') == 1 ? $4 : NaN) \
                 with points pt 7 title 'quotient', \\\n     \
                 '{csv_name}' every ::1 using 3:(strstrt(strcol(2), 'max') == 1 ? $4 : NaN) \
                 with linespoints title 'max over fields'\n"
            ));
        }
        PlotStyle::Scatter | PlotStyle::Auto => {
            s.push_str("set xlabel 'x'\nset ylabel 'value'\n");
            s.push_str(&format!("plot '{csv_name}' every ::1 using 3:4 with points pt 7 title 'samples'\n"));
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_hash() {
        let text = r#"{"kind": "decay-fit", "shell": 3, "output_dir": "x"}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        match &cfg.experiment {
            Experiment::DecayFit(c) => assert_eq!(c.shell, 3),
            other => panic!("wrong kind {other:?}"),
        }
        assert_eq!(cfg.output_dir, PathBuf::from("x"));
        let echoed = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(echoed, cfg);
        assert_eq!(echoed.hash().unwrap(), cfg.hash().unwrap());
        // output directory does not enter the hash, the experiment does
        let moved = ExperimentConfig {
            output_dir: "elsewhere".into(),
            ..cfg.clone()
        };
        assert_eq!(moved.hash().unwrap(), cfg.hash().unwrap());
        let other = ExperimentConfig::from_json(r#"{"kind": "decay-fit", "shell": 2}"#).unwrap();
        assert_ne!(other.hash().unwrap(), cfg.hash().unwrap());
        assert_eq!(cfg.hash().unwrap().len(), 64);
    }

    #[test]
    fn infinite_exponents_round_trip() {
        let cfg = ExperimentConfig::from_json(r#"{"kind": "strichartz", "q": "inf", "r": 2}"#).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains(r#""q":"inf""#), "{json}");
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
        match cfg.experiment {
            Experiment::Strichartz(c) => assert!(c.q.is_infinite()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn canonical_keys_are_sorted() {
        let cfg = ExperimentConfig::new(Experiment::default_for("diag-check").unwrap());
        let json = cfg.canonical_json().unwrap();
        let keys: Vec<&str> = ["\"eig_tolerance\"", "\"grid\"", "\"kind\"", "\"materials\"", "\"seed\""].to_vec();
        let pos: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{json}");
    }

    #[test]
    fn unknown_kind_and_bad_config() {
        assert!(ExperimentConfig::from_json(r#"{"kind": "nope"}"#).is_err());
        assert!(Experiment::default_for("nope").is_err());
        let bad = ExperimentConfig::from_json(r#"{"kind": "strichartz", "q": 2.0, "r": 2.0}"#).unwrap();
        assert!(bad.run().is_err());
    }

    #[test]
    fn plot_script_guards_and_styles() {
        let mut r = EstimateReport::new("decay-fit");
        r.push("t=1", 1.0, 0.5);
        assert!(matches!(emit_plot_script(&r, PlotStyle::Auto, "a.csv"), Err(Error::Empty(_))));
        r.push("t=2", 2.0, 0.35);
        r.param("n", 2);
        r.stat("slope", -0.5);
        r.stat("intercept", -0.7);
        let s = emit_plot_script(&r, PlotStyle::Auto, "a.csv").unwrap();
        assert!(s.contains("set logscale xy"));
        assert!(s.contains("t**(-0.5)"));
        let mut sweep = EstimateReport::new("resolvent-sweep");
        sweep.push("quotient a=0 z=1", 0.0, 1.0);
        sweep.push("max a=0 z=1", 0.0, 1.0);
        let s = emit_plot_script(&sweep, PlotStyle::Auto, "b.csv").unwrap();
        assert!(s.contains("log10 |z|"));
    }

    #[test]
    fn outputs_stay_in_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::from_json(
            r#"{"kind": "diag-check", "grid": {"n": 2, "points": 8, "length": 3.0}, "materials": 1}"#,
        )
        .unwrap();
        cfg.output_dir = dir.path().join("run");
        let report = cfg.run().unwrap();
        let out = cfg.write_outputs(&report).unwrap();
        for p in [&out.csv, &out.summary, &out.report, &out.config, out.plot.as_ref().unwrap()] {
            assert!(p.starts_with(&cfg.output_dir) && p.exists(), "{p:?}");
        }
        let echoed = ExperimentConfig::load(&out.config).unwrap();
        assert_eq!(echoed, cfg);
        let again = echoed.run().unwrap();
        assert_eq!(again.to_csv_string().unwrap(), report.to_csv_string().unwrap());
        assert_eq!(again.config_hash, report.config_hash);
    }
}
