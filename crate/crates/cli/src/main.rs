use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lame_spectral::grid::{read_snapshot, write_snapshot};
use lame_spectral::harness::{Experiment, ExperimentConfig};
use lame_spectral::norms::{check_inhomogeneous_conditions, classify_pair};
use lame_spectral::verification::{propagate_final_field, DecayConfig, PropagateConfig};
use lame_spectral::{par, Error, Space};

/// Pseudospectral Lamé solver and estimate-verification lab.
///
/// Exit status: 0 when the experiment passes, 1 when it runs but fails its
/// verdict, 2 on usage, configuration or precondition errors.
#[derive(Parser, Debug)]
#[command(name = "lame-spectral", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON experiment config; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lattice-wide diagonalization residual against the Jacobi oracle.
    DiagCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        /// Grid points per axis.
        #[arg(long = "N")]
        points: Option<usize>,
    },
    /// Unitarity, energy and oracle agreement of the free evolution; stores
    /// the final field as a snapshot.
    Propagate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Log-log fit of the dispersive decay.
    DecayFit {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Strichartz quotients across trials and dyadic shells.
    Strichartz {
        #[command(flatten)]
        common: Common,
    },
    /// Inhomogeneous (Duhamel) quotients.
    Inhomo {
        #[command(flatten)]
        common: Common,
    },
    /// Weighted quotients and the Picard solve with a potential.
    Perturbed {
        #[command(flatten)]
        common: Common,
    },
    /// Resolvent quotient sweep, multiplier identity and divergence probe.
    ResolventSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Classifies an exponent pair; with `--q-tilde/--r-tilde` also checks
    /// the inhomogeneous conditions.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_exponent)]
        q: f64,
        #[arg(long, value_parser = parse_exponent)]
        r: f64,
        #[arg(long, value_parser = parse_exponent, requires = "r_tilde")]
        q_tilde: Option<f64>,
        #[arg(long, value_parser = parse_exponent, requires = "q_tilde")]
        r_tilde: Option<f64>,
    },
    /// Prints a field snapshot's header and norms, optionally converting it.
    Snapshot {
        input: PathBuf,
        /// Writes `<stem>.<space>.field` into `--output-dir`.
        #[arg(long, value_enum)]
        convert: Option<SpaceArg>,
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SpaceArg {
    Physical,
    Frequency,
}

fn parse_exponent(s: &str) -> Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("`{s}`: {e}")),
    }
}

fn load(common: &Common, kind: &str) -> lame_spectral::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(Experiment::default_for(kind)?),
    };
    if cfg.experiment.kind() != kind {
        return Err(Error::Config(format!(
            "config is for `{}`, not `{kind}`",
            cfg.experiment.kind()
        )));
    }
    if let Some(dir) = &common.output_dir {
        cfg.output_dir = dir.clone();
    }
    cfg.apply_seed_override()?;
    Ok(cfg)
}

/// Runs, writes outputs and prints the summary; `Ok(passed)`.
fn execute(cfg: &ExperimentConfig) -> lame_spectral::Result<bool> {
    let report = cfg.run()?;
    let out = cfg.write_outputs(&report)?;
    print!("{}", report.summary());
    println!("csv: {}", out.csv.display());
    println!("report: {}", out.report.display());
    if let Some(p) = &out.plot {
        println!("plot: {}", p.display());
    }
    Ok(report.verdict.passed())
}

fn diag(common: &Common, n: Option<usize>, points: Option<usize>) -> lame_spectral::Result<bool> {
    let mut cfg = load(common, "diag-check")?;
    if let Experiment::DiagCheck(c) = &mut cfg.experiment {
        c.grid.n = n.unwrap_or(c.grid.n);
        c.grid.points = points.unwrap_or(c.grid.points);
    }
    execute(&cfg)
}

fn propagate(common: &Common, n: Option<usize>) -> lame_spectral::Result<bool> {
    let mut cfg = load(common, "propagate")?;
    if let (Experiment::Propagate(c), Some(n)) = (&mut cfg.experiment, n) {
        // without a config file `--n 3` selects the 3-D preset
        if n == 3 && common.config.is_none() {
            *c = PropagateConfig {
                seed: c.seed,
                ..PropagateConfig::three_dimensional()
            };
        } else {
            c.grid.n = n;
        }
    }
    let passed = execute(&cfg)?;
    if let Experiment::Propagate(c) = &cfg.experiment {
        let path = cfg.output_dir.join("propagate.field");
        write_snapshot(&propagate_final_field(c)?, BufWriter::new(File::create(&path)?))?;
        println!("snapshot: {}", path.display());
    }
    Ok(passed)
}

fn decay(common: &Common, n: Option<usize>) -> lame_spectral::Result<bool> {
    let mut cfg = load(common, "decay-fit")?;
    if let (Experiment::DecayFit(c), Some(n)) = (&mut cfg.experiment, n) {
        if n == 3 && common.config.is_none() {
            *c = DecayConfig {
                seed: c.seed,
                ..DecayConfig::three_dimensional()
            };
        } else {
            c.grid.n = n;
        }
    }
    execute(&cfg)
}

fn classify(n: usize, q: f64, r: f64, tilde: Option<(f64, f64)>) -> lame_spectral::Result<bool> {
    println!("{}", classify_pair(q, r, n)?);
    if let Some((qt, rt)) = tilde {
        println!("dual pair: {}", classify_pair(qt, rt, n)?);
        let check = check_inhomogeneous_conditions(q, r, qt, rt, n);
        if check.passed {
            println!("inhomogeneous conditions: pass");
        } else {
            println!("inhomogeneous conditions: fail");
            for reason in &check.reasons {
                println!("  {reason}");
            }
        }
    }
    Ok(true)
}

fn snapshot(input: &Path, convert: Option<SpaceArg>, output_dir: &Path) -> lame_spectral::Result<bool> {
    let field = read_snapshot(BufReader::new(File::open(input)?))?;
    let grid = field.grid();
    println!("n = {}", grid.dim());
    println!("N = {}", grid.points());
    println!("L = {}", grid.length());
    println!("space = {}", field.space().name());
    println!("l2 = {}", field.l2_norm());
    println!("max_abs = {}", field.max_abs());
    if let Some(target) = convert {
        let space = match target {
            SpaceArg::Physical => Space::Physical,
            SpaceArg::Frequency => Space::Frequency,
        };
        std::fs::create_dir_all(output_dir)?;
        let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("field");
        let path = output_dir.join(format!("{stem}.{}.field", space.name()));
        write_snapshot(&field.into_space(space), BufWriter::new(File::create(&path)?))?;
        println!("wrote {}", path.display());
    }
    Ok(true)
}

fn dispatch(command: Command) -> lame_spectral::Result<bool> {
    match command {
        Command::DiagCheck { common, n, points } => diag(&common, n, points),
        Command::Propagate { common, n } => propagate(&common, n),
        Command::DecayFit { common, n } => decay(&common, n),
        Command::Strichartz { common } => execute(&load(&common, "strichartz")?),
        Command::Inhomo { common } => execute(&load(&common, "inhomo")?),
        Command::Perturbed { common } => execute(&load(&common, "perturbed")?),
        Command::ResolventSweep { common } => execute(&load(&common, "resolvent-sweep")?),
        Command::Classify {
            n,
            q,
            r,
            q_tilde,
            r_tilde,
        } => classify(n, q, r, q_tilde.zip(r_tilde)),
        Command::Snapshot {
            input,
            convert,
            output_dir,
        } => snapshot(&input, convert, &output_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = move || dispatch(cli.command);
    let result = match cli.jobs {
        Some(j) => par::with_threads(j, run),
        None => run(),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
