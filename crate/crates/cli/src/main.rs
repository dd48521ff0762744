use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epks::error::Error;
use epks::experiments::{run_experiment, ExperimentKind, ExperimentSpec, ProfileSource, Solver};
use epks::grid::Grid;

const EXIT_VALIDATION: u8 = 2;
const EXIT_BREAKDOWN: u8 = 3;
const EXIT_VERDICT: u8 = 4;

#[derive(Parser)]
#[command(name = "epks", version, about = "Euler-Poisson large-friction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Euler-Poisson perturbation solver and write its diagnostics.
    SimulateEp(Common),
    /// Run the Keller-Segel solver and write its diagnostics.
    SimulateKs(Common),
    /// Tabulate exact trajectories of the limit system.
    Characteristics(Common),
    /// Tabulate dispersion roots over the epsilon and wavenumber lists.
    Spectrum(Common),
    /// Compare Euler-Poisson runs against the Keller-Segel limit over the epsilon list.
    Sweep(Common),
    /// Track the collapse of a vacuum interval.
    Vacuum(Common),
    /// Fit exponential decay rates.
    Decay(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment file of `key = value` lines.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for the CSV files.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Named profile such as `cosine(0.3,1)`, or a CSV file.
    #[arg(long, value_name = "NAME")]
    profile: Option<String>,
    /// Comma-separated, strictly decreasing epsilon values.
    #[arg(long, value_name = "LIST")]
    eps: Option<String>,
    /// Number of grid points.
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
    /// Final time.
    #[arg(long = "t-end", value_name = "T")]
    t_end: Option<f64>,
}

impl Command {
    fn split(self) -> (ExperimentKind, Common) {
        match self {
            Command::SimulateEp(c) => (ExperimentKind::SingleRun(Solver::EulerPoisson), c),
            Command::SimulateKs(c) => (ExperimentKind::SingleRun(Solver::KellerSegel), c),
            Command::Characteristics(c) => (ExperimentKind::SingleRun(Solver::Characteristics), c),
            Command::Spectrum(c) => (ExperimentKind::SpectrumTable, c),
            Command::Sweep(c) => (ExperimentKind::EpsilonSweep, c),
            Command::Vacuum(c) => (ExperimentKind::VacuumCollapse, c),
            Command::Decay(c) => (ExperimentKind::DecayFit, c),
        }
    }
}

fn build_spec(kind: ExperimentKind, args: Common) -> Result<ExperimentSpec, Error> {
    let mut spec = match &args.config {
        Some(path) => ExperimentSpec::from_config_file(path, Some(kind))?,
        None => ExperimentSpec::new(kind),
    };
    if let Some(dir) = args.out {
        spec.output_dir = dir;
    }
    if let Some(p) = &args.profile {
        spec.profile = ProfileSource::parse(p)?;
    }
    if let Some(list) = &args.eps {
        spec.epsilon_list = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("--eps: cannot parse `{s}`")))
            })
            .collect::<Result<_, _>>()?;
    }
    if let Some(n) = args.grid {
        spec.params.grid = match spec.params.grid {
            Grid::Torus { length, .. } => Grid::torus(length, n)?,
            Grid::Line { left, right, .. } => Grid::line(left, right, n)?,
        };
    }
    if let Some(t) = args.t_end {
        spec.params.t_end = t;
    }
    spec.validate()?;
    Ok(spec)
}

fn failure_code(e: &Error) -> u8 {
    if e.is_breakdown() {
        EXIT_BREAKDOWN
    } else {
        EXIT_VALIDATION
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    let spec = match build_spec(kind, args) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    let outcome = match run_experiment(&spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(failure_code(&e));
        }
    };
    match outcome.write(&spec.output_dir) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    println!("{}", outcome.summary);
    if let Some(e) = &outcome.failure {
        eprintln!("breakdown: {e}");
        return ExitCode::from(EXIT_BREAKDOWN);
    }
    if !outcome.verdict {
        eprintln!("verdict: FAIL");
        return ExitCode::from(EXIT_VERDICT);
    }
    println!("verdict: PASS");
    ExitCode::SUCCESS
}
