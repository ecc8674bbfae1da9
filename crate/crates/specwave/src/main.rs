use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use specwave::{emit_outputs, run_study, Error, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "specwave", version, about = "Hybrid-spectral free-surface Navier-Stokes wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One-step spectral convergence of stream-function waves.
    Converge(RunArgs),
    /// Linear dispersion error with two horizontal points.
    Dispersion(RunArgs),
    /// Oscillatory bed boundary layer against the Stokes solution.
    #[command(name = "boundary-layer")]
    BoundaryLayer(RunArgs),
    /// Harmonic generation over a submerged bar.
    Bar(RunArgs),
    /// Pressure solver iterations and timings.
    #[command(name = "poisson-bench")]
    PoissonBench(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for parameter sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// `section.key=value`, applied after the file is read.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(kind: ExperimentKind, args: RunArgs) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&args.config, &args.overrides)?;
    if cfg.kind() != kind {
        return Err(Error::KindMismatch {
            declared: cfg.kind().to_string(),
            requested: kind.to_string(),
        });
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Schema {
                path: "--threads".into(),
                message: e.to_string(),
            })?;
    }
    let dir = args.out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    let started = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let result = run_study(&cfg, &|msg| eprintln!("{msg}"))?;
    for path in emit_outputs(&cfg, &result, &dir, started)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Converge(a) => (ExperimentKind::Converge, a),
        Command::Dispersion(a) => (ExperimentKind::Dispersion, a),
        Command::BoundaryLayer(a) => (ExperimentKind::BoundaryLayer, a),
        Command::Bar(a) => (ExperimentKind::Bar, a),
        Command::PoissonBench(a) => (ExperimentKind::PoissonBench, a),
    };
    match run(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
