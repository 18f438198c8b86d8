use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use pesinlab::config::Format;
use pesinlab::{run_command, Command, LabConfig, LabError, RunOptions};

#[derive(Parser)]
#[command(name = "pesinlab", version, about = "Experiments on C1 expanding maps with positive-measure Cantor sets")]
struct Cli {
    #[command(subcommand)]
    cmd: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Check C0/C1 gluing, expansion, degree and the gap/atom conjugacy.
    Validate(Args),
    /// Atom lengths, masses and gap schedule of every Cantor carrier.
    CantorReport(Args),
    /// Entropy, Lyapunov exponent and Pesin defect for each measure.
    PesinCheck(Args),
    /// Fraction of Lebesgue-random points whose empirical measures come close to each candidate.
    BasinScan(Args),
    /// Decay of the fraction of points whose empirical measures stay near a target.
    DecayRate(Args),
    /// Distortion of iterates over atoms, next to the affine reference.
    Distortion(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn resolve_seed(cli: Option<u64>, cfg: &LabConfig) -> Result<u64, LabError> {
    if let Some(s) = cli {
        return Ok(s);
    }
    match std::env::var("PESINLAB_SEED") {
        Ok(v) => v.trim().parse().map_err(|_| LabError::Config(format!("PESINLAB_SEED={v:?} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(cfg.rng.seed),
    }
}

fn run(cmd: Command, args: Args) -> Result<u8, LabError> {
    let cfg = LabConfig::load(&args.config)?;
    let seed = resolve_seed(args.seed, &cfg)?;
    let workers = args
        .workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if workers == 0 {
        return Err(LabError::Config("--workers must be positive".into()));
    }
    let dir = args.out.unwrap_or_else(|| cfg.output.dir.clone());
    let format = args.format.unwrap_or(cfg.output.format);

    let start = Instant::now();
    let report = run_command(cmd, &cfg, &RunOptions { seed, workers })?;
    let written = report.write(&dir, format)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for p in &written {
        eprintln!("wrote {}", p.display());
    }
    // wall time stays off the report files so they are reproducible
    eprintln!("{} finished in {:.3} s with {workers} worker(s)", cmd.name(), start.elapsed().as_secs_f64());
    match &report.infeasible {
        Some(msg) => {
            eprintln!("error: experiment infeasible: {msg}");
            Ok(3)
        }
        None => Ok(0),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.cmd {
        Sub::Validate(a) => (Command::Validate, a),
        Sub::CantorReport(a) => (Command::CantorReport, a),
        Sub::PesinCheck(a) => (Command::PesinCheck, a),
        Sub::BasinScan(a) => (Command::BasinScan, a),
        Sub::DecayRate(a) => (Command::DecayRate, a),
        Sub::Distortion(a) => (Command::Distortion, a),
    };
    match run(cmd, args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
