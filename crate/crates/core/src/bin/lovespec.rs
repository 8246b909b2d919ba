use clap::{Parser, Subcommand};
use lovespec::pipeline::{self, JobConfig, Mode};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lovespec", version, about = "Forward and inverse spectral problems for Love waves")]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(clap::Args)]
struct Job {
    /// JSON job configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out` next to the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Potentials and spectral data from a profile or potential.
    Forward(Job),
    /// Spectral data with the Weyl-class and invariant reports.
    Spectrum(Job),
    /// Potentials (and shear modulus) from stored spectral data.
    Reconstruct(Job),
    /// Forward, inverse and error report.
    Roundtrip(Job),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (mode, job) = match cli.mode {
        Command::Forward(j) => (Mode::Forward, j),
        Command::Spectrum(j) => (Mode::Spectrum, j),
        Command::Reconstruct(j) => (Mode::Reconstruct, j),
        Command::Roundtrip(j) => (Mode::Roundtrip, j),
    };
    if let Ok(v) = std::env::var("LOVESPEC_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: LOVESPEC_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(1);
            }
        }
    }
    let out = job.out.unwrap_or_else(|| {
        job.config.parent().unwrap_or(std::path::Path::new(".")).join("out")
    });
    let result = JobConfig::load(&job.config).and_then(|cfg| pipeline::run(mode, &cfg, &out));
    match result {
        Ok(outcome) => {
            for p in &outcome.written {
                log::info!("wrote {}", p.display());
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                for f in &outcome.failures {
                    eprintln!("tolerance: {f}");
                }
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
