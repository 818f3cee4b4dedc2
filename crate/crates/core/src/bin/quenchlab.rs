use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quenchlab::experiment::{self, ExperimentConfig, RunOptions};
use quenchlab::Error;

#[derive(Parser)]
#[command(
    name = "quenchlab",
    version,
    about = "Quantum quench numerical laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate and run an experiment configuration.
    Run {
        config: PathBuf,
        /// Overrides `output_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = automatic).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// Check a configuration and print its normalized form.
    Validate {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print version and size limits.
    Info,
}

struct StderrLogger;

impl log::Log for StderrLogger {
    fn enabled(&self, m: &log::Metadata) -> bool {
        m.level() <= log::Level::Warn
    }
    fn log(&self, r: &log::Record) {
        if self.enabled(r.metadata()) {
            eprintln!("{}: {}", r.level().as_str().to_lowercase(), r.args());
        }
    }
    fn flush(&self) {}
}

fn load(
    path: &PathBuf,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ValidationFailed(vec![format!("{}: {e}", path.display())]))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(d) = out_dir {
        cfg.output_dir = d.to_string_lossy().into_owned();
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    experiment::validate(&cfg)
}

fn report(e: &Error) -> ExitCode {
    match e {
        Error::ValidationFailed(list) => {
            eprintln!("invalid configuration:");
            for item in list {
                eprintln!("  {item}");
            }
            ExitCode::from(1)
        }
        other => {
            eprintln!("error: {other}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let _ = log::set_logger(&StderrLogger).map(|()| log::set_max_level(log::LevelFilter::Warn));
    match Cli::parse().command {
        Command::Info => {
            print!("{}", experiment::info());
            ExitCode::SUCCESS
        }
        Command::Validate {
            config,
            out_dir,
            seed,
        } => match load(&config, out_dir, seed) {
            Ok(cfg) => {
                print!("{}", cfg.to_canonical_toml());
                ExitCode::SUCCESS
            }
            Err(e) => report(&e),
        },
        Command::Run {
            config,
            out_dir,
            seed,
            threads,
        } => {
            let cfg = match load(&config, out_dir, seed) {
                Ok(c) => c,
                Err(e) => return report(&e),
            };
            match experiment::run(&cfg, &RunOptions { threads }) {
                Ok(m) => {
                    eprintln!("wrote {} files to {}", m.files.len() + 1, cfg.output_dir);
                    ExitCode::SUCCESS
                }
                Err(e) => report(&e),
            }
        }
    }
}
