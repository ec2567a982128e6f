use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use didkit::config::RunConfig;
use didkit::pipeline::{run, Command};
use didkit::Error;

#[derive(Parser)]
#[command(name = "didkit", version, about = "Staggered difference-in-differences on tweet-level panels")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Validate the raw panel and write the canonical panel file.
    Ingest,
    /// Tag topics from dictionaries and merge emotion labels.
    Classify,
    /// DiD regressions, ATT(g,t), spillover and group shares.
    Estimate,
    /// Leads and lags around the first onset with a joint pre-trend test.
    EventStudy,
    /// Bounds on post-period effects under limited pre-trend violations.
    Sensitivity,
    /// DiD on mortality-matched placebo groups.
    Placebo,
    /// Monte Carlo on a synthetic panel with known effects.
    Simulate,
    /// Covariate balance between treated and control municipalities.
    Balance,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Classify => Command::Classify,
            Cmd::Estimate => Command::Estimate,
            Cmd::EventStudy => Command::EventStudy,
            Cmd::Sensitivity => Command::Sensitivity,
            Cmd::Placebo => Command::Placebo,
            Cmd::Simulate => Command::Simulate,
            Cmd::Balance => Command::Balance,
        }
    }
}

fn execute(cli: &Cli) -> didkit::Result<Vec<PathBuf>> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(t) = cli.threads {
        cfg.threads = Some(t);
    }
    if let Some(t) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    run(cli.command.into(), &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::MissingInput { .. }) { 2 } else { 1 })
        }
    }
}
