use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pseudohyp_cli::{
    cmd_attractor, cmd_check, cmd_distance, cmd_examples_all, cmd_transport, CliError, Exit, Outcome, RunConfig,
};
use pseudohyp_core::catalog::ExampleName;

#[derive(Parser)]
#[command(name = "pseudohyp", version, about = "Hyperbolicity checks on pseudo-Riemannian manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one example or a user system for a hyperbolic splitting.
    Check(Common),
    /// Run all four built-in examples and compare with the expected verdicts.
    Examples(Common),
    /// Parallel-transport vectors along a curve.
    Transport(Common),
    /// Subspace distance between two splittings, or the continuity sweep.
    Distance(Common),
    /// ω-limit clouds and their distance to the global attractor.
    Attractor(Common),
}

#[derive(Args)]
struct Common {
    /// Example name (ex3_1, ex3_2, ex3_3, ex4_1).
    #[arg(value_name = "EXAMPLE")]
    positional: Option<String>,
    #[arg(long)]
    example: Option<String>,
    /// TOML run configuration (must set schema_version = 1).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json and the CSV tables.
    #[arg(long, default_value = "pseudohyp-out")]
    out: PathBuf,
    /// Checker horizon; for `attractor`, the number of transient steps.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    distribution: Option<String>,
}

fn build_config(command: &Command, c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let name = match (&c.positional, &c.example) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Config(format!("example given twice: {a} and {b}")));
        }
        (Some(a), _) | (None, Some(a)) => Some(a.parse::<ExampleName>()?),
        (None, None) => None,
    };
    if name.is_some() {
        cfg.example = name;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(d) = &c.distribution {
        cfg.distribution = Some(d.clone());
    }
    if let Some(n) = c.n {
        match command {
            Command::Attractor(_) => cfg.attractor.get_or_insert_with(Default::default).n_transient = n,
            _ => cfg.checker.horizon = n,
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Check(c)
        | Command::Examples(c)
        | Command::Transport(c)
        | Command::Distance(c)
        | Command::Attractor(c) => c,
    };
    let outcome = match build_config(&cli.command, common) {
        Err(e) => Outcome { exit: e.exit(), message: format!("error: {e}") },
        Ok(cfg) => {
            let out = &common.out;
            match cli.command {
                Command::Check(_) => cmd_check(&cfg, out),
                Command::Examples(_) => cmd_examples_all(&cfg, out),
                Command::Transport(_) => cmd_transport(&cfg, out),
                Command::Distance(_) => cmd_distance(&cfg, out),
                Command::Attractor(_) => cmd_attractor(&cfg, out),
            }
        }
    };
    if matches!(outcome.exit, Exit::Success | Exit::Mismatch) {
        println!("{}", outcome.message);
    } else {
        eprintln!("{}", outcome.message);
    }
    ExitCode::from(outcome.exit.code() as u8)
}
