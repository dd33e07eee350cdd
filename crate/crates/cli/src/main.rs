//! `kpplab`: config-driven runs of the nonlocal Fisher-KPP laboratory.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Ctx, Failure};
use config::RunConfig;
use output::RunDir;

#[derive(Debug, Parser)]
#[command(name = "kpplab", version, about = "Nonlocal Fisher-KPP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML, or JSON with a .json extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run directory; defaults to the config's `output` or runs/<command>-<hash>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "KPPLAB_THREADS")]
    threads: Option<usize>,

    /// Suppress progress output on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Evolve the reduced equation and record fronts.
    Simulate,
    /// Tabulate the speed curve and locate the minimal speed.
    Speed,
    /// Compute a traveling-wave profile.
    Profile,
    /// Minimal speed over directions of the plane.
    Sweep,
    /// Run the property suite and write a verdict table.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Speed => "speed",
            Command::Profile => "profile",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let path = cli.config.ok_or_else(|| Failure::Config("--config PATH is required".into()))?;
    let mut cfg = RunConfig::load(&path).map_err(Failure::Config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot configure threads: {e}")))?;
    }
    let configured_out = cfg.output.take();
    let hash = cfg.hash();
    let name = cli.command.name();
    let dir = cli
        .out
        .or(configured_out.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs").join(format!("{name}-{}", &hash[..12])));
    let out = RunDir::create(&dir, &hash).map_err(Failure::Config)?;
    let ctx = Ctx { cfg: &cfg, quiet: cli.quiet };
    if !cli.quiet {
        eprintln!("{name}: config {} -> {}", &hash[..12], out.path().display());
    }
    match cli.command {
        Command::Simulate => commands::simulate(&ctx, out),
        Command::Speed => commands::speed(&ctx, out),
        Command::Profile => commands::profile(&ctx, out),
        Command::Sweep => commands::sweep(&ctx, out),
        Command::Verify => commands::verify(&ctx, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
