//! Batch command-line front end for the double-well simulators.
//!
//! Runs are configured by a JSON file; flags override file values. Results
//! land as CSV/JSON files in the output directory. Exit codes: 0 success,
//! 2 config/schema error, 3 solver error, 4 I/O error; failures print a
//! machine-readable error JSON to stderr and write no output files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doublewell_cli::commands::{self, Artifact};
use doublewell_cli::config::{CommandKind, Overrides, RunConfig};
use doublewell_cli::CliError;

#[derive(Parser)]
#[command(
    name = "doublewell",
    about = "One and two ultracold particles in a 1D double well: spectra, tunneling, two-body levels, and adiabatic SWAP/√SWAP gate runs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides config.output_dir; default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seed for solver start vectors (overrides config.seed).
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Single-particle spectrum and eigenstate CSVs.
    Spectrum(Common),
    /// Tunneling dynamics of a left-localized state.
    Tunnel(Common),
    /// Interaction integrals, perturbation theory, exact two-body levels.
    Twobody(Common),
    /// Energies of the four gate levels across a barrier sweep.
    Leveldiagram(Common),
    /// Calibrate and simulate the adiabatic barrier-ramp gate.
    Gate(Common),
    /// Parameter sweep emitting one CSV row per axis point.
    Sweep(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c)
            | Command::Tunnel(c)
            | Command::Twobody(c)
            | Command::Leveldiagram(c)
            | Command::Gate(c)
            | Command::Sweep(c) => c,
        }
    }

    fn kind(&self) -> CommandKind {
        match self {
            Command::Spectrum(_) => CommandKind::Spectrum,
            Command::Tunnel(_) => CommandKind::Tunnel,
            Command::Twobody(_) => CommandKind::Twobody,
            Command::Leveldiagram(_) => CommandKind::Leveldiagram,
            Command::Gate(_) => CommandKind::Gate,
            Command::Sweep(_) => CommandKind::Sweep,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(paths) => {
            for p in &paths {
                println!("wrote {p}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let payload =
                serde_json::json!({"error": {"kind": e.kind(), "message": e.message()}});
            eprintln!("{payload}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: &Command) -> Result<Vec<String>, CliError> {
    let common = command.common();
    let text = std::fs::read_to_string(&common.config)?;
    let mut cfg = RunConfig::from_json(&text)?;
    common.overrides.apply(&mut cfg)?;
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(declared) = cfg.command {
        if declared != command.kind() {
            return Err(CliError::Config(format!(
                "config declares command {declared:?} but {:?} was invoked",
                command.kind()
            )));
        }
    }
    cfg.validate_common()?;

    let artifacts = match command {
        Command::Spectrum(_) => commands::spectrum(&cfg)?,
        Command::Tunnel(_) => commands::tunnel(&cfg)?,
        Command::Twobody(_) => commands::twobody(&cfg)?,
        Command::Leveldiagram(_) => commands::leveldiagram(&cfg)?,
        Command::Gate(_) => commands::gate(&cfg)?,
        Command::Sweep(_) => commands::sweep(&cfg, common.workers)?,
    };

    let out_dir = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)?;
    let mut written = Vec::with_capacity(artifacts.len());
    for Artifact { name, bytes } in artifacts {
        let path = out_dir.join(&name);
        std::fs::write(&path, &bytes)?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
