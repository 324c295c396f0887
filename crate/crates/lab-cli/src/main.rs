use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ricci_lab_cli::commands::{self, RunOpts};
use ricci_lab_cli::config::ScenarioConfig;
use ricci_lab_cli::{plots, verify, CliError};

/// Reduced distance, reduced volume and breather splices on model Ricci flows.
#[derive(Parser)]
#[command(name = "ricci-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `output.dir` next to the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Blow-down stages, overriding `blowdown.stages`.
    #[arg(long, value_delimiter = ',')]
    stages: Option<Vec<usize>>,
    /// Skip SVG rendering.
    #[arg(long)]
    no_plots: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the initial model's curvature.
    Model(Common),
    /// Integrate or tabulate the backward history.
    Evolve(Common),
    /// Junction gaps and test-curve bounds of the spliced flow.
    Splice(Common),
    /// Reduced-distance field and identity residuals on the configured window.
    Lgeo(Common),
    /// Reduced volume of the spliced flow and of the density stages.
    Rvol(Common),
    /// Blow-down stages with diagnostics and residual fields.
    Blowdown(Common),
    /// Run every certificate and write verdict.json.
    Verify(Common),
    /// Render SVG figures from the CSV files in a run directory.
    Plot {
        #[arg(long)]
        dir: PathBuf,
    },
}

type Action = fn(&ScenarioConfig, &RunOpts) -> Result<bool, CliError>;

fn run(cli: Cli) -> Result<bool, CliError> {
    let (c, action): (Common, Action) = match cli.command {
        Command::Plot { dir } => {
            for p in plots::render(&dir)? {
                println!("{}", p.display());
            }
            return Ok(true);
        }
        Command::Model(c) => (c, |cfg, o| commands::model(cfg, o).map(|_| true)),
        Command::Evolve(c) => (c, |cfg, o| commands::evolve(cfg, o).map(|_| true)),
        Command::Splice(c) => (c, |cfg, o| commands::splice(cfg, o).map(|_| true)),
        Command::Lgeo(c) => (c, |cfg, o| commands::lgeo(cfg, o).map(|_| true)),
        Command::Rvol(c) => (c, |cfg, o| commands::rvol(cfg, o).map(|_| true)),
        Command::Blowdown(c) => (c, |cfg, o| commands::blowdown_cmd(cfg, o).map(|_| true)),
        Command::Verify(c) => (c, verify::verify),
    };
    let cfg = ScenarioConfig::load(&c.config)?;
    let opts = RunOpts::from_config(&cfg, c.out, c.stages, c.no_plots);
    commands::prepare(&cfg, &opts)?;
    let ok = action(&cfg, &opts)?;
    if opts.plots {
        match plots::render(&opts.out) {
            Ok(_) | Err(CliError::Config(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more certificates failed; see verdict.json");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
