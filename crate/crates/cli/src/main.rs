//! `faraday`: entanglement sweeps, built-in scenarios and cavity reports.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use faraday_core::config::ScenarioConfig;
use faraday_core::error::{Error, Result};
use faraday_core::parallel::Execution;
use faraday_core::runner::{run_cavity_report, run_scenario};

#[derive(Parser)]
#[command(
    name = "faraday",
    version,
    about = "Schmidt decomposition of Faraday-rotation photon-atom states"
)]
struct Cli {
    /// Field window half-width in units of sigma_F (at least 3).
    #[arg(long, global = true, value_name = "R")]
    window_mult: Option<f64>,

    /// Number of tau grid points, overriding the config.
    #[arg(long, global = true, value_name = "K")]
    tau_steps: Option<usize>,

    /// Run tau points one at a time.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy and Schmidt-number sweep from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` from the config, then `.`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a built-in scenario (fig2a, fig2b, fig2c, fig3a, fig3b).
    Scenario {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Output Schmidt number against cavity decay rate.
    Cavity {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    ScenarioConfig::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn apply_overrides(cli: &Cli, cfg: &mut ScenarioConfig) -> Result<()> {
    if let Some(r) = cli.window_mult {
        cfg.window_mult = r;
    }
    if let Some(k) = cli.tau_steps {
        cfg.tau.count = k;
    }
    cfg.validate()
}

fn out_dir(flag: Option<PathBuf>, cfg: &ScenarioConfig) -> PathBuf {
    flag.or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Sweep { config, out } => {
            let mut cfg = load(config)?;
            apply_overrides(&cli, &mut cfg)?;
            run_scenario(&cfg, &out_dir(out.clone(), &cfg), exec)
        }
        Command::Scenario { name, out } => {
            let mut cfg = ScenarioConfig::builtin(name)?;
            apply_overrides(&cli, &mut cfg)?;
            run_scenario(&cfg, out, exec)
        }
        Command::Cavity { config, out } => {
            let mut cfg = load(config)?;
            apply_overrides(&cli, &mut cfg)?;
            run_cavity_report(&cfg, &out_dir(out.clone(), &cfg), exec)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}
