//! Command-line interface for the hybrid-optomechanics simulator.
//!
//! Exit codes: 0 on success, 1 on a fatal configuration or solver error,
//! 2 when a sweep completed but individual cells failed (encoded in the
//! status column).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hybridoptomech_cli::commands::{self, CommandCtx, Completion};
use hybridoptomech_cli::config::{Format, GridSpec, RunConfig};

/// Workers fallback when `--workers` is not given.
const WORKERS_ENV: &str = "HYBRIDOPTOMECH_WORKERS";

#[derive(Parser)]
#[command(
    name = "hybridoptomech",
    version,
    about = "Hybrid optomechanics simulator: noise spectra, cooling rates, stability maps, and final phonon occupations for a doped-membrane cavity system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Named preset: fig3, fig4a, fig4b, fig4c, fig4d, fig5a, fig5b.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Path to a JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv, json, or plotdata.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for sweeps (default: HYBRIDOPTOMECH_WORKERS, else all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Grid override `name=min:max:points[:log]`; repeatable, same-name
    /// entries concatenate.
    #[arg(long = "grid", value_name = "SPEC")]
    grids: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Force noise spectra S_kappa, S_gamma, S_F over a frequency window.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        omega_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        omega_max: Option<f64>,
        #[arg(long)]
        omega_points: Option<usize>,
    },
    /// Final occupation, stability, and cooling rate at one parameter point.
    Occupation {
        #[command(flatten)]
        common: Common,
        /// Steady-state branch to linearize around (physical mode).
        #[arg(long)]
        branch: Option<usize>,
    },
    /// Final-occupation map over (delta_c, delta_a).
    Map2d {
        #[command(flatten)]
        common: Common,
    },
    /// Compare cooling strategies along the polariton sideband branch.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Strategy name or `all`; repeatable.
        #[arg(long = "strategy")]
        strategies: Vec<String>,
    },
    /// Final-occupation map over (lambda, g) with a resonant drive.
    ResonantMap {
        #[command(flatten)]
        common: Common,
    },
    /// Classical steady-state branches of the driven nonlinear system.
    SteadyState {
        #[command(flatten)]
        common: Common,
    },
}

fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(text) => text
            .parse::<usize>()
            .with_context(|| format!("{WORKERS_ENV}={text} is not a worker count")),
        Err(_) => Ok(0),
    }
}

fn build_ctx(common: &Common, strategies: &[String]) -> Result<CommandCtx> {
    let mut config = match (&common.preset, &common.config) {
        (Some(name), None) => RunConfig::load_preset(name)?,
        (None, Some(path)) => RunConfig::load_file(path)?,
        (None, None) => bail!("pass --preset <name> or --config <path>"),
        (Some(_), Some(_)) => unreachable!("clap enforces exclusivity"),
    };

    if !common.grids.is_empty() {
        let overrides: Vec<GridSpec> = common
            .grids
            .iter()
            .map(|flag| GridSpec::parse_flag(flag))
            .collect::<Result<_, _>>()?;
        let replaced: Vec<String> = overrides.iter().map(|g| g.name.clone()).collect();
        config.grids.retain(|g| !replaced.contains(&g.name));
        config.grids.extend(overrides);
    }
    if !strategies.is_empty() {
        config.strategies = strategies.to_vec();
    }

    let format = match &common.format {
        Some(name) => Format::from_name(name)
            .with_context(|| format!("unknown format `{name}` (csv, json, plotdata)"))?,
        None => config.output.as_ref().map(|o| o.format).unwrap_or_default(),
    };
    let out = common.out.clone().or_else(|| {
        config
            .output
            .as_ref()
            .and_then(|o| o.path.as_ref().map(PathBuf::from))
    });
    let workers = resolve_workers(common.workers)?;
    Ok(CommandCtx {
        config,
        format,
        out,
        workers,
    })
}

fn run(cli: Cli) -> Result<Completion> {
    match &cli.command {
        Command::Spectrum {
            common,
            omega_min,
            omega_max,
            omega_points,
        } => {
            let ctx = build_ctx(common, &[])?;
            commands::cmd_spectrum(&ctx, *omega_min, *omega_max, *omega_points)
        }
        Command::Occupation { common, branch } => {
            let ctx = build_ctx(common, &[])?;
            commands::cmd_occupation(&ctx, *branch)
        }
        Command::Map2d { common } => {
            let ctx = build_ctx(common, &[])?;
            commands::cmd_map2d(&ctx)
        }
        Command::Compare { common, strategies } => {
            let ctx = build_ctx(common, strategies)?;
            commands::cmd_compare(&ctx)
        }
        Command::ResonantMap { common } => {
            let ctx = build_ctx(common, &[])?;
            commands::cmd_resonant_map(&ctx)
        }
        Command::SteadyState { common } => {
            let ctx = build_ctx(common, &[])?;
            commands::cmd_steady_state(&ctx)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Completion::Clean) => ExitCode::SUCCESS,
        Ok(Completion::CellFailures) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
