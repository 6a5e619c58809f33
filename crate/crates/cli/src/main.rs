//! `racsim`: validate, plan, and simulate hierarchical data-grid scenarios.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use racsim_cli::commands::{
    cmd_plan, cmd_report, cmd_simulate, cmd_validate, resolve_out_dir, CommandError, PlanFlags,
    SimulateFlags, EXIT_PARSE,
};
use racsim_core::TierName;

#[derive(Parser)]
#[command(
    name = "racsim",
    about = "Policy, capacity planning, and deterministic simulation for hierarchical data grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file; exit 0 iff it is structurally valid.
    Validate {
        /// Scenario file (TOML).
        path: PathBuf,
    },
    /// Compute storage totals, CPU accounting, and capacity fit.
    Plan {
        path: PathBuf,
        /// Project CAC-tape growth this many years.
        #[arg(long, default_value_t = 0)]
        years: u64,
        /// Annual CAC-tape growth in bytes (default 1 PB).
        #[arg(long)]
        growth_rate: Option<u64>,
        /// Override a tier's event count, e.g. --events-override DST=1000000.
        #[arg(long = "events-override", value_name = "TIER=EVENTS")]
        events_override: Vec<String>,
        /// Exit 1 when the fit check finds violations.
        #[arg(long)]
        strict: bool,
        /// Output directory (else $RACSIM_OUT_DIR, else ./racsim-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the discrete-event simulation and write the metrics bundle.
    Simulate {
        path: PathBuf,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Check storage invariants after every event (slow).
        #[arg(long)]
        audit: bool,
        /// Output directory (else $RACSIM_OUT_DIR, else ./racsim-out).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the summary of an existing report bundle.
    Report {
        /// Bundle directory written by plan or simulate.
        dir: PathBuf,
    },
}

fn parse_events_override(raw: &[String]) -> Result<Vec<(TierName, u64)>, String> {
    let mut out = Vec::new();
    for item in raw {
        let (tier, events) = item
            .split_once('=')
            .ok_or_else(|| format!("`{item}`: expected TIER=EVENTS"))?;
        let tier = TierName::parse(tier.trim())
            .ok_or_else(|| format!("`{item}`: unknown tier `{tier}`"))?;
        let events: u64 = events
            .trim()
            .parse()
            .map_err(|_| format!("`{item}`: bad event count"))?;
        out.push((tier, events));
    }
    Ok(out)
}

fn fail(err: CommandError) -> ExitCode {
    eprintln!("{}", err.render());
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { path } => match cmd_validate(&path) {
            Ok(msg) => {
                print!("{msg}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::Plan {
            path,
            years,
            growth_rate,
            events_override,
            strict,
            out,
        } => {
            let events_override = match parse_events_override(&events_override) {
                Ok(v) => v,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(EXIT_PARSE as u8);
                }
            };
            let flags = PlanFlags {
                years,
                growth_rate,
                events_override,
                strict,
            };
            match cmd_plan(&path, &flags) {
                Ok(bundle) => {
                    let dir = resolve_out_dir(out);
                    if let Err(e) = bundle.write_to(&dir) {
                        eprintln!("{}: {e}", dir.display());
                        return ExitCode::from(EXIT_PARSE as u8);
                    }
                    print!("{}", bundle.summary());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Simulate {
            path,
            seed,
            audit,
            out,
        } => {
            let flags = SimulateFlags { seed, audit };
            match cmd_simulate(&path, &flags) {
                Ok(bundle) => {
                    let dir = resolve_out_dir(out);
                    if let Err(e) = bundle.write_to(&dir) {
                        eprintln!("{}: {e}", dir.display());
                        return ExitCode::from(EXIT_PARSE as u8);
                    }
                    print!("{}", bundle.summary());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Report { dir } => match cmd_report(&dir) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
