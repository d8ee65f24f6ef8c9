#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod error;
mod output;

use std::io::Write;

use clap::Parser;

use args::{Cli, Command};
use error::CliError;

/// Cap the worker pool from `TIPFOLD_THREADS`; unset or invalid keeps the default.
fn configure_threads() {
    if let Some(n) = std::env::var("TIPFOLD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists, which cannot happen this early
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn dispatch(cli: &Cli) -> Result<commands::Summary, CliError> {
    match &cli.command {
        Command::Simulate {
            config,
            tmax,
            samples,
            out,
        } => commands::simulate_cmd(config, *tmax, *samples, out),
        Command::Fold { config, table, out } => commands::fold_cmd(config, *table, out),
        Command::Sweep {
            config,
            axis,
            grid,
            out,
        } => commands::sweep_cmd(config, *axis, grid, out),
        Command::Surface {
            config,
            eps_grid,
            omega_grid,
            out,
        } => commands::surface_cmd(config, eps_grid, omega_grid, out),
        Command::Phase { config, out } => commands::phase_cmd(config, out),
        Command::Estimate { config, out } => commands::estimate_cmd(config, out),
        Command::Orbit { config, mus, out } => commands::orbit_cmd(config, mus, out),
    }
}

fn main() {
    let cli = Cli::parse();
    configure_threads();
    match dispatch(&cli) {
        Ok(summary) => {
            let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
            // a closed pipe (e.g. `| head`) is not an error for a report on stdout
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
        Err(e) => {
            eprintln!("tipfold: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
