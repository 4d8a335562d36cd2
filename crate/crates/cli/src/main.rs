//! Command-line front end for the contour-gas simulator and the Poisson
//! approximation bounds.
//!
//! Exit status: 0 success, 1 verdict FAIL, 2 parameter error, 3 clan budget
//! or capacity exceeded.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser, Debug)]
/// Perfect simulation of Ising contours and Poisson approximation bounds.
#[command(name = "clansim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// List the contours through the anchor link, or those meeting --window.
    Enumerate,
    /// Certified bounds on alpha0 at beta (and beta').
    Alpha0,
    /// Certified bracket of beta*.
    BetaStar,
    /// Every analytic constant and the total-variation bound.
    Bounds,
    /// Perfect samples of the contours in the window at time 0.
    Sample,
    /// Mean number of large contours in the window, or the window size for --lambda.
    Estimate,
    /// Empirical total-count TV against Poisson, compared with the bound.
    TvCheck,
    /// Empirical checks of the lemmas behind the bound.
    Validate,
    /// Bounds (and optionally the TV experiment) over a parameter grid.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::Alpha0 => "alpha0",
            Command::BetaStar => "beta-star",
            Command::Bounds => "bounds",
            Command::Sample => "sample",
            Command::Estimate => "estimate",
            Command::TvCheck => "tv-check",
            Command::Validate => "validate",
            Command::Sweep => "sweep",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = cli.config;
    let merged = match &flags.config {
        Some(path) => match RunConfig::load(path) {
            Ok(file) => file.overridden_by(flags),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => flags,
    };
    match commands::run(cli.command, &merged) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
