mod args;
mod config;
mod fit;
mod pipeline;
mod query;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{CmdResult, RunConfig};

fn run(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    let cfg = RunConfig::from_args(g)?;
    match &cli.command {
        Command::Decluster => pipeline::cmd_decluster(g, &cfg),
        Command::Fit => fit::cmd_fit(g, &cfg),
        Command::Tailprob(a) => query::cmd_tailprob(g, &cfg, a),
        Command::LevelCurves(a) => query::cmd_level_curves(g, &cfg, a),
        Command::DiagnoseK(a) => query::cmd_diagnose_k(g, &cfg, a),
        Command::Simulate(a) => pipeline::cmd_simulate(g, &cfg, a),
        Command::Gof => fit::cmd_gof(g, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
