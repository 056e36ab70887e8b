mod cli;
mod commands;
mod config;
mod exit;
mod manifest;

use std::process::ExitCode;

use clap::Parser;
use eebench::TaskKind;

use crate::cli::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate => commands::corpus::validate(&cli.opts),
        Command::Stats => commands::corpus::stats(&cli.opts),
        Command::Window => commands::corpus::window(&cli.opts),
        Command::Split => commands::split::run(&cli.opts),
        Command::Score => commands::score::run(&cli.opts),
        Command::LlmEd => commands::llm::run(&cli.opts, TaskKind::ED),
        Command::LlmEae => commands::llm::run(&cli.opts, TaskKind::EAE),
        Command::Report { reports } => commands::report::run(&cli.opts, reports),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
