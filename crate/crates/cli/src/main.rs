//! `spincorr`: experiment runner for the spincorr library.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure,
//! 64 unknown command, 74 output error.

mod commands;
mod config;
mod error;
mod figures;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::*;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "spincorr", version, about = "Spin dynamics, decoherence and quantum-correlation experiments")]
struct Cli {
    /// JSON config document; command-line flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    Bloch(BlochArgs),
    Work(WorkArgs),
    State(StateArgs),
    Channel(ChannelArgs),
    Discord(DiscordArgs),
    Dynamics(DynamicsArgs),
    Freeze(FreezeArgs),
    Gqd(GqdArgs),
    Ip(IpArgs),
    Estimate(EstimateArgs),
    Suite(SuiteArgs),
    Reproduce(ReproduceArgs),
}

fn execute<T>(name: &str, file: Option<&Path>, flags: &T, out: impl Fn(&T) -> Option<PathBuf>, run: impl Fn(&T, &Sink) -> Result<(), CliError>) -> Result<(), CliError>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    let cfg = config::merge(file, flags)?;
    let sink = Sink { out: out(&cfg), hash: config::config_hash(name, &cfg) };
    run(&cfg, &sink)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SPINCORR_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Validation(format!("SPINCORR_THREADS must be a positive integer, got '{v}'")))?;
        spincorr::par::init_global_threads(n);
    }
    let file = cli.config.as_deref();
    match &cli.command {
        Command::Bloch(a) => execute("bloch", file, a, |c| c.out.clone(), bloch),
        Command::Work(a) => execute("work", file, a, |c| c.out.clone(), work),
        Command::State(a) => execute("state", file, a, |c| c.out.clone(), state),
        Command::Channel(a) => execute("channel", file, a, |c| c.out.clone(), channel),
        Command::Discord(a) => execute("discord", file, a, |c| c.out.clone(), discord),
        Command::Dynamics(a) => execute("dynamics", file, a, |c| c.out.clone(), dynamics),
        Command::Freeze(a) => execute("freeze", file, a, |c| c.out.clone(), freeze),
        Command::Gqd(a) => execute("gqd", file, a, |c| c.out.clone(), gqd),
        Command::Ip(a) => execute("ip", file, a, |c| c.out.clone(), ip),
        Command::Estimate(a) => execute("estimate", file, a, |c| c.out.clone(), estimate_cmd),
        Command::Suite(a) => execute("suite", file, a, |c| c.out.clone(), suite),
        Command::Reproduce(a) => execute("reproduce", file, a, |_| None, |cfg, sink| {
            let dir = cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("figures"));
            let index = figures::reproduce(&dir, &sink.hash)?;
            println!("{}", serde_json::to_string_pretty(&index).expect("JSON values serialize"));
            Ok(())
        }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spincorr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
