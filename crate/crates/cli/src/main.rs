use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use logcoreset_cli::commands::{Command, MethodArg};
use logcoreset_cli::Cli;

fn init_threads() {
    let Ok(v) = std::env::var("LOGCORESET_THREADS") else {
        return;
    };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: could not size thread pool: {e}");
            }
        }
        _ => eprintln!("warning: ignoring LOGCORESET_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Coreset(a) = &cli.command {
        if a.method == MethodArg::Uniform && a.epsilon.is_some() {
            Cli::command()
                .error(
                    ErrorKind::ArgumentConflict,
                    "--epsilon is not supported with --method uniform; use --size",
                )
                .exit();
        }
    }
    init_threads();
    match logcoreset_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
