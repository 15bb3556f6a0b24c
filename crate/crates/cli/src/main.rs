mod args;
mod commands;

use std::process::ExitCode;

use anyhow::Context;
use clap::{CommandFactory, Parser};

use args::{Cli, Command, Echo};
use commands::{RunContext, UsageError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match real_main(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            if let Some(u) = e.downcast_ref::<UsageError>() {
                Cli::command().error(clap::error::ErrorKind::ArgumentConflict, &u.0).exit();
            }
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn real_main(cli: Cli) -> anyhow::Result<u8> {
    let (ctx, command) = match cli.command {
        Command::Replay(r) => {
            let text = std::fs::read_to_string(&r.config).with_context(|| format!("reading {}", r.config.display()))?;
            let echo: Echo = toml::from_str(&text).with_context(|| format!("parsing {}", r.config.display()))?;
            (RunContext { seed: Some(echo.seed), threads: echo.threads }, echo.command)
        }
        c => (RunContext { seed: cli.seed, threads: cli.threads }, c),
    };
    if ctx.threads == 0 {
        return Err(UsageError("--threads must be at least 1".into()).into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.threads)
        .build_global()
        .context("starting the worker pool")?;
    commands::run(command, &ctx)
}
