#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser};
use serde_json::json;

use commands::CommandRegistry;
use config::RunConfig;
use error::CliError;
use output::{RunDir, RunManifest};

/// Environment variable that takes precedence over `--out`.
const OUT_ENV: &str = "BLOWUPLAB_OUT";
const DEFAULT_OUT: &str = "blowuplab-out";

#[derive(Debug, Parser)]
#[command(name = "blowuplab", version, about = "Exterior-domain wave blowup experiments")]
struct Args {
    /// Subcommand to run
    command: String,
    /// JSON configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; each command writes into a subdirectory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long)]
    jobs: Option<usize>,
    /// Keep every k-th time level of stored histories
    #[arg(long)]
    stride: Option<usize>,
}

fn output_root(args: &Args, config: &RunConfig) -> PathBuf {
    if let Some(v) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(v);
    }
    args.out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let mut config = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(j) = args.jobs {
        config.jobs = Some(j);
    }
    if let Some(s) = args.stride {
        config.stride = s;
    }
    config.validate()?;
    Ok(config)
}

fn report_error(e: &CliError) -> ExitCode {
    eprintln!("{e}");
    println!(
        "{}",
        json!({"status": e.kind.label(), "exit_code": e.kind.exit_code(), "error": e.message})
    );
    ExitCode::from(e.kind.exit_code() as u8)
}

fn main() -> ExitCode {
    let registry = CommandRegistry::standard();
    let listing: String = registry
        .iter()
        .map(|c| format!("  {:<16}{}\n", c.name(), c.about()))
        .collect();
    let matches = Args::command()
        .after_help(format!("Commands:\n{listing}"))
        .get_matches();
    let args = match Args::from_arg_matches(&matches) {
        Ok(a) => a,
        Err(e) => e.exit(),
    };
    let Some(cmd) = registry.get(&args.command) else {
        let names: Vec<_> = registry.iter().map(|c| c.name()).collect();
        return report_error(&CliError::config(format!(
            "unknown command '{}' (known: {})",
            args.command,
            names.join(", ")
        )));
    };
    let config = match load_config(&args) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    let root = output_root(&args, &config).join(cmd.name());
    let mut dir = match RunDir::create(&root) {
        Ok(d) => d,
        Err(e) => return report_error(&e),
    };

    let started = chrono::Utc::now().to_rfc3339();
    let result = cmd.execute(&config, &mut dir);
    let failure = match &result {
        Ok(o) => o.failure.clone(),
        Err(e) => Some(e.clone()),
    };
    let code = failure.as_ref().map_or(0, |f| f.kind.exit_code());
    let outcome = json!({
        "status": failure.as_ref().map_or("ok", |f| f.kind.label()),
        "exit_code": code,
        "error": failure.as_ref().map(|f| f.message.clone()),
        "summary": result.as_ref().ok().map(|o| o.summary.clone()),
    });
    let config_echo = serde_json::to_value(&config).unwrap_or_default();
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name(),
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        config: &config_echo,
        outcome: &outcome,
        files: dir.files(),
    };
    if let Err(e) = dir.finish(&manifest) {
        return report_error(&e);
    }
    if let Some(f) = &failure {
        eprintln!("{f}");
    }
    println!("{outcome}");
    ExitCode::from(code as u8)
}
