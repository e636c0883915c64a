//! `depforge` — drive the deduction-dataset pipeline from the shell.
//!
//! Subcommands mirror the stages: `index` ingests parsed corpora and builds
//! the chain index, `search` probes it with tree patterns, `expand` rewrites
//! matches into premise/conclusion examples, `augment` adds paraphrased
//! copies, `emit` shuffles and splits the final dataset. `run` chains all of
//! them and produces byte-identical artifacts to running the stages one by
//! one.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error
//! (malformed corpus, bad pattern, corrupt index), 3 paraphrase-provider
//! error.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use depforge_core::error::ProviderError;

/// Version line: crate version plus the on-disk index format it speaks.
const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (index format v1)");

/// A problem with how the tool was invoked, not with the data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "depforge", version = VERSION, about = "Pattern-driven deduction datasets from parsed corpora")]
struct Cli {
    /// Report errors as single-line JSON on stderr.
    #[arg(long, global = true)]
    json_errors: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest CoNLL-U corpora and build the chain index.
    Index(commands::index::IndexArgs),
    /// Probe the index with dependency patterns and show the matches.
    Search(commands::search::SearchArgs),
    /// Rewrite matches into premise/conclusion examples.
    Expand(commands::expand::ExpandArgs),
    /// Add paraphrased copies of each example's premises.
    Augment(commands::augment::AugmentArgs),
    /// Shuffle premises, split train/dev, write the dataset.
    Emit(commands::emit::EmitArgs),
    /// All stages in order, equivalent to running them one by one.
    Run(commands::run::RunArgs),
}

/// Exit code for a failure: usage 1, provider 3, data 2.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(p) = cause.downcast_ref::<ProviderError>() {
            // A malformed spec never reached a provider; that's on the caller.
            return match p {
                ProviderError::BadSpec { .. } => 1,
                _ => 3,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and --version are successes; real parse errors are usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    let result = match cli.command {
        Command::Index(args) => commands::index::run(args),
        Command::Search(args) => commands::search::run(args),
        Command::Expand(args) => commands::expand::run(args),
        Command::Augment(args) => commands::augment::run(args),
        Command::Emit(args) => commands::emit::run(args),
        Command::Run(args) => commands::run::run(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = classify(&err);
            if cli.json_errors {
                let line = serde_json::json!({
                    "error": format!("{err:#}"),
                    "code": code,
                });
                eprintln!("{line}");
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(code)
        }
    }
}

/// Shared flag: where the config file lives.
#[derive(Debug, clap::Args)]
pub struct ConfigFlag {
    /// TOML config file; flags override its values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

impl ConfigFlag {
    pub fn load(&self) -> anyhow::Result<config::PipelineConfig> {
        config::PipelineConfig::load_opt(self.config.as_deref())
    }
}
