//! `depforge run`: the whole pipeline in one invocation.
//!
//! Chains the stage commands with their file I/O intact, so the artifacts
//! are byte-identical to running `index`, `expand`, `augment`, `emit` one
//! after another with the same configuration.

use clap::Args;

use crate::commands::{augment, emit, expand, index};
use crate::ConfigFlag;

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Base seed for the run; overrides both augment and emit seeds.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip augmentation even when the config names a provider.
    #[arg(long)]
    pub no_augment: bool,
}

pub fn run(args: RunArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let config = || ConfigFlag {
        config: args.config.config.clone(),
    };

    index::run(index::IndexArgs {
        config: config(),
        corpus: Vec::new(),
        index_dir: None,
        chunk_size: None,
        max_depth: None,
        workers: None,
    })?;

    expand::run(expand::ExpandArgs {
        config: config(),
        index_dir: None,
        patterns: Vec::new(),
        stoplist: None,
        out_dir: None,
    })?;

    let augmenting = !args.no_augment && file.augment.provider.is_some();
    if augmenting {
        augment::run(augment::AugmentArgs {
            config: config(),
            examples: None,
            provider: None,
            copies: None,
            top_p: None,
            seed: args.seed,
            workers: None,
            retries: None,
            out_dir: None,
        })?;
    }

    emit::run(emit::EmitArgs {
        config: config(),
        // Explicit rather than defaulted: an augmented.jsonl left over from
        // an earlier run must not leak into an unaugmented one.
        examples: file.output.dir.as_ref().map(|dir| {
            if augmenting {
                dir.join("augmented.jsonl")
            } else {
                dir.join("examples.jsonl")
            }
        }),
        seed: args.seed,
        separator: None,
        dev_ratio: None,
        index_dir: None,
        out_dir: None,
    })?;

    Ok(())
}
