//! `depforge emit`: shuffle, split, and write the final dataset.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Args;
use depforge_core::emit::{emit, to_jsonl, EmitOptions, StatsReport};
use depforge_core::template::DeductionExample;

use crate::config::{pick, require};
use crate::ConfigFlag;

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Input examples (JSONL); defaults to <out-dir>/augmented.jsonl when
    /// present, else <out-dir>/examples.jsonl.
    #[arg(long, value_name = "FILE")]
    pub examples: Option<PathBuf>,
    /// Shuffle seed for premise order.
    #[arg(long)]
    pub seed: Option<u64>,
    /// String joining shuffled premises into `source`.
    #[arg(long)]
    pub separator: Option<String>,
    /// Fraction of examples routed to dev.jsonl.
    #[arg(long)]
    pub dev_ratio: Option<f64>,
    /// Index directory whose ingest stats should be folded into stats.json.
    #[arg(long, value_name = "DIR")]
    pub index_dir: Option<PathBuf>,
    /// Directory for train.jsonl, dev.jsonl, stats.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

/// Stage report written earlier, folded back in verbatim when present.
fn stage_json(path: &Path) -> anyhow::Result<Option<serde_json::Value>> {
    if !path.exists() {
        return Ok(None);
    }
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let value =
        serde_json::from_str(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    Ok(Some(value))
}

pub fn run(args: EmitArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let out_dir = require(args.out_dir, file.output.dir, "output dir")?;
    let input = match args.examples {
        Some(path) => path,
        None => {
            let augmented = out_dir.join("augmented.jsonl");
            if augmented.exists() {
                augmented
            } else {
                out_dir.join("examples.jsonl")
            }
        }
    };
    let defaults = EmitOptions::default();
    let opts = EmitOptions {
        seed: pick(args.seed, file.emit.seed, defaults.seed),
        separator: pick(args.separator, file.emit.separator, defaults.separator),
        dev_ratio: pick(args.dev_ratio, file.emit.dev_ratio, defaults.dev_ratio),
    };

    let examples: Vec<DeductionExample> = super::read_jsonl(&input)?;
    let output = emit(&examples, &opts).context("emitting dataset")?;

    super::write_artifact(&out_dir, "train.jsonl", &to_jsonl(&output.train)?)?;
    if opts.dev_ratio > 0.0 {
        super::write_artifact(&out_dir, "dev.jsonl", &to_jsonl(&output.dev)?)?;
    }

    let ingest = match args.index_dir.or(file.index.dir) {
        Some(dir) => stage_json(&dir.join("ingest-stats.json"))?,
        None => None,
    };
    let report = StatsReport {
        ingest,
        expand: stage_json(&out_dir.join("expand-stats.json"))?,
        augment: stage_json(&out_dir.join("augment-report.json"))?,
        emit: output.stats,
    };
    super::write_artifact(&out_dir, "stats.json", &super::to_pretty_json(&report)?)?;

    println!(
        "emitted {} train / {} dev records ({} premise orders shuffled); wrote {}",
        report.emit.train,
        report.emit.dev,
        report.emit.shuffled,
        out_dir.join("train.jsonl").display(),
    );
    Ok(())
}
