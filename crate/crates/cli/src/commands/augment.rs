//! `depforge augment`: paraphrased premise copies via a provider.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use depforge_core::augment::{augment_examples, provider_from_spec, AugmentOptions};
use depforge_core::template::DeductionExample;

use crate::config::{pick, require};
use crate::ConfigFlag;

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Input examples (JSONL); defaults to <out-dir>/examples.jsonl.
    #[arg(long, value_name = "FILE")]
    pub examples: Option<PathBuf>,
    /// `mock`, `fixture:<path>`, or an `http://` URL.
    #[arg(long, value_name = "SPEC")]
    pub provider: Option<String>,
    /// Paraphrased copies per example.
    #[arg(long)]
    pub copies: Option<u32>,
    /// Nucleus-sampling cutoff forwarded to the provider.
    #[arg(long)]
    pub top_p: Option<f64>,
    /// Base seed for reproducible paraphrases (seed-capable providers only).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Concurrent provider calls.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Retries per call on transport and 5xx failures.
    #[arg(long)]
    pub retries: Option<u32>,
    /// Directory for augmented.jsonl and augment-report.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: AugmentArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let out_dir = require(args.out_dir, file.output.dir, "output dir")?;
    let input = args
        .examples
        .unwrap_or_else(|| out_dir.join("examples.jsonl"));
    let spec = require(args.provider, file.augment.provider, "provider")?;
    let defaults = AugmentOptions::default();
    let opts = AugmentOptions {
        copies: pick(args.copies, file.augment.copies, defaults.copies),
        top_p: pick(args.top_p, file.augment.top_p, defaults.top_p),
        seed: args.seed.or(file.augment.seed),
        workers: pick(args.workers, file.augment.workers, defaults.workers),
        retries: pick(args.retries, file.augment.retries, defaults.retries),
        backoff: defaults.backoff,
    };

    let examples: Vec<DeductionExample> = super::read_jsonl(&input)?;
    let provider = provider_from_spec(&spec)?;
    let (augmented, report) = augment_examples(provider.as_ref(), &examples, &opts)
        .with_context(|| format!("augmenting via {spec}"))?;

    super::write_artifact(&out_dir, "augmented.jsonl", &super::to_jsonl(&augmented)?)?;
    super::write_artifact(
        &out_dir,
        "augment-report.json",
        &super::to_pretty_json(&report)?,
    )?;

    println!(
        "augmented {} examples to {} with {} ({} paraphrase calls); wrote {}",
        report.examples_in,
        report.examples_out,
        report.provider,
        report.paraphrase_calls,
        out_dir.join("augmented.jsonl").display(),
    );
    Ok(())
}
