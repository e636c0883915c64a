//! `depforge index`: CoNLL-U in, chain index out.

use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use depforge_core::conllu::{ingest_files, resolve_corpus_paths, IngestReport};
use depforge_core::index::{build_index, IndexOptions};

use crate::config::{pick, require};
use crate::ConfigFlag;

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Corpus files or directories (repeatable).
    #[arg(long = "corpus", value_name = "PATH")]
    pub corpus: Vec<PathBuf>,
    /// Directory to write the index into.
    #[arg(long, value_name = "DIR")]
    pub index_dir: Option<PathBuf>,
    /// Sentences per chunk file.
    #[arg(long)]
    pub chunk_size: Option<usize>,
    /// Longest upward chain stored per token.
    #[arg(long)]
    pub max_depth: Option<u32>,
    /// Worker threads for chunk encoding.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Ingest stats artifact: what went in, what was kept.
pub fn ingest_stats_json(
    files: &[depforge_core::conllu::SourceFile],
    report: &IngestReport,
) -> serde_json::Value {
    serde_json::json!({
        "files": files,
        "blocks": report.blocks,
        "accepted": report.accepted,
        "skipped": report.skipped.len(),
    })
}

pub fn run(args: IndexArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let inputs = if args.corpus.is_empty() {
        file.corpus.inputs.clone()
    } else {
        args.corpus
    };
    if inputs.is_empty() {
        return Err(crate::UsageError("no corpus inputs given".to_string()).into());
    }
    let dir = require(args.index_dir, file.index.dir, "index dir")?;
    let opts = IndexOptions {
        chunk_size: pick(
            args.chunk_size,
            file.index.chunk_size,
            IndexOptions::default().chunk_size,
        ),
        max_depth: pick(
            args.max_depth,
            file.index.max_depth,
            IndexOptions::default().max_depth,
        ),
        workers: pick(
            args.workers,
            file.index.workers,
            IndexOptions::default().workers,
        ),
    };

    let paths = resolve_corpus_paths(&inputs).context("resolving corpus inputs")?;
    let (corpus, report) = ingest_files(&paths).context("ingesting corpus")?;
    let manifest = build_index(&corpus, &dir, &opts)
        .with_context(|| format!("building index in {}", dir.display()))?;

    super::write_artifact(
        &dir,
        "ingest-skips.jsonl",
        &super::to_jsonl(&report.skipped)?,
    )?;
    super::write_artifact(
        &dir,
        "ingest-stats.json",
        &super::to_pretty_json(&ingest_stats_json(&corpus.source_manifest, &report))?,
    )?;

    let chunks = manifest.chunks.len();
    println!(
        "indexed {} sentences from {} files into {} ({} chunk{}, depth {}); skipped {} malformed trees",
        manifest.total_sentences,
        corpus.source_manifest.len(),
        dir.display(),
        chunks,
        if chunks == 1 { "" } else { "s" },
        manifest.max_depth,
        report.skipped.len(),
    );
    Ok(())
}
