//! `depforge expand`: search every pattern, rewrite matches into examples.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::Args;
use depforge_core::index::IndexReader;
use depforge_core::pattern::search;
use depforge_core::template::{expand, Expanded, ModifierStoplist};

use crate::config::require;
use crate::ConfigFlag;

#[derive(Debug, Args)]
pub struct ExpandArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Index directory to search.
    #[arg(long, value_name = "DIR")]
    pub index_dir: Option<PathBuf>,
    /// Pattern files (repeatable).
    #[arg(long = "patterns", value_name = "FILE")]
    pub patterns: Vec<PathBuf>,
    /// Modifier stoplist file; omit for the built-in list.
    #[arg(long, value_name = "FILE")]
    pub stoplist: Option<PathBuf>,
    /// Directory for examples.jsonl, expansion-skips.jsonl, expand-stats.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
}

pub fn run(args: ExpandArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let dir = require(args.index_dir, file.index.dir, "index dir")?;
    let out_dir = require(args.out_dir, file.output.dir, "output dir")?;
    let files = if args.patterns.is_empty() {
        file.patterns.files.clone()
    } else {
        args.patterns
    };
    if files.is_empty() {
        return Err(crate::UsageError("no pattern files given".to_string()).into());
    }
    let stoplist = match args.stoplist.or(file.expand.stoplist) {
        Some(path) => ModifierStoplist::from_file(&path)
            .with_context(|| format!("loading stoplist {}", path.display()))?,
        None => ModifierStoplist::default(),
    };

    let reader =
        IndexReader::open(&dir).with_context(|| format!("opening index {}", dir.display()))?;
    let patterns = super::search::load_patterns(&files)?;

    let mut examples = Vec::new();
    let mut skips = Vec::new();
    let mut matches = 0u64;
    let mut by_pattern: BTreeMap<String, u64> = BTreeMap::new();
    let mut by_op: BTreeMap<String, u64> = BTreeMap::new();
    for pattern in &patterns {
        let hits = search(&reader, pattern)
            .with_context(|| format!("searching pattern {}", pattern.pattern_id))?;
        for sm in &hits.sentences {
            for binding in &sm.bindings {
                matches += 1;
                match expand(pattern, &sm.sentence, binding, &stoplist)? {
                    Expanded::Example(example) => {
                        *by_pattern.entry(pattern.pattern_id.clone()).or_insert(0) += 1;
                        *by_op.entry(example.op.to_string()).or_insert(0) += 1;
                        examples.push(example);
                    }
                    Expanded::Skipped(skip) => skips.push(skip),
                }
            }
        }
    }

    let stats = serde_json::json!({
        "patterns": patterns.len(),
        "matches": matches,
        "examples": examples.len(),
        "skips": skips.len(),
        "by_op": by_op,
        "by_pattern": by_pattern,
    });
    super::write_artifact(&out_dir, "examples.jsonl", &super::to_jsonl(&examples)?)?;
    super::write_artifact(&out_dir, "expansion-skips.jsonl", &super::to_jsonl(&skips)?)?;
    super::write_artifact(
        &out_dir,
        "expand-stats.json",
        &super::to_pretty_json(&stats)?,
    )?;

    println!(
        "expanded {} matches into {} examples ({} skipped) across {} patterns; wrote {}",
        matches,
        examples.len(),
        skips.len(),
        patterns.len(),
        out_dir.join("examples.jsonl").display(),
    );
    Ok(())
}
