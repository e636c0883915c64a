//! `depforge search`: probe the index with patterns and show what they bind.

use std::io::IsTerminal;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, ValueEnum};
use depforge_core::index::IndexReader;
use depforge_core::pattern::{load_pattern_file, search, DepPattern, SearchHits};

use crate::config::require;
use crate::ConfigFlag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorMode {
    Auto,
    Always,
    Never,
}

impl ColorMode {
    fn enabled(self) -> bool {
        match self {
            ColorMode::Always => true,
            ColorMode::Never => false,
            ColorMode::Auto => std::io::stdout().is_terminal(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub config: ConfigFlag,
    /// Index directory to search.
    #[arg(long, value_name = "DIR")]
    pub index_dir: Option<PathBuf>,
    /// Pattern files (repeatable).
    #[arg(long = "patterns", value_name = "FILE")]
    pub patterns: Vec<PathBuf>,
    /// Only run the pattern with this name.
    #[arg(long, value_name = "NAME")]
    pub pattern: Option<String>,
    /// Stop after this many matching sentences per pattern.
    #[arg(long, value_name = "N")]
    pub limit: Option<usize>,
    /// Machine-readable output: one JSON object per match.
    #[arg(long)]
    pub json: bool,
    /// Highlight captured tokens.
    #[arg(long, value_enum, default_value = "auto")]
    pub color: ColorMode,
}

/// Captures get stable colors: $0 green, $1 blue, $2 magenta, then cycling.
const CAPTURE_COLORS: &[&str] = &["\x1b[32m", "\x1b[34m", "\x1b[35m", "\x1b[33m"];
const RESET: &str = "\x1b[0m";

fn render_sentence(
    sentence: &depforge_core::conllu::ParsedSentence,
    bindings: &[(u32, u32)],
    color: bool,
) -> String {
    let mut parts = Vec::with_capacity(sentence.tokens.len());
    for token in &sentence.tokens {
        match bindings.iter().find(|(_, t)| *t == token.id) {
            Some((var, _)) if color => {
                let paint = CAPTURE_COLORS[*var as usize % CAPTURE_COLORS.len()];
                parts.push(format!("{paint}{}{RESET}", token.form));
            }
            Some((var, _)) => parts.push(format!("[${var} {}]", token.form)),
            None => parts.push(token.form.clone()),
        }
    }
    parts.join(" ")
}

pub fn load_patterns(files: &[PathBuf]) -> anyhow::Result<Vec<DepPattern>> {
    let mut patterns = Vec::new();
    for file in files {
        patterns.extend(
            load_pattern_file(file)
                .with_context(|| format!("loading patterns from {}", file.display()))?,
        );
    }
    Ok(patterns)
}

fn print_hits(hits: &SearchHits, limit: Option<usize>, json: bool, color: bool) {
    if json {
        for sm in &hits.sentences {
            for b in &sm.bindings {
                let line = serde_json::json!({
                    "pattern_id": b.pattern_id,
                    "doc_id": b.doc_id,
                    "sent_index": b.sent_index,
                    "anchor": b.anchor,
                    "bindings": b.bindings,
                    "text": sm.sentence.plain_text(),
                });
                println!("{line}");
            }
        }
        return;
    }
    let route = match (&hits.plan, hits.full_scan) {
        (Some(key), _) => format!("probed {key}"),
        (None, _) => "full scan".to_string(),
    };
    println!(
        "{}: {} matches in {} sentences ({route}; {} candidates)",
        hits.pattern_id,
        hits.match_count(),
        hits.sentences.len(),
        hits.candidates,
    );
    for sm in hits.sentences.iter().take(limit.unwrap_or(usize::MAX)) {
        for b in &sm.bindings {
            println!(
                "  {}:{}  {}",
                b.doc_id,
                b.sent_index,
                render_sentence(&sm.sentence, &b.bindings, color)
            );
        }
    }
}

pub fn run(args: SearchArgs) -> anyhow::Result<()> {
    let file = args.config.load()?;
    let dir = require(args.index_dir, file.index.dir, "index dir")?;
    let files = if args.patterns.is_empty() {
        file.patterns.files.clone()
    } else {
        args.patterns
    };
    if files.is_empty() {
        return Err(crate::UsageError("no pattern files given".to_string()).into());
    }

    let reader =
        IndexReader::open(&dir).with_context(|| format!("opening index {}", dir.display()))?;
    let mut patterns = load_patterns(&files)?;
    if let Some(name) = &args.pattern {
        patterns.retain(|p| &p.pattern_id == name);
        if patterns.is_empty() {
            return Err(crate::UsageError(format!("no pattern named {name:?}")).into());
        }
    }

    let color = args.color.enabled();
    for pattern in &patterns {
        let hits = search(&reader, pattern)
            .with_context(|| format!("searching pattern {}", pattern.pattern_id))?;
        print_hits(&hits, args.limit, args.json, color);
    }
    Ok(())
}
