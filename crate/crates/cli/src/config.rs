//! TOML configuration file shared by every subcommand.
//!
//! Every setting a subcommand needs can come from the file or from a flag;
//! flags win. Sections and keys mirror the pipeline stages, see
//! `config.example.toml` at the repository root.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub corpus: CorpusSection,
    #[serde(default)]
    pub index: IndexSection,
    #[serde(default)]
    pub patterns: PatternsSection,
    #[serde(default)]
    pub expand: ExpandSection,
    #[serde(default)]
    pub augment: AugmentSection,
    #[serde(default)]
    pub emit: EmitSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSection {
    /// Files or directories; directories expand to their `.conllu` files.
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexSection {
    pub dir: Option<PathBuf>,
    pub chunk_size: Option<usize>,
    pub max_depth: Option<u32>,
    pub workers: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternsSection {
    #[serde(default)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpandSection {
    /// Modifier stoplist file; omit for the built-in list.
    pub stoplist: Option<PathBuf>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentSection {
    /// `mock`, `fixture:<path>`, or an `http://` URL.
    pub provider: Option<String>,
    pub copies: Option<u32>,
    pub top_p: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub retries: Option<u32>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmitSection {
    pub seed: Option<u64>,
    pub separator: Option<String>,
    pub dev_ratio: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> anyhow::Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))
            .map_err(|e| UsageError(format!("{e:#}")))?;
        toml::from_str(&text)
            .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    /// The file from `--config`, or an empty config when the flag is absent.
    pub fn load_opt(path: Option<&Path>) -> anyhow::Result<PipelineConfig> {
        match path {
            Some(p) => PipelineConfig::load(p),
            None => Ok(PipelineConfig::default()),
        }
    }
}

/// `flag` if given, else `file`, else a usage error naming the setting.
pub fn require<T>(flag: Option<T>, file: Option<T>, what: &str) -> anyhow::Result<T> {
    flag.or(file)
        .ok_or_else(|| UsageError(format!("{what} must be set (flag or config file)")).into())
}

/// `flag` if given, else `file`, else the built-in default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}
