//! `manifest.json`: the one human-readable file in an index directory.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::IndexError;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ChunkMeta {
    pub file: String,
    pub chunk_id: u32,
    pub sentences: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct IndexManifest {
    pub format_version: u32,
    pub max_depth: u32,
    pub chunk_size: u64,
    pub total_sentences: u64,
    /// Digest over the chunk digests, in order.
    pub corpus_digest: String,
    pub chunks: Vec<ChunkMeta>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl IndexManifest {
    pub fn load(dir: &Path) -> Result<IndexManifest, IndexError> {
        Self::load_if_present(dir)?.ok_or_else(|| IndexError::Manifest {
            dir: dir.display().to_string(),
            reason: format!("no {MANIFEST_FILE}; not an index directory"),
        })
    }

    pub fn load_if_present(dir: &Path) -> Result<Option<IndexManifest>, IndexError> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = match fs::read(&path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let manifest: IndexManifest =
            serde_json::from_slice(&bytes).map_err(|e| IndexError::Manifest {
                dir: dir.display().to_string(),
                reason: format!("unreadable {MANIFEST_FILE}: {e}"),
            })?;
        for (i, c) in manifest.chunks.iter().enumerate() {
            if c.chunk_id != i as u32 {
                return Err(IndexError::Manifest {
                    dir: dir.display().to_string(),
                    reason: format!(
                        "chunk list out of order: position {i} holds chunk {}",
                        c.chunk_id
                    ),
                });
            }
        }
        if manifest.chunks.iter().map(|c| c.sentences).sum::<u64>() != manifest.total_sentences {
            return Err(IndexError::Manifest {
                dir: dir.display().to_string(),
                reason: "chunk sentence counts do not sum to total_sentences".to_string(),
            });
        }
        Ok(Some(manifest))
    }

    pub fn save(&self, dir: &Path) -> Result<(), IndexError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| IndexError::Manifest {
            dir: dir.display().to_string(),
            reason: format!("cannot serialize manifest: {e}"),
        })?;
        text.push('\n');
        let tmp = dir.join(format!("{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(tmp, dir.join(MANIFEST_FILE))?;
        Ok(())
    }
}
