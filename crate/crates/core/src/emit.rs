//! Training-record emission.
//!
//! Flattens deduction examples into seq2seq records: premises joined into a
//! `source` string, the conclusion as `target`. Premise order is shuffled
//! per record from a seeded generator keyed by record position, so the
//! dataset never encodes "first premise is the general statement" as an
//! artifact, yet the same seed always reproduces the same file. An optional
//! dev split is hash-based on the originating example, keeping an example
//! and its paraphrased copies on the same side.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::EmitError;
use crate::template::{DeductionExample, Op};

/// Version of the record layout, stamped into every line.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub example_id: String,
    pub op: Op,
    pub doc_id: String,
    pub sent_index: u32,
    pub pattern_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrase_of: Option<String>,
}

/// One line of the emitted JSONL dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub schema: u32,
    pub source: String,
    pub target: String,
    pub meta: RecordMeta,
}

#[derive(Debug, Clone)]
pub struct EmitOptions {
    pub seed: u64,
    /// Joins shuffled premises into `source`.
    pub separator: String,
    /// Fraction of examples routed to the dev split; 0 disables the split.
    pub dev_ratio: f64,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            seed: 0,
            separator: " ".to_string(),
            dev_ratio: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitStats {
    pub examples: u64,
    pub train: u64,
    pub dev: u64,
    /// Records whose premise order changed under the shuffle.
    pub shuffled: u64,
    pub by_op: BTreeMap<String, u64>,
}

#[derive(Debug)]
pub struct EmitOutput {
    pub train: Vec<TrainingRecord>,
    pub dev: Vec<TrainingRecord>,
    pub stats: EmitStats,
}

/// Combined pipeline stats: the per-stage reports are folded in verbatim as
/// JSON values so a chained run and a single `run` write identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ingest: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expand: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub augment: Option<serde_json::Value>,
    pub emit: EmitStats,
}

/// The premise order for record `record_index` under `seed`: a Fisher-Yates
/// pass driven by a per-record stream of one seeded generator. Exposed so
/// tests can predict orders without re-running emission.
pub fn shuffle_premises(premises: &[String], seed: u64, record_index: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(record_index);
    let mut out: Vec<String> = premises.to_vec();
    for i in (1..out.len()).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        out.swap(i, j);
    }
    out
}

/// Whether an example lands in the dev split: a hash of the example it was
/// paraphrased from (or itself), so copies never straddle the split.
fn is_dev(example: &DeductionExample, dev_ratio: f64) -> bool {
    if dev_ratio <= 0.0 {
        return false;
    }
    if dev_ratio >= 1.0 {
        return true;
    }
    let root = example
        .paraphrase_of
        .as_deref()
        .unwrap_or(&example.example_id);
    let digest = Sha256::digest(root.as_bytes());
    let h = u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"));
    (h as f64) < (u64::MAX as f64) * dev_ratio
}

pub fn emit(examples: &[DeductionExample], opts: &EmitOptions) -> Result<EmitOutput, EmitError> {
    if opts.separator.is_empty() {
        return Err(EmitError::InvalidOption(
            "separator must be non-empty".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&opts.dev_ratio) {
        return Err(EmitError::InvalidOption(format!(
            "dev_ratio must be in [0, 1], got {}",
            opts.dev_ratio
        )));
    }
    let mut stats = EmitStats {
        examples: examples.len() as u64,
        train: 0,
        dev: 0,
        shuffled: 0,
        by_op: BTreeMap::new(),
    };
    let mut train = Vec::new();
    let mut dev = Vec::new();
    for (idx, example) in examples.iter().enumerate() {
        if example.premises.is_empty() {
            return Err(EmitError::InvalidOption(format!(
                "example {} has no premises",
                example.example_id
            )));
        }
        let ordered = shuffle_premises(&example.premises, opts.seed, idx as u64);
        if ordered != example.premises {
            stats.shuffled += 1;
        }
        *stats.by_op.entry(example.op.to_string()).or_insert(0) += 1;
        let record = TrainingRecord {
            schema: SCHEMA_VERSION,
            source: ordered.join(&opts.separator),
            target: example.conclusion.clone(),
            meta: RecordMeta {
                example_id: example.example_id.clone(),
                op: example.op,
                doc_id: example.provenance.doc_id.clone(),
                sent_index: example.provenance.sent_index,
                pattern_id: example.provenance.pattern_id.clone(),
                paraphrase_of: example.paraphrase_of.clone(),
            },
        };
        if is_dev(example, opts.dev_ratio) {
            stats.dev += 1;
            dev.push(record);
        } else {
            stats.train += 1;
            train.push(record);
        }
    }
    Ok(EmitOutput { train, dev, stats })
}

/// Serialize records as JSONL (one compact object per line).
pub fn to_jsonl(records: &[TrainingRecord]) -> Result<String, EmitError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record)?);
        out.push('\n');
    }
    Ok(out)
}
