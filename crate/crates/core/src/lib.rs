//! depforge-core: find sentences matching dependency-tree patterns in parsed
//! corpora and mechanically rewrite them into premise/conclusion deduction
//! training examples.
//!
//! The pipeline runs in five stages, one module each:
//!
//! 1. [`conllu`] — ingest CoNLL-U files into validated sentence trees.
//! 2. [`index`] — persist a chunked index keyed by bottom-up dependency
//!    chain prefixes; [`pattern`] parses the pattern language, matches
//!    single trees, and runs index-accelerated corpus search.
//! 3. [`template`] — turn matches into deduction examples by subtree
//!    extraction and rearrangement, with [`morph`] supplying agreement fixes.
//! 4. [`augment`] — add paraphrased copies of each example's premises via a
//!    pluggable provider.
//! 5. [`emit`] — serialize examples into seeded, deterministic
//!    sequence-to-sequence training records.
//!
//! [`synth`] generates deterministic synthetic corpora for tests and
//! benchmarks.

pub mod augment;
pub mod conllu;
pub mod emit;
pub mod error;
pub mod index;
pub mod morph;
pub mod pattern;
pub mod synth;
pub mod template;

pub use conllu::{Corpus, ParsedSentence, Token};
pub use pattern::{DepPattern, MatchBinding, PatternNode};
pub use template::DeductionExample;

/// On-disk index format version accepted by this build.
pub const INDEX_FORMAT_VERSION: u32 = 1;
