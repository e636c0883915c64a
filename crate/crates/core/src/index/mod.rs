//! Bottom-up dependency chain index.
//!
//! For every token we index the upward chains it starts: walking head links
//! from the token toward the root, each step contributes `(deprel, xpos,
//! lemma)`. Chains of every length from 1 up to the configured depth are
//! keyed, and each is keyed once per lemma/wildcard combination so lookups
//! may pin any subset of lemmas along the chain. A step whose token is the
//! sentence root is keyed under the canonical deprel `root`, and again under
//! the stored deprel when an annotation scheme uses a different label.
//!
//! The corpus is split into fixed-size runs of sentences, one binary chunk
//! file per run (see [`format`]), plus a `manifest.json` describing the
//! whole index. Building is deterministic: the same sentences and options
//! produce byte-identical files, and a rebuild over an existing index
//! verifies rather than clobbers.

mod format;
mod manifest;

pub use format::{ChunkReader, FORMAT_VERSION, ROOT_STEP};
pub use manifest::{ChunkMeta, IndexManifest};

use std::collections::HashMap;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use crate::conllu::{validate_tree, Corpus, ParsedSentence};
use crate::error::IndexError;

/// One upward step of a chain key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainStep {
    pub deprel: String,
    pub xpos: String,
    /// `None` is the wildcard: the step matches any lemma.
    pub lemma: Option<String>,
}

/// A bottom-up chain, starting at the token that owns the posting.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChainKey {
    pub steps: Vec<ChainStep>,
}

impl std::fmt::Display for ChainKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, " <- ")?;
            }
            write!(f, "{}:{}", s.deprel, s.xpos)?;
            if let Some(lemma) = &s.lemma {
                write!(f, "`{lemma}'")?;
            }
        }
        Ok(())
    }
}

/// Symbols for one step during key generation; `deprel_alt` carries the
/// stored deprel of a root token when it differs from the canonical `root`.
pub(crate) struct StepSyms {
    pub deprel: u32,
    pub deprel_alt: Option<u32>,
    pub xpos: u32,
    pub lemma: u32,
}

/// Wildcard lemma marker inside raw (pre-remap) keys.
pub(crate) const WILD: u32 = u32::MAX;

/// Emit every chain key starting at `token_ix` (0-based), flattened as
/// `[deprel, xpos, lemma]` triples, one per prefix length and per
/// lemma/deprel variant combination. Shared by the chunk encoder and the
/// public [`chain_keys`] so both sides of the index agree by construction.
pub(crate) fn chains_for_token(
    token_ix: usize,
    heads: &[u32],
    syms: impl Fn(usize) -> StepSyms,
    max_depth: u32,
    mut emit: impl FnMut(&[u32]),
) {
    let mut steps = Vec::with_capacity(max_depth as usize);
    let mut cur = token_ix;
    loop {
        steps.push(syms(cur));
        // The sentence-length bound keeps this finite even on cyclic input.
        if steps.len() as u32 == max_depth || steps.len() >= heads.len() || heads[cur] == 0 {
            break;
        }
        cur = heads[cur] as usize - 1;
    }
    let mut buf = Vec::with_capacity(steps.len() * 3);
    for len in 1..=steps.len() {
        expand_variants(&steps[..len], &mut buf, &mut emit);
    }
}

fn expand_variants(steps: &[StepSyms], buf: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    let at = buf.len() / 3;
    if at == steps.len() {
        emit(buf);
        return;
    }
    let s = &steps[at];
    for deprel in std::iter::once(s.deprel).chain(s.deprel_alt) {
        for lemma in [s.lemma, WILD] {
            buf.extend_from_slice(&[deprel, s.xpos, lemma]);
            expand_variants(steps, buf, emit);
            buf.truncate(buf.len() - 3);
        }
    }
}

/// All chain keys under which `token_id` is posted, sorted and deduplicated.
pub fn chain_keys(
    sentence: &ParsedSentence,
    token_id: u32,
    max_depth: u32,
) -> Result<Vec<ChainKey>, IndexError> {
    if token_id == 0 || token_id as usize > sentence.tokens.len() {
        return Err(IndexError::UnknownToken { token_id });
    }
    // Local symbol table so chain generation can run on plain ids.
    let mut id_strings: Vec<String> = vec![ROOT_STEP.to_string()];
    let mut id_map: HashMap<String, u32> = HashMap::from([(ROOT_STEP.to_string(), 0)]);
    let intern = |s: &str, id_strings: &mut Vec<String>, id_map: &mut HashMap<String, u32>| {
        if let Some(&id) = id_map.get(s) {
            return id;
        }
        let id = id_strings.len() as u32;
        id_strings.push(s.to_string());
        id_map.insert(s.to_string(), id);
        id
    };

    let heads: Vec<u32> = sentence.tokens.iter().map(|t| t.head).collect();
    let mut per_token: Vec<(u32, u32, u32)> = Vec::with_capacity(sentence.tokens.len());
    for t in &sentence.tokens {
        per_token.push((
            intern(&t.deprel, &mut id_strings, &mut id_map),
            intern(&t.xpos, &mut id_strings, &mut id_map),
            intern(&t.lemma, &mut id_strings, &mut id_map),
        ));
    }
    let mut raw: Vec<Vec<u32>> = Vec::new();
    chains_for_token(
        token_id as usize - 1,
        &heads,
        |ix| {
            let (deprel, xpos, lemma) = per_token[ix];
            StepSyms {
                deprel: if heads[ix] == 0 { 0 } else { deprel },
                deprel_alt: if heads[ix] == 0 && deprel != 0 {
                    Some(deprel)
                } else {
                    None
                },
                xpos,
                lemma,
            }
        },
        max_depth,
        |key| raw.push(key.to_vec()),
    );
    let mut out: Vec<ChainKey> = raw
        .into_iter()
        .map(|key| ChainKey {
            steps: key
                .chunks(3)
                .map(|t| ChainStep {
                    deprel: id_strings[t[0] as usize].clone(),
                    xpos: id_strings[t[1] as usize].clone(),
                    lemma: (t[2] != WILD).then(|| id_strings[t[2] as usize].clone()),
                })
                .collect(),
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Build-time knobs.
#[derive(Debug, Clone)]
pub struct IndexOptions {
    /// Sentences per chunk file.
    pub chunk_size: usize,
    /// Maximum chain length keyed.
    pub max_depth: u32,
    /// Chunk encoders run on this many threads.
    pub workers: usize,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            chunk_size: 160_000,
            max_depth: 3,
            workers: 1,
        }
    }
}

/// Split `total` sentences into chunk ranges of at most `chunk_size`.
pub fn chunk_ranges(total: usize, chunk_size: usize) -> Vec<Range<usize>> {
    (0..total)
        .step_by(chunk_size.max(1))
        .map(|start| start..(start + chunk_size).min(total))
        .collect()
}

fn chunk_file_name(chunk_id: u32) -> String {
    format!("chunk-{chunk_id:06}.dpi")
}

/// Index an in-memory corpus into `dir`.
pub fn build_index(
    corpus: &Corpus,
    dir: &Path,
    opts: &IndexOptions,
) -> Result<IndexManifest, IndexError> {
    build_index_streamed(
        corpus.sentences.len(),
        |range| Ok(corpus.sentences[range].to_vec()),
        dir,
        opts,
    )
}

/// Index a corpus delivered chunk by chunk, so only one chunk of sentences
/// is in memory at a time. `supplier` must return exactly the sentences of
/// the requested range and be safe to call from several threads.
pub fn build_index_streamed<F>(
    total: usize,
    supplier: F,
    dir: &Path,
    opts: &IndexOptions,
) -> Result<IndexManifest, IndexError>
where
    F: Fn(Range<usize>) -> Result<Vec<ParsedSentence>, IndexError> + Sync,
{
    if opts.chunk_size == 0 {
        return Err(IndexError::InvalidOption(
            "chunk_size must be at least 1".to_string(),
        ));
    }
    if opts.max_depth == 0 {
        return Err(IndexError::InvalidOption(
            "max_depth must be at least 1".to_string(),
        ));
    }
    fs::create_dir_all(dir)?;
    let existing = IndexManifest::load_if_present(dir)?;
    if let Some(m) = &existing {
        let same = m.format_version == FORMAT_VERSION
            && m.max_depth == opts.max_depth
            && m.chunk_size as usize == opts.chunk_size
            && m.total_sentences as usize == total;
        if !same {
            return Err(IndexError::ChecksumMismatch {
                reason: format!(
                    "directory {} holds an index built with different parameters \
                     (depth {}, chunk size {}, {} sentences); refusing to overwrite",
                    dir.display(),
                    m.max_depth,
                    m.chunk_size,
                    m.total_sentences
                ),
            });
        }
    }

    let ranges = chunk_ranges(total, opts.chunk_size);
    let metas: Mutex<Vec<Option<ChunkMeta>>> = Mutex::new(vec![None; ranges.len()]);
    let next = AtomicUsize::new(0);
    let failure: Mutex<Option<IndexError>> = Mutex::new(None);
    let workers = opts.workers.max(1).min(ranges.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let at = next.fetch_add(1, Ordering::SeqCst);
                if at >= ranges.len() || failure.lock().unwrap().is_some() {
                    return;
                }
                match encode_one(
                    at as u32,
                    ranges[at].clone(),
                    &supplier,
                    dir,
                    opts,
                    &existing,
                ) {
                    Ok(meta) => metas.lock().unwrap()[at] = Some(meta),
                    Err(e) => {
                        let mut slot = failure.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        return;
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    let chunks: Vec<ChunkMeta> = metas
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|m| m.expect("every chunk finished"))
        .collect();

    let mut digest = Sha256::new();
    for c in &chunks {
        digest.update(c.sha256.as_bytes());
    }
    let manifest = IndexManifest {
        format_version: FORMAT_VERSION,
        max_depth: opts.max_depth,
        chunk_size: opts.chunk_size as u64,
        total_sentences: total as u64,
        corpus_digest: crate::conllu::hex(&digest.finalize()),
        chunks,
    };
    manifest.save(dir)?;
    Ok(manifest)
}

fn encode_one<F>(
    chunk_id: u32,
    range: Range<usize>,
    supplier: &F,
    dir: &Path,
    opts: &IndexOptions,
    existing: &Option<IndexManifest>,
) -> Result<ChunkMeta, IndexError>
where
    F: Fn(Range<usize>) -> Result<Vec<ParsedSentence>, IndexError> + Sync,
{
    let sentences = supplier(range.clone())?;
    if sentences.len() != range.len() {
        return Err(IndexError::InvalidOption(format!(
            "sentence supplier returned {} sentences for a range of {}",
            sentences.len(),
            range.len()
        )));
    }
    for s in &sentences {
        if let Err(v) = validate_tree(s) {
            return Err(IndexError::InvalidSentence(format!(
                "{} sentence {}: {v}",
                s.doc_id, s.sent_index
            )));
        }
    }
    let bytes = format::encode_chunk(chunk_id, &sentences, opts.max_depth)?;
    let sha256 = crate::conllu::hex(&Sha256::digest(&bytes));
    let file = chunk_file_name(chunk_id);
    let path = dir.join(&file);
    if let Some(m) = existing {
        // A rebuild over the same parameters must reproduce the same bytes;
        // anything else means the directory does not match this corpus.
        if let Some(prev) = m.chunks.get(chunk_id as usize) {
            if prev.sha256 != sha256 {
                return Err(IndexError::ChecksumMismatch {
                    reason: format!(
                        "chunk {chunk_id} encodes to {sha256} but the existing \
                         index recorded {}; corpus and index disagree",
                        prev.sha256
                    ),
                });
            }
            // And the file on disk must be the one the manifest describes;
            // overwriting bytes we cannot account for would hide corruption.
            if path.exists() {
                let on_disk = crate::conllu::hex(&Sha256::digest(&fs::read(&path)?));
                if on_disk != prev.sha256 {
                    return Err(IndexError::ChecksumMismatch {
                        reason: format!(
                            "{} hashes to {on_disk} but the manifest recorded {}; \
                             refusing to overwrite a file that does not match its manifest",
                            path.display(),
                            prev.sha256
                        ),
                    });
                }
                return Ok(ChunkMeta {
                    file,
                    chunk_id,
                    sentences: range.len() as u64,
                    sha256,
                });
            }
        }
    }
    let tmp = dir.join(format!("{file}.tmp"));
    fs::write(&tmp, &bytes)?;
    fs::rename(&tmp, &path)?;
    Ok(ChunkMeta {
        file,
        chunk_id,
        sentences: range.len() as u64,
        sha256,
    })
}

/// One hit from a key lookup.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Posting {
    pub chunk_id: u32,
    pub doc_id: String,
    pub sent_index: u32,
    pub token_id: u32,
}

/// Reader over a full index directory.
#[derive(Debug)]
pub struct IndexReader {
    pub manifest: IndexManifest,
    dir: PathBuf,
    chunks: Vec<ChunkReader>,
}

impl IndexReader {
    pub fn open(dir: &Path) -> Result<IndexReader, IndexError> {
        let manifest = IndexManifest::load(dir)?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(IndexError::UnsupportedVersion {
                found: manifest.format_version,
                supported: FORMAT_VERSION,
            });
        }
        let mut chunks = Vec::with_capacity(manifest.chunks.len());
        for meta in &manifest.chunks {
            let reader = ChunkReader::open(&dir.join(&meta.file), meta.chunk_id)?;
            if u64::from(reader.sentence_count()) != meta.sentences {
                return Err(IndexError::CorruptChunk {
                    chunk_id: meta.chunk_id,
                    reason: format!(
                        "chunk holds {} sentences but the manifest records {}",
                        reader.sentence_count(),
                        meta.sentences
                    ),
                });
            }
            if reader.max_depth != manifest.max_depth {
                return Err(IndexError::CorruptChunk {
                    chunk_id: meta.chunk_id,
                    reason: format!(
                        "chunk was keyed to depth {} but the manifest says {}",
                        reader.max_depth, manifest.max_depth
                    ),
                });
            }
            chunks.push(reader);
        }
        Ok(IndexReader {
            manifest,
            dir: dir.to_path_buf(),
            chunks,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn max_depth(&self) -> u32 {
        self.manifest.max_depth
    }

    pub fn total_sentences(&self) -> u64 {
        self.manifest.total_sentences
    }

    pub fn chunk_readers(&self) -> &[ChunkReader] {
        &self.chunks
    }

    /// All postings for one chain key, in (chunk, doc, sent, token) order.
    pub fn lookup(&self, key: &ChainKey) -> Result<Vec<Posting>, IndexError> {
        let mut out = Vec::new();
        for chunk in &self.chunks {
            for (ordinal, token_id) in chunk.lookup(key)? {
                let (doc_id, sent_index) = chunk.sentence_ref(ordinal)?;
                out.push(Posting {
                    chunk_id: chunk.chunk_id,
                    doc_id,
                    sent_index,
                    token_id,
                });
            }
        }
        Ok(out)
    }

    /// Fetch the stored sentence behind a posting.
    pub fn sentence_at(&self, chunk_id: u32, ordinal: u32) -> Result<ParsedSentence, IndexError> {
        let chunk = self
            .chunks
            .get(chunk_id as usize)
            .ok_or_else(|| IndexError::CorruptChunk {
                chunk_id,
                reason: "no such chunk in this index".to_string(),
            })?;
        chunk.sentence(ordinal)
    }

    /// Iterate every stored sentence, chunk by chunk.
    pub fn sentences(&self) -> impl Iterator<Item = Result<ParsedSentence, IndexError>> + '_ {
        self.chunks.iter().flat_map(|chunk| {
            (0..chunk.sentence_count()).map(move |ordinal| chunk.sentence(ordinal))
        })
    }
}
