//! CoNLL-U ingestion: parse dependency-annotated corpora into validated
//! in-memory sentence trees.
//!
//! Only the columns the pipeline consumes are kept: ID, FORM, LEMMA
//! (lowercased on the way in), XPOS, HEAD and DEPREL. Multiword-token ranges
//! (`3-4`) and empty nodes (`3.1`) are skipped. A malformed *line* aborts
//! ingestion with an error naming file and line; a well-formed sentence that
//! fails tree validation is dropped and counted in a skip report, because
//! web-scale corpora always contain a few broken parses.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::IngestError;

/// One token of a dependency-parsed sentence.
///
/// `head` is the 1-based id of the governing token, or 0 for the sentence
/// root. `xpos` holds Penn-Treebank-style tags (`NNS`, `VBP`, `IN`, ...) and
/// `deprel` the arc label to the head (`nsubj`, `pobj`, ...); both are
/// treated as opaque strings everywhere downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: u32,
    pub form: String,
    pub lemma: String,
    pub xpos: String,
    pub head: u32,
    pub deprel: String,
}

/// One validated dependency tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSentence {
    pub doc_id: String,
    pub sent_index: u32,
    pub tokens: Vec<Token>,
    pub root_id: u32,
}

impl ParsedSentence {
    /// Token by 1-based id. Ids are contiguous, so this is an array access.
    pub fn token(&self, id: u32) -> Option<&Token> {
        if id == 0 {
            return None;
        }
        self.tokens.get(id as usize - 1)
    }

    /// Ids of the direct dependents of `id`, in surface order.
    pub fn children(&self, id: u32) -> Vec<u32> {
        self.tokens
            .iter()
            .filter(|t| t.head == id)
            .map(|t| t.id)
            .collect()
    }

    /// Ids of the full subtree under `head_id` (inclusive), sorted ascending.
    pub fn subtree_ids(&self, head_id: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![head_id];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.children(id));
        }
        out.sort_unstable();
        out
    }

    /// Surface forms joined by single spaces, without detokenization.
    pub fn plain_text(&self) -> String {
        let forms: Vec<&str> = self.tokens.iter().map(|t| t.form.as_str()).collect();
        forms.join(" ")
    }
}

/// A corpus plus the provenance of the files it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub sentences: Vec<ParsedSentence>,
    pub source_manifest: Vec<SourceFile>,
}

/// Path and content checksum of one ingested file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub sha256: String,
}

/// First invariant a sentence violates, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    Empty,
    NonContiguousIds { expected: u32, found: u32 },
    EmptyField { id: u32, field: &'static str },
    SelfHeaded { id: u32 },
    DanglingHead { id: u32, head: u32 },
    CyclicHeadChain { id: u32 },
    NoRoot,
    MultipleRoots { first: u32, second: u32 },
    RootIdMismatch { recorded: u32, actual: u32 },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::Empty => write!(f, "empty sentence"),
            TreeViolation::NonContiguousIds { expected, found } => {
                write!(
                    f,
                    "non-contiguous token ids: expected {expected}, found {found}"
                )
            }
            TreeViolation::EmptyField { id, field } => {
                write!(f, "token {id} has an empty {field}")
            }
            TreeViolation::SelfHeaded { id } => write!(f, "token {id} is its own head"),
            TreeViolation::DanglingHead { id, head } => {
                write!(
                    f,
                    "dangling head: token {id} points at missing token {head}"
                )
            }
            TreeViolation::CyclicHeadChain { id } => {
                write!(f, "cyclic head chain through token {id}")
            }
            TreeViolation::NoRoot => write!(f, "no root token"),
            TreeViolation::MultipleRoots { first, second } => {
                write!(f, "multiple root tokens ({first} and {second})")
            }
            TreeViolation::RootIdMismatch { recorded, actual } => {
                write!(
                    f,
                    "recorded root_id {recorded} but token {actual} is the root"
                )
            }
        }
    }
}

/// Check the `ParsedSentence` invariants, returning the first violation.
///
/// Pure; never panics. With contiguous ids, valid heads, no cycles and
/// exactly one root the head links necessarily form a connected tree, so
/// these checks are complete.
pub fn validate_tree(sentence: &ParsedSentence) -> Result<(), TreeViolation> {
    let tokens = &sentence.tokens;
    if tokens.is_empty() {
        return Err(TreeViolation::Empty);
    }
    let n = tokens.len() as u32;
    for (i, t) in tokens.iter().enumerate() {
        let expected = i as u32 + 1;
        if t.id != expected {
            return Err(TreeViolation::NonContiguousIds {
                expected,
                found: t.id,
            });
        }
        if t.xpos.is_empty() || t.xpos == "_" {
            return Err(TreeViolation::EmptyField {
                id: t.id,
                field: "xpos",
            });
        }
        if t.deprel.is_empty() || t.deprel == "_" {
            return Err(TreeViolation::EmptyField {
                id: t.id,
                field: "deprel",
            });
        }
        if t.head == t.id {
            return Err(TreeViolation::SelfHeaded { id: t.id });
        }
        if t.head > n {
            return Err(TreeViolation::DanglingHead {
                id: t.id,
                head: t.head,
            });
        }
    }
    // Walk each head chain; more than n steps means a cycle.
    for t in tokens {
        let mut cur = t.head;
        let mut steps = 0u32;
        while cur != 0 {
            cur = tokens[cur as usize - 1].head;
            steps += 1;
            if steps > n {
                return Err(TreeViolation::CyclicHeadChain { id: t.id });
            }
        }
    }
    let mut root = None;
    for t in tokens {
        if t.head == 0 {
            match root {
                None => root = Some(t.id),
                Some(first) => {
                    return Err(TreeViolation::MultipleRoots {
                        first,
                        second: t.id,
                    })
                }
            }
        }
    }
    match root {
        None => Err(TreeViolation::NoRoot),
        Some(id) if id != sentence.root_id => Err(TreeViolation::RootIdMismatch {
            recorded: sentence.root_id,
            actual: id,
        }),
        Some(_) => Ok(()),
    }
}

/// One dropped sentence, for the machine-readable skip report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipEntry {
    pub file: String,
    pub line: u64,
    pub reason: String,
}

/// Counts and skip entries from one ingestion run.
///
/// Invariant: `accepted + skipped.len() == blocks`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub blocks: u64,
    pub accepted: u64,
    pub skipped: Vec<SkipEntry>,
}

impl IngestReport {
    fn merge(&mut self, other: IngestReport) {
        self.blocks += other.blocks;
        self.accepted += other.accepted;
        self.skipped.extend(other.skipped);
    }
}

/// Parse one CoNLL-U stream.
///
/// `file_label` names the stream in errors and skip entries. `default_doc`
/// is the doc id used until a `# newdoc id = ...` comment overrides it;
/// sentence indices count per document, starting at 0.
pub fn parse_conllu<R: BufRead>(
    reader: R,
    file_label: &str,
    default_doc: &str,
) -> Result<(Vec<ParsedSentence>, IngestReport), IngestError> {
    let mut sentences = Vec::new();
    let mut report = IngestReport::default();
    let mut doc_id = default_doc.to_string();
    let mut next_index: BTreeMap<String, u32> = BTreeMap::new();
    let mut block: Vec<Token> = Vec::new();
    let mut block_start_line = 0u64;
    let mut line_no = 0u64;

    let flush = |block: &mut Vec<Token>,
                 doc_id: &str,
                 start_line: u64,
                 next_index: &mut BTreeMap<String, u32>,
                 sentences: &mut Vec<ParsedSentence>,
                 report: &mut IngestReport| {
        if block.is_empty() {
            return;
        }
        report.blocks += 1;
        let tokens = std::mem::take(block);
        let root_id = tokens.iter().find(|t| t.head == 0).map_or(0, |t| t.id);
        let index_slot = next_index.entry(doc_id.to_string()).or_insert(0);
        let sentence = ParsedSentence {
            doc_id: doc_id.to_string(),
            sent_index: *index_slot,
            tokens,
            root_id,
        };
        match validate_tree(&sentence) {
            Ok(()) => {
                *index_slot += 1;
                report.accepted += 1;
                sentences.push(sentence);
            }
            Err(v) => report.skipped.push(SkipEntry {
                file: file_label.to_string(),
                line: start_line,
                reason: v.to_string(),
            }),
        }
    };

    for line in reader.lines() {
        line_no += 1;
        let line = line.map_err(|e| IngestError::Io {
            path: file_label.to_string(),
            source: e,
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            flush(
                &mut block,
                &doc_id,
                block_start_line,
                &mut next_index,
                &mut sentences,
                &mut report,
            );
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("newdoc id") {
                let value = value.trim_start().strip_prefix('=').unwrap_or(value);
                doc_id = value.trim().to_string();
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(IngestError::Malformed {
                file: file_label.to_string(),
                line: line_no,
                reason: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        // Multiword ranges ("3-4") and empty nodes ("3.1") are not tree nodes.
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let id: u32 = cols[0].parse().map_err(|_| IngestError::Malformed {
            file: file_label.to_string(),
            line: line_no,
            reason: format!("non-numeric ID {:?}", cols[0]),
        })?;
        let head: u32 = cols[6].parse().map_err(|_| IngestError::Malformed {
            file: file_label.to_string(),
            line: line_no,
            reason: format!("non-numeric HEAD {:?}", cols[6]),
        })?;
        if block.is_empty() {
            block_start_line = line_no;
        }
        block.push(Token {
            id,
            form: cols[1].to_string(),
            lemma: cols[2].to_lowercase(),
            xpos: cols[4].to_string(),
            head,
            deprel: cols[7].to_string(),
        });
    }
    flush(
        &mut block,
        &doc_id,
        block_start_line,
        &mut next_index,
        &mut sentences,
        &mut report,
    );
    Ok((sentences, report))
}

/// Ingest several files into one corpus, recording per-file checksums.
///
/// Files are independent, so the order of `paths` fixes the sentence order.
/// The default doc id of each file is its stem.
pub fn ingest_files<P: AsRef<Path>>(paths: &[P]) -> Result<(Corpus, IngestReport), IngestError> {
    let mut corpus = Corpus {
        sentences: Vec::new(),
        source_manifest: Vec::new(),
    };
    let mut report = IngestReport::default();
    for p in paths {
        let path: &Path = p.as_ref();
        let label = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|e| IngestError::Io {
            path: label.clone(),
            source: e,
        })?;
        let digest = Sha256::digest(&bytes);
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| label.clone());
        let (sentences, file_report) = parse_conllu(BufReader::new(&bytes[..]), &label, &stem)?;
        corpus.sentences.extend(sentences);
        corpus.source_manifest.push(SourceFile {
            path: label,
            sha256: hex(&digest),
        });
        report.merge(file_report);
    }
    Ok((corpus, report))
}

/// Resolve corpus file paths: plain files pass through, directories expand
/// to their `*.conllu` files sorted by name.
pub fn resolve_corpus_paths<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<PathBuf>, IngestError> {
    let mut out = Vec::new();
    for p in paths {
        let path: &Path = p.as_ref();
        if path.is_dir() {
            let mut found = Vec::new();
            let entries = std::fs::read_dir(path).map_err(|e| IngestError::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            for entry in entries {
                let entry = entry.map_err(|e| IngestError::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                let p = entry.path();
                if p.extension().is_some_and(|e| e == "conllu") {
                    found.push(p);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(path.to_path_buf());
        }
    }
    Ok(out)
}

/// Serialize sentences back to CoNLL-U, covering exactly the ingested
/// columns. Out-of-scope columns are written as `_`; document boundaries
/// become `# newdoc id = ...` comments. Re-parsing the output yields the
/// same sentences (round-trip property).
pub fn to_conllu(sentences: &[ParsedSentence]) -> String {
    let mut out = String::new();
    let mut current_doc: Option<&str> = None;
    for s in sentences {
        if current_doc != Some(s.doc_id.as_str()) {
            out.push_str("# newdoc id = ");
            out.push_str(&s.doc_id);
            out.push('\n');
            current_doc = Some(s.doc_id.as_str());
        }
        for t in &s.tokens {
            out.push_str(&format!(
                "{}\t{}\t{}\t_\t{}\t_\t{}\t{}\t_\t_\n",
                t.id, t.form, t.lemma, t.xpos, t.head, t.deprel
            ));
        }
        out.push('\n');
    }
    out
}

/// Open a file and parse it; convenience for single-file callers.
pub fn parse_conllu_file(path: &Path) -> Result<(Vec<ParsedSentence>, IngestReport), IngestError> {
    let label = path.display().to_string();
    let file = File::open(path).map_err(|e| IngestError::Io {
        path: label.clone(),
        source: e,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| label.clone());
    parse_conllu(BufReader::new(file), &label, &stem)
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}
