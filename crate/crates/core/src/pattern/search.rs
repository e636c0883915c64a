//! Index-accelerated pattern search.
//!
//! A pattern node together with its pattern ancestors describes exactly the
//! upward chain the index keys: the node's arc/POS, its parent's arc/POS,
//! and so on. The planner picks the most selective such chain (most pinned
//! lemmas, then longest), probes the index for candidate sentences, and runs
//! the exact matcher over just those. Every true match token satisfies its
//! node's chain, so probing is a pure filter — no match can be lost. When a
//! pattern has no node with both arc and POS there is nothing to probe and
//! search degrades to a full scan of the stored sentences.

use log::warn;

use crate::error::IndexError;
use crate::index::{ChainKey, ChainStep, IndexReader, ROOT_STEP};

use super::matcher::{match_sentence, MatchBinding};
use super::{DepPattern, PatternNode, ROOT_ARC};

/// One stored sentence and everything the pattern matched in it.
#[derive(Debug, Clone)]
pub struct SentenceMatches {
    pub sentence: crate::conllu::ParsedSentence,
    pub bindings: Vec<MatchBinding>,
}

/// Result of one pattern search over an index.
#[derive(Debug, Clone)]
pub struct SearchHits {
    pub pattern_id: String,
    /// The chain key probed, if one was planned.
    pub plan: Option<ChainKey>,
    /// True when no chain was usable and every sentence was scanned.
    pub full_scan: bool,
    /// Sentences the matcher was run on.
    pub candidates: u64,
    /// Corpus-order list of sentences with at least one match.
    pub sentences: Vec<SentenceMatches>,
}

impl SearchHits {
    pub fn match_count(&self) -> usize {
        self.sentences.iter().map(|s| s.bindings.len()).sum()
    }
}

/// Choose the chain key to probe for `pattern`, or `None` when no node
/// offers a usable chain. Chains longer than `max_depth` are truncated to
/// their first `max_depth` steps, which only widens the candidate set.
pub fn plan_key(pattern: &DepPattern, max_depth: u32) -> Option<ChainKey> {
    let mut best: Option<(usize, usize, ChainKey)> = None; // (lemmas, len, key)
    let mut path: Vec<&PatternNode> = Vec::new();
    fn visit<'a>(
        node: &'a PatternNode,
        path: &mut Vec<&'a PatternNode>,
        max_depth: u32,
        best: &mut Option<(usize, usize, ChainKey)>,
    ) {
        path.push(node);
        let mut steps = Vec::new();
        for n in path.iter().rev() {
            let (Some(arc), Some(pos)) = (&n.arc, &n.pos) else {
                break;
            };
            if steps.len() as u32 == max_depth {
                break;
            }
            steps.push(ChainStep {
                deprel: if arc == ROOT_ARC {
                    ROOT_STEP.to_string()
                } else {
                    arc.clone()
                },
                xpos: pos.clone(),
                lemma: n.lemma.clone(),
            });
        }
        if !steps.is_empty() {
            let lemmas = steps.iter().filter(|s| s.lemma.is_some()).count();
            let len = steps.len();
            // Strict comparison keeps the first (preorder) best on ties.
            if best
                .as_ref()
                .map(|(bl, bn, _)| (lemmas, len) > (*bl, *bn))
                .unwrap_or(true)
            {
                *best = Some((lemmas, len, ChainKey { steps }));
            }
        }
        for child in &node.children {
            visit(child, path, max_depth, best);
        }
        path.pop();
    }
    visit(&pattern.root, &mut path, max_depth, &mut best);
    best.map(|(_, _, key)| key)
}

/// Match `pattern` against every sentence the index candidates for it.
pub fn search(reader: &IndexReader, pattern: &DepPattern) -> Result<SearchHits, IndexError> {
    let Some(key) = plan_key(pattern, reader.max_depth()) else {
        warn!(
            "pattern {} has no node with both arc and POS; scanning every sentence",
            pattern.pattern_id
        );
        let mut hits = scan_index(reader, pattern)?;
        hits.full_scan = true;
        return Ok(hits);
    };
    let mut hits = SearchHits {
        pattern_id: pattern.pattern_id.clone(),
        plan: Some(key.clone()),
        full_scan: false,
        candidates: 0,
        sentences: Vec::new(),
    };
    for chunk in reader.chunk_readers() {
        let mut ordinals: Vec<u32> = chunk.lookup(&key)?.into_iter().map(|(o, _)| o).collect();
        ordinals.sort_unstable();
        ordinals.dedup();
        hits.candidates += ordinals.len() as u64;
        for ordinal in ordinals {
            let sentence = chunk.sentence(ordinal)?;
            let bindings = match_sentence(pattern, &sentence);
            if !bindings.is_empty() {
                hits.sentences.push(SentenceMatches { sentence, bindings });
            }
        }
    }
    Ok(hits)
}

/// Match `pattern` against every stored sentence, no planning. The slow
/// reference path: `search` must agree with this exactly.
pub fn scan_index(reader: &IndexReader, pattern: &DepPattern) -> Result<SearchHits, IndexError> {
    let mut hits = SearchHits {
        pattern_id: pattern.pattern_id.clone(),
        plan: None,
        full_scan: true,
        candidates: reader.total_sentences(),
        sentences: Vec::new(),
    };
    for sentence in reader.sentences() {
        let sentence = sentence?;
        let bindings = match_sentence(pattern, &sentence);
        if !bindings.is_empty() {
            hits.sentences.push(SentenceMatches { sentence, bindings });
        }
    }
    Ok(hits)
}
