//! Reference matcher: brute-force, injective embedding of a pattern tree
//! into a sentence tree.
//!
//! Every pattern node must bind a distinct token satisfying its arc, POS and
//! lemma constraints, and every pattern edge must correspond to a head link.
//! All embeddings are enumerated; results are deduplicated by (anchor,
//! capture map) — embeddings that differ only in non-captured nodes collapse
//! — and reported in sorted order, so output is deterministic.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::conllu::{ParsedSentence, Token};

use super::{DepPattern, PatternNode, ROOT_ARC};

/// A successful match: where it happened and which token each capture
/// variable bound.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MatchBinding {
    pub doc_id: String,
    pub sent_index: u32,
    pub pattern_id: String,
    /// (capture index, token id), sorted by capture index.
    pub bindings: Vec<(u32, u32)>,
    /// Token bound by the pattern's syntactic root.
    pub anchor: u32,
}

impl MatchBinding {
    /// Token id bound to capture `$var`, if any.
    pub fn capture(&self, var: u32) -> Option<u32> {
        self.bindings
            .iter()
            .find(|(v, _)| *v == var)
            .map(|(_, t)| *t)
    }
}

pub(crate) fn node_admits(node: &PatternNode, token: &Token) -> bool {
    if let Some(arc) = &node.arc {
        if arc == ROOT_ARC {
            if token.head != 0 {
                return false;
            }
        } else if token.deprel != *arc {
            return false;
        }
    }
    if let Some(pos) = &node.pos {
        if token.xpos != *pos {
            return false;
        }
    }
    if let Some(lemma) = &node.lemma {
        if token.lemma != *lemma {
            return false;
        }
    }
    true
}

/// Match `pattern` against one sentence, enumerating every embedding.
///
/// Pure and deterministic: bindings are sorted by (anchor, capture map).
pub fn match_sentence(pattern: &DepPattern, sentence: &ParsedSentence) -> Vec<MatchBinding> {
    let mut results: BTreeSet<(u32, Vec<(u32, u32)>)> = BTreeSet::new();
    let mut used: Vec<u32> = Vec::new();
    for root_token in &sentence.tokens {
        if node_admits(&pattern.root, root_token) {
            used.push(root_token.id);
            let mut captures = Vec::new();
            if let Some(v) = pattern.root.var {
                captures.push((v, root_token.id));
            }
            embed_children(
                &pattern.root,
                root_token.id,
                sentence,
                &mut used,
                &mut captures,
                root_token.id,
                &mut results,
            );
            used.pop();
        }
    }
    results
        .into_iter()
        .map(|(anchor, mut bindings)| {
            bindings.sort_unstable();
            MatchBinding {
                doc_id: sentence.doc_id.clone(),
                sent_index: sentence.sent_index,
                pattern_id: pattern.pattern_id.clone(),
                bindings,
                anchor,
            }
        })
        .collect()
}

// Depth-first assignment of the children of a matched pattern node. `used`
// enforces injectivity across the whole embedding.
fn embed_children(
    node: &PatternNode,
    token_id: u32,
    sentence: &ParsedSentence,
    used: &mut Vec<u32>,
    captures: &mut Vec<(u32, u32)>,
    anchor: u32,
    results: &mut BTreeSet<(u32, Vec<(u32, u32)>)>,
) {
    fn recurse(
        pending: &[(&PatternNode, u32)],
        sentence: &ParsedSentence,
        used: &mut Vec<u32>,
        captures: &mut Vec<(u32, u32)>,
        anchor: u32,
        results: &mut BTreeSet<(u32, Vec<(u32, u32)>)>,
    ) {
        let Some(&(child, parent_token)) = pending.first() else {
            let mut sorted = captures.clone();
            sorted.sort_unstable();
            results.insert((anchor, sorted));
            return;
        };
        for token in &sentence.tokens {
            if token.head != parent_token || used.contains(&token.id) || !node_admits(child, token)
            {
                continue;
            }
            used.push(token.id);
            if let Some(v) = child.var {
                captures.push((v, token.id));
            }
            // This child's own children go on the queue ahead of siblings.
            let mut next: Vec<(&PatternNode, u32)> =
                child.children.iter().map(|c| (c, token.id)).collect();
            next.extend_from_slice(&pending[1..]);
            recurse(&next, sentence, used, captures, anchor, results);
            if child.var.is_some() {
                captures.pop();
            }
            used.pop();
        }
    }

    let pending: Vec<(&PatternNode, u32)> = node.children.iter().map(|c| (c, token_id)).collect();
    recurse(&pending, sentence, used, captures, anchor, results);
}
