//! Deterministic synthetic corpora and random trees for tests and benches.
//!
//! Every sentence is a pure function of (seed, position): generation seeds
//! one ChaCha8 generator per sentence on its own stream, so producing
//! sentences 0..1M and sentences 370k..380k yield identical trees in the
//! overlap. That makes the streamed chunk supplier trivially consistent
//! across worker threads and across runs.
//!
//! The corpus mixes plain SVO clauses with a small share of "X such as Y"
//! and "X like Y" structures, and plants one sentence per [`RARE_INTERVAL`]
//! containing the preposition [`RARE_LEMMA`] — a needle for exercising
//! index probes against full scans.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conllu::{ParsedSentence, Token};

/// Planted needle lemma; appears once per [`RARE_INTERVAL`] sentences.
pub const RARE_LEMMA: &str = "notwithstanding";
/// Spacing of the planted needle.
pub const RARE_INTERVAL: usize = 1000;
/// Offset of the needle within each interval.
const RARE_PHASE: usize = 500;
/// Sentences per synthetic document.
const DOC_SIZE: usize = 1000;
/// Share of sentences carrying a "such as" construction.
const HEARST_RATE: f64 = 0.05;

/// A pattern that only the planted needle sentences can match.
pub fn rare_pattern_source() -> String {
    format!("ROOT:VBP$0 <[prep:IN`{RARE_LEMMA}' < pobj:NN$1]")
}

const PLURALS: &[(&str, &str)] = &[
    ("animals", "animal"),
    ("rivers", "river"),
    ("teas", "tea"),
    ("metals", "metal"),
    ("birds", "bird"),
    ("plants", "plant"),
    ("engines", "engine"),
    ("signals", "signal"),
    ("tools", "tool"),
    ("languages", "language"),
];

const PROPERS: &[&str] = &["Latin", "Egypt", "Mars", "Oslo", "Zinc", "Python"];

const OBJECTS: &[(&str, &str)] = &[
    ("water", "water"),
    ("food", "food"),
    ("energy", "energy"),
    ("shelter", "shelter"),
    ("oxygen", "oxygen"),
    ("heat", "heat"),
];

const VERBS: &[(&str, &str)] = &[
    ("provide", "provide"),
    ("require", "require"),
    ("produce", "produce"),
    ("carry", "carry"),
    ("support", "support"),
    ("consume", "consume"),
];

const ADJECTIVES: &[&str] = &["small", "common", "modern", "rare", "sturdy"];

fn tok(id: u32, form: &str, lemma: &str, xpos: &str, head: u32, deprel: &str) -> Token {
    Token {
        id,
        form: form.to_string(),
        lemma: lemma.to_string(),
        xpos: xpos.to_string(),
        head,
        deprel: deprel.to_string(),
    }
}

fn capitalized(word: &str) -> String {
    crate::morph::capitalize_first(word)
}

/// "The animals provide the water ."
fn svo(rng: &mut ChaCha8Rng) -> Vec<Token> {
    let subj = PLURALS[rng.random_range(0..PLURALS.len())];
    let verb = VERBS[rng.random_range(0..VERBS.len())];
    let obj = OBJECTS[rng.random_range(0..OBJECTS.len())];
    vec![
        tok(1, "The", "the", "DT", 2, "det"),
        tok(2, &capitalized(subj.0), subj.1, "NNS", 3, "nsubj"),
        tok(3, verb.0, verb.1, "VBP", 0, "ROOT"),
        tok(4, "the", "the", "DT", 5, "det"),
        tok(5, obj.0, obj.1, "NN", 3, "dobj"),
        tok(6, ".", ".", ".", 3, "punct"),
    ]
}

/// "Animals such as Latin provide the water ." — nonsense prose, sound tree.
/// Half the time the connector is a bare "like" instead of "such as".
fn hearst(rng: &mut ChaCha8Rng) -> Vec<Token> {
    let subj = PLURALS[rng.random_range(0..PLURALS.len())];
    let prop = PROPERS[rng.random_range(0..PROPERS.len())];
    let verb = VERBS[rng.random_range(0..VERBS.len())];
    let obj = OBJECTS[rng.random_range(0..OBJECTS.len())];
    if rng.random::<f64>() < 0.5 {
        return vec![
            tok(1, &capitalized(subj.0), subj.1, "NNS", 4, "nsubj"),
            tok(2, "like", "like", "IN", 1, "prep"),
            tok(3, prop, &prop.to_lowercase(), "NNP", 2, "pobj"),
            tok(4, verb.0, verb.1, "VBP", 0, "ROOT"),
            tok(5, "the", "the", "DT", 6, "det"),
            tok(6, obj.0, obj.1, "NN", 4, "dobj"),
            tok(7, ".", ".", ".", 4, "punct"),
        ];
    }
    vec![
        tok(1, &capitalized(subj.0), subj.1, "NNS", 5, "nsubj"),
        tok(2, "such", "such", "JJ", 3, "amod"),
        tok(3, "as", "as", "IN", 1, "prep"),
        tok(4, prop, &prop.to_lowercase(), "NNP", 3, "pobj"),
        tok(5, verb.0, verb.1, "VBP", 0, "ROOT"),
        tok(6, "the", "the", "DT", 7, "det"),
        tok(7, obj.0, obj.1, "NN", 5, "dobj"),
        tok(8, ".", ".", ".", 5, "punct"),
    ]
}

/// "The birds carry the food notwithstanding the heat ."
fn rare(rng: &mut ChaCha8Rng) -> Vec<Token> {
    let subj = PLURALS[rng.random_range(0..PLURALS.len())];
    let verb = VERBS[rng.random_range(0..VERBS.len())];
    let obj = OBJECTS[rng.random_range(0..OBJECTS.len())];
    let place = OBJECTS[rng.random_range(0..OBJECTS.len())];
    vec![
        tok(1, "The", "the", "DT", 2, "det"),
        tok(2, &capitalized(subj.0), subj.1, "NNS", 3, "nsubj"),
        tok(3, verb.0, verb.1, "VBP", 0, "ROOT"),
        tok(4, "the", "the", "DT", 5, "det"),
        tok(5, obj.0, obj.1, "NN", 3, "dobj"),
        tok(6, RARE_LEMMA, RARE_LEMMA, "IN", 3, "prep"),
        tok(7, "the", "the", "DT", 8, "det"),
        tok(8, place.0, place.1, "NN", 6, "pobj"),
        tok(9, ".", ".", ".", 3, "punct"),
    ]
}

/// "The engines are sturdy ."
fn copular(rng: &mut ChaCha8Rng) -> Vec<Token> {
    let subj = PLURALS[rng.random_range(0..PLURALS.len())];
    let adj = ADJECTIVES[rng.random_range(0..ADJECTIVES.len())];
    vec![
        tok(1, "The", "the", "DT", 2, "det"),
        tok(2, &capitalized(subj.0), subj.1, "NNS", 3, "nsubj"),
        tok(3, "are", "be", "VBP", 0, "ROOT"),
        tok(4, adj, adj, "JJ", 3, "acomp"),
        tok(5, ".", ".", ".", 3, "punct"),
    ]
}

/// Sentence at `idx` of the corpus seeded by `seed`.
pub fn synth_sentence(seed: u64, idx: usize) -> ParsedSentence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(idx as u64);
    let tokens = if idx % RARE_INTERVAL == RARE_PHASE {
        rare(&mut rng)
    } else if rng.random::<f64>() < HEARST_RATE {
        hearst(&mut rng)
    } else if rng.random::<f64>() < 0.2 {
        copular(&mut rng)
    } else {
        svo(&mut rng)
    };
    let root_id = tokens
        .iter()
        .find(|t| t.head == 0)
        .map(|t| t.id)
        .expect("every shape has a root");
    ParsedSentence {
        doc_id: format!("synth-{:06}", idx / DOC_SIZE),
        sent_index: (idx % DOC_SIZE) as u32,
        tokens,
        root_id,
    }
}

/// Sentences for `range` — a supplier for streamed index builds.
pub fn synth_range(seed: u64, range: Range<usize>) -> Vec<ParsedSentence> {
    range.map(|idx| synth_sentence(seed, idx)).collect()
}

pub fn synth_corpus(seed: u64, n: usize) -> Vec<ParsedSentence> {
    synth_range(seed, 0..n)
}

// ---------------------------------------------------------------------------
// Random trees and patterns for oracle tests

const DEPRELS: &[&str] = &[
    "nsubj", "dobj", "prep", "pobj", "amod", "det", "advmod", "conj",
];
const XPOS: &[&str] = &["NNS", "NN", "NNP", "VBP", "JJ", "IN", "DT", "RB"];
const LEMMAS: &[&str] = &[
    "as", "like", "with", "that", "tea", "animal", "provide", "such", "the", "old", "in", "be",
];

/// A uniformly random labelled tree over `n` tokens. Attachment order is a
/// random permutation, so any token (not just the last) can be the root and
/// arcs cross freely.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> ParsedSentence {
    assert!(n >= 1);
    let mut order: Vec<u32> = (1..=n as u32).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut heads = vec![0u32; n + 1];
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        heads[order[k] as usize] = parent;
    }
    let root = order[0];
    let tokens: Vec<Token> = (1..=n as u32)
        .map(|id| {
            let lemma = LEMMAS[rng.random_range(0..LEMMAS.len())];
            let (xpos, deprel) = if id == root {
                ("VBP", "ROOT".to_string())
            } else {
                (
                    XPOS[rng.random_range(0..XPOS.len())],
                    DEPRELS[rng.random_range(0..DEPRELS.len())].to_string(),
                )
            };
            Token {
                id,
                form: lemma.to_string(),
                lemma: lemma.to_string(),
                xpos: xpos.to_string(),
                head: heads[id as usize],
                deprel,
            }
        })
        .collect();
    ParsedSentence {
        doc_id: "random".to_string(),
        sent_index: 0,
        tokens,
        root_id: root,
    }
}

struct PatternNode {
    arc: Option<String>,
    pos: Option<String>,
    lemma: Option<String>,
    capture: usize,
    children: Vec<PatternNode>,
}

fn random_pattern_node(rng: &mut impl Rng, next_capture: &mut usize, depth: usize) -> PatternNode {
    let arc = match rng.random_range(0..10) {
        0 => Some("ROOT".to_string()),
        1 | 2 => None,
        _ => Some(DEPRELS[rng.random_range(0..DEPRELS.len())].to_string()),
    };
    let pos =
        (rng.random::<f64>() < 0.6).then(|| XPOS[rng.random_range(0..XPOS.len())].to_string());
    let lemma =
        (rng.random::<f64>() < 0.4).then(|| LEMMAS[rng.random_range(0..LEMMAS.len())].to_string());
    let capture = *next_capture;
    *next_capture += 1;
    let mut children = Vec::new();
    if depth < 2 {
        for _ in 0..rng.random_range(0..=2) {
            if *next_capture >= 4 {
                break;
            }
            children.push(random_pattern_node(rng, next_capture, depth + 1));
        }
    }
    PatternNode {
        arc,
        pos,
        lemma,
        capture,
        children,
    }
}

fn serialize_node(node: &PatternNode, rng: &mut impl Rng, out: &mut String) {
    if let Some(arc) = &node.arc {
        out.push_str(arc);
        out.push(':');
    }
    if let Some(pos) = &node.pos {
        out.push_str(pos);
    }
    if let Some(lemma) = &node.lemma {
        // Both quote styles are accepted; exercise each.
        let (open, close) = if rng.random::<bool>() {
            ('`', '\'')
        } else {
            ('\'', '\'')
        };
        out.push(open);
        out.push_str(lemma);
        out.push(close);
    }
    out.push('$');
    out.push_str(&node.capture.to_string());
    for child in &node.children {
        out.push_str(" <[");
        serialize_node(child, rng, out);
        out.push(']');
    }
}

/// A random well-formed pattern drawn from the same label pools as
/// [`random_tree`], so matches are reasonably likely.
pub fn random_pattern_source(rng: &mut impl Rng) -> String {
    let mut next_capture = 0;
    let node = random_pattern_node(rng, &mut next_capture, 0);
    let mut out = String::new();
    serialize_node(&node, rng, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conllu::validate_tree;
    use crate::pattern::DepPattern;

    #[test]
    fn sentences_are_position_pure() {
        let a = synth_sentence(9, 123_456);
        let b = synth_range(9, 123_000..124_000);
        assert_eq!(a, b[456]);
        assert_ne!(synth_sentence(9, 1), synth_sentence(10, 1));
    }

    #[test]
    fn sentences_are_valid_trees() {
        for s in synth_corpus(7, 2500) {
            validate_tree(&s).unwrap();
        }
    }

    #[test]
    fn needle_spacing() {
        let corpus = synth_corpus(7, 3000);
        let needles: Vec<usize> = corpus
            .iter()
            .enumerate()
            .filter(|(_, s)| s.tokens.iter().any(|t| t.lemma == RARE_LEMMA))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(needles, vec![500, 1500, 2500]);
        DepPattern::parse("needle", &rare_pattern_source()).unwrap();
    }

    #[test]
    fn random_trees_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen_nonlast_root = false;
        for _ in 0..200 {
            let n = rng.random_range(1..=20);
            let t = random_tree(&mut rng, n);
            validate_tree(&t).unwrap();
            if t.root_id != t.tokens.len() as u32 {
                seen_nonlast_root = true;
            }
        }
        assert!(seen_nonlast_root);
    }

    #[test]
    fn random_patterns_parse() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..300 {
            let src = random_pattern_source(&mut rng);
            DepPattern::parse(&format!("random-{i}"), &src)
                .unwrap_or_else(|e| panic!("pattern {src:?} failed to parse: {e}"));
        }
    }
}
