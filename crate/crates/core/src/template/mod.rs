//! Mechanical rewriting of matched sentences into deduction examples.
//!
//! A match hands us the three bound tokens: a category noun (`$0`), the
//! mention or restrictor hanging off it (`$1`), and the matrix verb (`$2`).
//! Everything else is token algebra over the dependency tree — splitting off
//! subtrees, reattaching spans, fixing agreement — so the output vocabulary
//! is the source vocabulary plus a closed set of function words. Two rewrite
//! operations exist:
//!
//! * **substitution**: the matched sentence asserts a category and names a
//!   member; the rewrite yields the generic claim and the membership as
//!   premises, and the claim applied to the member as the conclusion.
//! * **contraposition**: the matched sentence predicates something of a
//!   restricted subject; the rewrite negates both the matrix predicate and
//!   the restriction and swaps them.
//!
//! A match that cannot be rewritten faithfully (non-contiguous spans,
//! quantified or pronominal captures) is skipped with a recorded reason,
//! never force-expanded.

mod expand;

pub use expand::{expand, filter_match};

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conllu::ParsedSentence;
use crate::morph::surface_variants;

/// Rewrite operation that produced an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    Substitution,
    Contraposition,
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::Substitution => "substitution",
            Op::Contraposition => "contraposition",
        })
    }
}

/// Where an example came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub doc_id: String,
    pub sent_index: u32,
    pub pattern_id: String,
    /// Sentence token bound to `$0`.
    pub anchor: u32,
}

/// One premise/conclusion training example.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionExample {
    pub example_id: String,
    pub op: Op,
    pub premises: Vec<String>,
    pub conclusion: String,
    pub provenance: Provenance,
    /// On augmented copies: the `example_id` of the original.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paraphrase_of: Option<String>,
}

impl DeductionExample {
    /// Deterministic id: provenance plus the bound token ids.
    pub fn make_id(
        doc_id: &str,
        sent_index: u32,
        pattern_id: &str,
        bindings: &[(u32, u32)],
    ) -> String {
        let toks: Vec<String> = bindings.iter().map(|(_, t)| t.to_string()).collect();
        format!("{doc_id}:{sent_index}:{pattern_id}:{}", toks.join("."))
    }
}

/// One match that expansion declined, and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionSkip {
    pub doc_id: String,
    pub sent_index: u32,
    pub pattern_id: String,
    pub anchor: u32,
    pub reason: String,
}

/// Outcome of expanding one match.
#[derive(Debug, Clone)]
pub enum Expanded {
    Example(DeductionExample),
    Skipped(ExpansionSkip),
}

/// Lemmas that disqualify a category noun when found on its determiner or
/// modifier children: quantified categories make the generic premise false.
#[derive(Debug, Clone)]
pub struct ModifierStoplist {
    lemmas: BTreeSet<String>,
}

impl Default for ModifierStoplist {
    fn default() -> Self {
        const DEFAULT: &[&str] = &[
            "some", "many", "most", "several", "few", "certain", "other", "various", "numerous",
            "all", "no",
        ];
        ModifierStoplist {
            lemmas: DEFAULT.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl ModifierStoplist {
    /// One lemma per line; blank lines and `#` comments ignored.
    pub fn from_file(path: &Path) -> std::io::Result<ModifierStoplist> {
        let text = std::fs::read_to_string(path)?;
        Ok(ModifierStoplist {
            lemmas: text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase())
                .collect(),
        })
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.lemmas.contains(lemma)
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }
}

/// Function words the rewrites may introduce beyond the source vocabulary.
pub const ALLOWED_INSERTIONS: &[&str] = &[
    "is", "are", "a", "an", "that", "do", "does", "not", "have", "has",
];

/// Join token forms into a sentence string, standard spacing rules.
pub fn detokenize(tokens: &[String]) -> String {
    const NO_SPACE_BEFORE: &[&str] = &[
        ",", ".", ";", ":", "!", "?", "%", ")", "]", "}", "''", "n't",
    ];
    const NO_SPACE_AFTER: &[&str] = &["(", "[", "{", "``", "$"];
    let mut out = String::new();
    let mut suppress_space = true;
    for tok in tokens {
        let attach =
            NO_SPACE_BEFORE.contains(&tok.as_str()) || (tok.starts_with('\'') && tok.len() <= 3);
        if !suppress_space && !attach {
            out.push(' ');
        }
        out.push_str(tok);
        suppress_space = NO_SPACE_AFTER.contains(&tok.as_str());
    }
    out
}

/// Words a generated example may use for this sentence: every source form,
/// every lemma, agreement variants of the forms, and the fixed insertions.
/// All lowercased.
pub fn allowed_words(sentence: &ParsedSentence) -> BTreeSet<String> {
    let mut allowed: BTreeSet<String> = ALLOWED_INSERTIONS.iter().map(|s| s.to_string()).collect();
    for t in &sentence.tokens {
        allowed.insert(t.lemma.to_lowercase());
        for v in surface_variants(&t.form) {
            allowed.insert(v);
        }
    }
    allowed
}

/// Check lexical conservatism: every alphabetic word of every output string
/// must come from [`allowed_words`]. Returns the violating words.
pub fn conservatism_violations(
    example: &DeductionExample,
    sentence: &ParsedSentence,
) -> Vec<String> {
    let allowed = allowed_words(sentence);
    let mut bad = Vec::new();
    for text in example
        .premises
        .iter()
        .chain(std::iter::once(&example.conclusion))
    {
        for word in text.split_whitespace() {
            let stripped: String = word
                .chars()
                .filter(|c| c.is_alphabetic() || *c == '-')
                .collect();
            if stripped.is_empty() {
                continue;
            }
            if !allowed.contains(&stripped.to_lowercase()) {
                bad.push(stripped);
            }
        }
    }
    bad
}
