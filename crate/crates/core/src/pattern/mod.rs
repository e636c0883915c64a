//! The dependency pattern language: parsing, printing, matching, search.
//!
//! A pattern node is written `arc:POS`lemma'$i`, every part optional but at
//! least one required. `A < B` asserts B is a dependent of A; `A > B` asserts
//! A is a dependent of B. Brackets group: a bracketed unit attaches to the
//! current node as a whole and chaining continues from where it left off,
//! while attaching a bare node moves the chain down into it. The arc literal
//! `ROOT` is special and means "this node is the sentence root" (head = 0)
//! rather than an arc-label comparison.
//!
//! Example: `ROOT:VBP$2 <[dobj:NNS$0 < prep:IN`like' < pobj:$1]` is a VBP
//! sentence root (captured as $2) governing a chain dobj→prep(like)→pobj.

mod matcher;
mod parse;
mod search;

pub use matcher::{match_sentence, MatchBinding};
pub use search::{plan_key, scan_index, search, SearchHits};

use serde::{Deserialize, Serialize};

use crate::error::PatternError;

/// Arc literal that pins a node to the sentence root instead of comparing
/// arc labels.
pub const ROOT_ARC: &str = "ROOT";

/// One node of a parsed pattern. `children` are this node's dependents;
/// the direction glyphs of the surface syntax are normalized away.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternNode {
    pub arc: Option<String>,
    pub pos: Option<String>,
    pub lemma: Option<String>,
    pub var: Option<u32>,
    pub children: Vec<PatternNode>,
}

impl PatternNode {
    /// Nodes in preorder, parents before children.
    pub fn iter_preorder(&self) -> Vec<&PatternNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            for c in n.children.iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.iter_preorder().len()
    }

    /// All capture indices in the pattern, sorted.
    pub fn capture_vars(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = self.iter_preorder().iter().filter_map(|n| n.var).collect();
        vars.sort_unstable();
        vars
    }

    fn print_into(&self, out: &mut String) {
        if let Some(arc) = &self.arc {
            out.push_str(arc);
            out.push(':');
        }
        if let Some(pos) = &self.pos {
            out.push_str(pos);
        }
        if let Some(lemma) = &self.lemma {
            out.push('`');
            out.push_str(lemma);
            out.push('\'');
        }
        if let Some(var) = self.var {
            out.push('$');
            out.push_str(&var.to_string());
        }
        for child in &self.children {
            out.push_str(" <[");
            child.print_into(out);
            out.push(']');
        }
    }
}

/// A named pattern: the parsed AST plus the text it came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepPattern {
    pub pattern_id: String,
    pub root: PatternNode,
    pub raw_text: String,
}

impl DepPattern {
    /// Parse pattern text under the given name.
    pub fn parse(pattern_id: &str, text: &str) -> Result<DepPattern, PatternError> {
        let root = parse::parse_pattern(text)?;
        Ok(DepPattern {
            pattern_id: pattern_id.to_string(),
            root,
            raw_text: text.to_string(),
        })
    }

    /// Canonical one-line rendering; `parse` of it reproduces the AST.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.root.print_into(&mut out);
        out
    }
}

/// Parse a pattern file: one pattern per line, `#` comments, blank lines
/// ignored. A leading `name: ` prefix (colon followed by whitespace, unlike
/// the tight colon of an arc constraint) names the pattern; unnamed patterns
/// get `<file_label>-<line>`.
pub fn parse_pattern_file(
    content: &str,
    file_label: &str,
) -> Result<Vec<DepPattern>, PatternError> {
    let mut out = Vec::new();
    for (i, raw_line) in content.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (name, body) = match split_name_prefix(line) {
            Some((name, body)) => (name.to_string(), body),
            None => (format!("{file_label}-{line_no}"), line),
        };
        let pattern = DepPattern::parse(&name, body).map_err(|e| PatternError::InFile {
            file: file_label.to_string(),
            line: line_no,
            source: Box::new(e),
        })?;
        if out
            .iter()
            .any(|p: &DepPattern| p.pattern_id == pattern.pattern_id)
        {
            return Err(PatternError::InFile {
                file: file_label.to_string(),
                line: line_no,
                source: Box::new(PatternError::Syntax {
                    offset: 0,
                    reason: format!("duplicate pattern name {name:?}"),
                }),
            });
        }
        out.push(pattern);
    }
    Ok(out)
}

/// Load and parse a pattern file from disk.
pub fn load_pattern_file(path: &std::path::Path) -> Result<Vec<DepPattern>, PatternError> {
    let content = std::fs::read_to_string(path).map_err(|e| PatternError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    parse_pattern_file(&content, &label)
}

// "name: pattern" — the colon must be followed by whitespace so that arc
// constraints like "nsubj:NNS" are not mistaken for names.
fn split_name_prefix(line: &str) -> Option<(&str, &str)> {
    let colon = line.find(':')?;
    let (head, tail) = line.split_at(colon);
    let tail = &tail[1..];
    if !tail.starts_with(char::is_whitespace) {
        return None;
    }
    let name = head.trim();
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_alphanumeric() || "-_.".contains(c))
    {
        return None;
    }
    Some((name, tail.trim_start()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn name_prefix_needs_whitespace_after_colon() {
        assert_eq!(
            split_name_prefix("such-as-subject: [nsubj:NNS$0] > ROOT"),
            Some(("such-as-subject", "[nsubj:NNS$0] > ROOT"))
        );
        assert_eq!(split_name_prefix("nsubj:NNS$0 > ROOT:VBP"), None);
    }

    #[test]
    fn single_var_node_parses() {
        let p = DepPattern::parse("p", "$1").unwrap();
        assert_eq!(p.root.var, Some(1));
        assert!(p.root.arc.is_none() && p.root.pos.is_none() && p.root.lemma.is_none());
        assert!(p.root.children.is_empty());
    }

    #[test]
    fn canonical_round_trips() {
        let text = "ROOT:VBP$2 <[dobj:NNS$0 < prep:IN`like' < pobj:$1]";
        let p = DepPattern::parse("p", text).unwrap();
        let printed = p.canonical();
        let again = DepPattern::parse("p", &printed).unwrap();
        assert_eq!(p.root, again.root);
    }

    #[test]
    fn pattern_file_names_and_comments() {
        let content = "# comment\n\nfirst: $0 < amod:`such'\n$1\n";
        let pats = parse_pattern_file(content, "pats").unwrap();
        assert_eq!(pats.len(), 2);
        assert_eq!(pats[0].pattern_id, "first");
        assert_eq!(pats[1].pattern_id, "pats-4");
    }

    #[test]
    fn duplicate_pattern_names_rejected() {
        let content = "a: $0\na: $1\n";
        let err = parse_pattern_file(content, "pats").unwrap_err();
        assert!(err.to_string().contains("duplicate pattern name"));
    }
}
