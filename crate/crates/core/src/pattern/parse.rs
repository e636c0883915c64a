//! Recursive-descent parser for the pattern language.
//!
//! Attachment is stateful: within an expression there is a "current" node.
//! `cur < unit` attaches the unit's root under cur, and moves cur into the
//! unit only when it is a bare node (a bracketed unit is a finished branch —
//! chaining continues beside it). `cur > unit` gives cur a head and always
//! moves cur up into the new head. Exactly one node ends up headless: the
//! pattern root. Giving a node a second head is an error, as is an empty
//! bracket or a duplicate capture index.

use std::collections::BTreeSet;

use crate::error::PatternError;

use super::PatternNode;

const QUOTES: [char; 3] = ['`', '\'', '\u{2019}'];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBracket,
    RBracket,
    Lt,
    Gt,
    Ident(String),
    Colon,
    Lemma(String),
    Var(u32),
}

#[derive(Debug)]
struct Lexed {
    tok: Tok,
    offset: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn lex(text: &str) -> Result<Vec<Lexed>, PatternError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '[' => {
                chars.next();
                out.push(Lexed {
                    tok: Tok::LBracket,
                    offset,
                });
            }
            ']' => {
                chars.next();
                out.push(Lexed {
                    tok: Tok::RBracket,
                    offset,
                });
            }
            '<' => {
                chars.next();
                out.push(Lexed {
                    tok: Tok::Lt,
                    offset,
                });
            }
            '>' => {
                chars.next();
                out.push(Lexed {
                    tok: Tok::Gt,
                    offset,
                });
            }
            ':' => {
                chars.next();
                out.push(Lexed {
                    tok: Tok::Colon,
                    offset,
                });
            }
            '$' => {
                chars.next();
                let mut digits = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        digits.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                if digits.is_empty() {
                    return Err(PatternError::Syntax {
                        offset,
                        reason: "expected digits after '$'".to_string(),
                    });
                }
                let var = digits.parse().map_err(|_| PatternError::Syntax {
                    offset,
                    reason: format!("capture index {digits} out of range"),
                })?;
                out.push(Lexed {
                    tok: Tok::Var(var),
                    offset,
                });
            }
            q if QUOTES.contains(&q) => {
                chars.next();
                let mut lemma = String::new();
                let mut closed = false;
                for (_, d) in chars.by_ref() {
                    if QUOTES.contains(&d) {
                        closed = true;
                        break;
                    }
                    lemma.push(d);
                }
                if !closed {
                    return Err(PatternError::Syntax {
                        offset,
                        reason: "unterminated lemma quote".to_string(),
                    });
                }
                out.push(Lexed {
                    tok: Tok::Lemma(lemma.to_lowercase()),
                    offset,
                });
            }
            c if is_ident_char(c) => {
                let mut ident = String::new();
                while let Some(&(_, d)) = chars.peek() {
                    if is_ident_char(d) {
                        ident.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Lexed {
                    tok: Tok::Ident(ident),
                    offset,
                });
            }
            other => {
                return Err(PatternError::Syntax {
                    offset,
                    reason: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    Ok(out)
}

// Flat node under construction; heads are arena indices.
#[derive(Debug, Default)]
struct Proto {
    arc: Option<String>,
    pos: Option<String>,
    lemma: Option<String>,
    var: Option<u32>,
    head: Option<usize>,
}

struct Parser {
    toks: Vec<Lexed>,
    at: usize,
    arena: Vec<Proto>,
    text_len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|l| &l.tok)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.text_len, |l| l.offset)
    }

    fn bump(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.at).map(|l| &l.tok);
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    /// `node := [arc ':']? POS? lemma? var?` — at least one part.
    fn parse_node(&mut self) -> Result<usize, PatternError> {
        let start = self.offset();
        let mut node = Proto::default();
        let mut any = false;
        if let Some(Tok::Ident(_)) = self.peek() {
            // Ident followed by a colon is an arc constraint, else a POS.
            if matches!(self.toks.get(self.at + 1).map(|l| &l.tok), Some(Tok::Colon)) {
                if let Some(Tok::Ident(name)) = self.bump().cloned() {
                    node.arc = Some(name);
                }
                self.bump(); // colon
                any = true;
            }
        }
        if let Some(Tok::Ident(_)) = self.peek() {
            if let Some(Tok::Ident(name)) = self.bump().cloned() {
                node.pos = Some(name);
            }
            any = true;
        }
        if let Some(Tok::Lemma(_)) = self.peek() {
            if let Some(Tok::Lemma(lemma)) = self.bump().cloned() {
                node.lemma = Some(lemma);
            }
            any = true;
        }
        if let Some(Tok::Var(_)) = self.peek() {
            if let Some(Tok::Var(v)) = self.bump().cloned() {
                node.var = Some(v);
            }
            any = true;
        }
        if !any {
            return Err(PatternError::Syntax {
                offset: start,
                reason: "expected a pattern node".to_string(),
            });
        }
        self.arena.push(node);
        Ok(self.arena.len() - 1)
    }

    /// `unit := node | '[' expr ']'`; returns (root index, was bracketed).
    fn parse_unit(&mut self) -> Result<(usize, bool), PatternError> {
        if matches!(self.peek(), Some(Tok::LBracket)) {
            let open_offset = self.offset();
            self.bump();
            if matches!(self.peek(), Some(Tok::RBracket)) {
                return Err(PatternError::EmptyBrackets {
                    offset: open_offset,
                });
            }
            let root = self.parse_expr()?;
            match self.bump() {
                Some(Tok::RBracket) => Ok((root, true)),
                _ => Err(PatternError::Syntax {
                    offset: open_offset,
                    reason: "unclosed '['".to_string(),
                }),
            }
        } else {
            Ok((self.parse_node()?, false))
        }
    }

    /// `expr := unit (('<'|'>') unit)*`; returns the expression's headless
    /// root.
    fn parse_expr(&mut self) -> Result<usize, PatternError> {
        let (first, _) = self.parse_unit()?;
        let mut headless = first;
        let mut cur = first;
        loop {
            let op = match self.peek() {
                Some(Tok::Lt) => true,
                Some(Tok::Gt) => false,
                _ => break,
            };
            let op_offset = self.offset();
            self.bump();
            let (unit_root, bracketed) = self.parse_unit()?;
            if op {
                // cur < unit: the unit's root depends on cur.
                if self.arena[unit_root].head.is_some() {
                    return Err(PatternError::DoubleHead { offset: op_offset });
                }
                self.arena[unit_root].head = Some(cur);
                if !bracketed {
                    cur = unit_root;
                }
            } else {
                // cur > unit: cur depends on the unit's root.
                if self.arena[cur].head.is_some() {
                    return Err(PatternError::DoubleHead { offset: op_offset });
                }
                self.arena[cur].head = Some(unit_root);
                if headless == cur {
                    headless = unit_root;
                }
                cur = unit_root;
            }
        }
        Ok(headless)
    }
}

/// Parse pattern text into a normalized node tree.
pub fn parse_pattern(text: &str) -> Result<PatternNode, PatternError> {
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(PatternError::Syntax {
            offset: 0,
            reason: "empty pattern".to_string(),
        });
    }
    let mut parser = Parser {
        toks,
        at: 0,
        arena: Vec::new(),
        text_len: text.len(),
    };
    let root = parser.parse_expr()?;
    if parser.at != parser.toks.len() {
        return Err(PatternError::Syntax {
            offset: parser.offset(),
            reason: "trailing input after pattern".to_string(),
        });
    }
    // The top level behaves like one big bracket: everything must have
    // attached into a single tree.
    let headless: Vec<usize> = (0..parser.arena.len())
        .filter(|&i| parser.arena[i].head.is_none())
        .collect();
    debug_assert_eq!(headless, vec![root]);

    let mut seen = BTreeSet::new();
    for proto in &parser.arena {
        if let Some(v) = proto.var {
            if !seen.insert(v) {
                return Err(PatternError::DuplicateCapture { var: v });
            }
        }
    }
    Ok(build(&parser.arena, root))
}

fn build(arena: &[Proto], idx: usize) -> PatternNode {
    let children = (0..arena.len())
        .filter(|&i| arena[i].head == Some(idx))
        .map(|i| build(arena, i))
        .collect();
    let p = &arena[idx];
    PatternNode {
        arc: p.arc.clone(),
        pos: p.pos.clone(),
        lemma: p.lemma.clone(),
        var: p.var,
        children,
    }
}
