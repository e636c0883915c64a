//! The two rewrite operations, as token algebra over the dependency tree.

use crate::conllu::ParsedSentence;
use crate::error::ExpandError;
use crate::morph::{
    capitalize_first, decapitalize_first, indefinite_article, reinflect_noun, reinflect_verb,
    NounTarget, VerbTarget,
};
use crate::pattern::{DepPattern, MatchBinding, PatternNode};

use super::{
    detokenize, DeductionExample, Expanded, ExpansionSkip, ModifierStoplist, Op, Provenance,
};

/// What an expandable pattern is asking for, read off its shape.
enum Shape {
    /// `$1` names a member of category `$0`; `subject_side` says whether the
    /// category is the subject or the object of the matrix verb `$2`.
    Substitution { subject_side: bool },
    /// `$1` is a relative clause restricting `$0`.
    ContraRelcl,
    /// `$1` is the object of a `with` phrase restricting `$0`.
    ContraWith,
}

fn classify(pattern: &DepPattern) -> Result<Shape, ExpandError> {
    let unsupported = |reason: &str| ExpandError::UnsupportedPattern {
        pattern_id: pattern.pattern_id.clone(),
        reason: reason.to_string(),
    };
    let mut nodes: [Option<&PatternNode>; 3] = [None, None, None];
    for n in pattern.root.iter_preorder() {
        if let Some(v) = n.var {
            if v <= 2 {
                nodes[v as usize] = Some(n);
            }
        }
    }
    let [Some(n0), Some(n1), Some(_)] = nodes else {
        return Err(unsupported("expandable patterns bind $0, $1 and $2"));
    };
    match n1.arc.as_deref() {
        Some("relcl") => {
            if n0.arc.as_deref() != Some("nsubj") {
                return Err(unsupported("contraposition needs a subject category $0"));
            }
            Ok(Shape::ContraRelcl)
        }
        Some("pobj") => {
            let parent = find_parent(&pattern.root, n1);
            if parent.and_then(|p| p.lemma.as_deref()) == Some("with") {
                if n0.arc.as_deref() != Some("nsubj") {
                    return Err(unsupported("contraposition needs a subject category $0"));
                }
                Ok(Shape::ContraWith)
            } else {
                match n0.arc.as_deref() {
                    Some("nsubj") => Ok(Shape::Substitution { subject_side: true }),
                    Some("dobj") => Ok(Shape::Substitution {
                        subject_side: false,
                    }),
                    _ => Err(unsupported("the category node $0 must be an nsubj or dobj")),
                }
            }
        }
        _ => Err(unsupported(
            "$1 must be a pobj mention or a relcl restrictor",
        )),
    }
}

fn find_parent<'a>(root: &'a PatternNode, target: &PatternNode) -> Option<&'a PatternNode> {
    for child in &root.children {
        if std::ptr::eq(child, target) {
            return Some(root);
        }
        if let Some(p) = find_parent(child, target) {
            return Some(p);
        }
    }
    None
}

/// Token lookup for ids already validated against this sentence.
fn tok(sentence: &ParsedSentence, id: u32) -> &crate::conllu::Token {
    sentence
        .token(id)
        .expect("token id was validated against this sentence")
}

/// Data-level reasons a match must not be expanded. `None` means clean.
/// Capture ids must belong to `sentence`.
pub fn filter_match(
    sentence: &ParsedSentence,
    binding: &MatchBinding,
    stoplist: &ModifierStoplist,
) -> Option<String> {
    let s0 = binding.capture(0)?;
    let s1 = binding.capture(1)?;
    for child_id in sentence.children(s0) {
        let child = tok(sentence, child_id);
        if matches!(child.deprel.as_str(), "det" | "amod" | "nummod" | "advmod")
            && stoplist.contains(&child.lemma)
        {
            return Some(format!("disallowed modifier: {}", child.lemma));
        }
    }
    let t1 = tok(sentence, s1);
    if matches!(t1.xpos.as_str(), "PRP" | "PRP$" | "WP") {
        return Some(format!("pronoun capture: {}", t1.form));
    }
    for id in [s0, s1] {
        let form = &tok(sentence, id).form;
        if form.chars().count() == 1 {
            return Some(format!("single-character capture: {form}"));
        }
    }
    None
}

/// Expand one match into a deduction example, or a recorded skip.
pub fn expand(
    pattern: &DepPattern,
    sentence: &ParsedSentence,
    binding: &MatchBinding,
    stoplist: &ModifierStoplist,
) -> Result<Expanded, ExpandError> {
    if binding.doc_id != sentence.doc_id || binding.sent_index != sentence.sent_index {
        return Err(ExpandError::BindingMismatch(format!(
            "binding is for {}:{}, sentence is {}:{}",
            binding.doc_id, binding.sent_index, sentence.doc_id, sentence.sent_index
        )));
    }
    let shape = classify(pattern)?;
    let get = |v: u32| {
        binding
            .capture(v)
            .filter(|&id| id >= 1 && id as usize <= sentence.tokens.len())
    };
    let (Some(s0), Some(s1), Some(s2)) = (get(0), get(1), get(2)) else {
        return Err(ExpandError::BindingMismatch(
            "binding does not cover $0, $1 and $2 within the sentence".to_string(),
        ));
    };
    let skip = |reason: String| {
        Ok(Expanded::Skipped(ExpansionSkip {
            doc_id: sentence.doc_id.clone(),
            sent_index: sentence.sent_index,
            pattern_id: pattern.pattern_id.clone(),
            anchor: s0,
            reason,
        }))
    };
    if let Some(reason) = filter_match(sentence, binding, stoplist) {
        return skip(reason);
    }
    let built = match shape {
        Shape::Substitution { subject_side } => {
            build_substitution(sentence, s0, s1, s2, subject_side)
        }
        Shape::ContraRelcl => build_contraposition(sentence, s0, s1, s2, false),
        Shape::ContraWith => build_contraposition(sentence, s0, s1, s2, true),
    };
    match built {
        Err(reason) => skip(reason),
        Ok((op, premises, conclusion)) => Ok(Expanded::Example(DeductionExample {
            example_id: DeductionExample::make_id(
                &sentence.doc_id,
                sentence.sent_index,
                &pattern.pattern_id,
                &binding.bindings,
            ),
            op,
            premises,
            conclusion,
            provenance: Provenance {
                doc_id: sentence.doc_id.clone(),
                sent_index: sentence.sent_index,
                pattern_id: pattern.pattern_id.clone(),
                anchor: s0,
            },
            paraphrase_of: None,
        })),
    }
}

fn contiguous(ids: &[u32]) -> bool {
    ids.windows(2).all(|w| w[1] == w[0] + 1)
}

fn forms(sentence: &ParsedSentence, ids: &[u32]) -> Vec<String> {
    ids.iter()
        .map(|&id| tok(sentence, id).form.clone())
        .collect()
}

fn finalize(tokens: &[String]) -> String {
    capitalize_first(&detokenize(tokens))
}

fn is_plural_noun(xpos: &str) -> bool {
    matches!(xpos, "NNS" | "NNPS")
}

fn is_punct_form(form: &str) -> bool {
    !form.is_empty() && form.chars().all(|c| !c.is_alphanumeric())
}

type Built = Result<(Op, Vec<String>, String), String>;

/// sentence: `… $0 [branch: such as $1] … $2 …`
/// premises: the sentence without the mention branch; `$1 is a $0`.
/// conclusion: the sentence with the whole `$0` phrase replaced by `$1`.
fn build_substitution(
    sentence: &ParsedSentence,
    s0: u32,
    s1: u32,
    s2: u32,
    subject_side: bool,
) -> Built {
    let sub0 = sentence.subtree_ids(s0);
    let sub1 = sentence.subtree_ids(s1);
    // The branch: the child of $0 whose subtree carries the mention.
    let mut branch_root = s1;
    loop {
        let head = tok(sentence, branch_root).head;
        if head == 0 {
            return Err("mention does not attach below the category noun".to_string());
        }
        if head == s0 {
            break;
        }
        branch_root = head;
    }
    let branch = sentence.subtree_ids(branch_root);
    if !contiguous(&sub0) {
        return Err("category span is non-contiguous".to_string());
    }
    if !contiguous(&sub1) {
        return Err("mention span is non-contiguous".to_string());
    }
    if !contiguous(&branch) {
        return Err("mention branch is non-contiguous".to_string());
    }
    if branch.len() == sentence.tokens.len() {
        return Err("nothing remains outside the mention branch".to_string());
    }

    // Premise 1: the generic claim, with the mention branch cut out.
    let p1_ids: Vec<u32> = (1..=sentence.tokens.len() as u32)
        .filter(|id| branch.binary_search(id).is_err())
        .collect();
    let premise1 = finalize(&forms(sentence, &p1_ids));

    // Premise 2: the membership statement.
    let plural = is_plural_noun(&tok(sentence, s1).xpos);
    let mention = forms(sentence, &sub1);
    let mut det_ids: Vec<u32> = Vec::new();
    for child_id in sentence.children(s0) {
        if tok(sentence, child_id).deprel == "det" {
            det_ids.extend(sentence.subtree_ids(child_id));
        }
    }
    let core_ids: Vec<u32> = sub0
        .iter()
        .copied()
        .filter(|id| branch.binary_search(id).is_err() && !det_ids.contains(id))
        .collect();
    if core_ids.is_empty() {
        return Err("category phrase is empty without the mention".to_string());
    }
    let mut core: Vec<String> = core_ids
        .iter()
        .map(|&id| {
            let t = tok(sentence, id);
            if id == s0 && !plural {
                reinflect_noun(&t.form, NounTarget::Singular)
            } else {
                t.form.clone()
            }
        })
        .collect();
    // The phrase moves to predicate position: drop sentence-initial casing,
    // but leave proper nouns alone.
    if !tok(sentence, core_ids[0]).xpos.starts_with("NNP") {
        core[0] = decapitalize_first(&core[0]);
    }
    let mut p2 = mention.clone();
    if plural {
        p2.push("are".to_string());
    } else {
        p2.push("is".to_string());
        p2.push(indefinite_article(&core[0]).to_string());
    }
    p2.extend(core);
    p2.push(".".to_string());
    let premise2 = finalize(&p2);

    // Conclusion: the claim about the member itself.
    let verb_target = if plural {
        VerbTarget::Plural
    } else {
        VerbTarget::Singular3rd
    };
    let mut out: Vec<String> = Vec::new();
    let first = sub0[0];
    let last = *sub0.last().expect("subtree is never empty");
    for t in &sentence.tokens {
        if t.id < first || t.id > last {
            if subject_side && t.id == s2 {
                out.push(reinflect_verb(&t.form, verb_target));
            } else {
                out.push(t.form.clone());
            }
        } else if t.id == first {
            out.extend(mention.iter().cloned());
        }
    }
    let conclusion = finalize(&out);
    Ok((Op::Substitution, vec![premise1, premise2], conclusion))
}

/// A token of a verb phrase being negated. Synthetic tokens carry id 0.
#[derive(Debug, Clone, PartialEq, Eq)]
struct VpToken {
    id: u32,
    form: String,
    lemma: String,
    xpos: String,
    deprel: String,
    head: u32,
}

impl VpToken {
    fn new(form: &str, lemma: &str, xpos: &str, deprel: &str, head: u32) -> VpToken {
        VpToken {
            id: 0,
            form: form.to_string(),
            lemma: lemma.to_string(),
            xpos: xpos.to_string(),
            deprel: deprel.to_string(),
            head,
        }
    }
}

fn vp_from(sentence: &ParsedSentence, ids: &[u32]) -> Vec<VpToken> {
    ids.iter()
        .map(|&id| {
            let t = tok(sentence, id);
            VpToken {
                id,
                form: t.form.clone(),
                lemma: t.lemma.clone(),
                xpos: t.xpos.clone(),
                deprel: t.deprel.clone(),
                head: t.head,
            }
        })
        .collect()
}

/// Toggle the polarity of a verb phrase headed by `head_id`.
///
/// Negated input (a `neg` child of the head) loses the negator and any
/// do-auxiliary; positive input gains `not` after a copula or modal, or
/// do-support otherwise. Applying this twice returns the original phrase,
/// which is what makes contraposition reversible.
fn negate_vp(
    mut vp: Vec<VpToken>,
    head_id: u32,
    plural_subject: bool,
) -> Result<Vec<VpToken>, String> {
    let head_ix = vp
        .iter()
        .position(|t| t.id == head_id)
        .ok_or_else(|| "verb phrase lost its head verb".to_string())?;
    let agreement = if plural_subject {
        VerbTarget::Plural
    } else {
        VerbTarget::Singular3rd
    };
    if let Some(neg_ix) = vp
        .iter()
        .position(|t| t.deprel == "neg" && t.head == head_id)
    {
        vp.remove(neg_ix);
        if let Some(aux_ix) = vp
            .iter()
            .position(|t| t.deprel == "aux" && t.head == head_id && t.lemma == "do")
        {
            // Do-support comes off whole: the agreement the auxiliary
            // carried moves back onto the main verb.
            vp.remove(aux_ix);
            let head_ix = vp
                .iter()
                .position(|t| t.id == head_id)
                .expect("head survives negator removal");
            vp[head_ix].form = reinflect_verb(&vp[head_ix].form, agreement);
        }
        return Ok(vp);
    }
    let not = |head: u32| VpToken::new("not", "not", "RB", "neg", head);
    let modal_ix = vp
        .iter()
        .position(|t| t.deprel == "aux" && t.head == head_id && t.xpos == "MD");
    if vp[head_ix].lemma == "be" || vp[head_ix].xpos == "MD" {
        vp.insert(head_ix + 1, not(head_id));
    } else if let Some(md) = modal_ix {
        vp.insert(md + 1, not(head_id));
    } else {
        let do_form = if plural_subject { "do" } else { "does" };
        vp[head_ix].form = reinflect_verb(&vp[head_ix].form, VerbTarget::Base);
        vp.insert(head_ix, not(head_id));
        vp.insert(head_ix, VpToken::new(do_form, "do", "VBP", "aux", head_id));
    }
    Ok(vp)
}

/// sentence: `… [$0 that $1-VP | $0 with $1] $2-VP …`
/// premise: the sentence verbatim.
/// conclusion: `… $0-core that not($2-VP) not($1-VP) .`
fn build_contraposition(
    sentence: &ParsedSentence,
    s0: u32,
    s1: u32,
    s2: u32,
    with_variant: bool,
) -> Built {
    let sub0 = sentence.subtree_ids(s0);
    if !contiguous(&sub0) {
        return Err("category span is non-contiguous".to_string());
    }
    let last0 = *sub0.last().expect("subtree is never empty");
    if s2 <= last0 {
        return Err("matrix verb precedes the subject".to_string());
    }
    let restrictor_root = if with_variant {
        tok(sentence, s1).head
    } else {
        s1
    };
    let cut = sentence.subtree_ids(restrictor_root);
    let np_core: Vec<u32> = sub0
        .iter()
        .copied()
        .filter(|id| cut.binary_search(id).is_err())
        .collect();
    let (Some(&core_last), Some(&cut_first)) = (np_core.last(), cut.first()) else {
        return Err("restrictor leaves no category phrase".to_string());
    };
    if core_last >= cut_first {
        return Err("category phrase is interrupted by the restrictor".to_string());
    }

    // Matrix predicate: everything of the matrix verb's subtree after the
    // subject, minus trailing punctuation.
    let mut matrix_ids: Vec<u32> = sentence
        .subtree_ids(s2)
        .into_iter()
        .filter(|&id| id > last0)
        .collect();
    while matrix_ids
        .last()
        .is_some_and(|&id| is_punct_form(&tok(sentence, id).form))
    {
        matrix_ids.pop();
    }
    if matrix_ids.is_empty() {
        return Err("no matrix predicate after the subject".to_string());
    }
    if !contiguous(&matrix_ids) {
        return Err("matrix predicate is non-contiguous".to_string());
    }

    // Restrictor predicate: the relative clause without its `that`, or a
    // synthetic `have <object>` for the with-phrase variant.
    let restr_vp = if with_variant {
        let obj = sentence.subtree_ids(s1);
        if !contiguous(&obj) {
            return Err("restrictor span is non-contiguous".to_string());
        }
        let mut vp = vec![VpToken::new("have", "have", "VBP", "relcl", 0)];
        vp.extend(vp_from(sentence, &obj));
        vp
    } else {
        let ids: Vec<u32> = sentence
            .subtree_ids(s1)
            .into_iter()
            .filter(|&id| {
                let t = tok(sentence, id);
                !(t.head == s1 && t.xpos == "WDT" && t.lemma == "that")
            })
            .collect();
        if !contiguous(&ids) {
            return Err("restrictor span is non-contiguous".to_string());
        }
        vp_from(sentence, &ids)
    };
    let restr_head = if with_variant { 0 } else { s1 };

    let plural = is_plural_noun(&tok(sentence, s0).xpos);
    let matrix = negate_vp(vp_from(sentence, &matrix_ids), s2, plural)?;
    let restr = negate_vp(restr_vp, restr_head, plural)?;

    let prefix: Vec<u32> = (1..sub0[0]).collect();
    let mut out = forms(sentence, &prefix);
    out.extend(forms(sentence, &np_core));
    out.push("that".to_string());
    out.extend(matrix.into_iter().map(|t| t.form));
    out.extend(restr.into_iter().map(|t| t.form));
    out.push(".".to_string());
    let conclusion = finalize(&out);
    let premise = finalize(&forms(
        sentence,
        &(1..=sentence.tokens.len() as u32).collect::<Vec<_>>(),
    ));
    Ok((Op::Contraposition, vec![premise], conclusion))
}
