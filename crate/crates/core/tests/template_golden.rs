//! The rewrite templates against hand-checked reference outputs, the skip
//! filters against fixtures built to trip them, and the lexical
//! conservatism guarantee over everything the templates emit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use depforge_core::conllu::{parse_conllu_file, ParsedSentence};
use depforge_core::pattern::{load_pattern_file, match_sentence, DepPattern};
use depforge_core::template::{
    conservatism_violations, expand, DeductionExample, Expanded, ExpansionSkip, ModifierStoplist,
    Op,
};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn shipped_patterns() -> Vec<DepPattern> {
    let mut pats = load_pattern_file(&repo_path("patterns/substitution.pat")).unwrap();
    pats.extend(load_pattern_file(&repo_path("patterns/contraposition.pat")).unwrap());
    pats
}

fn expand_corpus(
    sentences: &[ParsedSentence],
) -> (Vec<(ParsedSentence, DeductionExample)>, Vec<ExpansionSkip>) {
    let patterns = shipped_patterns();
    let stoplist = ModifierStoplist::from_file(&repo_path("data/stoplist.txt")).unwrap();
    let mut examples = Vec::new();
    let mut skips = Vec::new();
    for s in sentences {
        for p in &patterns {
            for binding in match_sentence(p, s) {
                match expand(p, s, &binding, &stoplist).unwrap() {
                    Expanded::Example(e) => examples.push((s.clone(), e)),
                    Expanded::Skipped(skip) => skips.push(skip),
                }
            }
        }
    }
    (examples, skips)
}

#[test]
fn golden_sentences_expand_to_reference_strings() {
    let (sentences, _) = parse_conllu_file(&repo_path("data/fixtures/goldens.conllu")).unwrap();
    let (examples, skips) = expand_corpus(&sentences);
    assert!(skips.is_empty(), "unexpected skips: {skips:?}");
    assert_eq!(examples.len(), 5);

    let by_sent: BTreeMap<u32, &DeductionExample> = examples
        .iter()
        .map(|(_, e)| (e.provenance.sent_index, e))
        .collect();

    let e = by_sent[&0];
    assert_eq!(e.op, Op::Substitution);
    assert_eq!(
        e.premises,
        vec![
            "In Egypt, herbal teas are very popular.".to_string(),
            "Hibiscus tea is a herbal tea.".to_string(),
        ]
    );
    assert_eq!(e.conclusion, "In Egypt, Hibiscus tea is very popular.");
    assert_eq!(e.example_id, "goldens:0:such-as-subject:5.9.10");
    assert_eq!(e.provenance.pattern_id, "such-as-subject");
    assert_eq!(e.provenance.anchor, 5);
    assert!(e.paraphrase_of.is_none());

    let e = by_sent[&1];
    assert_eq!(
        e.premises,
        vec![
            "Microorganisms colonize the skin surface.".to_string(),
            "Staphylococcus epidermis is a microorganism.".to_string(),
        ]
    );
    assert_eq!(
        e.conclusion,
        "Staphylococcus epidermis colonizes the skin surface."
    );

    let e = by_sent[&2];
    assert_eq!(e.provenance.pattern_id, "such-as-object");
    assert_eq!(
        e.premises,
        vec![
            "During the undergraduate years, seminarians learn the ancient language courses."
                .to_string(),
            "Latin is an ancient language course.".to_string(),
        ]
    );
    assert_eq!(
        e.conclusion,
        "During the undergraduate years, seminarians learn Latin."
    );

    let e = by_sent[&3];
    assert_eq!(e.op, Op::Contraposition);
    assert_eq!(e.provenance.pattern_id, "that-relative");
    assert_eq!(
        e.premises,
        vec![
            "As such, rivers that have headwaters in the mountains provide water for \
             irrigation in the surrounding lands."
                .to_string()
        ]
    );
    assert_eq!(
        e.conclusion,
        "As such, rivers that do not provide water for irrigation in the surrounding lands \
         do not have headwaters in the mountains."
    );

    let e = by_sent[&4];
    assert_eq!(e.op, Op::Contraposition);
    assert_eq!(
        e.premises,
        vec![
            "Dogs that are especially dirty or hungry are not able to participate in contests."
                .to_string()
        ]
    );
    assert_eq!(
        e.conclusion,
        "Dogs that are able to participate in contests are not especially dirty or hungry."
    );
}

#[test]
fn mixed_corpus_expands_and_skips_as_expected() {
    let (sentences, _) = parse_conllu_file(&repo_path("data/fixtures/mixed.conllu")).unwrap();
    let (examples, skips) = expand_corpus(&sentences);

    let mut skip_reasons: Vec<(&str, u32, &str)> = skips
        .iter()
        .map(|s| (s.doc_id.as_str(), s.sent_index, s.reason.as_str()))
        .collect();
    skip_reasons.sort();
    assert_eq!(
        skip_reasons,
        vec![
            ("mixed-a", 4, "disallowed modifier: some"),
            ("mixed-a", 5, "pronoun capture: them"),
            ("mixed-b", 0, "single-character capture: x"),
        ]
    );

    assert_eq!(examples.len(), 13);
    let sub = examples
        .iter()
        .filter(|(_, e)| e.op == Op::Substitution)
        .count();
    let contra = examples
        .iter()
        .filter(|(_, e)| e.op == Op::Contraposition)
        .count();
    assert_eq!((sub, contra), (8, 5));

    let find = |doc: &str, sent: u32, pattern: &str| -> &DeductionExample {
        &examples
            .iter()
            .find(|(_, e)| {
                e.provenance.doc_id == doc
                    && e.provenance.sent_index == sent
                    && e.provenance.pattern_id == pattern
            })
            .unwrap_or_else(|| panic!("no example for {doc}:{sent}:{pattern}"))
            .1
    };

    // Plural mention: no article, verb stays plural.
    let e = find("mixed-a", 0, "like-subject");
    assert_eq!(
        e.premises,
        vec![
            "Animals bark loudly.".to_string(),
            "Dogs are animals.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Dogs bark loudly.");

    let e = find("mixed-a", 1, "including-subject");
    assert_eq!(
        e.premises,
        vec![
            "Metals conduct electricity.".to_string(),
            "Copper is a metal.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Copper conducts electricity.");

    // Object side: no verb reinflection.
    let e = find("mixed-a", 2, "like-object");
    assert_eq!(
        e.premises,
        vec![
            "Farmers grow crops.".to_string(),
            "Wheat is a crop.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Farmers grow wheat.");

    let e = find("mixed-a", 3, "including-object");
    assert_eq!(
        e.premises,
        vec![
            "Museums display artifacts.".to_string(),
            "Coins are artifacts.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Museums display coins.");

    // "with" restriction becomes a synthetic "have" clause.
    let e = find("mixed-a", 6, "with-attribute");
    assert_eq!(
        e.premises,
        vec!["Students with scholarships attend seminars.".to_string()]
    );
    assert_eq!(
        e.conclusion,
        "Students that do not attend seminars do not have scholarships."
    );

    // A negated matrix flips to positive: negation is an involution.
    let e = find("mixed-a", 7, "that-relative");
    assert_eq!(
        e.premises,
        vec!["Machines that malfunction do not pass inspections.".to_string()]
    );
    assert_eq!(
        e.conclusion,
        "Machines that pass inspections do not malfunction."
    );

    // Copular restrictor negates with "not" insertion, not do-support.
    let e = find("mixed-a", 8, "that-relative");
    assert_eq!(
        e.conclusion,
        "Plants that do not harm animals are not toxic."
    );

    // Proper-noun mention keeps its casing and takes third-singular.
    let e = find("mixed-a", 9, "such-as-subject");
    assert_eq!(
        e.premises,
        vec![
            "Cities attract tourists.".to_string(),
            "Paris is a city.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Paris attracts tourists.");

    // One sentence, two constructions, two independent examples.
    let e = find("mixed-b", 3, "such-as-subject");
    assert_eq!(
        e.premises,
        vec![
            "Beverages accompany desserts like cake.".to_string(),
            "Coffee is a beverage.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Coffee accompanies desserts like cake.");
    let e = find("mixed-b", 3, "like-object");
    assert_eq!(
        e.premises,
        vec![
            "Beverages such as coffee accompany desserts.".to_string(),
            "Cake is a dessert.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Beverages such as coffee accompany cake.");

    // Adjective on the category noun survives into the membership premise.
    let e = find("mixed-b", 4, "such-as-subject");
    assert_eq!(
        e.premises,
        vec![
            "Powerful storms destroy buildings.".to_string(),
            "Hurricanes are powerful storms.".to_string()
        ]
    );
    assert_eq!(e.conclusion, "Hurricanes destroy buildings.");

    let e = find("mixed-b", 5, "that-relative");
    assert_eq!(
        e.conclusion,
        "Dogs that do not annoy neighbors do not bark loudly."
    );

    let e = find("mixed-b", 6, "with-attribute");
    assert_eq!(
        e.conclusion,
        "Libraries that do not preserve manuscripts do not have archives."
    );
}

#[test]
fn every_emitted_example_is_lexically_conservative() {
    for file in ["data/fixtures/goldens.conllu", "data/fixtures/mixed.conllu"] {
        let (sentences, _) = parse_conllu_file(&repo_path(file)).unwrap();
        let (examples, _) = expand_corpus(&sentences);
        for (sentence, example) in &examples {
            let violations = conservatism_violations(example, sentence);
            assert!(
                violations.is_empty(),
                "{} introduced words {violations:?}",
                example.example_id
            );
        }
    }
}

#[test]
fn expansion_is_deterministic() {
    let (sentences, _) = parse_conllu_file(&repo_path("data/fixtures/mixed.conllu")).unwrap();
    let (a, skips_a) = expand_corpus(&sentences);
    let (b, skips_b) = expand_corpus(&sentences);
    let a: Vec<&DeductionExample> = a.iter().map(|(_, e)| e).collect();
    let b: Vec<&DeductionExample> = b.iter().map(|(_, e)| e).collect();
    assert_eq!(a, b);
    assert_eq!(skips_a, skips_b);
}
