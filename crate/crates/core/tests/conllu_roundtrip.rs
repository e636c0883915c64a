//! Ingestion over the shipped fixtures, plus a serialize/parse round-trip
//! property on random trees.

use depforge_core::conllu::{
    ingest_files, parse_conllu, parse_conllu_file, resolve_corpus_paths, to_conllu, validate_tree,
};
use depforge_core::synth::random_tree;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/fixtures")
        .join(name)
}

#[test]
fn goldens_fixture_parses_clean() {
    let (sentences, report) = parse_conllu_file(&fixture("goldens.conllu")).unwrap();
    assert_eq!(sentences.len(), 5);
    assert_eq!(report.accepted, 5);
    assert!(report.skipped.is_empty());
    for s in &sentences {
        assert_eq!(s.doc_id, "goldens");
        validate_tree(s).unwrap();
    }
    assert_eq!(
        sentences.iter().map(|s| s.sent_index).collect::<Vec<_>>(),
        vec![0, 1, 2, 3, 4]
    );
    let teas = sentences[0].token(5).unwrap();
    assert_eq!(teas.form, "teas");
    assert_eq!(teas.lemma, "tea");
    assert_eq!(teas.xpos, "NNS");
    assert_eq!(teas.deprel, "nsubj");
    assert_eq!(teas.head, 10);
    assert_eq!(sentences[0].root_id, 10);
    assert_eq!(
        sentences[1].plain_text(),
        "Microorganisms such as Staphylococcus epidermis colonize the skin surface ."
    );
}

#[test]
fn mixed_fixture_has_two_documents() {
    let (sentences, report) = parse_conllu_file(&fixture("mixed.conllu")).unwrap();
    assert_eq!(sentences.len(), 18);
    assert!(report.skipped.is_empty());
    let a: Vec<u32> = sentences
        .iter()
        .filter(|s| s.doc_id == "mixed-a")
        .map(|s| s.sent_index)
        .collect();
    let b: Vec<u32> = sentences
        .iter()
        .filter(|s| s.doc_id == "mixed-b")
        .map(|s| s.sent_index)
        .collect();
    assert_eq!(a, (0..10).collect::<Vec<_>>());
    assert_eq!(b, (0..8).collect::<Vec<_>>());
}

#[test]
fn ingest_records_checksums_per_file() {
    let (corpus, report) =
        ingest_files(&[fixture("goldens.conllu"), fixture("mixed.conllu")]).unwrap();
    assert_eq!(corpus.sentences.len(), 23);
    assert_eq!(report.accepted, 23);
    assert_eq!(corpus.source_manifest.len(), 2);
    for sf in &corpus.source_manifest {
        assert_eq!(sf.sha256.len(), 64);
        assert!(sf.sha256.chars().all(|c| c.is_ascii_hexdigit()));
    }
    assert_ne!(
        corpus.source_manifest[0].sha256,
        corpus.source_manifest[1].sha256
    );
}

#[test]
fn directories_expand_to_sorted_conllu_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("b.conllu"), "").unwrap();
    std::fs::write(dir.path().join("a.conllu"), "").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "").unwrap();
    let paths = resolve_corpus_paths(&[dir.path().to_path_buf()]).unwrap();
    let names: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["a.conllu", "b.conllu"]);
}

#[test]
fn crlf_input_accepted() {
    let input = "1\tHi\thi\t_\tUH\t_\t0\troot\t_\t_\r\n\r\n";
    let (sents, _) = parse_conllu(input.as_bytes(), "mem", "doc").unwrap();
    assert_eq!(sents.len(), 1);
    assert_eq!(sents[0].tokens[0].form, "Hi");
}

proptest! {
    /// Serializing any batch of valid trees and re-parsing yields the same
    /// trees (with per-document indices reassigned in order).
    #[test]
    fn serialize_parse_round_trip(seed in any::<u64>(), count in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut originals = Vec::new();
        for i in 0..count {
            let n = 1 + (seed as usize + i * 7) % 12;
            let mut t = random_tree(&mut rng, n);
            t.sent_index = i as u32;
            originals.push(t);
        }
        let text = to_conllu(&originals);
        let (parsed, report) = parse_conllu(text.as_bytes(), "mem", "fallback").unwrap();
        prop_assert_eq!(report.accepted as usize, originals.len());
        prop_assert_eq!(&parsed, &originals);
    }
}
