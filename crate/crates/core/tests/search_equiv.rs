//! Index-accelerated search returns exactly what a full scan of the stored
//! sentences returns, for every shipped pattern, for planless patterns that
//! force the fallback, and for randomly generated patterns.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use depforge_core::conllu::ingest_files;
use depforge_core::index::{build_index, build_index_streamed, IndexOptions, IndexReader};
use depforge_core::pattern::{load_pattern_file, plan_key, scan_index, search, DepPattern};
use depforge_core::synth::{random_pattern_source, rare_pattern_source, synth_range};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

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

type HitKey = (String, u32, Vec<(u32, u32)>, u32);

fn hit_set(hits: &depforge_core::pattern::SearchHits) -> BTreeSet<HitKey> {
    hits.sentences
        .iter()
        .flat_map(|sm| {
            sm.bindings
                .iter()
                .map(|b| (b.doc_id.clone(), b.sent_index, b.bindings.clone(), b.anchor))
        })
        .collect()
}

fn assert_search_equivalent(reader: &IndexReader, pattern: &DepPattern) {
    let via_index = search(reader, pattern).unwrap();
    let via_scan = scan_index(reader, pattern).unwrap();
    assert_eq!(
        hit_set(&via_index),
        hit_set(&via_scan),
        "index search and scan disagree on {} ({})",
        pattern.pattern_id,
        pattern.raw_text
    );
    assert_eq!(via_index.match_count(), via_scan.match_count());
    if !via_index.full_scan {
        // A real plan was used; it may only have narrowed the scan.
        assert!(via_index.plan.is_some());
        assert!(
            via_index.candidates >= via_index.sentences.len() as u64,
            "candidate count below matched-sentence count"
        );
        assert!(
            via_index.candidates <= reader.total_sentences(),
            "more candidates than sentences"
        );
    }
}

#[test]
fn shipped_patterns_agree_on_synthetic_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 1000,
        max_depth: 3,
        workers: 2,
    };
    build_index_streamed(3000, |r| Ok(synth_range(21, r)), dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();

    let mut matched_anything = 0;
    for p in shipped_patterns() {
        assert_search_equivalent(&reader, &p);
        if search(&reader, &p).unwrap().match_count() > 0 {
            matched_anything += 1;
        }
    }
    assert!(
        matched_anything >= 2,
        "synthetic corpus matched too few shipped patterns"
    );

    // The planted needle is findable and the plan actually prunes.
    let needle = DepPattern::parse("needle", &rare_pattern_source()).unwrap();
    let hits = search(&reader, &needle).unwrap();
    assert_search_equivalent(&reader, &needle);
    assert_eq!(hits.sentences.len(), 3, "one needle per thousand sentences");
    assert!(!hits.full_scan);
    assert!(
        hits.candidates <= 10,
        "needle plan should touch a handful of sentences, touched {}",
        hits.candidates
    );
}

#[test]
fn shipped_patterns_agree_on_fixture_corpus() {
    let (corpus, _) = ingest_files(&[
        repo_path("data/fixtures/goldens.conllu"),
        repo_path("data/fixtures/mixed.conllu"),
    ])
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 8,
        max_depth: 3,
        workers: 1,
    };
    build_index(&corpus, dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();
    for p in shipped_patterns() {
        assert_search_equivalent(&reader, &p);
    }
    let such_as = shipped_patterns()
        .into_iter()
        .find(|p| p.pattern_id == "such-as-subject")
        .unwrap();
    let hits = search(&reader, &such_as).unwrap();
    // goldens 0/1, mixed-a 4 (pre-filter) and 9, mixed-b 3 and 4.
    assert_eq!(hits.match_count(), 6);
}

#[test]
fn planless_patterns_fall_back_to_full_scan() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 500,
        max_depth: 3,
        workers: 1,
    };
    build_index_streamed(1000, |r| Ok(synth_range(33, r)), dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();

    // A bare lemma node has no (arc, pos) step anywhere, so no chain key
    // can be planned and search must degrade to scanning.
    let bare = DepPattern::parse("bare", "`tea'$0").unwrap();
    assert!(plan_key(&bare, 3).is_none());
    let hits = search(&reader, &bare).unwrap();
    assert!(hits.full_scan);
    assert!(hits.plan.is_none());
    assert_eq!(
        hit_set(&hits),
        hit_set(&scan_index(&reader, &bare).unwrap())
    );
    assert!(
        hits.match_count() > 0,
        "lemma `tea' occurs in the synthetic vocabulary"
    );
}

#[test]
fn random_patterns_agree() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 400,
        max_depth: 3,
        workers: 2,
    };
    build_index_streamed(800, |r| Ok(synth_range(55, r)), dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..60 {
        let p = DepPattern::parse(&format!("rnd-{i}"), &random_pattern_source(&mut rng)).unwrap();
        assert_search_equivalent(&reader, &p);
    }
}
