//! The on-disk chain index against naive re-derivations: key generation vs
//! a hand-walked oracle, lookup soundness and completeness vs full
//! enumeration, byte-determinism across builds and worker counts, and the
//! guard rails around rebuilds and damaged files.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use depforge_core::conllu::{ingest_files, ParsedSentence};
use depforge_core::error::IndexError;
use depforge_core::index::{
    build_index, build_index_streamed, chain_keys, ChainKey, ChainStep, IndexOptions, IndexReader,
};
use depforge_core::synth::{random_tree, synth_range};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

/// Chain keys for one token, derived by walking the head chain directly:
/// one step per ancestor up to `max_depth`, the root step in both its
/// canonical "root" spelling and the stored deprel when they differ, and
/// every subset of lemmas blanked to the wildcard.
fn naive_chain_keys(s: &ParsedSentence, token_id: u32, max_depth: u32) -> BTreeSet<ChainKey> {
    let mut steps: Vec<(Vec<String>, String, String)> = Vec::new();
    let mut cur = token_id;
    loop {
        let t = s.token(cur).unwrap();
        let mut deprels = vec![];
        if t.head == 0 {
            deprels.push("root".to_string());
            if t.deprel != "root" {
                deprels.push(t.deprel.clone());
            }
        } else {
            deprels.push(t.deprel.clone());
        }
        steps.push((deprels, t.xpos.clone(), t.lemma.clone()));
        if t.head == 0 || steps.len() as u32 == max_depth {
            break;
        }
        cur = t.head;
    }
    let mut out = BTreeSet::new();
    for len in 1..=steps.len() {
        let mut partial: Vec<Vec<ChainStep>> = vec![Vec::new()];
        for (deprels, xpos, lemma) in &steps[..len] {
            let mut next = Vec::new();
            for base in &partial {
                for d in deprels {
                    for l in [Some(lemma.clone()), None] {
                        let mut k = base.clone();
                        k.push(ChainStep {
                            deprel: d.clone(),
                            xpos: xpos.clone(),
                            lemma: l,
                        });
                        next.push(k);
                    }
                }
            }
            partial = next;
        }
        for key_steps in partial {
            out.insert(ChainKey { steps: key_steps });
        }
    }
    out
}

#[test]
fn chain_keys_match_naive_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for round in 0..150 {
        let tree = random_tree(&mut rng, 1 + round % 15);
        for depth in [1u32, 2, 3] {
            for t in &tree.tokens {
                let got = chain_keys(&tree, t.id, depth).unwrap();
                let got_set: BTreeSet<ChainKey> = got.iter().cloned().collect();
                assert_eq!(
                    got_set.len(),
                    got.len(),
                    "duplicate keys for token {}",
                    t.id
                );
                let mut sorted = got.clone();
                sorted.sort();
                assert_eq!(got, sorted, "keys not sorted for token {}", t.id);
                assert_eq!(
                    got_set,
                    naive_chain_keys(&tree, t.id, depth),
                    "token {} depth {depth} of {:?}",
                    t.id,
                    tree.plain_text()
                );
            }
        }
    }
}

#[test]
fn chain_keys_reject_out_of_range_tokens() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tree = random_tree(&mut rng, 4);
    assert!(matches!(
        chain_keys(&tree, 0, 3),
        Err(IndexError::UnknownToken { token_id: 0 })
    ));
    assert!(matches!(
        chain_keys(&tree, 5, 3),
        Err(IndexError::UnknownToken { token_id: 5 })
    ));
}

fn fixture_corpus() -> depforge_core::Corpus {
    ingest_files(&[
        repo_path("data/fixtures/goldens.conllu"),
        repo_path("data/fixtures/mixed.conllu"),
    ])
    .unwrap()
    .0
}

#[test]
fn lookup_is_sound_and_complete_against_enumeration() {
    let corpus = fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 10,
        max_depth: 3,
        workers: 2,
    };
    build_index(&corpus, dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();

    // Expected postings per key, ordered like the reader: by chunk, then
    // doc id, then sentence index, then token.
    let mut expected: BTreeMap<ChainKey, Vec<(u32, String, u32, u32)>> = BTreeMap::new();
    for (pos, s) in corpus.sentences.iter().enumerate() {
        let chunk_id = (pos / opts.chunk_size) as u32;
        for t in &s.tokens {
            for key in naive_chain_keys(s, t.id, opts.max_depth) {
                expected.entry(key).or_default().push((
                    chunk_id,
                    s.doc_id.clone(),
                    s.sent_index,
                    t.id,
                ));
            }
        }
    }
    assert!(
        expected.len() > 300,
        "only {} distinct keys",
        expected.len()
    );
    for (key, postings) in &mut expected {
        postings.sort();
        let got: Vec<(u32, String, u32, u32)> = reader
            .lookup(key)
            .unwrap()
            .into_iter()
            .map(|p| (p.chunk_id, p.doc_id, p.sent_index, p.token_id))
            .collect();
        assert_eq!(&got, postings, "postings disagree for key {key}");
    }

    // A key that occurs nowhere resolves to nothing.
    let absent = ChainKey {
        steps: vec![ChainStep {
            deprel: "nsubj".to_string(),
            xpos: "NNS".to_string(),
            lemma: Some("unicorn".to_string()),
        }],
    };
    assert!(reader.lookup(&absent).unwrap().is_empty());
}

#[test]
fn builds_are_byte_identical_across_workers() {
    let seed = 99;
    let total = 1200;
    let opts_a = IndexOptions {
        chunk_size: 500,
        max_depth: 3,
        workers: 1,
    };
    let opts_b = IndexOptions {
        workers: 3,
        ..opts_a.clone()
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    build_index_streamed(total, |r| Ok(synth_range(seed, r)), dir_a.path(), &opts_a).unwrap();
    build_index_streamed(total, |r| Ok(synth_range(seed, r)), dir_b.path(), &opts_b).unwrap();
    for name in [
        "manifest.json",
        "chunk-000000.dpi",
        "chunk-000001.dpi",
        "chunk-000002.dpi",
    ] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between builds");
    }
}

#[test]
fn reader_enumerates_the_whole_corpus_in_order() {
    let corpus = fixture_corpus();
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 7,
        max_depth: 2,
        workers: 1,
    };
    build_index(&corpus, dir.path(), &opts).unwrap();
    let reader = IndexReader::open(dir.path()).unwrap();
    let stored: Vec<ParsedSentence> = reader.sentences().map(|r| r.unwrap()).collect();
    assert_eq!(stored, corpus.sentences);
    assert_eq!(reader.total_sentences(), corpus.sentences.len() as u64);
}

#[test]
fn rebuild_with_same_parameters_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 300,
        max_depth: 3,
        workers: 2,
    };
    build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let before = std::fs::read(dir.path().join("chunk-000001.dpi")).unwrap();
    build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let after = std::fs::read(dir.path().join("chunk-000001.dpi")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn rebuild_with_different_parameters_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 300,
        max_depth: 3,
        workers: 1,
    };
    build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let other = IndexOptions {
        max_depth: 2,
        ..opts
    };
    let err = build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &other).unwrap_err();
    assert!(matches!(err, IndexError::ChecksumMismatch { .. }), "{err}");
}

#[test]
fn rebuild_over_tampered_chunk_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 300,
        max_depth: 3,
        workers: 1,
    };
    build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let chunk = dir.path().join("chunk-000000.dpi");
    let mut bytes = std::fs::read(&chunk).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    std::fs::write(&chunk, &bytes).unwrap();
    let err = build_index_streamed(600, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap_err();
    assert!(matches!(err, IndexError::ChecksumMismatch { .. }), "{err}");
}

#[test]
fn damaged_header_is_rejected_on_open() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 300,
        max_depth: 3,
        workers: 1,
    };
    build_index_streamed(400, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let chunk = dir.path().join("chunk-000000.dpi");
    let mut bytes = std::fs::read(&chunk).unwrap();
    bytes[0] ^= 0xff;
    std::fs::write(&chunk, &bytes).unwrap();
    let err = IndexReader::open(dir.path()).unwrap_err();
    assert!(
        matches!(err, IndexError::CorruptChunk { chunk_id: 0, .. }),
        "{err}"
    );
}

#[test]
fn future_format_versions_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let opts = IndexOptions {
        chunk_size: 300,
        max_depth: 3,
        workers: 1,
    };
    build_index_streamed(400, |r| Ok(synth_range(5, r)), dir.path(), &opts).unwrap();
    let manifest_path = dir.path().join("manifest.json");
    let text = std::fs::read_to_string(&manifest_path).unwrap();
    let patched = text.replace("\"format_version\": 1", "\"format_version\": 99");
    assert_ne!(text, patched, "manifest layout changed; fix the patch");
    std::fs::write(&manifest_path, patched).unwrap();
    let err = IndexReader::open(dir.path()).unwrap_err();
    assert!(
        matches!(
            err,
            IndexError::UnsupportedVersion {
                found: 99,
                supported: 1
            }
        ),
        "{err}"
    );
}
