//! The `depforge` binary end to end: stage commands, artifact shapes, the
//! `run` = chained-stages guarantee, exit codes, and output modes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .join(rel)
}

fn depforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn build_index(dir: &Path) {
    assert_ok(&depforge(&[
        "index",
        "--corpus",
        repo_path("data/fixtures/goldens.conllu").to_str().unwrap(),
        "--corpus",
        repo_path("data/fixtures/mixed.conllu").to_str().unwrap(),
        "--index-dir",
        dir.to_str().unwrap(),
        "--chunk-size",
        "8",
    ]));
}

fn fixture_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("config.toml");
    let text = format!(
        r#"
[corpus]
inputs = [{goldens:?}, {mixed:?}]

[index]
dir = {index:?}
chunk_size = 8

[patterns]
files = [{sub:?}, {contra:?}]

[expand]
stoplist = {stop:?}

[output]
dir = {out:?}

{extra}
"#,
        goldens = repo_path("data/fixtures/goldens.conllu"),
        mixed = repo_path("data/fixtures/mixed.conllu"),
        index = dir.join("index"),
        sub = repo_path("patterns/substitution.pat"),
        contra = repo_path("patterns/contraposition.pat"),
        stop = repo_path("data/stoplist.txt"),
        out = dir.join("out"),
    );
    std::fs::write(&path, text).unwrap();
    path
}

fn count_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn version_names_the_index_format_it_speaks() {
    let out = depforge(&["--version"]);
    assert_ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    let expected = format!("index format v{}", depforge_core::INDEX_FORMAT_VERSION);
    assert!(text.contains(&expected), "{text}");
}

#[test]
fn stages_write_the_documented_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let index_dir = tmp.path().join("index");
    let out_dir = tmp.path().join("out");
    build_index(&index_dir);
    assert!(index_dir.join("manifest.json").exists());
    assert!(index_dir.join("chunk-000000.dpi").exists());
    assert!(index_dir.join("ingest-skips.jsonl").exists());
    assert!(index_dir.join("ingest-stats.json").exists());

    assert_ok(&depforge(&[
        "expand",
        "--index-dir",
        index_dir.to_str().unwrap(),
        "--patterns",
        repo_path("patterns/substitution.pat").to_str().unwrap(),
        "--patterns",
        repo_path("patterns/contraposition.pat").to_str().unwrap(),
        "--stoplist",
        repo_path("data/stoplist.txt").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]));
    assert_eq!(count_lines(&out_dir.join("examples.jsonl")), 18);
    assert_eq!(count_lines(&out_dir.join("expansion-skips.jsonl")), 3);
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("expand-stats.json")).unwrap())
            .unwrap();
    assert_eq!(stats["matches"], 21);
    assert_eq!(stats["examples"], 18);
    assert_eq!(stats["by_op"]["substitution"], 11);
    assert_eq!(stats["by_op"]["contraposition"], 7);

    assert_ok(&depforge(&[
        "augment",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--provider",
        "mock",
        "--copies",
        "2",
        "--seed",
        "7",
    ]));
    assert_eq!(count_lines(&out_dir.join("augmented.jsonl")), 54);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("augment-report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["paraphrase_calls"], 58);
    assert_eq!(report["seeded"], true);

    assert_ok(&depforge(&[
        "emit",
        "--out-dir",
        out_dir.to_str().unwrap(),
        "--index-dir",
        index_dir.to_str().unwrap(),
        "--seed",
        "42",
        "--dev-ratio",
        "0.2",
    ]));
    let train = count_lines(&out_dir.join("train.jsonl"));
    let dev = count_lines(&out_dir.join("dev.jsonl"));
    assert_eq!(train + dev, 54);
    assert_eq!(dev % 3, 0, "paraphrase groups must stay whole");

    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("stats.json")).unwrap())
            .unwrap();
    assert_eq!(stats["ingest"]["accepted"], 23);
    assert_eq!(stats["expand"]["examples"], 18);
    assert_eq!(stats["augment"]["examples_out"], 54);
    assert_eq!(stats["emit"]["examples"], 54);
}

#[test]
fn run_writes_the_same_bytes_as_chained_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let staged = tmp.path().join("staged");
    let single = tmp.path().join("single");
    std::fs::create_dir_all(&staged).unwrap();
    std::fs::create_dir_all(&single).unwrap();
    let extra = "[augment]\nprovider = \"mock\"\ncopies = 2\nseed = 7\n\n[emit]\nseed = 42\ndev_ratio = 0.2\n";
    let staged_config = fixture_config(&staged, extra);
    let single_config = fixture_config(&single, extra);

    for cmd in ["index", "expand", "augment", "emit"] {
        assert_ok(&depforge(&[
            cmd,
            "--config",
            staged_config.to_str().unwrap(),
        ]));
    }
    assert_ok(&depforge(&[
        "run",
        "--config",
        single_config.to_str().unwrap(),
    ]));

    for name in [
        "examples.jsonl",
        "expansion-skips.jsonl",
        "expand-stats.json",
        "augmented.jsonl",
        "augment-report.json",
        "train.jsonl",
        "dev.jsonl",
        "stats.json",
    ] {
        let a = std::fs::read(staged.join("out").join(name)).unwrap();
        let b = std::fs::read(single.join("out").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between run and chained stages");
    }
    // The index directories themselves agree too.
    for name in ["manifest.json", "chunk-000000.dpi"] {
        let a = std::fs::read(staged.join("index").join(name)).unwrap();
        let b = std::fs::read(single.join("index").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs");
    }
}

#[test]
fn run_without_provider_skips_augmentation() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture_config(tmp.path(), "[emit]\nseed = 1\n");
    assert_ok(&depforge(&["run", "--config", config.to_str().unwrap()]));
    let out = tmp.path().join("out");
    assert!(!out.join("augmented.jsonl").exists());
    assert_eq!(count_lines(&out.join("train.jsonl")), 18);
    let stats: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    assert!(stats.get("augment").is_none());
}

#[test]
fn search_emits_machine_readable_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let index_dir = tmp.path().join("index");
    build_index(&index_dir);
    let out = depforge(&[
        "search",
        "--index-dir",
        index_dir.to_str().unwrap(),
        "--patterns",
        repo_path("patterns/substitution.pat").to_str().unwrap(),
        "--pattern",
        "such-as-subject",
        "--json",
    ]);
    assert_ok(&out);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|l| l["pattern_id"] == "such-as-subject"));
    let golden = &lines[0];
    assert_eq!(golden["doc_id"], "goldens");
    assert_eq!(golden["sent_index"], 0);
    assert_eq!(golden["anchor"], 10);
    assert_eq!(
        golden["bindings"],
        serde_json::json!([[0, 5], [1, 9], [2, 10]])
    );
}

#[test]
fn search_color_modes_change_only_the_rendering() {
    let tmp = tempfile::tempdir().unwrap();
    let index_dir = tmp.path().join("index");
    build_index(&index_dir);
    let patterns = repo_path("patterns/substitution.pat");
    let base = [
        "search",
        "--index-dir",
        index_dir.to_str().unwrap(),
        "--patterns",
        patterns.to_str().unwrap(),
        "--pattern",
        "such-as-subject",
    ];
    let always = depforge(&[&base[..], &["--color", "always"]].concat());
    assert_ok(&always);
    let painted = String::from_utf8(always.stdout).unwrap();
    assert!(painted.contains("\x1b[32m"), "capture 0 painted green");
    assert!(painted.contains("\x1b[34m"), "capture 1 painted blue");
    assert!(painted.contains("\x1b[35m"), "capture 2 painted magenta");

    let never = depforge(&[&base[..], &["--color", "never"]].concat());
    assert_ok(&never);
    let plain = String::from_utf8(never.stdout).unwrap();
    assert!(!plain.contains('\x1b'));
    assert!(plain.contains("[$0 teas]"), "{plain}");

    // stdout is a pipe here, so auto must behave like never.
    let auto = depforge(&base);
    assert_eq!(String::from_utf8(auto.stdout).unwrap(), plain);
}

#[test]
fn exit_codes_separate_usage_data_and_provider_failures() {
    // Usage: a required setting is missing.
    let out = depforge(&["emit"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));

    // Usage: unknown flag (clap's own error, remapped from its default 2).
    let out = depforge(&["index", "--frobnicate"]);
    assert_eq!(code(&out), 1);

    // Usage: malformed provider spec.
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("examples.jsonl"), "").unwrap();
    let out = depforge(&[
        "augment",
        "--out-dir",
        tmp.path().to_str().unwrap(),
        "--provider",
        "carrier-pigeon",
    ]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));

    // Data: not an index directory.
    let out = depforge(&[
        "search",
        "--index-dir",
        tmp.path().join("nope").to_str().unwrap(),
        "--patterns",
        repo_path("patterns/substitution.pat").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));

    // Data: pattern file with a syntax error.
    let bad = tmp.path().join("bad.pat");
    std::fs::write(&bad, "oops: nsubj:NNS$0 <\n").unwrap();
    let index_dir = tmp.path().join("index");
    build_index(&index_dir);
    let out = depforge(&[
        "search",
        "--index-dir",
        index_dir.to_str().unwrap(),
        "--patterns",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));

    // Provider: nothing listens on the port.
    std::fs::write(
        tmp.path().join("examples.jsonl"),
        r#"{"example_id":"t:0:p:1","op":"substitution","premises":["One."],"conclusion":"Two.","provenance":{"doc_id":"t","sent_index":0,"pattern_id":"p","anchor":1}}"#,
    )
    .unwrap();
    let out = depforge(&[
        "augment",
        "--out-dir",
        tmp.path().to_str().unwrap(),
        "--provider",
        "http://127.0.0.1:1",
        "--retries",
        "0",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_problems_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("broken.toml");

    std::fs::write(&config, "[corpus\ninputs = []").unwrap();
    let out = depforge(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1);

    std::fs::write(&config, "[corpus]\ninputs = []\nfrobs = 3\n").unwrap();
    let out = depforge(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(code(&out), 1, "unknown keys are rejected, not ignored");

    let out = depforge(&[
        "run",
        "--config",
        tmp.path().join("absent.toml").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn json_errors_flag_reports_machine_readable_failures() {
    let out = depforge(&["--json-errors", "emit"]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "exactly one line: {stderr:?}");
    let parsed: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(parsed["code"], 1);
    assert!(parsed["error"].as_str().unwrap().contains("output dir"));
}

#[test]
fn seed_flag_controls_both_augment_and_emit() {
    let tmp = tempfile::tempdir().unwrap();
    let extra = "[augment]\nprovider = \"mock\"\ncopies = 1\n";
    let config = fixture_config(tmp.path(), extra);
    let train = tmp.path().join("out/train.jsonl");

    assert_ok(&depforge(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "5",
    ]));
    let first = std::fs::read(&train).unwrap();
    assert_ok(&depforge(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "5",
    ]));
    assert_eq!(
        std::fs::read(&train).unwrap(),
        first,
        "same seed, same bytes"
    );

    assert_ok(&depforge(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "6",
    ]));
    assert_ne!(
        std::fs::read(&train).unwrap(),
        first,
        "new seed, new dataset"
    );
}
